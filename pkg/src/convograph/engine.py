"""The assembled turn pipeline and its configuration.

One Engine owns the immutable fixtures (lexicons, knowledge indices,
dialogue graphs, templates, classifiers, responder corpora) and processes
turns for many sessions: analysis, routing, response production, response
realization, checkpoint, event log. Sessions are independent; a session's
turns must be processed sequentially (the service layer enforces this with
per-session locks).
"""

from __future__ import annotations

import os
import uuid
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import responders as rsp
from .analysis import (
    DEFAULT_CLOSED_CLASS,
    Annotator,
    AsrGateConfig,
    AsrHypothesis,
    CasingLexicon,
    hypothesis_from_text,
    load_closed_class,
    load_topic_keywords,
    load_wordlist,
)
from .context import Context, SnapshotStore
from .dialogue import (
    DEFAULT_CLASSIFIER_FLOOR,
    DEFAULT_SWITCH_THRESHOLD,
    DialogueStepper,
    load_graph_directory,
    route_turn,
)
from .errors import ConvographError, CorruptedSessionError, PersistenceError
from .intent import (
    EmbeddingClassifier,
    EmbeddingTable,
    LabeledExample,
    LogRegClassifier,
    TfidfClassifier,
    load_intent_corpus,
)
from .knowledge import ingest_concepts, load_facts, load_labels
from .nlg import load_templates, render
from .rng import derive_seed
from .sessionlog import RatingEvent, SessionLog, TurnEvent, compute_metrics, now
from .yamldoc import load_document

DEFAULT_FIXTURES_DIR = Path(__file__).parent / "fixtures"

CLASSIFIER_CHOICES = ("tfidf", "embedding", "logreg")

_ENV_PREFIX = "CONVOGRAPH_"


@dataclass
class EngineConfig:
    fixtures_dir: Path = DEFAULT_FIXTURES_DIR
    data_dir: Path = Path("./convograph-data")
    host: str = "127.0.0.1"
    port: int = 8640
    asr_threshold: float = 0.7
    classifier: str = "logreg"
    classifier_floor: float = DEFAULT_CLASSIFIER_FLOOR
    switch_intent_threshold: float = DEFAULT_SWITCH_THRESHOLD
    handcrafted_threshold: float = rsp.DEFAULT_HANDCRAFTED_THRESHOLD
    news_qa_threshold: float = rsp.DEFAULT_NEWS_QA_THRESHOLD
    seed: int = 7061
    static_dir: Path | None = None
    # embedding files above this size are loaded through a vocabulary filter
    # built from the corpora, so a full pre-trained table stays affordable
    embedding_filter_bytes: int = 64 * 1024 * 1024

    def __post_init__(self):
        self.fixtures_dir = Path(self.fixtures_dir)
        self.data_dir = Path(self.data_dir)
        if self.static_dir is not None:
            self.static_dir = Path(self.static_dir)
        if self.classifier not in CLASSIFIER_CHOICES:
            raise ValueError(f"classifier must be one of {CLASSIFIER_CHOICES}")

    @classmethod
    def load(cls, path=None, env=None) -> "EngineConfig":
        """Config file (YAML mapping) plus environment variable overrides.

        Recognized variables: CONVOGRAPH_FIXTURES_DIR, CONVOGRAPH_DATA_DIR,
        CONVOGRAPH_HOST, CONVOGRAPH_PORT, CONVOGRAPH_ASR_THRESHOLD,
        CONVOGRAPH_CLASSIFIER, CONVOGRAPH_SEED, CONVOGRAPH_STATIC_DIR.
        """
        env = os.environ if env is None else env
        values: dict = {}
        if path is not None:
            doc = load_document(path)
            unknown = set(doc) - {f.name for f in cls.__dataclass_fields__.values()}
            if unknown:
                raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
            values.update(doc)
        for key, cast in (
            ("fixtures_dir", Path), ("data_dir", Path), ("host", str),
            ("port", int), ("asr_threshold", float), ("classifier", str),
            ("classifier_floor", float), ("seed", int), ("static_dir", Path),
        ):
            raw = env.get(_ENV_PREFIX + key.upper())
            if raw is not None:
                values[key] = cast(raw)
        return cls(**values)


@dataclass
class TurnResult:
    response: str
    module: str
    topic: str | None
    state: str | None
    intent: str | None
    confident: bool
    profane: bool
    turn_counter: int
    trace: list[str] = field(default_factory=list)

    def trace_dict(self) -> dict:
        return {
            "module": self.module,
            "topic": self.topic,
            "state": self.state,
            "intent": self.intent,
            "confident": self.confident,
            "profane": self.profane,
        }


class Engine:
    """Loads fixtures once, then turns utterances into responses."""

    def __init__(self, config: EngineConfig | None = None):
        self.config = config or EngineConfig()
        fixtures = self.config.fixtures_dir
        if not fixtures.is_dir():
            raise ConvographError(f"fixtures directory not found: {fixtures}")
        self.base_seed = self.config.seed

        self.casing = _load_or(CasingLexicon.load, fixtures / "lexicon" / "casing.tsv",
                               CasingLexicon())
        self.blacklist = _load_or(load_wordlist, fixtures / "lexicon" / "blacklist.txt", set())
        self.closed_class = _load_or(
            load_closed_class, fixtures / "lexicon" / "closed_class.tsv",
            dict(DEFAULT_CLOSED_CLASS))
        self.concepts = _load_or(ingest_concepts, fixtures / "knowledge" / "concepts.tsv", None)
        self.labels = _load_or(load_labels, fixtures / "knowledge" / "labels.tsv", [])
        self.facts = _load_or(load_facts, fixtures / "knowledge" / "facts.tsv", None)

        self.graphs = load_graph_directory(fixtures / "graphs")
        topic_keywords = {t: set(g.keywords) for t, g in self.graphs.items()}
        extra = _load_or(load_topic_keywords, fixtures / "lexicon" / "keywords.tsv", {})
        for topic, phrases in extra.items():
            topic_keywords.setdefault(topic, set()).update(phrases)
        self.topic_keywords = topic_keywords

        self.system_templates = _load_or(
            load_templates, fixtures / "templates" / "system.yaml", {})
        self.templates = dict(self.system_templates)
        for graph in self.graphs.values():
            for template_id, template in graph.templates.items():
                if template_id in self.templates:
                    raise ConvographError(f"template {template_id!r} defined more than once")
                self.templates[template_id] = template

        corpus_path = fixtures / "intents" / "toplevel.tsv"
        if not corpus_path.is_file():
            raise ConvographError(f"intent corpus not found: {corpus_path}")
        self.intent_corpus = load_intent_corpus(corpus_path)

        self.handcrafted = _load_or(
            rsp.load_handcrafted, fixtures / "responders" / "handcrafted.tsv", [])
        self.personal = _make_handcrafted(self.handcrafted, "personal",
                                          self.config.handcrafted_threshold)
        self.opinion = _make_handcrafted(self.handcrafted, "opinion",
                                         self.config.handcrafted_threshold)
        chit_pairs = _load_or(rsp.load_chitchat_pairs,
                              fixtures / "responders" / "chitchat.tsv", [])
        if not chit_pairs:
            raise ConvographError(
                f"chit-chat corpus not found or empty: {fixtures / 'responders' / 'chitchat.tsv'}")
        generic = _load_or(rsp.load_lines, fixtures / "responders" / "generic.txt", [])
        qa_pairs = _load_or(rsp.load_qa_pairs, fixtures / "responders" / "news_qa.tsv", [])

        embeddings_path = fixtures / "embeddings" / "vectors.txt"
        if not embeddings_path.is_file():
            raise ConvographError(f"embedding table not found: {embeddings_path}")
        vocab_filter = None
        if embeddings_path.stat().st_size > self.config.embedding_filter_bytes:
            vocab_filter = self._embedding_vocabulary(chit_pairs)
        self.embeddings = EmbeddingTable.load(embeddings_path, vocabulary=vocab_filter)

        recognizer = self.concepts.recognize if self.concepts else None
        self.annotator = Annotator(
            casing=self.casing,
            closed_class=self.closed_class,
            blacklist=self.blacklist,
            topic_keywords=self.topic_keywords,
            entity_recognizer=recognizer,
            gate=AsrGateConfig(threshold=self.config.asr_threshold),
        )

        tagged = [
            replace(ex, pos_tags=tuple(self._tag(ex.text))) for ex in self.intent_corpus
        ]
        self.classifier = self._build_classifier(self.config.classifier, tagged)

        self.steppers = {
            topic: DialogueStepper(
                graph,
                templates=self.templates,
                fact_store=self.facts,
                embedding_table=self.embeddings,
                switch_threshold=self.config.switch_intent_threshold,
            )
            for topic, graph in self.graphs.items()
        }

        self.chitchat = rsp.ChitchatResponder(
            chit_pairs, self.embeddings,
            generic_responses=tuple(generic) or rsp.DEFAULT_GENERIC_RESPONSES,
        )
        self.news_qa = rsp.QuestionMatcher(qa_pairs, self.config.news_qa_threshold) if qa_pairs else None

        self.store = SnapshotStore(self.config.data_dir)
        self.log = SessionLog(self.config.data_dir)

    # -- session management -------------------------------------------------

    def create_session(self, user_id: str | None = None) -> str:
        session_id = uuid.uuid4().hex
        ctx = Context(session_id=session_id, user_id=user_id)
        if user_id:
            ctx.long_term_scope.update(self.store.load_long_term(user_id))
        self.store.checkpoint(ctx)
        return session_id

    def restore_session(self, session_id: str) -> Context:
        return self.store.restore(session_id)

    def session_exists(self, session_id: str) -> bool:
        return self.store.exists(session_id)

    # -- the turn pipeline --------------------------------------------------

    def process_turn(
        self,
        ctx: Context,
        text: str | None = None,
        hypotheses: list[AsrHypothesis] | None = None,
        user_id: str | None = None,
    ) -> TurnResult:
        """Run one utterance through analysis, routing, response production,
        realization and checkpointing."""
        ts = now()
        if hypotheses is None:
            if not text:
                raise ValueError("either text or ASR hypotheses are required")
            hypotheses = [hypothesis_from_text(text)]
        if user_id and not ctx.user_id:
            ctx.user_id = user_id
            ctx.long_term_scope.update(self.store.load_long_term(user_id))

        ctx.begin_turn()
        ann = self.annotator.annotate(hypotheses)
        raw_text = ann.text
        ctx.remember("turn", "text", raw_text)
        if ann.focus_phrases:
            ctx.remember("turn", "focus", ann.focus_phrases[0])
        if ann.entities:
            ctx.remember("turn", "entity", ann.entities[0])

        seed = derive_seed(self.base_seed, ctx.turn_counter)
        decision = route_turn(
            ctx, ann, self.classifier, self.graphs,
            floor=self.config.classifier_floor,
        )
        trace = list(decision.trace)
        module, topic, state = decision.module, decision.topic, None

        if module == "structured_topic":
            response, state, module, topic = self._run_dialogue(
                ctx, ann, decision, seed, trace)
        elif module == "repeat_request":
            response = self._system_response("repeat_request", ctx, seed)
        elif module == "refuse_profanity":
            response = self._system_response("refuse_profanity", ctx, seed)
        elif module == "question_answering":
            response = self._answer_question(ctx, ann, seed, trace)
        elif module == "personal_info":
            response = self._answer_handcrafted(self.personal, raw_text, seed, trace)
        elif module == "opinion":
            response = self._answer_handcrafted(self.opinion, raw_text, seed, trace)
        else:
            module = "chitchat"
            response = self.chitchat.reply(raw_text, seed)

        try:
            self.store.checkpoint(ctx)
        except PersistenceError as exc:
            trace.append(f"persistence_error:{exc}")

        result = TurnResult(
            response=response,
            module=module,
            topic=topic if module == "structured_topic" else None,
            state=state,
            intent=decision.intent,
            confident=ann.confident,
            profane=ann.profane,
            turn_counter=ctx.turn_counter,
            trace=trace,
        )
        try:
            self.log.append_turn(ctx.session_id, TurnEvent(
                ts=ts,
                turn_counter=result.turn_counter,
                module=result.module,
                topic=result.topic,
                state=result.state,
                intent=result.intent,
                confident=result.confident,
                profane=result.profane,
                text=raw_text,
                response=response,
                trace=tuple(trace),
            ))
        except OSError as exc:
            trace.append(f"log_error:{exc}")
        return result

    def _run_dialogue(self, ctx, ann, decision, seed, trace):
        topic = decision.topic
        stepper = self.steppers[topic]
        if not ann.entities:
            remembered = ctx.topic_memory(topic).last_entity
            if remembered is not None:
                ctx.remember("turn", "entity", remembered)
        try:
            outcome = stepper.step(ctx, ann, seed=seed, fresh=decision.fresh_topic)
        except CorruptedSessionError as exc:
            trace.append(f"corrupted_cursor:{exc}")
            outcome = stepper.step(ctx, ann, seed=seed, fresh=True)
        except ConvographError as exc:
            trace.append(f"dialogue_error:{exc}")
            trace.append("fallback:chitchat")
            return self.chitchat.reply(ann.text, seed), None, "chitchat", None
        trace.extend(f"step:{step}" for step in outcome.executed)
        if outcome.switched_intent:
            trace.append(f"switch_intent:{outcome.switched_intent}")
        if outcome.no_transition or not outcome.responses:
            # The graph has nothing more to say; hand control back to the
            # top-level DM and answer with chit-chat this turn.
            ctx.dialogue_cursor = None
            trace.append("fallback:chitchat")
            return self.chitchat.reply(ann.text, seed), outcome.state, "chitchat", None
        return " ".join(outcome.responses), outcome.state, "structured_topic", topic

    def _system_response(self, template_id: str, ctx, seed) -> str:
        template = self.templates.get(template_id)
        if template is None:
            raise ConvographError(f"system template {template_id!r} is not defined")
        return render(template, ctx, seed)

    def _answer_question(self, ctx, ann, seed, trace) -> str:
        if self.facts is not None and self.labels:
            answer = rsp.factoid_answer(self.facts, self.labels, ann)
            if answer is not None:
                trace.append("qa:factoid")
                return answer
        if self.news_qa is not None:
            answer = self.news_qa.answer(ann.text)
            if answer is not None:
                trace.append("qa:news_match")
                return answer
        trace.append("fallback:chitchat")
        return self.chitchat.reply(ann.text, seed)

    def _answer_handcrafted(self, responder, text, seed, trace) -> str:
        if responder is not None:
            answer = responder.answer(text)
            if answer is not None:
                return answer
        trace.append("fallback:chitchat")
        return self.chitchat.reply(text, seed)

    # -- ratings and metrics ------------------------------------------------

    def submit_rating(self, session_id: str, stars: int) -> RatingEvent:
        if not isinstance(stars, int) or isinstance(stars, bool) or not 1 <= stars <= 5:
            raise ValueError("stars must be an integer between 1 and 5")
        event = RatingEvent(
            ts=now(), stars=stars,
            topics_visited=tuple(self.log.topics_visited(session_id)),
        )
        self.log.append_rating(session_id, event)
        return event

    def metrics(self):
        return compute_metrics(self.log.read_all())

    # -- helpers -------------------------------------------------------------

    def _tag(self, text: str) -> list[str]:
        from .analysis import pos_tag, tokenize, truecase

        tokens = tokenize(text)
        return pos_tag(truecase(tokens, self.casing), self.casing, self.closed_class)

    def _embedding_vocabulary(self, chit_pairs) -> set[str]:
        """Tokens the engine can ever embed: corpora, graph intent examples,
        keywords and the yes/no word lists."""
        from .analysis import tokenize
        from .dialogue import NO_WORDS, YES_WORDS

        vocab: set[str] = set(YES_WORDS) | set(NO_WORDS)
        for ex in self.intent_corpus:
            vocab.update(t.lower() for t in tokenize(ex.text))
        for message, _ in chit_pairs:
            vocab.update(t.lower() for t in tokenize(message))
        for graph in self.graphs.values():
            for phrase in graph.keywords:
                vocab.update(phrase.split())
            for examples in graph.intent_examples.values():
                for example in examples:
                    vocab.update(t.lower() for t in tokenize(example))
        return vocab

    def _build_classifier(self, kind: str, corpus: list[LabeledExample]):
        if kind == "tfidf":
            return TfidfClassifier.fit(corpus, fallback_label="chitchat")
        if kind == "embedding":
            return EmbeddingClassifier(self.embeddings, corpus, fallback_label="chitchat")
        if kind == "logreg":
            return LogRegClassifier.fit(corpus)
        raise ValueError(f"unknown classifier {kind!r}")


def _load_or(loader, path, default):
    if Path(path).is_file():
        return loader(path)
    return default


def _make_handcrafted(entries, category, threshold):
    subset = [e for e in entries if e.category == category]
    if not subset:
        return None
    return rsp.HandcraftedResponder(subset, threshold)
