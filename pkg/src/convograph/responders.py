"""Response producers that do not walk a state graph.

Personal-info and opinion questions are answered from handcrafted
prompt/response pairs via TF-IDF nearest prompt; chit-chat retrieves the
response of the nearest corpus message by averaged-embedding similarity;
news questions match stored question/answer pairs; factoid questions
resolve a focus phrase against the fuzzy label index and return a stored
fact.
"""

from __future__ import annotations

from dataclasses import dataclass

from .analysis import Annotations
from .errors import IngestError
from .tsv import tsv_rows
from .intent import (
    EmbeddingTable,
    LabeledExample,
    TfidfModel,
    cosine,
    feature_tokens,
    fit_tfidf,
    sentence_embedding,
    tfidf_vector,
)
from .knowledge import FactStore, LabelEntry, fuzzy_label_lookup
from .rng import counter_choice

DEFAULT_HANDCRAFTED_THRESHOLD = 0.3
DEFAULT_NEWS_QA_THRESHOLD = 0.4

DEFAULT_GENERIC_RESPONSES = (
    "Interesting, tell me more.",
    "I see. What else is on your mind?",
    "Let's talk about something you like.",
)


@dataclass(frozen=True)
class QaPair:
    question: str
    answer: str
    source: str | None = None


@dataclass(frozen=True)
class HandcraftedEntry:
    category: str  # personal | opinion
    prompt: str
    response: str


class HandcraftedResponder:
    """Nearest handcrafted prompt by TF-IDF cosine, with a floor."""

    def __init__(self, entries: list[HandcraftedEntry],
                 threshold: float = DEFAULT_HANDCRAFTED_THRESHOLD):
        if not entries:
            raise ValueError("handcrafted responder needs at least one entry")
        self.entries = entries
        self.threshold = threshold
        corpus = [LabeledExample(text=e.prompt, label=str(i)) for i, e in enumerate(entries)]
        self.model: TfidfModel = fit_tfidf(corpus)

    def answer(self, text: str) -> str | None:
        query = tfidf_vector(self.model, text)
        if not query:
            return None
        best_i, best_sim = None, 0.0
        for vec, label in self.model.training_vectors:
            sim = cosine(vec, query)
            if sim > best_sim:
                best_i, best_sim = int(label), sim
        if best_i is None or best_sim < self.threshold:
            return None
        return self.entries[best_i].response


def answer_handcrafted(
    entries: list[HandcraftedEntry], text: str,
    threshold: float = DEFAULT_HANDCRAFTED_THRESHOLD,
) -> str | None:
    return HandcraftedResponder(entries, threshold).answer(text)


class ChitchatResponder:
    """Retrieval chit-chat: nearest corpus message by sentence embedding.

    Ties within 1e-6 are broken by a seeded uniform choice; a query with no
    known tokens draws from the generic-response list instead.
    """

    def __init__(
        self,
        pairs: list[tuple[str, str]],
        table: EmbeddingTable,
        generic_responses: tuple[str, ...] = DEFAULT_GENERIC_RESPONSES,
    ):
        if not pairs:
            raise ValueError("chit-chat corpus is empty")
        if not generic_responses:
            raise ValueError("generic response list is empty")
        self.pairs = pairs
        self.table = table
        self.generic_responses = tuple(generic_responses)
        self._vectors = [sentence_embedding(table, feature_tokens(msg)) for msg, _ in pairs]

    def reply(self, text: str, seed: int) -> str:
        query = sentence_embedding(self.table, feature_tokens(text))
        if not query.any():
            pick = counter_choice(seed, 0, len(self.generic_responses))
            return self.generic_responses[pick]
        sims = [cosine(vec, query) for vec in self._vectors]
        best = max(sims)
        tied = [i for i, s in enumerate(sims) if best - s <= 1e-6]
        pick = tied[counter_choice(seed, 0, len(tied))]
        return self.pairs[pick][1]


class QuestionMatcher:
    """Stored-question matching for the news dialogue: nearest question by
    TF-IDF cosine, answer returned when similar enough."""

    def __init__(self, pairs: list[QaPair], threshold: float = DEFAULT_NEWS_QA_THRESHOLD):
        if not pairs:
            raise ValueError("question matcher needs at least one pair")
        self.pairs = pairs
        self.threshold = threshold
        corpus = [LabeledExample(text=p.question, label=str(i)) for i, p in enumerate(pairs)]
        self.model = fit_tfidf(corpus)

    def answer(self, question: str) -> str | None:
        query = tfidf_vector(self.model, question)
        if not query:
            return None
        best_i, best_sim = None, 0.0
        for vec, label in self.model.training_vectors:
            sim = cosine(vec, query)
            if sim > best_sim:
                best_i, best_sim = int(label), sim
        if best_i is None or best_sim < self.threshold:
            return None
        return self.pairs[best_i].answer


def match_question(pairs: list[QaPair], question: str,
                   threshold: float = DEFAULT_NEWS_QA_THRESHOLD) -> str | None:
    return QuestionMatcher(pairs, threshold).answer(question)


def factoid_answer(
    fact_store: FactStore,
    labels: list[LabelEntry],
    annotations: Annotations,
) -> str | None:
    """Answer a factoid question from local knowledge.

    The first focus phrase that resolves through the fuzzy label index
    selects the entity; facts matching a detected keyword topic are
    preferred, otherwise the first stored fact wins. None when no focus
    phrase resolves.
    """
    keyword_topics = [topic for topic, _ in annotations.topic_keywords]
    for phrase in annotations.focus_phrases:
        resolved = fuzzy_label_lookup(labels, phrase)
        if resolved is None:
            continue
        canonical, _ = resolved
        facts = fact_store.get_facts(canonical)
        if not facts:
            continue
        for topic in keyword_topics:
            topical = [f for f in facts if f.topic == topic]
            if topical:
                return topical[0].text
        return facts[0].text
    return None


def load_handcrafted(path) -> list[HandcraftedEntry]:
    """category<TAB>prompt<TAB>response rows."""
    entries = []
    for line_no, parts in tsv_rows(path, 3):
        category, prompt, response = parts
        if category not in ("personal", "opinion"):
            raise IngestError(path, line_no, f"unknown category {category!r}")
        if not prompt.strip() or not response.strip():
            raise IngestError(path, line_no, "empty prompt or response")
        entries.append(HandcraftedEntry(category=category, prompt=prompt, response=response))
    return entries


def load_chitchat_pairs(path) -> list[tuple[str, str]]:
    """message<TAB>response rows."""
    pairs = []
    for line_no, parts in tsv_rows(path, 2):
        if not parts[0].strip() or not parts[1].strip():
            raise IngestError(path, line_no, "empty message or response")
        pairs.append((parts[0], parts[1]))
    return pairs


def load_qa_pairs(path) -> list[QaPair]:
    """question<TAB>answer[<TAB>source] rows."""
    pairs = []
    for line_no, parts in tsv_rows(path, 2, 3):
        if not parts[0].strip() or not parts[1].strip():
            raise IngestError(path, line_no, "empty question or answer")
        pairs.append(QaPair(question=parts[0], answer=parts[1],
                            source=parts[2] if len(parts) == 3 else None))
    return pairs


def load_lines(path) -> list[str]:
    """Plain line-per-entry file (generic responses)."""
    out = []
    for _, parts in tsv_rows(path, 1):
        out.append(parts[0])
    return out

