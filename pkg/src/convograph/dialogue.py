"""Dialogue management: turn routing and state-graph execution.

Two levels, mirroring the engine's control flow:

* the top-level router picks which response module handles the turn
  (structured topic dialogue, chit-chat, question answering, personal info,
  opinion) or short-circuits on an explicit topic request, an ongoing
  dialogue, low ASR confidence or profanity -- in exactly that order;
* the topic-level manager walks one topic's state graph: states carry
  actions (respond from a template, remember into context, fetch facts),
  transitions carry guards, and a per-graph set of switching intents lets
  the user grab the initiative from any state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .analysis import Annotations
from .context import Context
from .entity import Entity
from .errors import ConvographError, CorruptedSessionError, GraphLoadError
from .intent import EmbeddingTable, cosine, sentence_embedding
from .knowledge import FactStore
from .nlg import ResponseTemplate, parse_templates, render, substitute
from .errors import RenderError
from .yamldoc import load_document

MODULES = (
    "structured_topic",
    "chitchat",
    "question_answering",
    "personal_info",
    "opinion",
    "repeat_request",
    "refuse_profanity",
)

GUARD_KINDS = ("intent", "entity_concept", "keyword", "context_has", "yes", "no", "default")

DEFAULT_SWITCH_THRESHOLD = 0.75
DEFAULT_CLASSIFIER_FLOOR = 0.5
DEFAULT_TRIGGER_PHRASES = (
    "let's chat about",
    "lets chat about",
    "let's talk about",
    "lets talk about",
    "chat about",
    "talk about",
    "switch to",
    "change the topic to",
    "change topic to",
)

_MAX_ACTION_HOPS = 8


@dataclass(frozen=True)
class Transition:
    guard: str
    guard_arg: str | None
    target: str

    def describe(self) -> str:
        if self.guard_arg is None:
            return f"{self.guard} -> {self.target}"
        return f"{self.guard}({self.guard_arg}) -> {self.target}"


@dataclass(frozen=True)
class Action:
    kind: str  # respond | remember | fetch_facts | noop
    args: tuple[str, ...] = ()

    def describe(self) -> str:
        return self.kind if not self.args else f"{self.kind}({', '.join(self.args)})"


@dataclass
class State:
    id: str
    action: Action
    transitions: list[Transition] = field(default_factory=list)


@dataclass
class DialogueGraph:
    topic: str
    states: dict[str, State]
    initial: str
    switch_intents: dict[str, str] = field(default_factory=dict)
    topic_concepts: set[str] = field(default_factory=set)
    keywords: set[str] = field(default_factory=set)
    intent_examples: dict[str, list[str]] = field(default_factory=dict)
    templates: dict[str, ResponseTemplate] = field(default_factory=dict)


# --------------------------------------------------------------------------
# Graph loading
# --------------------------------------------------------------------------

_TOP_KEYS = {"topic", "keywords", "concepts", "initial", "states",
             "switch_intents", "intent_examples", "templates"}
_STATE_KEYS = {"id", "action", "transitions"}


def _parse_arrow(raw, what: str, source: str) -> tuple[str, str]:
    raw = _yaml_str(raw)
    if "->" not in raw:
        raise GraphLoadError(f"{source}: {what} must look like 'x -> y', got {raw!r}")
    left, right = raw.split("->", 1)
    return left.strip(), right.strip()


def _yaml_str(value) -> str:
    # YAML 1.1 parses bare yes/no as booleans; dialogue authors mean the guards.
    if value is True:
        return "yes"
    if value is False:
        return "no"
    return str(value)


def _parse_guard(raw: str, source: str) -> tuple[str, str | None]:
    raw = raw.strip()
    if "(" in raw:
        if not raw.endswith(")"):
            raise GraphLoadError(f"{source}: malformed guard {raw!r}")
        kind, arg = raw[:-1].split("(", 1)
        kind, arg = kind.strip(), arg.strip()
    else:
        kind, arg = raw, None
    if kind not in GUARD_KINDS:
        raise GraphLoadError(f"{source}: unknown guard {kind!r}")
    if kind in ("yes", "no", "default"):
        if arg is not None:
            raise GraphLoadError(f"{source}: guard {kind!r} takes no argument")
    elif not arg:
        raise GraphLoadError(f"{source}: guard {kind!r} needs an argument")
    return kind, arg


def _parse_action(raw, source: str) -> Action:
    raw = _yaml_str(raw).strip()
    if raw == "noop":
        return Action(kind="noop")
    if "(" not in raw or not raw.endswith(")"):
        raise GraphLoadError(f"{source}: malformed action {raw!r}")
    kind, inner = raw[:-1].split("(", 1)
    kind = kind.strip()
    args = tuple(a.strip() for a in inner.split(","))
    if kind == "respond":
        if len(args) != 1 or not args[0]:
            raise GraphLoadError(f"{source}: respond takes one template id")
    elif kind == "remember":
        if len(args) < 3:
            raise GraphLoadError(f"{source}: remember takes (scope, key, value)")
        # value expressions may contain commas; re-join the tail
        args = (args[0], args[1], ", ".join(args[2:]))
        if args[0] not in ("turn", "session", "long_term"):
            raise GraphLoadError(f"{source}: unknown scope {args[0]!r} in remember")
    elif kind == "fetch_facts":
        if len(args) != 2:
            raise GraphLoadError(f"{source}: fetch_facts takes (entity, topic)")
    else:
        raise GraphLoadError(f"{source}: unknown action {kind!r}")
    return Action(kind=kind, args=args)


def parse_graph(doc: dict, source: str = "<doc>") -> DialogueGraph:
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise GraphLoadError(f"{source}: unknown keys {sorted(unknown)}")
    for key in ("topic", "initial", "states"):
        if key not in doc:
            raise GraphLoadError(f"{source}: missing required key {key!r}")
    topic = str(doc["topic"])
    states: dict[str, State] = {}
    for raw_state in doc["states"]:
        if not isinstance(raw_state, dict):
            raise GraphLoadError(f"{source}: each state must be a mapping")
        unknown = set(raw_state) - _STATE_KEYS
        if unknown:
            raise GraphLoadError(f"{source}: state has unknown keys {sorted(unknown)}")
        if "id" not in raw_state or "action" not in raw_state:
            raise GraphLoadError(f"{source}: states need 'id' and 'action'")
        state_id = _yaml_str(raw_state["id"])
        if state_id in states:
            raise GraphLoadError(f"{source}: duplicate state id {state_id!r}")
        transitions = []
        for raw_tr in raw_state.get("transitions") or []:
            guard_raw, target = _parse_arrow(raw_tr, "transition", source)
            kind, arg = _parse_guard(guard_raw, source)
            transitions.append(Transition(guard=kind, guard_arg=arg, target=target))
        for i, tr in enumerate(transitions):
            if tr.guard == "default" and i != len(transitions) - 1:
                raise GraphLoadError(
                    f"{source}: state {state_id!r}: default transition must be last"
                )
        if sum(1 for tr in transitions if tr.guard == "default") > 1:
            raise GraphLoadError(f"{source}: state {state_id!r}: multiple default transitions")
        states[state_id] = State(
            id=state_id,
            action=_parse_action(raw_state["action"], f"{source}: state {state_id!r}"),
            transitions=transitions,
        )

    initial = _yaml_str(doc["initial"])
    if initial not in states:
        raise GraphLoadError(f"{source}: initial state {initial!r} is not defined")
    for state in states.values():
        for tr in state.transitions:
            if tr.target not in states:
                raise GraphLoadError(
                    f"{source}: state {state.id!r}: unknown target {tr.target!r}"
                )

    switch_intents = {}
    for raw_sw in doc.get("switch_intents") or []:
        intent_id, target = _parse_arrow(raw_sw, "switch intent", source)
        if target not in states:
            raise GraphLoadError(f"{source}: switch intent {intent_id!r}: unknown target {target!r}")
        switch_intents[intent_id] = target

    intent_examples = {}
    for intent_id, examples in (doc.get("intent_examples") or {}).items():
        if not isinstance(examples, list) or not examples:
            raise GraphLoadError(f"{source}: intent_examples[{intent_id!r}] needs a list")
        intent_examples[str(intent_id)] = [str(e) for e in examples]

    return DialogueGraph(
        topic=topic,
        states=states,
        initial=initial,
        switch_intents=switch_intents,
        topic_concepts={str(c) for c in doc.get("concepts") or []},
        keywords={_yaml_str(k).lower() for k in doc.get("keywords") or []},
        intent_examples=intent_examples,
        templates=parse_templates(doc, source=source),
    )


def load_graph(path) -> DialogueGraph:
    try:
        doc = load_document(path)
    except ValueError as exc:
        raise GraphLoadError(str(exc)) from exc
    return parse_graph(doc, source=str(path))


def lint_graph(graph: DialogueGraph, extra_templates: set[str] | frozenset = frozenset()) -> list[str]:
    """Maintenance findings: unreachable states, dead ends, missing templates."""
    findings = []
    reachable = {graph.initial}
    frontier = [graph.initial]
    targets_of = {
        sid: [tr.target for tr in state.transitions] for sid, state in graph.states.items()
    }
    switch_targets = set(graph.switch_intents.values())
    while frontier:
        sid = frontier.pop()
        for target in targets_of[sid]:
            if target not in reachable:
                reachable.add(target)
                frontier.append(target)
    for target in switch_targets:
        if target not in reachable:
            reachable.add(target)
            frontier.append(target)
            while frontier:
                sid = frontier.pop()
                for t in targets_of[sid]:
                    if t not in reachable:
                        reachable.add(t)
                        frontier.append(t)
    for sid in graph.states:
        if sid not in reachable:
            findings.append(f"unreachable state {sid!r}")
    known_templates = set(graph.templates) | set(extra_templates)
    for state in graph.states.values():
        if not state.transitions and state.action.kind != "respond":
            findings.append(f"state {state.id!r} has no outgoing transition and a non-terminal action")
        if state.action.kind == "respond" and state.action.args[0] not in known_templates:
            findings.append(f"state {state.id!r} references undefined template {state.action.args[0]!r}")
    return findings


# --------------------------------------------------------------------------
# Elementary yes/no capture
# --------------------------------------------------------------------------

YES_WORDS = frozenset(
    "yes yeah yep yup sure ok okay definitely absolutely certainly right correct indeed please gladly".split()
)
NO_WORDS = frozenset("no nope nah never negative not don't dont".split())
_YES_PHRASES = ("of course", "why not", "you bet", "sounds good", "go ahead", "i do", "i would")
_NO_PHRASES = ("not really", "no way", "i don't think so", "of course not", "not at all", "i'd rather not")


def classify_yes_no(tokens: list[str], table: EmbeddingTable | None = None) -> str | None:
    """Small reusable yes/no capture: phrase and word lists first, averaged
    embedding similarity to the word lists as a fallback. None when undecided."""
    lowered = [t.lower() for t in tokens]
    text = " ".join(lowered)
    for phrase in _NO_PHRASES:
        if f" {phrase} " in f" {text} ":
            return "no"
    for phrase in _YES_PHRASES:
        if f" {phrase} " in f" {text} ":
            return "yes"
    has_yes = any(t in YES_WORDS for t in lowered)
    has_no = any(t in NO_WORDS for t in lowered)
    if has_no:
        return "no"  # negation dominates ("no thanks", "not sure")
    if has_yes:
        return "yes"
    if table is not None:
        query = sentence_embedding(table, lowered)
        if query.any():
            yes_proto = sentence_embedding(table, sorted(YES_WORDS))
            no_proto = sentence_embedding(table, sorted(NO_WORDS))
            sim_yes = cosine(query, yes_proto)
            sim_no = cosine(query, no_proto)
            if max(sim_yes, sim_no) >= 0.6 and abs(sim_yes - sim_no) > 1e-9:
                return "yes" if sim_yes > sim_no else "no"
    return None


# --------------------------------------------------------------------------
# Top-level routing
# --------------------------------------------------------------------------

@dataclass
class RoutingDecision:
    module: str
    topic: str | None = None
    intent: str | None = None
    fresh_topic: bool = False
    trace: list[str] = field(default_factory=list)


def detect_topic_request(
    annotations: Annotations,
    trigger_phrases: tuple[str, ...] = DEFAULT_TRIGGER_PHRASES,
) -> str | None:
    """Explicit requests like "let's chat about movies": a trigger phrase
    plus keywords of exactly one topic. Ambiguous (two or more topics) or
    keyword-only utterances yield None."""
    lowered = [t.lower() for t in annotations.tokens]
    padded = " " + " ".join(lowered) + " "
    if not any(f" {phrase} " in padded for phrase in trigger_phrases):
        return None
    topics = []
    for topic, _ in annotations.topic_keywords:
        if topic not in topics:
            topics.append(topic)
    if len(topics) == 1:
        return topics[0]
    return None


def select_topic_by_entity(
    entities: list[Entity], graphs: dict[str, DialogueGraph]
) -> str | None:
    """Topic whose concept list accumulates the highest entity popularity.

    Per topic, the popularities of every (entity, concept) pair whose
    concept the topic accepts are summed; the argmax over positive sums
    wins, ties broken by topic id ascending.
    """
    best_topic, best_sum = None, 0
    for topic in sorted(graphs):
        accepted = graphs[topic].topic_concepts
        total = 0
        for ent in entities:
            for concept, popularity in ent.concepts:
                if concept in accepted:
                    total += popularity
        if total > best_sum:
            best_topic, best_sum = topic, total
    return best_topic


def route_turn(
    ctx: Context,
    annotations: Annotations,
    classifier,
    graphs: dict[str, DialogueGraph],
    *,
    floor: float = DEFAULT_CLASSIFIER_FLOOR,
    trigger_phrases: tuple[str, ...] = DEFAULT_TRIGGER_PHRASES,
) -> RoutingDecision:
    """Pick the response module for this turn.

    Gate order is fixed: explicit topic request, then ongoing dialogue
    (which bypasses the confidence gate), then the ASR confidence gate,
    then the profanity gate, then the top-level intent classifier. The
    trace records each gate as it is evaluated and stops at the gate that
    decided.
    """
    trace = []

    requested = detect_topic_request(annotations, trigger_phrases)
    if requested is not None and requested in graphs:
        trace.append(f"topic_request:{requested}")
        return RoutingDecision(
            module="structured_topic", topic=requested, fresh_topic=True, trace=trace
        )
    trace.append("topic_request:none")

    if ctx.dialogue_cursor is not None:
        topic, state = ctx.dialogue_cursor
        if topic in graphs:
            trace.append(f"ongoing:{topic}/{state}")
            return RoutingDecision(module="structured_topic", topic=topic, trace=trace)
    trace.append("ongoing:none")

    if not annotations.confident:
        trace.append("confidence:low")
        return RoutingDecision(module="repeat_request", trace=trace)
    trace.append("confidence:ok")

    if annotations.profane:
        trace.append("profanity:matched")
        return RoutingDecision(module="refuse_profanity", trace=trace)
    trace.append("profanity:clean")

    label, score = classifier.classify(annotations.text, annotations.pos_tags)
    trace.append(f"classifier:{label}:{score:.3f}")
    module, topic = _split_label(label)
    if label is None or score < floor or module not in MODULES:
        trace.append("floor:chitchat")
        return RoutingDecision(module="chitchat", intent=label, trace=trace)

    if module == "structured_topic":
        by_entity = select_topic_by_entity(annotations.entities, graphs)
        if by_entity is not None:
            trace.append(f"entity_topic:{by_entity}")
            topic = by_entity
        else:
            trace.append("entity_topic:none")
        if topic is None or topic not in graphs:
            trace.append("floor:chitchat")
            return RoutingDecision(module="chitchat", intent=label, trace=trace)
        fresh = ctx.dialogue_cursor is None or ctx.dialogue_cursor[0] != topic
        return RoutingDecision(
            module="structured_topic", topic=topic, intent=label, fresh_topic=fresh, trace=trace
        )
    return RoutingDecision(module=module, intent=label, trace=trace)


def _split_label(label: str | None) -> tuple[str | None, str | None]:
    if label is None:
        return None, None
    if "." in label:
        module, topic = label.split(".", 1)
        return module, topic
    return label, None


# --------------------------------------------------------------------------
# Topic-level stepping
# --------------------------------------------------------------------------

@dataclass
class StepOutcome:
    responses: list[str] = field(default_factory=list)
    executed: list[str] = field(default_factory=list)  # "state:action" trace
    state: str | None = None
    switched_intent: str | None = None
    no_transition: bool = False


class DialogueStepper:
    """Executes one user turn against one topic graph.

    The per-graph switching intents are detected with an embedding
    nearest-example classifier over the graph's `intent_examples`; the same
    classifier resolves `intent(...)` transition guards.
    """

    def __init__(
        self,
        graph: DialogueGraph,
        templates: dict[str, ResponseTemplate],
        fact_store: FactStore | None = None,
        embedding_table: EmbeddingTable | None = None,
        switch_threshold: float = DEFAULT_SWITCH_THRESHOLD,
    ):
        self.graph = graph
        self.templates = dict(templates)
        self.templates.update(graph.templates)
        self.fact_store = fact_store
        self.table = embedding_table
        self.switch_threshold = switch_threshold
        self._intent_examples = []
        if embedding_table is not None:
            for intent_id, examples in graph.intent_examples.items():
                for example in examples:
                    vec = sentence_embedding(embedding_table, example.lower().split())
                    self._intent_examples.append((vec, intent_id))

    def detect_intent(self, annotations: Annotations) -> tuple[str | None, float]:
        if not self._intent_examples or self.table is None:
            return None, 0.0
        query = sentence_embedding(self.table, [t.lower() for t in annotations.tokens])
        if not query.any():
            return None, 0.0
        best_label, best_sim = None, -1.0
        for vec, label in self._intent_examples:
            sim = cosine(vec, query)
            if sim > best_sim:
                best_label, best_sim = label, sim
        return best_label, best_sim

    def step(
        self,
        ctx: Context,
        annotations: Annotations,
        seed: int,
        fresh: bool = False,
    ) -> StepOutcome:
        """Advance the dialogue for one utterance.

        Fresh entry executes the initial state's action; otherwise switching
        intents are checked first, then the current state's transitions in
        declared order. Non-responding actions chain forward until a respond
        action produces the reply.
        """
        graph = self.graph
        outcome = StepOutcome()
        intent_label, intent_sim = self.detect_intent(annotations)

        if fresh or ctx.dialogue_cursor is None or ctx.dialogue_cursor[0] != graph.topic:
            current = None
            target = graph.initial
        else:
            _, state_id = ctx.dialogue_cursor
            if state_id not in graph.states:
                ctx.dialogue_cursor = (graph.topic, graph.initial)
                raise CorruptedSessionError(
                    f"session {ctx.session_id!r}: cursor state {state_id!r} missing "
                    f"from topic {graph.topic!r}; cursor reset"
                )
            current = graph.states[state_id]
            if (
                intent_label in graph.switch_intents
                and intent_sim >= self.switch_threshold
            ):
                target = graph.switch_intents[intent_label]
                outcome.switched_intent = intent_label
            else:
                transition = self._pick_transition(current, ctx, annotations, intent_label, intent_sim)
                if transition is None:
                    outcome.state = current.id
                    outcome.no_transition = True
                    return outcome
                target = transition.target

        hops = 0
        while True:
            state = graph.states[target]
            self._execute(state, ctx, annotations, seed, outcome)
            outcome.state = state.id
            if state.action.kind == "respond":
                break
            hops += 1
            if hops >= _MAX_ACTION_HOPS:
                outcome.no_transition = not outcome.responses
                break
            transition = self._pick_transition(state, ctx, annotations, intent_label, intent_sim)
            if transition is None:
                outcome.no_transition = not outcome.responses
                break
            target = transition.target

        ctx.dialogue_cursor = (graph.topic, outcome.state)
        memory = ctx.topic_memory(graph.topic)
        memory.last_state = outcome.state
        if annotations.entities:
            memory.last_entity = annotations.entities[0]
        return outcome

    def _pick_transition(
        self,
        state: State,
        ctx: Context,
        annotations: Annotations,
        intent_label: str | None,
        intent_sim: float,
    ) -> Transition | None:
        for tr in state.transitions:
            if self._guard_holds(tr, ctx, annotations, intent_label, intent_sim):
                return tr
        return None

    def _guard_holds(
        self,
        tr: Transition,
        ctx: Context,
        annotations: Annotations,
        intent_label: str | None,
        intent_sim: float,
    ) -> bool:
        if tr.guard == "default":
            return True
        if tr.guard == "intent":
            return intent_label == tr.guard_arg and intent_sim >= self.switch_threshold
        if tr.guard == "entity_concept":
            return any(
                concept == tr.guard_arg
                for ent in annotations.entities
                for concept, _ in ent.concepts
            )
        if tr.guard == "keyword":
            return (self.graph.topic, tr.guard_arg.lower()) in annotations.topic_keywords
        if tr.guard == "context_has":
            return ctx.lookup(tr.guard_arg) is not None
        if tr.guard in ("yes", "no"):
            return classify_yes_no(annotations.tokens, self.table) == tr.guard
        raise ConvographError(f"unknown guard {tr.guard!r}")

    def _execute(
        self,
        state: State,
        ctx: Context,
        annotations: Annotations,
        seed: int,
        outcome: StepOutcome,
    ) -> None:
        action = state.action
        outcome.executed.append(f"{state.id}:{action.describe()}")
        if action.kind == "noop":
            return
        if action.kind == "respond":
            template = self.templates.get(action.args[0])
            if template is None:
                raise ConvographError(
                    f"state {state.id!r} references undefined template {action.args[0]!r}"
                )
            outcome.responses.append(render(template, ctx, seed))
            return
        if action.kind == "remember":
            scope, key, value_expr = action.args
            try:
                ctx.remember(scope, key, substitute(value_expr, ctx))
            except RenderError:
                outcome.executed.append(f"{state.id}:remember-skipped({key})")
            return
        if action.kind == "fetch_facts":
            entity_expr, topic = action.args
            if self.fact_store is None:
                return
            try:
                entity = substitute(entity_expr, ctx)
            except RenderError:
                outcome.executed.append(f"{state.id}:fetch-skipped")
                return
            facts = self.fact_store.get_facts(entity, topic)
            if facts:
                ctx.remember("turn", "fact", facts[0].text)
                ctx.remember("turn", "facts", [f.text for f in facts])
            return
        raise ConvographError(f"unknown action {action.kind!r}")


def load_graph_directory(path) -> dict[str, DialogueGraph]:
    """Load every *.yaml graph in a directory, keyed by topic."""
    graphs: dict[str, DialogueGraph] = {}
    for file in sorted(Path(path).glob("*.yaml")):
        graph = load_graph(file)
        if graph.topic in graphs:
            raise GraphLoadError(f"{file}: duplicate topic {graph.topic!r}")
        graphs[graph.topic] = graph
    return graphs
