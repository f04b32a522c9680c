"""convograph: hybrid open-domain dialogue engine.

Rule-based state-graph topic dialogues routed by statistical intent
detection, with entity/concept knowledge lookup and templated response
generation. See `convograph.engine.Engine` for the assembled pipeline and
`convograph.cli` / `convograph.service` for the operator surfaces.
"""

from .analysis import (
    Annotations,
    Annotator,
    AsrGateConfig,
    AsrHypothesis,
    asr_gate,
    extract_focus,
    pos_tag,
    profanity_scan,
    spot_keywords,
    tokenize,
    truecase,
)
from .context import Context, SnapshotStore
from .dialogue import (
    DialogueGraph,
    DialogueStepper,
    RoutingDecision,
    detect_topic_request,
    lint_graph,
    load_graph,
    route_turn,
    select_topic_by_entity,
)
from .engine import Engine, EngineConfig, TurnResult
from .entity import Entity
from .intent import (
    EmbeddingTable,
    LabeledExample,
    TfidfConfig,
    classify_nearest,
    cosine,
    fit_tfidf,
    predict_logreg,
    sentence_embedding,
    tfidf_vector,
    train_logreg,
)
from .knowledge import (
    ConceptIndex,
    FactStore,
    fuzzy_label_lookup,
    ingest_concepts,
    levenshtein,
)
from .nlg import ResponseTemplate, load_templates, render

__version__ = "0.1.0"

__all__ = [
    "Annotations", "Annotator", "AsrGateConfig", "AsrHypothesis",
    "asr_gate", "extract_focus", "pos_tag", "profanity_scan",
    "spot_keywords", "tokenize", "truecase",
    "Context", "SnapshotStore",
    "DialogueGraph", "DialogueStepper", "RoutingDecision",
    "detect_topic_request", "lint_graph", "load_graph", "route_turn",
    "select_topic_by_entity",
    "Engine", "EngineConfig", "TurnResult",
    "Entity",
    "EmbeddingTable", "LabeledExample", "TfidfConfig", "classify_nearest",
    "cosine", "fit_tfidf", "predict_logreg", "sentence_embedding",
    "tfidf_vector", "train_logreg",
    "ConceptIndex", "FactStore", "fuzzy_label_lookup", "ingest_concepts",
    "levenshtein",
    "ResponseTemplate", "load_templates", "render",
]
