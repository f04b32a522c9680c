"""Intent detection: three interchangeable classifiers behind one interface.

The three methods are (1) TF-IDF nearest training example by cosine, (2)
averaged word-embedding nearest example, and (3) multinomial logistic
regression over word and POS n-gram indicator features. Both dialogue
manager levels consume them through `classify(text, pos_tags) ->
(label, score)`, so a fourth method can be added without touching the DM.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Protocol

import numpy as np

from .analysis import tokenize
from .errors import IngestError


@dataclass(frozen=True)
class LabeledExample:
    text: str
    label: str
    pos_tags: tuple[str, ...] | None = None


def load_intent_corpus(path) -> list[LabeledExample]:
    """label<TAB>text rows, one example per line."""
    path = Path(path)
    examples = []
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise IngestError(path, line_no, "expected label<TAB>text")
            examples.append(LabeledExample(text=parts[1], label=parts[0]))
    return examples


def feature_tokens(text: str) -> list[str]:
    """Lowercased word tokens for feature extraction; punctuation dropped."""
    return [t.lower() for t in tokenize(text) if any(ch.isalnum() for ch in t)]


def ngrams(tokens: list[str], n_min: int, n_max: int) -> list[str]:
    out = []
    for n in range(n_min, n_max + 1):
        out.extend(" ".join(tokens[i:i + n]) for i in range(len(tokens) - n + 1))
    return out


# --------------------------------------------------------------------------
# TF-IDF
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TfidfConfig:
    ngram_range: tuple[int, int] = (1, 2)
    max_df: float = 0.9
    min_df: float = 0.0
    norm: str = "l1"
    smooth_idf: bool = False
    sublinear_tf: bool = True


@dataclass
class TfidfModel:
    config: TfidfConfig
    vocabulary: dict[str, int]
    idf: dict[str, float]
    training_vectors: list[tuple[dict[str, float], str]] = field(default_factory=list)


def fit_tfidf(
    corpus: list[LabeledExample], config: TfidfConfig | None = None
) -> TfidfModel:
    """Fit vocabulary and IDF on the corpus and store one vector per example.

    idf(t) = ln(N/df(t)) + 1 (or the smoothed variant), tf is sublinear
    (1 + ln count) when configured, and each document vector is normalized
    to unit l1 (or l2) norm. N-grams present in more than `max_df` of the
    documents are excluded from the vocabulary.
    """
    if not corpus:
        raise ValueError("corpus must be non-empty")
    config = config or TfidfConfig()
    n_docs = len(corpus)
    doc_grams = [set(ngrams(feature_tokens(ex.text), *config.ngram_range)) for ex in corpus]
    df = Counter(g for grams in doc_grams for g in grams)
    vocabulary: dict[str, int] = {}
    idf: dict[str, float] = {}
    for gram in sorted(df):
        ratio = df[gram] / n_docs
        if ratio > config.max_df or ratio < config.min_df:
            continue
        vocabulary[gram] = len(vocabulary)
        if config.smooth_idf:
            idf[gram] = math.log((1 + n_docs) / (1 + df[gram])) + 1.0
        else:
            idf[gram] = math.log(n_docs / df[gram]) + 1.0
    model = TfidfModel(config=config, vocabulary=vocabulary, idf=idf)
    model.training_vectors = [(tfidf_vector(model, ex.text), ex.label) for ex in corpus]
    return model


def tfidf_vector(model: TfidfModel, text: str) -> dict[str, float]:
    """Vectorize text with the fitted vocabulary; OOV n-grams are ignored."""
    cfg = model.config
    counts = Counter(
        g for g in ngrams(feature_tokens(text), *cfg.ngram_range) if g in model.vocabulary
    )
    vec = {}
    for gram, count in counts.items():
        tf = 1.0 + math.log(count) if cfg.sublinear_tf else float(count)
        vec[gram] = tf * model.idf[gram]
    if not vec:
        return vec
    if cfg.norm == "l1":
        total = math.fsum(abs(w) for w in vec.values())
    elif cfg.norm == "l2":
        total = math.sqrt(math.fsum(w * w for w in vec.values()))
    else:
        total = 0.0
    if total > 0:
        vec = {g: w / total for g, w in vec.items()}
    return vec


# --------------------------------------------------------------------------
# Vector similarity
# --------------------------------------------------------------------------

def cosine(a, b) -> float:
    """Cosine similarity; 0.0 when either vector has zero norm.

    Accepts sparse mappings (feature -> weight) or dense sequences; dense
    inputs must share a dimension.
    """
    if isinstance(a, Mapping) and isinstance(b, Mapping):
        dot = math.fsum(w * b[g] for g, w in a.items() if g in b)
        na = math.sqrt(math.fsum(w * w for w in a.values()))
        nb = math.sqrt(math.fsum(w * w for w in b.values()))
    else:
        if isinstance(a, Mapping) or isinstance(b, Mapping):
            raise ValueError("cannot mix sparse and dense vectors")
        va = np.asarray(a, dtype=float)
        vb = np.asarray(b, dtype=float)
        if va.shape != vb.shape:
            raise ValueError(f"dimension mismatch: {va.shape} vs {vb.shape}")
        dot = float(va @ vb)
        na = float(np.linalg.norm(va))
        nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


def classify_nearest(
    examples: list[tuple[object, str]], query, fallback_label: str | None = None
) -> tuple[str | None, float]:
    """Label of the most similar stored vector.

    Ties break toward the earliest training example; a zero query vector
    returns (fallback_label, 0.0) so callers can route to their catch-all.
    """
    if not examples:
        raise ValueError("at least one training vector is required")
    if _is_zero(query):
        return fallback_label, 0.0
    best_label, best_sim = None, -math.inf
    for vec, label in examples:
        sim = cosine(vec, query)
        if sim > best_sim:
            best_label, best_sim = label, sim
    return best_label, best_sim


def _is_zero(vec) -> bool:
    if isinstance(vec, Mapping):
        return not any(vec.values())
    return not np.asarray(vec, dtype=float).any()


# --------------------------------------------------------------------------
# Averaged word embeddings
# --------------------------------------------------------------------------

class EmbeddingTable:
    """token -> dense vector, all the same dimension.

    Files use the common text format: token followed by the vector
    components, space-separated, one entry per line. Very large files can
    be loaded through a vocabulary filter to keep memory bounded.
    """

    def __init__(self, vectors: dict[str, np.ndarray], dimension: int):
        self.dimension = dimension
        self._vectors = vectors

    def __len__(self):
        return len(self._vectors)

    def __contains__(self, token: str) -> bool:
        return token.lower() in self._vectors

    def get(self, token: str) -> np.ndarray | None:
        return self._vectors.get(token.lower())

    @classmethod
    def load(cls, path, vocabulary: set[str] | None = None) -> "EmbeddingTable":
        vectors: dict[str, np.ndarray] = {}
        dimension = None
        path = Path(path)
        with path.open(encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                parts = line.rstrip("\n").split(" ")
                if len(parts) < 2:
                    continue
                token = parts[0].lower()
                if vocabulary is not None and token not in vocabulary:
                    continue
                vec = np.asarray([float(x) for x in parts[1:]], dtype=np.float64)
                if dimension is None:
                    dimension = vec.size
                elif vec.size != dimension:
                    raise IngestError(path, line_no, f"expected {dimension} components, got {vec.size}")
                vectors[token] = vec
        if dimension is None:
            raise IngestError(path, 0, "no embedding vectors found")
        return cls(vectors, dimension)


def sentence_embedding(table: EmbeddingTable, tokens: list[str]) -> np.ndarray:
    """Mean of the known tokens' vectors, normalized to unit length.

    Empty input or all-unknown tokens yield the zero vector, which callers
    can detect (`not v.any()`) to trigger their fallback.
    """
    known = [table.get(t) for t in tokens]
    known = [v for v in known if v is not None]
    if not known:
        return np.zeros(table.dimension)
    mean = np.mean(known, axis=0)
    norm = float(np.linalg.norm(mean))
    if norm == 0.0:
        return np.zeros(table.dimension)
    return mean / norm


# --------------------------------------------------------------------------
# Logistic regression
# --------------------------------------------------------------------------

@dataclass
class LogRegModel:
    labels: list[str]
    feature_index: dict[tuple[str, str], int]
    weights: np.ndarray  # classes x features
    bias: np.ndarray  # classes
    class_weights: dict[str, float]


def logreg_features(text: str, pos_tags=None) -> list[tuple[str, str]]:
    """Binary indicator features: word uni/bi-grams plus POS uni/bi-grams."""
    words = feature_tokens(text)
    feats = [("w", g) for g in ngrams(words, 1, 2)]
    if pos_tags:
        feats.extend(("p", g) for g in ngrams(list(pos_tags), 1, 2))
    return sorted(set(feats))


def balanced_class_weights(labels: list[str]) -> dict[str, float]:
    """w_c = N_total / (N_classes * count_c)."""
    counts = Counter(labels)
    total = len(labels)
    return {c: total / (len(counts) * n) for c, n in counts.items()}


def _featurize(examples: list[LabeledExample], feature_index) -> np.ndarray:
    X = np.zeros((len(examples), len(feature_index)))
    for i, ex in enumerate(examples):
        for feat in logreg_features(ex.text, ex.pos_tags):
            j = feature_index.get(feat)
            if j is not None:
                X[i, j] = 1.0
    return X


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def logreg_loss(W, b, X, y_idx, sample_w, l2: float) -> float:
    """Class-weighted mean cross-entropy plus an l2 penalty on the weights."""
    probs = _softmax(X @ W.T + b)
    picked = probs[np.arange(len(y_idx)), y_idx]
    ce = -np.log(np.clip(picked, 1e-300, None))
    return float((sample_w * ce).mean() + 0.5 * l2 * (W * W).sum())


def logreg_gradient(W, b, X, y_idx, sample_w, l2: float):
    """Analytic gradient of `logreg_loss` w.r.t. W and b."""
    n = X.shape[0]
    probs = _softmax(X @ W.T + b)
    delta = probs.copy()
    delta[np.arange(n), y_idx] -= 1.0
    delta *= (sample_w / n)[:, None]
    grad_w = delta.T @ X + l2 * W
    grad_b = delta.sum(axis=0)
    return grad_w, grad_b


def train_logreg(
    examples: list[LabeledExample],
    epochs: int = 1000,
    learning_rate: float = 0.5,
    l2: float = 1e-4,
) -> LogRegModel:
    """Full-batch gradient descent on class-weighted multinomial cross-entropy."""
    labels = sorted({ex.label for ex in examples})
    if len(labels) < 2:
        raise ValueError("training needs at least two classes")
    feature_index: dict[tuple[str, str], int] = {}
    for ex in examples:
        for feat in logreg_features(ex.text, ex.pos_tags):
            feature_index.setdefault(feat, len(feature_index))
    X = _featurize(examples, feature_index)
    label_idx = {c: i for i, c in enumerate(labels)}
    y_idx = np.asarray([label_idx[ex.label] for ex in examples])
    class_weights = balanced_class_weights([ex.label for ex in examples])
    sample_w = np.asarray([class_weights[ex.label] for ex in examples])

    W = np.zeros((len(labels), len(feature_index)))
    b = np.zeros(len(labels))
    for _ in range(epochs):
        grad_w, grad_b = logreg_gradient(W, b, X, y_idx, sample_w, l2)
        W -= learning_rate * grad_w
        b -= learning_rate * grad_b
    return LogRegModel(
        labels=labels,
        feature_index=feature_index,
        weights=W,
        bias=b,
        class_weights=class_weights,
    )


def predict_logreg(
    model: LogRegModel, text: str, pos_tags=None
) -> tuple[str, dict[str, float]]:
    """Most probable label plus the full softmax distribution.

    Features unseen at training time are ignored; with nothing recognized
    the distribution is the softmax of the biases.
    """
    x = np.zeros(len(model.feature_index))
    for feat in logreg_features(text, pos_tags):
        j = model.feature_index.get(feat)
        if j is not None:
            x[j] = 1.0
    probs = _softmax((model.weights @ x + model.bias)[None, :])[0]
    dist = {label: float(p) for label, p in zip(model.labels, probs)}
    best = int(np.argmax(probs))
    return model.labels[best], dist


# --------------------------------------------------------------------------
# Shared classify interface
# --------------------------------------------------------------------------

class IntentClassifier(Protocol):
    def classify(self, text: str, pos_tags=None) -> tuple[str | None, float]:
        """Return (intent label, confidence-like score in [0, 1])."""


class TfidfClassifier:
    def __init__(self, model: TfidfModel, fallback_label: str | None = None):
        self.model = model
        self.fallback_label = fallback_label

    @classmethod
    def fit(cls, corpus: list[LabeledExample], config: TfidfConfig | None = None,
            fallback_label: str | None = None) -> "TfidfClassifier":
        return cls(fit_tfidf(corpus, config), fallback_label)

    def classify(self, text: str, pos_tags=None) -> tuple[str | None, float]:
        query = tfidf_vector(self.model, text)
        return classify_nearest(self.model.training_vectors, query, self.fallback_label)


class EmbeddingClassifier:
    def __init__(self, table: EmbeddingTable, corpus: list[LabeledExample],
                 fallback_label: str | None = None):
        self.table = table
        self.fallback_label = fallback_label
        self.examples = [
            (sentence_embedding(table, feature_tokens(ex.text)), ex.label) for ex in corpus
        ]

    def classify(self, text: str, pos_tags=None) -> tuple[str | None, float]:
        query = sentence_embedding(self.table, feature_tokens(text))
        return classify_nearest(self.examples, query, self.fallback_label)


class LogRegClassifier:
    def __init__(self, model: LogRegModel):
        self.model = model

    @classmethod
    def fit(cls, corpus: list[LabeledExample], **kwargs) -> "LogRegClassifier":
        return cls(train_logreg(corpus, **kwargs))

    def classify(self, text: str, pos_tags=None) -> tuple[str | None, float]:
        label, dist = predict_logreg(self.model, text, pos_tags)
        return label, dist[label]
