"""Cross-validated accuracy of the intent detection methods.

Stratified k-fold: examples are grouped by label, each group is shuffled
with a seeded counter-based generator and dealt round-robin into folds, so
fold assignment is reproducible from (corpus, seed) alone.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .intent import (
    EmbeddingClassifier,
    EmbeddingTable,
    LabeledExample,
    LogRegClassifier,
    TfidfClassifier,
)
from .rng import counter_value, derive_seed

METHODS = ("tfidf", "embedding", "logreg")


@dataclass
class EvalReport:
    method: str
    accuracy: float
    correct: int
    total: int
    folds: int
    corpus_size: int
    confusion: Counter = field(default_factory=Counter)  # (true, predicted) -> count

    def rows(self) -> list[tuple[str, str]]:
        return [("method", self.method), ("accuracy", f"{self.accuracy:.3f}")]


def _shuffled(indices: list[int], seed: int) -> list[int]:
    out = list(indices)
    for i in range(len(out) - 1, 0, -1):
        j = counter_value(seed, i) % (i + 1)
        out[i], out[j] = out[j], out[i]
    return out


def stratified_folds(examples: list[LabeledExample], k: int, seed: int) -> list[list[int]]:
    """Deal each label's (seeded-shuffled) examples round-robin into k folds."""
    by_label: dict[str, list[int]] = {}
    for i, ex in enumerate(examples):
        by_label.setdefault(ex.label, []).append(i)
    if len(by_label) < 2:
        raise ValueError("evaluation needs a corpus with at least two labels")
    folds: list[list[int]] = [[] for _ in range(k)]
    for g, label in enumerate(sorted(by_label)):
        shuffled = _shuffled(by_label[label], derive_seed(seed, g))
        for pos, idx in enumerate(shuffled):
            folds[pos % k].append(idx)
    return folds


def _build(method: str, train: list[LabeledExample], table: EmbeddingTable | None):
    if method == "tfidf":
        return TfidfClassifier.fit(train)
    if method == "embedding":
        if table is None:
            raise ValueError("embedding method needs an embedding table")
        return EmbeddingClassifier(table, train)
    if method == "logreg":
        return LogRegClassifier.fit(train)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def eval_intents(
    examples: list[LabeledExample],
    method: str,
    folds: int = 5,
    seed: int = 13,
    table: EmbeddingTable | None = None,
) -> EvalReport:
    """Stratified k-fold cross-validation accuracy for one method."""
    assignment = stratified_folds(examples, folds, seed)
    correct = 0
    total = 0
    confusion: Counter = Counter()
    for fold in assignment:
        test_set = set(fold)
        train = [ex for i, ex in enumerate(examples) if i not in test_set]
        classifier = _build(method, train, table)
        for i in fold:
            ex = examples[i]
            predicted, _ = classifier.classify(ex.text, ex.pos_tags)
            confusion[(ex.label, predicted)] += 1
            correct += predicted == ex.label
            total += 1
    return EvalReport(
        method=method,
        accuracy=correct / total if total else 0.0,
        correct=correct,
        total=total,
        folds=folds,
        corpus_size=len(examples),
        confusion=confusion,
    )
