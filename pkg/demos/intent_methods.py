#!/usr/bin/env python3
"""Compare the three intent detection methods on the bundled corpus.

Fits TF-IDF nearest-example, averaged-embedding nearest-example and
logistic regression on the full 6-intent corpus, then classifies a few
held-out style utterances and prints 5-fold cross-validation accuracy.
"""

from dataclasses import replace

from convograph.analysis import CasingLexicon, pos_tag, tokenize, truecase
from convograph.engine import DEFAULT_FIXTURES_DIR
from convograph.evaluation import eval_intents
from convograph.intent import (
    EmbeddingClassifier,
    EmbeddingTable,
    LogRegClassifier,
    TfidfClassifier,
    load_intent_corpus,
)

fixtures = DEFAULT_FIXTURES_DIR
corpus = load_intent_corpus(fixtures / "intents" / "toplevel.tsv")
lexicon = CasingLexicon.load(fixtures / "lexicon" / "casing.tsv")
corpus = [
    replace(ex, pos_tags=tuple(pos_tag(truecase(tokenize(ex.text), lexicon), lexicon)))
    for ex in corpus
]
table = EmbeddingTable.load(fixtures / "embeddings" / "vectors.txt")

classifiers = {
    "tfidf": TfidfClassifier.fit(corpus),
    "embedding": EmbeddingClassifier(table, corpus),
    "logreg": LogRegClassifier.fit(corpus),
}

probes = [
    "could you recommend a nice film",
    "do you know who invented the radio",
    "please tell me a really funny joke",
    "what is your opinion about jazz",
]
for probe in probes:
    tags = tuple(pos_tag(truecase(tokenize(probe), lexicon), lexicon))
    print(f"\n{probe!r}")
    for name, clf in classifiers.items():
        label, score = clf.classify(probe, tags)
        print(f"  {name:<10} -> {label}  (score {score:.3f})")

print("\n5-fold cross-validation on the bundled corpus:")
print(f"{'Method':<22}{'Accuracy':>10}")
for method in ("tfidf", "embedding", "logreg"):
    report = eval_intents(corpus, method, folds=5, seed=13, table=table)
    print(f"{method:<22}{report.accuracy:>10.3f}")
