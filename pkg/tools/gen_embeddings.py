#!/usr/bin/env python3
"""Regenerate the bundled embedding fixture.

Builds a deterministic 300-dimensional unit vector per vocabulary token
(seeded from a hash of the token) covering every word the bundled fixtures
can ask the embedding table about: the intent corpus, chit-chat messages,
per-graph intent examples, yes/no word lists, topic keywords and entity
surfaces. Hash-seeded vectors are quasi-orthogonal, so averaged-embedding
similarity is driven by lexical overlap, which is all the bundled corpora
need. Swap in any real pre-trained table (same text format) for semantic
similarity.

Usage: python tools/gen_embeddings.py [output_path]
"""

import hashlib
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
SRC = ROOT / "src"
sys.path.insert(0, str(SRC))

from convograph.analysis import tokenize  # noqa: E402
from convograph.dialogue import NO_WORDS, YES_WORDS, load_graph_directory  # noqa: E402

FIXTURES = SRC / "convograph" / "fixtures"
DIMENSION = 300

FILLER = """
a an the i you he she it we they me my your his her its our their this that
these those what which who whom when where why how is am are was were be been
do does did have has had can could will would shall should may might must
not no yes and or but if then else for to of in on at by with about from into
over under again more most some any one two three please tell say talk chat
speak like love hate want know think feel see watch hear give get make go
come really very just also too so now today tomorrow yesterday thanks thank
hello hi hey bye goodbye sorry
""".split()


def vocabulary() -> set[str]:
    vocab = set(FILLER) | set(YES_WORDS) | set(NO_WORDS)
    for line in (FIXTURES / "intents" / "toplevel.tsv").read_text().splitlines():
        if line.strip() and not line.startswith("#"):
            vocab.update(t.lower() for t in tokenize(line.split("\t")[1]))
    for line in (FIXTURES / "responders" / "chitchat.tsv").read_text().splitlines():
        if line.strip() and not line.startswith("#"):
            vocab.update(t.lower() for t in tokenize(line.split("\t")[0]))
    for line in (FIXTURES / "knowledge" / "concepts.tsv").read_text().splitlines():
        if line.strip() and not line.startswith("#"):
            vocab.update(line.split("\t")[0].lower().split())
    graphs = load_graph_directory(FIXTURES / "graphs")
    for graph in graphs.values():
        for phrase in graph.keywords:
            vocab.update(phrase.split())
        for examples in graph.intent_examples.values():
            for example in examples:
                vocab.update(t.lower() for t in tokenize(example))
    return {t for t in vocab if any(ch.isalnum() for ch in t)}


def token_vector(token: str) -> np.ndarray:
    seed = int.from_bytes(hashlib.sha256(token.encode("utf-8")).digest()[:8], "big")
    rng = np.random.default_rng(seed)
    vec = rng.standard_normal(DIMENSION)
    return vec / np.linalg.norm(vec)


def main() -> None:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else FIXTURES / "embeddings" / "vectors.txt"
    out.parent.mkdir(parents=True, exist_ok=True)
    tokens = sorted(vocabulary())
    with out.open("w", encoding="utf-8") as fh:
        for token in tokens:
            vec = token_vector(token)
            fh.write(token + " " + " ".join(f"{x:.5f}" for x in vec) + "\n")
    print(f"wrote {len(tokens)} vectors of dimension {DIMENSION} to {out}")


if __name__ == "__main__":
    main()
