"""Utterance analysis: tokens, casing, POS tags, focus phrases, gates.

The analyzers are deliberately rule-based and self-contained (no external
NLP toolkit): the downstream pipeline only consumes tokens, restored casing
and a coarse POS tag per token. Everything here is a pure function over
immutable lexicons, so analyzers are shared freely across sessions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .entity import Entity
from .errors import IngestError, MalformedInputError
from .tsv import tsv_rows

POS_TAGS = ("NNP", "NN", "VB", "JJ", "PRP", "DT", "IN", "CD", "PUNCT", "OTHER")

#: Characters allowed inside a word token (besides alphanumerics).
_WORD_INTERNAL = set("'’-")

DEFAULT_ASR_THRESHOLD = 0.7


@dataclass(frozen=True)
class AsrHypothesis:
    """One candidate transcription: (text, confidence) tokens plus its rank."""

    tokens: tuple[tuple[str, float], ...]
    rank: int = 0

    def text(self) -> str:
        return " ".join(t for t, _ in self.tokens)

    def mean_confidence(self) -> float:
        if not self.tokens:
            raise MalformedInputError("ASR hypothesis has no tokens")
        return math.fsum(c for _, c in self.tokens) / len(self.tokens)


@dataclass(frozen=True)
class AsrGateConfig:
    threshold: float = DEFAULT_ASR_THRESHOLD

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("ASR threshold must be in [0, 1]")


@dataclass
class Annotations:
    """Everything the dialogue manager needs to know about one utterance."""

    tokens: list[str]
    truecased: list[str]
    pos_tags: list[str]
    focus_phrases: list[str] = field(default_factory=list)
    entities: list[Entity] = field(default_factory=list)
    topic_keywords: list[tuple[str, str]] = field(default_factory=list)
    profane: bool = False
    confident: bool = True
    chosen_hypothesis: int = 0

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


def hypothesis_from_text(text: str, confidence: float = 1.0) -> AsrHypothesis:
    """Wrap typed text as a rank-0 hypothesis (used when no ASR is involved)."""
    return AsrHypothesis(tokens=tuple((t, confidence) for t in tokenize(text)), rank=0)


def tokenize(text: str) -> list[str]:
    """Split on whitespace, emitting punctuation as separate tokens.

    Apostrophes and hyphens inside a word stay put ("let's", "sci-fi");
    leading/trailing punctuation splits off one character per token.
    """
    tokens: list[str] = []
    for chunk in text.split():
        tokens.extend(_split_chunk(chunk))
    return tokens


def _split_chunk(chunk: str) -> list[str]:
    out: list[str] = []
    word: list[str] = []
    n = len(chunk)
    for i, ch in enumerate(chunk):
        if ch.isalnum():
            word.append(ch)
        elif ch in _WORD_INTERNAL and word and i + 1 < n and chunk[i + 1].isalnum():
            word.append(ch)
        else:
            if word:
                out.append("".join(word))
                word = []
            out.append(ch)
    if word:
        out.append("".join(word))
    return out


class CasingLexicon:
    """lowercase token -> canonical-cased form, with a proper-noun flag."""

    def __init__(self, entries: dict[str, tuple[str, bool]] | None = None):
        self._entries = dict(entries or {})

    def __len__(self):
        return len(self._entries)

    def add(self, lower: str, canonical: str, proper: bool = False) -> None:
        self._entries[lower] = (canonical, proper)

    def canonical(self, token: str) -> str | None:
        hit = self._entries.get(token.lower())
        return hit[0] if hit else None

    def is_proper(self, token: str) -> bool:
        hit = self._entries.get(token.lower())
        return bool(hit and hit[1])

    @classmethod
    def load(cls, path) -> "CasingLexicon":
        lex = cls()
        for line_no, parts in tsv_rows(path, min_cols=2, max_cols=3):
            lower, canonical = parts[0].lower(), parts[1]
            proper = len(parts) == 3 and parts[2] in ("1", "true", "yes")
            lex.add(lower, canonical, proper)
        return lex


def truecase(tokens: list[str], lexicon: CasingLexicon) -> list[str]:
    """Restore letter case lost by ASR.

    Lexicon form wins; unknown tokens pass through unchanged, except the
    sentence-initial token which gets its first letter capitalized.
    """
    out = []
    for i, tok in enumerate(tokens):
        canonical = lexicon.canonical(tok)
        if canonical is not None:
            out.append(canonical)
        elif i == 0 and tok and tok[0].isalpha():
            out.append(tok[0].upper() + tok[1:])
        else:
            out.append(tok)
    return out


#: word -> tag for closed-class words; consulted after the proper-noun lexicon.
DEFAULT_CLOSED_CLASS: dict[str, str] = {}
for _w in ("the", "a", "an", "this", "that", "these", "those", "some", "any",
           "every", "each", "another", "no"):
    DEFAULT_CLOSED_CLASS[_w] = "DT"
for _w in ("i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us",
           "them", "my", "your", "his", "its", "our", "their", "mine", "yours",
           "myself", "yourself", "something", "anything", "everything", "nothing",
           "someone", "anyone", "everyone", "who", "what", "which"):
    DEFAULT_CLOSED_CLASS[_w] = "PRP"
for _w in ("of", "in", "on", "at", "by", "for", "with", "about", "from", "to",
           "into", "over", "under", "after", "before", "between", "during",
           "without", "since", "than", "as", "if", "because", "while", "though",
           "although", "up", "out", "off", "and", "or", "but", "so", "when",
           "where", "how", "why"):
    DEFAULT_CLOSED_CLASS[_w] = "IN"
for _w in ("is", "am", "are", "was", "were", "be", "been", "being", "do", "does",
           "did", "done", "have", "has", "had", "can", "could", "will", "would",
           "shall", "should", "may", "might", "must", "let", "let's", "tell",
           "say", "said", "talk", "chat", "speak", "know", "think", "want",
           "like", "love", "hate", "watch", "play", "go", "see", "saw", "hear",
           "heard", "give", "get", "got", "make", "made", "read", "recommend",
           "suggest", "ask", "answer"):
    DEFAULT_CLOSED_CLASS[_w] = "VB"
for _w in ("good", "bad", "great", "nice", "new", "old", "best", "worst",
           "favorite", "funny", "interesting", "latest", "big", "small",
           "happy", "sad"):
    DEFAULT_CLOSED_CLASS[_w] = "JJ"
for _w in ("not", "never", "always", "very", "really", "just", "too", "also",
           "again", "here", "there", "now", "then", "please", "yes", "yeah",
           "yep", "sure", "okay", "ok", "nope", "nah", "hello", "hi", "hey",
           "thanks", "bye", "goodbye"):
    DEFAULT_CLOSED_CLASS[_w] = "OTHER"

_JJ_SUFFIXES = ("ous", "ful", "ive", "able", "ible", "ish", "ical")
_VB_SUFFIXES = ("ing", "ed")


def pos_tag(
    tokens: list[str],
    lexicon: CasingLexicon | None = None,
    closed_class: dict[str, str] | None = None,
) -> list[str]:
    """Assign one coarse tag per token.

    Priority: punctuation/numbers by shape, proper nouns from the casing
    lexicon, closed-class word lists, capitalization mid-sentence, suffix
    heuristics, fallback NN.
    """
    lexicon = lexicon or CasingLexicon()
    closed_class = DEFAULT_CLOSED_CLASS if closed_class is None else closed_class
    tags = []
    for i, tok in enumerate(tokens):
        low = tok.lower()
        if not any(ch.isalnum() for ch in tok):
            tags.append("PUNCT")
        elif _is_number(tok):
            tags.append("CD")
        elif lexicon.is_proper(tok):
            tags.append("NNP")
        elif low in closed_class:
            tags.append(closed_class[low])
        elif i > 0 and tok[0].isupper():
            tags.append("NNP")
        elif low.endswith(_VB_SUFFIXES) and len(low) > 4:
            tags.append("VB")
        elif low.endswith(_JJ_SUFFIXES) and len(low) > 4:
            tags.append("JJ")
        elif low.endswith("ly") and len(low) > 3:
            tags.append("OTHER")
        else:
            tags.append("NN")
    return tags


def _is_number(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def asr_gate(
    hypotheses: list[AsrHypothesis], cfg: AsrGateConfig | None = None
) -> tuple[bool, list[AsrHypothesis]]:
    """Drop hypotheses whose mean token confidence is below the threshold.

    Removal is strict ("smaller than"), so a mean exactly at the threshold
    survives. Returns (any survivor, survivors).
    """
    if not hypotheses:
        raise MalformedInputError("at least one ASR hypothesis is required")
    cfg = cfg or AsrGateConfig()
    surviving = [h for h in hypotheses if h.mean_confidence() >= cfg.threshold]
    return bool(surviving), surviving


def profanity_scan(
    tokens: list[str], blacklist: set[str]
) -> tuple[bool, list[str]]:
    """Whole-token, case-insensitive scan against banned words and phrases.

    Multi-word blacklist entries match contiguous token windows; substrings
    of clean words never match.
    """
    lowered = [t.lower() for t in tokens]
    matches = []
    phrases = sorted({tuple(entry.lower().split()) for entry in blacklist if entry.strip()})
    for phrase in phrases:
        k = len(phrase)
        for i in range(len(lowered) - k + 1):
            if tuple(lowered[i:i + k]) == phrase:
                matches.append(" ".join(phrase))
                break
    return bool(matches), matches


def extract_focus(
    truecased: list[str],
    pos_tags: list[str],
    entities: list[Entity] | None = None,
) -> list[str]:
    """Candidate entity-bearing phrases: NNP runs plus recognized entity spans.

    Results are deduplicated case-insensitively, ordered by first occurrence
    in the utterance.
    """
    if len(truecased) != len(pos_tags):
        raise ValueError("truecased tokens and POS tags must align")
    spans: list[tuple[int, str]] = []
    i = 0
    while i < len(pos_tags):
        if pos_tags[i] == "NNP":
            j = i
            while j < len(pos_tags) and pos_tags[j] == "NNP":
                j += 1
            spans.append((i, " ".join(truecased[i:j])))
            i = j
        else:
            i += 1
    lowered = [t.lower() for t in truecased]
    for ent in entities or []:
        words = ent.surface.lower().split()
        pos = _find_window(lowered, words)
        spans.append((pos if pos is not None else len(lowered), ent.surface))
    spans.sort(key=lambda s: s[0])
    seen = set()
    out = []
    for _, phrase in spans:
        key = phrase.lower()
        if key not in seen:
            seen.add(key)
            out.append(phrase)
    return out


def _find_window(lowered: list[str], words: list[str]) -> int | None:
    k = len(words)
    if k == 0:
        return None
    for i in range(len(lowered) - k + 1):
        if lowered[i:i + k] == words:
            return i
    return None


def spot_keywords(
    tokens: list[str], topic_keyword_lists: dict[str, set[str]]
) -> list[tuple[str, str]]:
    """Find per-topic keyword phrases in the utterance.

    Whole-token, case-insensitive matching; one record per distinct
    (topic, keyword) hit, ordered by first occurrence.
    """
    lowered = [t.lower() for t in tokens]
    hits: list[tuple[int, str, str]] = []
    for topic, phrases in topic_keyword_lists.items():
        for phrase in phrases:
            words = phrase.lower().split()
            pos = _find_window(lowered, words)
            if pos is not None:
                hits.append((pos, topic, phrase.lower()))
    hits.sort()
    seen = set()
    out = []
    for _, topic, keyword in hits:
        if (topic, keyword) not in seen:
            seen.add((topic, keyword))
            out.append((topic, keyword))
    return out


class Annotator:
    """Bundles the lexicons and runs the full analysis pass for one utterance.

    An entity recognizer (typically backed by the concept index) can be
    plugged in; without one, focus extraction relies on NNP runs alone.
    """

    def __init__(
        self,
        casing: CasingLexicon | None = None,
        closed_class: dict[str, str] | None = None,
        blacklist: set[str] | None = None,
        topic_keywords: dict[str, set[str]] | None = None,
        entity_recognizer=None,
        gate: AsrGateConfig | None = None,
    ):
        self.casing = casing or CasingLexicon()
        self.closed_class = DEFAULT_CLOSED_CLASS if closed_class is None else closed_class
        self.blacklist = blacklist or set()
        self.topic_keywords = topic_keywords or {}
        self.entity_recognizer = entity_recognizer
        self.gate = gate or AsrGateConfig()

    def annotate(self, hypotheses: list[AsrHypothesis]) -> Annotations:
        confident, surviving = asr_gate(hypotheses, self.gate)
        pool = surviving if surviving else hypotheses
        chosen = min(pool, key=lambda h: h.rank)
        tokens = tokenize(chosen.text())
        cased = truecase(tokens, self.casing)
        tags = pos_tag(cased, self.casing, self.closed_class)
        entities = list(self.entity_recognizer(cased)) if self.entity_recognizer else []
        profane, _ = profanity_scan(tokens, self.blacklist)
        return Annotations(
            tokens=tokens,
            truecased=cased,
            pos_tags=tags,
            focus_phrases=extract_focus(cased, tags, entities),
            entities=entities,
            topic_keywords=spot_keywords(tokens, self.topic_keywords),
            profane=profane,
            confident=confident,
            chosen_hypothesis=chosen.rank,
        )


def load_wordlist(path) -> set[str]:
    """One entry per line; blank lines and '#' comments ignored."""
    out = set()
    for _, parts in tsv_rows(path, min_cols=1, max_cols=1):
        out.add(parts[0].lower())
    return out


def load_topic_keywords(path) -> dict[str, set[str]]:
    """topic<TAB>phrase rows -> {topic: {phrases}}."""
    out: dict[str, set[str]] = {}
    for _, parts in tsv_rows(path, min_cols=2, max_cols=2):
        out.setdefault(parts[0], set()).add(parts[1].lower())
    return out


def load_closed_class(path, base: dict[str, str] | None = None) -> dict[str, str]:
    """word<TAB>TAG rows, layered over the built-in closed-class lists."""
    out = dict(DEFAULT_CLOSED_CLASS if base is None else base)
    for line_no, parts in tsv_rows(path, min_cols=2, max_cols=2):
        word, tag = parts[0].lower(), parts[1]
        if tag not in POS_TAGS:
            raise IngestError(path, line_no, f"unknown POS tag {tag!r}")
        out[word] = tag
    return out

