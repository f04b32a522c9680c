"""Local knowledge indices: entity concepts, fuzzy alias lookup, facts.

These replace the live knowledge services with immutable in-memory indices
built from TSV fixtures. The lookup semantics are the load-bearing part:
exact lowercase concept lookup ordered by popularity, and fuzzy alias
matching capped at edit distance 3.
"""

from __future__ import annotations

from dataclasses import dataclass

from .entity import Entity
from .errors import IngestError
from .tsv import tsv_rows

MAX_LABEL_DISTANCE = 3


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance (insert / delete / substitute)."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def levenshtein_capped(a: str, b: str, cap: int) -> int:
    """Edit distance, abandoning early once it provably exceeds `cap`.

    Returns cap + 1 when the true distance is greater than `cap`; exact
    otherwise. Uses the standard band of width 2*cap+1 around the diagonal.
    """
    if abs(len(a) - len(b)) > cap:
        return cap + 1
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    big = cap + 1
    prev = [j if j <= cap else big for j in range(len(b) + 1)]
    for i, ca in enumerate(a, start=1):
        lo = max(1, i - cap)
        hi = min(len(b), i + cap)
        cur = [big] * (len(b) + 1)
        if lo == 1:
            cur[0] = i if i <= cap else big
        for j in range(lo, hi + 1):
            cb = b[j - 1]
            cur[j] = min(
                min(prev[j], cur[j - 1]) + 1,
                prev[j - 1] + (ca != cb),
            )
        if min(cur[lo - 1:hi + 1]) > cap:
            return big
        prev = cur
    return prev[-1] if prev[-1] <= cap else big


@dataclass(frozen=True)
class LabelEntry:
    """Alias for a canonical label, e.g. a misspelling or alternate title."""

    alias: str
    canonical_label: str
    external_id: str


@dataclass(frozen=True)
class FactRecord:
    entity: str
    topic: str
    text: str
    source: str | None = None


class ConceptIndex:
    """surface (lowercase) -> [(concept, popularity)] sorted by popularity."""

    def __init__(self, counts: dict[str, dict[str, int]]):
        self._by_surface: dict[str, list[tuple[str, int]]] = {}
        self._max_words = 1
        for surface, concepts in counts.items():
            ranked = sorted(concepts.items(), key=lambda cp: (-cp[1], cp[0]))
            self._by_surface[surface] = ranked
            self._max_words = max(self._max_words, len(surface.split()))

    def __len__(self):
        return len(self._by_surface)

    @property
    def max_phrase_words(self) -> int:
        return self._max_words

    def lookup(self, surface: str) -> list[tuple[str, int]]:
        """Concepts for an exact lowercase surface match, popularity-descending."""
        return list(self._by_surface.get(surface.lower(), []))

    def recognize(self, tokens: list[str]) -> list[Entity]:
        """Greedy longest-first entity spotting over token windows.

        Overlapping shorter matches are suppressed; the produced Entity keeps
        the tokens' casing as its surface and label.
        """
        lowered = [t.lower() for t in tokens]
        taken = [False] * len(tokens)
        found: list[tuple[int, Entity]] = []
        for width in range(min(self._max_words, len(tokens)), 0, -1):
            for start in range(0, len(tokens) - width + 1):
                if any(taken[start:start + width]):
                    continue
                surface = " ".join(lowered[start:start + width])
                concepts = self._by_surface.get(surface)
                if concepts:
                    cased = " ".join(tokens[start:start + width])
                    found.append(
                        (start, Entity(surface=cased, label=cased, concepts=tuple(concepts)))
                    )
                    for k in range(start, start + width):
                        taken[k] = True
        found.sort(key=lambda f: f[0])
        return [e for _, e in found]


def ingest_concepts(path) -> ConceptIndex:
    """Build a ConceptIndex from surface<TAB>concept<TAB>popularity rows.

    Duplicate (surface, concept) rows sum their popularities; a negative
    popularity or malformed row aborts with the offending line number.
    """
    counts: dict[str, dict[str, int]] = {}
    for line_no, parts in tsv_rows(path, 3):
        surface, concept, raw_pop = parts
        try:
            popularity = int(raw_pop)
        except ValueError:
            raise IngestError(path, line_no, f"popularity is not an integer: {raw_pop!r}") from None
        if popularity < 0:
            raise IngestError(path, line_no, f"negative popularity: {popularity}")
        per_surface = counts.setdefault(surface.lower(), {})
        per_surface[concept] = per_surface.get(concept, 0) + popularity
    return ConceptIndex(counts)


def load_labels(path) -> list[LabelEntry]:
    """Load alias<TAB>canonical<TAB>external_id rows, dropping far-off aliases.

    Mirrors the ingestion-time filter: aliases further than edit distance 3
    from their canonical label are discarded.
    """
    entries = []
    for _, parts in tsv_rows(path, 3):
        alias, canonical, ext_id = parts
        if levenshtein_capped(alias.lower(), canonical.lower(), MAX_LABEL_DISTANCE) > MAX_LABEL_DISTANCE:
            continue
        entries.append(LabelEntry(alias=alias, canonical_label=canonical, external_id=ext_id))
    return entries


def fuzzy_label_lookup(
    entries: list[LabelEntry], query: str, max_distance: int = MAX_LABEL_DISTANCE
) -> tuple[str, str] | None:
    """Best alias match for `query` within `max_distance` edits.

    Distance is computed on lowercased strings; ties break toward the
    shorter alias, then lexicographically. Returns (canonical_label,
    external_id) or None when nothing is close enough.
    """
    q = query.lower()
    best = None
    best_key = None
    for entry in entries:
        alias = entry.alias.lower()
        d = levenshtein_capped(q, alias, max_distance)
        if d > max_distance:
            continue
        key = (d, len(alias), alias)
        if best_key is None or key < best_key:
            best_key = key
            best = entry
    if best is None:
        return None
    return best.canonical_label, best.external_id


class FactStore:
    """(entity, topic) -> facts, with entity-level fallback."""

    def __init__(self, records: list[FactRecord]):
        self._by_entity: dict[str, list[FactRecord]] = {}
        for rec in records:
            self._by_entity.setdefault(rec.entity.lower(), []).append(rec)

    def __len__(self):
        return sum(len(v) for v in self._by_entity.values())

    def get_facts(self, entity: str, topic: str | None = None) -> list[FactRecord]:
        """All facts for (entity, topic); if the topic has none, all facts
        for the entity regardless of topic."""
        records = self._by_entity.get(entity.lower(), [])
        if topic is not None:
            topical = [r for r in records if r.topic == topic]
            if topical:
                return topical
        return list(records)


def load_facts(path) -> FactStore:
    """entity<TAB>topic<TAB>fact[<TAB>source] rows."""
    records = []
    for line_no, parts in tsv_rows(path, 3, 4):
        entity, topic, text = parts[0], parts[1], parts[2]
        if not text.strip():
            raise IngestError(path, line_no, "empty fact text")
        records.append(FactRecord(entity=entity, topic=topic, text=text,
                                  source=parts[3] if len(parts) == 4 else None))
    return FactStore(records)

