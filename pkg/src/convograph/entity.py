"""Recognized entity record: surface span, canonical label, scored concepts."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Entity:
    """A surface span resolved to a canonical label plus concept candidates.

    `concepts` holds (concept, popularity) pairs sorted by descending
    popularity; popularity counts are relative and only used for ordering
    and topic-selection sums.
    """

    surface: str
    label: str
    concepts: tuple[tuple[str, int], ...] = field(default_factory=tuple)
    external_id: str | None = None

    def to_dict(self) -> dict:
        d = {
            "kind": "entity",
            "surface": self.surface,
            "label": self.label,
            "concepts": [[c, p] for c, p in self.concepts],
        }
        if self.external_id is not None:
            d["external_id"] = self.external_id
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Entity":
        return cls(
            surface=d["surface"],
            label=d["label"],
            concepts=tuple((c, int(p)) for c, p in d.get("concepts", [])),
            external_id=d.get("external_id"),
        )
