"""Templated response realization.

A template is an ordered list of segments; each segment is a set of
alternative text fragments, one of which is picked by a seeded
counter-based generator. Fragments may contain `{key}` placeholders filled
from the context with most-specific-wins scope order (turn, then session,
then long term). Same seed, template and context always reproduce the same
string.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .context import Context
from .entity import Entity
from .errors import RenderError, TemplateLoadError
from .rng import counter_choice
from .yamldoc import load_document

_PLACEHOLDER = re.compile(r"\{([a-z_][a-z0-9_]*)\}")
_BRACE = re.compile(r"[{}]")


@dataclass(frozen=True)
class ResponseTemplate:
    id: str
    segments: tuple[tuple[str, ...], ...]


def _validate_fragment(template_id: str, fragment: str) -> None:
    # Every brace must belong to a well-formed {identifier} placeholder.
    cleaned = _PLACEHOLDER.sub("", fragment)
    stray = _BRACE.search(cleaned)
    if stray:
        raise TemplateLoadError(
            f"template {template_id!r}: malformed placeholder in {fragment!r}"
        )


def parse_templates(doc: dict, source: str = "<doc>") -> dict[str, ResponseTemplate]:
    """Extract the `templates` section of a dialogue-graph style document."""
    raw = doc.get("templates") or {}
    if not isinstance(raw, dict):
        raise TemplateLoadError(f"{source}: templates must be a mapping")
    templates: dict[str, ResponseTemplate] = {}
    for template_id, segments in raw.items():
        template_id = str(template_id)
        if not isinstance(segments, list) or not segments:
            raise TemplateLoadError(f"{source}: template {template_id!r} needs a list of segments")
        parsed_segments = []
        for segment in segments:
            if isinstance(segment, str):
                segment = [segment]
            if not isinstance(segment, list) or not segment:
                raise TemplateLoadError(
                    f"{source}: template {template_id!r} has an empty alternative set"
                )
            alternatives = []
            for fragment in segment:
                if not isinstance(fragment, str):
                    raise TemplateLoadError(
                        f"{source}: template {template_id!r}: fragments must be strings"
                    )
                _validate_fragment(template_id, fragment)
                alternatives.append(fragment)
            parsed_segments.append(tuple(alternatives))
        templates[template_id] = ResponseTemplate(id=template_id, segments=tuple(parsed_segments))
    return templates


def load_templates(path) -> dict[str, ResponseTemplate]:
    """Parse the templates of one document file (shared graph container)."""
    try:
        doc = load_document(path)
    except ValueError as exc:
        raise TemplateLoadError(str(exc)) from exc
    return parse_templates(doc, source=str(path))


def _format_value(value) -> str:
    if isinstance(value, Entity):
        return value.label
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, list):
        return ", ".join(value)
    return str(value)


def substitute(text: str, ctx: Context) -> str:
    """Fill every `{key}` from the context; unknown key raises RenderError."""

    def _repl(match: re.Match) -> str:
        key = match.group(1)
        value = ctx.lookup(key)
        if value is None:
            raise RenderError(key)
        return _format_value(value)

    return _PLACEHOLDER.sub(_repl, text)


def render(template: ResponseTemplate, ctx: Context, seed: int) -> str:
    """Pick one alternative per segment (seeded, uniform), fill placeholders,
    join with single spaces."""
    parts = []
    for i, alternatives in enumerate(template.segments):
        choice = counter_choice(seed, i, len(alternatives))
        parts.append(substitute(alternatives[choice], ctx))
    return " ".join(" ".join(parts).split())
