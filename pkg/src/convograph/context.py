"""Layered per-session memory with file-backed snapshots.

Every pipeline stage reads and writes the same Context. Keys live in one of
three scopes: `turn` (cleared when a new utterance arrives), `session`
(lifetime of the session) and `long_term` (survives sessions, keyed by a
caller-supplied user id). The context also carries the dialogue cursor --
the (topic, state) position of the ongoing structured topic dialogue -- and
a per-topic memory of the last visited state and last discussed entity.

Snapshots are one JSON document per session, atomically replaced after each
turn, so an interrupted session resumes exactly where it stopped.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from .entity import Entity
from .errors import CorruptSnapshotError, PersistenceError

SCOPES = ("turn", "session", "long_term")

SNAPSHOT_SCHEMA = "v1"

#: Closed set of storable values: str, int/float, bool, list of str, Entity.
Value = object


def _check_value(value):
    if isinstance(value, (str, bool, int, float, Entity)):
        return
    if isinstance(value, list) and all(isinstance(x, str) for x in value):
        return
    raise TypeError(
        "context values must be str, number, bool, list of str or Entity; "
        f"got {type(value).__name__}"
    )


def _encode_value(value):
    if isinstance(value, Entity):
        return value.to_dict()
    return value


def _decode_value(raw):
    if isinstance(raw, dict) and raw.get("kind") == "entity":
        return Entity.from_dict(raw)
    return raw


@dataclass
class TopicMemory:
    """What the session last did inside one topic dialogue."""

    last_state: str | None = None
    last_entity: Entity | None = None


@dataclass
class Context:
    session_id: str
    user_id: str | None = None
    turn_scope: dict = field(default_factory=dict)
    session_scope: dict = field(default_factory=dict)
    long_term_scope: dict = field(default_factory=dict)
    dialogue_cursor: tuple[str, str] | None = None
    per_topic_memory: dict[str, TopicMemory] = field(default_factory=dict)
    turn_counter: int = 0

    def __post_init__(self):
        if not self.session_id:
            raise ValueError("session_id must be non-empty")

    def _scope_dict(self, scope: str) -> dict:
        if scope == "turn":
            return self.turn_scope
        if scope == "session":
            return self.session_scope
        if scope == "long_term":
            # Long-term storage needs a user identity to attach to; without
            # one, writes degrade to session scope.
            return self.long_term_scope if self.user_id else self.session_scope
        raise ValueError(f"unknown scope {scope!r}")

    def remember(self, scope: str, key: str, value) -> None:
        """Store `value` under `key` in `scope`, overwriting any previous value."""
        if not key:
            raise ValueError("key must be non-empty")
        _check_value(value)
        self._scope_dict(scope)[key] = value

    def recall(self, scope: str, key: str):
        """Return the last remembered value for `key` in `scope`, or None."""
        return self._scope_dict(scope).get(key)

    def lookup(self, key: str):
        """Resolve `key` through turn -> session -> long_term, most specific wins."""
        for scope in SCOPES:
            hit = self._scope_dict(scope)
            if key in hit:
                return hit[key]
        return None

    def begin_turn(self) -> None:
        """Start a new turn: turn-scoped annotations from the last turn vanish."""
        self.turn_scope.clear()

    def topic_memory(self, topic: str) -> TopicMemory:
        return self.per_topic_memory.setdefault(topic, TopicMemory())


class SnapshotStore:
    """Latest-snapshot-per-session persistence under a data directory.

    Layout: `sessions/<session_id>.json` holds the session snapshot,
    `users/<user_id>.json` holds the long-term scope shared by all of a
    user's sessions. Files are replaced atomically; writers for one session
    are expected to be serialized by the caller (one session, one owner).
    """

    def __init__(self, data_dir):
        self.data_dir = Path(data_dir)
        self.sessions_dir = self.data_dir / "sessions"
        self.users_dir = self.data_dir / "users"

    def _session_path(self, session_id: str) -> Path:
        return self.sessions_dir / f"{_safe_name(session_id)}.json"

    def _user_path(self, user_id: str) -> Path:
        return self.users_dir / f"{_safe_name(user_id)}.json"

    def exists(self, session_id: str) -> bool:
        return self._session_path(session_id).is_file()

    def checkpoint(self, ctx: Context) -> str:
        """Persist `ctx`, bump its turn counter, return a snapshot id."""
        ctx.turn_counter += 1
        record = {
            "schema": SNAPSHOT_SCHEMA,
            "session_id": ctx.session_id,
            "user_id": ctx.user_id,
            "turn_counter": ctx.turn_counter,
            "session_scope": {k: _encode_value(v) for k, v in ctx.session_scope.items()},
            "long_term_scope": {k: _encode_value(v) for k, v in ctx.long_term_scope.items()},
            "dialogue_cursor": list(ctx.dialogue_cursor) if ctx.dialogue_cursor else None,
            "per_topic_memory": {
                topic: {
                    "last_state": mem.last_state,
                    "last_entity": mem.last_entity.to_dict() if mem.last_entity else None,
                }
                for topic, mem in ctx.per_topic_memory.items()
            },
        }
        try:
            _atomic_write_json(self._session_path(ctx.session_id), record)
            if ctx.user_id:
                _atomic_write_json(
                    self._user_path(ctx.user_id),
                    {
                        "schema": SNAPSHOT_SCHEMA,
                        "user_id": ctx.user_id,
                        "long_term_scope": {
                            k: _encode_value(v) for k, v in ctx.long_term_scope.items()
                        },
                    },
                )
        except OSError as exc:
            raise PersistenceError(f"cannot write snapshot for {ctx.session_id!r}: {exc}") from exc
        return f"{ctx.session_id}#{ctx.turn_counter}"

    def restore(self, session_id: str) -> Context:
        """Rebuild a Context from the latest snapshot, or a fresh one if none exists."""
        path = self._session_path(session_id)
        if not path.is_file():
            return Context(session_id=session_id)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
            if raw.get("schema") != SNAPSHOT_SCHEMA:
                raise ValueError(f"unsupported schema {raw.get('schema')!r}")
            cursor = raw.get("dialogue_cursor")
            ctx = Context(
                session_id=raw["session_id"],
                user_id=raw.get("user_id"),
                session_scope={k: _decode_value(v) for k, v in raw["session_scope"].items()},
                long_term_scope={k: _decode_value(v) for k, v in raw["long_term_scope"].items()},
                dialogue_cursor=tuple(cursor) if cursor else None,
                turn_counter=int(raw["turn_counter"]),
            )
            for topic, mem in raw.get("per_topic_memory", {}).items():
                ctx.per_topic_memory[topic] = TopicMemory(
                    last_state=mem.get("last_state"),
                    last_entity=Entity.from_dict(mem["last_entity"]) if mem.get("last_entity") else None,
                )
            return ctx
        except (ValueError, KeyError, TypeError) as exc:
            raise CorruptSnapshotError(session_id, str(exc)) from exc

    def load_long_term(self, user_id: str) -> dict:
        """Return the persisted long-term scope for `user_id` ({} if none)."""
        path = self._user_path(user_id)
        if not path.is_file():
            return {}
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
            return {k: _decode_value(v) for k, v in raw.get("long_term_scope", {}).items()}
        except (ValueError, KeyError, TypeError) as exc:
            raise CorruptSnapshotError(user_id, str(exc)) from exc


def _safe_name(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in name)


def _atomic_write_json(path: Path, record: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(record, fh, ensure_ascii=False)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
