"""Per-session event log and the dialogue quality metrics computed from it.

Every turn appends one event (timestamp, module, topic, state, gates) to
`logs/<session_id>.jsonl`; ratings append a rating event. The metrics
aggregate per topic:

* rating -- a conversation's stars are assigned to every topic dialogue
  visited in that conversation, then averaged per topic;
* time and turns -- measured per dialogue span, from the first turn of a
  structured topic dialogue until a different module (or topic) is
  recognized, using server receive timestamps of the first and last turn
  attributed to the span.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path


@dataclass(frozen=True)
class TurnEvent:
    ts: float
    turn_counter: int
    module: str
    topic: str | None = None
    state: str | None = None
    intent: str | None = None
    confident: bool = True
    profane: bool = False
    text: str = ""
    response: str = ""
    trace: tuple[str, ...] = ()


@dataclass(frozen=True)
class RatingEvent:
    ts: float
    stars: int
    topics_visited: tuple[str, ...] = ()


@dataclass
class TopicMetrics:
    topic: str
    ratings: list[int] = field(default_factory=list)
    span_seconds: list[float] = field(default_factory=list)
    span_turns: list[int] = field(default_factory=list)

    @property
    def average_rating(self) -> float | None:
        return sum(self.ratings) / len(self.ratings) if self.ratings else None

    @property
    def average_seconds(self) -> float | None:
        return sum(self.span_seconds) / len(self.span_seconds) if self.span_seconds else None

    @property
    def average_turns(self) -> float | None:
        return sum(self.span_turns) / len(self.span_turns) if self.span_turns else None

    def as_row(self) -> dict:
        return {
            "topic": self.topic,
            "rating": self.average_rating,
            "seconds": self.average_seconds,
            "turns": self.average_turns,
        }


class SessionLog:
    """Append-only JSONL event store under `<data_dir>/logs/`."""

    def __init__(self, data_dir):
        self.logs_dir = Path(data_dir) / "logs"

    def _path(self, session_id: str) -> Path:
        safe = "".join(c if c.isalnum() or c in "-_." else "_" for c in session_id)
        return self.logs_dir / f"{safe}.jsonl"

    def append_turn(self, session_id: str, event: TurnEvent) -> None:
        record = {
            "kind": "turn",
            "ts": event.ts,
            "turn_counter": event.turn_counter,
            "module": event.module,
            "topic": event.topic,
            "state": event.state,
            "intent": event.intent,
            "confident": event.confident,
            "profane": event.profane,
            "text": event.text,
            "response": event.response,
            "trace": list(event.trace),
        }
        self._append(session_id, record)

    def append_rating(self, session_id: str, event: RatingEvent) -> None:
        self._append(session_id, {
            "kind": "rating",
            "ts": event.ts,
            "stars": event.stars,
            "topics_visited": list(event.topics_visited),
        })

    def _append(self, session_id: str, record: dict) -> None:
        self.logs_dir.mkdir(parents=True, exist_ok=True)
        with self._path(session_id).open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")

    def read_session(self, session_id: str) -> list[dict]:
        path = self._path(session_id)
        if not path.is_file():
            return []
        return _read_jsonl(path)

    def read_all(self) -> dict[str, list[dict]]:
        if not self.logs_dir.is_dir():
            return {}
        out = {}
        for path in sorted(self.logs_dir.glob("*.jsonl")):
            out[path.stem] = _read_jsonl(path)
        return out

    def topics_visited(self, session_id: str) -> list[str]:
        """Distinct structured-dialogue topics of a session, in first-visit order."""
        seen = []
        for record in self.read_session(session_id):
            if record.get("kind") == "turn" and record.get("module") == "structured_topic":
                topic = record.get("topic")
                if topic and topic not in seen:
                    seen.append(topic)
        return seen


def _read_jsonl(path: Path) -> list[dict]:
    records = []
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def dialogue_spans(turn_records: list[dict]) -> list[tuple[str, int, float]]:
    """Collapse one session's turns into (topic, n_turns, seconds) spans.

    A span is a maximal run of consecutive structured-topic turns on the
    same topic; it ends when a different module or topic is recognized.
    Seconds span the receive timestamps of the first and last turn in the
    run.
    """
    spans = []
    current_topic = None
    first_ts = last_ts = 0.0
    count = 0
    for record in turn_records:
        topic = record.get("topic") if record.get("module") == "structured_topic" else None
        if topic != current_topic:
            if current_topic is not None:
                spans.append((current_topic, count, last_ts - first_ts))
            current_topic = topic
            first_ts = record["ts"]
            count = 0
        count += 1
        last_ts = record["ts"]
    if current_topic is not None:
        spans.append((current_topic, count, last_ts - first_ts))
    return spans


def compute_metrics(sessions: dict[str, list[dict]]) -> list[TopicMetrics]:
    """Aggregate per-topic metrics over all sessions; empty input -> []."""
    by_topic: dict[str, TopicMetrics] = {}

    def metrics_for(topic: str) -> TopicMetrics:
        return by_topic.setdefault(topic, TopicMetrics(topic=topic))

    for records in sessions.values():
        turns = [r for r in records if r.get("kind") == "turn"]
        for topic, n_turns, seconds in dialogue_spans(turns):
            m = metrics_for(topic)
            m.span_turns.append(n_turns)
            m.span_seconds.append(seconds)
        for record in records:
            if record.get("kind") == "rating":
                for topic in record.get("topics_visited", []):
                    metrics_for(topic).ratings.append(int(record["stars"]))
    return [by_topic[t] for t in sorted(by_topic)]


def now() -> float:
    return time.time()
