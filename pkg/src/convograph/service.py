"""Session-oriented HTTP façade over the engine.

Endpoints (JSON bodies, one document per request/response):

* ``POST /sessions``                 {user_id?} -> {session_id}
* ``POST /sessions/{id}/turns``      TurnRequest -> TurnResponse
* ``POST /sessions/{id}/rating``     {stars} -> {ok, stars, topics_visited}
* ``GET  /metrics``                  per-topic averages (rating, seconds, turns)
* ``GET  /healthz``                  {ok: true}

Turns within one session are serialized with a per-session lock; distinct
sessions run in parallel (ThreadingHTTPServer). A static directory can be
mounted at ``/`` for the browser chat client.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .analysis import AsrHypothesis
from .context import Context
from .engine import Engine, EngineConfig
from .errors import ConvographError


class ValidationError(ValueError):
    pass


def parse_turn_request(body: dict) -> tuple[str | None, list[AsrHypothesis] | None, str | None]:
    """Validate a TurnRequest body -> (text, hypotheses, user_id)."""
    if not isinstance(body, dict):
        raise ValidationError("request body must be a JSON object")
    text = body.get("text")
    raw_hyps = body.get("asr_hypotheses")
    user_id = body.get("user_id")
    if text is not None and not isinstance(text, str):
        raise ValidationError("text must be a string")
    if user_id is not None and not isinstance(user_id, str):
        raise ValidationError("user_id must be a string")
    hypotheses = None
    if raw_hyps is not None:
        if not isinstance(raw_hyps, list) or not raw_hyps:
            raise ValidationError("asr_hypotheses must be a non-empty list")
        if len(raw_hyps) > 5:
            raise ValidationError("at most 5 ASR hypotheses are accepted")
        hypotheses = []
        for rank, raw in enumerate(raw_hyps):
            tokens = raw.get("tokens") if isinstance(raw, dict) else None
            if not isinstance(tokens, list) or not tokens:
                raise ValidationError("each hypothesis needs a non-empty tokens list")
            parsed = []
            for tok in tokens:
                if not isinstance(tok, dict) or "text" not in tok or "confidence" not in tok:
                    raise ValidationError("hypothesis tokens need text and confidence")
                conf = tok["confidence"]
                if not isinstance(conf, (int, float)) or not 0.0 <= float(conf) <= 1.0:
                    raise ValidationError("confidences must be numbers in [0, 1]")
                parsed.append((str(tok["text"]), float(conf)))
            hypotheses.append(AsrHypothesis(tokens=tuple(parsed), rank=int(raw.get("rank", rank))))
        ranks = [h.rank for h in hypotheses]
        if len(set(ranks)) != len(ranks):
            raise ValidationError("hypothesis ranks must be unique")
    if not text and hypotheses is None:
        raise ValidationError("either text or asr_hypotheses is required")
    return text, hypotheses, user_id


class ChatService:
    """Thread-safe session registry around one Engine."""

    def __init__(self, engine: Engine):
        self.engine = engine
        self._sessions: dict[str, Context] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def _session_lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    def create_session(self, user_id: str | None = None) -> dict:
        session_id = self.engine.create_session(user_id)
        with self._registry_lock:
            self._sessions[session_id] = self.engine.restore_session(session_id)
            self._locks.setdefault(session_id, threading.Lock())
        return {"session_id": session_id}

    def post_turn(self, session_id: str, body: dict) -> dict:
        text, hypotheses, user_id = parse_turn_request(body)
        lock = self._session_lock(session_id)
        with lock:
            ctx = self._sessions.get(session_id)
            if ctx is None:
                if not self.engine.session_exists(session_id):
                    raise KeyError(session_id)
                ctx = self.engine.restore_session(session_id)
                self._sessions[session_id] = ctx
            result = self.engine.process_turn(ctx, text=text, hypotheses=hypotheses,
                                              user_id=user_id)
        return {
            "response": result.response,
            "trace": result.trace_dict(),
            "turn_counter": result.turn_counter,
            "steps": list(result.trace),
        }

    def submit_rating(self, session_id: str, body: dict) -> dict:
        if not isinstance(body, dict) or "stars" not in body:
            raise ValidationError("body must contain stars")
        stars = body["stars"]
        if not isinstance(stars, int) or isinstance(stars, bool):
            raise ValidationError("stars must be an integer")
        if not self.engine.session_exists(session_id):
            raise KeyError(session_id)
        try:
            event = self.engine.submit_rating(session_id, stars)
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc
        return {"ok": True, "stars": event.stars, "topics_visited": list(event.topics_visited)}

    def metrics(self) -> dict:
        return {"topics": [m.as_row() for m in self.engine.metrics()]}


_STATIC_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


class _Handler(BaseHTTPRequestHandler):
    service: ChatService = None  # set by make_server
    static_dir: Path | None = None

    # quiet request logging; tests and the REPL share stderr
    def log_message(self, fmt, *args):
        pass

    def _send_json(self, status: int, payload: dict) -> None:
        data = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return {}
        raw = self.rfile.read(length)
        try:
            return json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ValidationError(f"invalid JSON body: {exc}") from exc

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()

    def do_GET(self):
        if self.path == "/healthz":
            self._send_json(200, {"ok": True})
        elif self.path == "/metrics":
            self._send_json(200, self.service.metrics())
        elif self.static_dir is not None:
            self._serve_static()
        else:
            self._send_json(404, {"error": "not found"})

    def do_POST(self):
        try:
            body = self._read_body()
            parts = [p for p in self.path.split("/") if p]
            if parts == ["sessions"]:
                self._send_json(200, self.service.create_session(body.get("user_id")))
            elif len(parts) == 3 and parts[0] == "sessions" and parts[2] == "turns":
                self._send_json(200, self.service.post_turn(parts[1], body))
            elif len(parts) == 3 and parts[0] == "sessions" and parts[2] == "rating":
                self._send_json(200, self.service.submit_rating(parts[1], body))
            else:
                self._send_json(404, {"error": "not found"})
        except ValidationError as exc:
            self._send_json(400, {"error": str(exc)})
        except KeyError as exc:
            self._send_json(404, {"error": f"unknown session {exc.args[0]!r}"})
        except ConvographError as exc:
            self._send_json(500, {"error": str(exc)})

    def _serve_static(self):
        rel = self.path.lstrip("/") or "index.html"
        rel = rel.split("?", 1)[0]
        target = (self.static_dir / rel).resolve()
        if not str(target).startswith(str(self.static_dir.resolve())) or not target.is_file():
            self._send_json(404, {"error": "not found"})
            return
        data = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", _STATIC_TYPES.get(target.suffix, "application/octet-stream"))
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)


def make_server(engine: Engine, host: str | None = None, port: int | None = None) -> ThreadingHTTPServer:
    """Build (but do not start) the HTTP server; port 0 picks a free port."""
    service = ChatService(engine)
    handler = type("Handler", (_Handler,), {
        "service": service,
        "static_dir": engine.config.static_dir,
    })
    cfg = engine.config
    return ThreadingHTTPServer(
        (host if host is not None else cfg.host, port if port is not None else cfg.port),
        handler,
    )


def serve(config: EngineConfig) -> None:
    engine = Engine(config)
    server = make_server(engine)
    host, port = server.server_address[:2]
    print(f"convograph service listening on http://{host}:{port}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
