"""Live sessions over HTTP+JSON: humans occupy seats next to agents.

One logical state machine per session (phases waiting -> collecting ->
feedback -> ... -> finished), serialized by a per-session lock. Choices of a
round stay hidden until all six are in; feedback then shows every member's
decision and risk level, and each human acknowledges it before the next
round opens.

Persistence is an append-only JSONL event log per session. Replaying the
human events through the same state machine reproduces the session exactly,
because agent decisions and ball draws are functions of the master seed.
"""

from __future__ import annotations

import json
import secrets
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from fastapi import Body, FastAPI, Header, HTTPException
from fastapi.responses import PlainTextResponse

from .agents import MenuEntry
from .config import ConfigError, parse_session_config
from .engine import (
    GroupRunner,
    HumanSeat,
    RoundRecord,
    SessionConfig,
    records_to_csv,
    records_to_json,
)
from .game import Action, GameError, Position, POSITIONS, initial_box


class SessionStateError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


@dataclass
class _Phase:
    kind: str  # waiting | collecting | feedback | finished
    part: int = 0
    round: int = 0

    def as_dict(self) -> dict:
        return {"kind": self.kind, "part": self.part, "round": self.round}


@dataclass
class _SeatState:
    position: Position
    token: str | None  # None for agent seats
    joined: bool = False


class LiveSession:
    """State machine for one 6-seat group played over the API."""

    def __init__(self, session_id: str, config: SessionConfig, raw_config: dict,
                 log_path: Path | None, clock: Callable[[], float] = time.monotonic):
        if len(config.groups) != 1:
            raise ConfigError("live sessions run one group; create one session per group")
        self.session_id = session_id
        self.config = config
        self.raw_config = raw_config
        self.clock = clock
        self.lock = threading.RLock()
        self._log_path = log_path
        self._recording = True
        self.runner = GroupRunner(config, 0)
        self.paid = self.runner.paid_rounds()
        self.records: list[RoundRecord] = []
        self.phase = _Phase("waiting")
        self.submissions: dict[Position, Action] = {}
        self.timed_out: dict[Position, bool] = {}
        self.acks: set[Position] = set()
        self.history: dict[Position, list[dict]] = {p: [] for p in POSITIONS}
        self._deadline: float | None = None
        self.seats: dict[Position, _SeatState] = {}
        for seat_index, seat in enumerate(config.groups[0]):
            position = POSITIONS[seat_index]
            token = secrets.token_urlsafe(16) if isinstance(seat, HumanSeat) else None
            self.seats[position] = _SeatState(position=position, token=token)

    # -- persistence ------------------------------------------------------

    def _log_event(self, event: dict) -> None:
        if self._recording and self._log_path is not None:
            with open(self._log_path, "a") as fh:
                fh.write(json.dumps(event) + "\n")

    def log_creation(self) -> None:
        self._log_event({
            "type": "created",
            "session_id": self.session_id,
            "config": self.raw_config,
            "join_tokens": {p.value: s.token for p, s in self.seats.items() if s.token},
        })

    # -- helpers ----------------------------------------------------------

    def human_positions(self) -> list[Position]:
        return [p for p, s in self.seats.items() if s.token is not None]

    def seat_by_token(self, token: str | None) -> _SeatState:
        for seat in self.seats.values():
            if seat.token is not None and token == seat.token:
                return seat
        raise SessionStateError(401, "unknown seat token")

    def join_tokens(self) -> dict[str, str]:
        return {p.value: s.token for p, s in self.seats.items() if s.token is not None}

    def _treatment(self):
        return self.runner.treatment_for(self.phase.part)

    def _arm_deadline(self) -> None:
        timeout = self.config.round_timeout_s
        self._deadline = None if timeout is None else self.clock() + timeout

    # -- state machine ----------------------------------------------------

    def start_if_ready(self) -> None:
        if self.phase.kind != "waiting":
            return
        if all(self.seats[p].joined for p in self.human_positions()):
            self._enter_collecting(1, 1)

    def _enter_collecting(self, part: int, round_index: int) -> None:
        if round_index == 1:
            self.runner.start_part(part)
        self.phase = _Phase("collecting", part, round_index)
        self.submissions = {}
        self.timed_out = {}
        self.acks = set()
        self._arm_deadline()
        for position, action in self.runner.agent_decisions(part, round_index).items():
            self.submissions[position] = action
            self._log_event({"type": "choice", "part": part, "round": round_index,
                             "position": position.value, "action": action.value,
                             "source": "agent"})
        self._maybe_resolve()

    def _maybe_resolve(self) -> None:
        if self.phase.kind != "collecting" or len(self.submissions) < 6:
            return
        part, round_index = self.phase.part, self.phase.round
        result = self.runner.resolve_round(part, round_index, self.submissions)
        new_records = self.runner.records_for(result, self.paid, self.timed_out)
        self.records.extend(new_records)
        for record in new_records:
            self.history[Position(record.position)].append({
                "part": record.part, "round": record.round, "action": record.action,
                "loss_probability": record.loss_probability, "draw": record.draw,
                "payoff": record.payoff, "paid_round": record.paid_round,
            })
        self.phase = _Phase("feedback", part, round_index)
        self._arm_deadline()
        self._maybe_advance_feedback()

    def _maybe_advance_feedback(self) -> None:
        if self.phase.kind != "feedback":
            return
        waiting = [p for p in self.human_positions() if p not in self.acks]
        if waiting:
            return
        part, round_index = self.phase.part, self.phase.round
        if round_index < self.config.rounds_per_part:
            self._enter_collecting(part, round_index + 1)
        elif part == 1:
            self._enter_collecting(2, 1)
        else:
            self.phase = _Phase("finished", 2, self.config.rounds_per_part)
            self._deadline = None
            self._log_event({"type": "finished"})

    def check_timeout(self) -> None:
        if self._deadline is None or self.clock() < self._deadline:
            return
        if self.phase.kind == "collecting":
            part, round_index = self.phase.part, self.phase.round
            for position in self.human_positions():
                if position not in self.submissions:
                    self.submissions[position] = Action.NO_BUY
                    self.timed_out[position] = True
                    self._log_event({"type": "choice", "part": part,
                                     "round": round_index, "position": position.value,
                                     "action": Action.NO_BUY.value, "source": "timeout"})
            self._maybe_resolve()
        elif self.phase.kind == "feedback":
            for position in self.human_positions():
                self.acks.add(position)
            self._maybe_advance_feedback()

    # -- api operations ---------------------------------------------------

    def join(self, token: str) -> dict:
        with self.lock:
            seat = self.seat_by_token(token)
            if not seat.joined:
                seat.joined = True
                self._log_event({"type": "joined", "position": seat.position.value})
                self.start_if_ready()
            return self.state_view(token)

    def submit_choice(self, token: str, part: int, round_index: int, action: str) -> dict:
        with self.lock:
            seat = self.seat_by_token(token)
            self.check_timeout()
            if self.phase.kind != "collecting":
                raise SessionStateError(409, f"not collecting (phase {self.phase.kind})")
            if (part, round_index) != (self.phase.part, self.phase.round):
                raise SessionStateError(
                    409, f"expected part {self.phase.part} round {self.phase.round}")
            try:
                act = Action(action)
            except ValueError:
                raise SessionStateError(400, f"unknown action {action!r}") from None
            if act not in self._treatment().actions():
                raise SessionStateError(
                    400, f"{action} is not available in {self._treatment().label}")
            if seat.position in self.submissions:
                raise SessionStateError(409, "choice already submitted for this round")
            self.submissions[seat.position] = act
            self._log_event({"type": "choice", "part": part, "round": round_index,
                             "position": seat.position.value, "action": act.value,
                             "source": "human"})
            self._maybe_resolve()
            return {"ok": True, "phase": self.phase.as_dict()}

    def ack_feedback(self, token: str, part: int, round_index: int) -> dict:
        with self.lock:
            seat = self.seat_by_token(token)
            self.check_timeout()
            if self.phase.kind != "feedback":
                raise SessionStateError(409, f"not in feedback (phase {self.phase.kind})")
            if (part, round_index) != (self.phase.part, self.phase.round):
                raise SessionStateError(
                    409, f"expected part {self.phase.part} round {self.phase.round}")
            if seat.position not in self.acks:
                self.acks.add(seat.position)
                self._log_event({"type": "ack", "part": part, "round": round_index,
                                 "position": seat.position.value})
                self._maybe_advance_feedback()
            return {"ok": True, "phase": self.phase.as_dict()}

    def state_view(self, token: str) -> dict:
        with self.lock:
            seat = self.seat_by_token(token)
            self.check_timeout()
            position = seat.position
            view: dict[str, Any] = {
                "session_id": self.session_id,
                "phase": self.phase.as_dict(),
                "position": position.value,
                "degree": self.config.topology.degree(position),
                "history": list(self.history[position]),
            }
            if self.phase.kind == "waiting":
                missing = [p.value for p in self.human_positions()
                           if not self.seats[p].joined]
                view["waiting_for"] = missing
                return view

            treatment = self._treatment()
            box = initial_box(self.config.topology.degree(position), self.config.params)
            view["treatment"] = treatment.label
            view["box"] = {"red": box.red, "brown": box.brown, "green": box.green}
            view["loss_probability"] = box.loss_probability
            view["menu"] = [
                {"action": e.action.value, "cost": e.cost,
                 "own_red_conversion": e.own_red_conversion}
                for e in self._menu(position)
            ]

            prev = self.runner.prev
            if self.phase.kind == "collecting":
                view["submitted"] = position in self.submissions
                view["previous_round"] = self._members_view(prev) if prev else None
            elif self.phase.kind == "feedback":
                view["acknowledged"] = position in self.acks
                view["feedback"] = self._members_view(prev)
            elif self.phase.kind == "finished":
                view["final"] = self._final_view(position)
            return view

    def _menu(self, position: Position) -> tuple[MenuEntry, ...]:
        from .agents import menu_for
        return menu_for(self._treatment(), self.config.topology.degree(position),
                        self.config.params)

    def _members_view(self, result) -> dict:
        return {
            "part": result.part,
            "round": result.round,
            "members": [
                {"position": p.value, "action": result.profile[p].value,
                 "loss_probability": result.loss_probs[p]}
                for p in POSITIONS
            ],
        }

    def _final_view(self, position: Position) -> dict:
        paid_records = [h for h in self.history[position] if h["paid_round"]]
        return {
            "paid_rounds": {str(part): rnd for part, rnd in self.paid.items()},
            "paid_payoffs": [
                {"part": h["part"], "round": h["round"], "payoff": h["payoff"]}
                for h in paid_records
            ],
            "total_payoff": sum(h["payoff"] for h in paid_records),
        }

    def completed_records(self) -> list[RoundRecord]:
        with self.lock:
            return list(self.records)


def replay_session(session_id: str, log_path: Path,
                   clock: Callable[[], float] = time.monotonic) -> LiveSession:
    """Rebuild a session from its event log (agent moves and draws recompute)."""
    events = [json.loads(line) for line in log_path.read_text().splitlines() if line]
    if not events or events[0]["type"] != "created":
        raise ConfigError(f"event log {log_path} lacks a creation event")
    created = events[0]
    config = parse_session_config(created["config"])
    session = LiveSession(session_id, config, created["config"], log_path, clock)
    session._recording = False
    # restore the original seat tokens
    for pos_label, token in created.get("join_tokens", {}).items():
        session.seats[Position(pos_label)].token = token
    for event in events[1:]:
        kind = event["type"]
        if kind == "joined":
            seat = session.seats[Position(event["position"])]
            seat.joined = True
            session.start_if_ready()
        elif kind == "choice" and event["source"] in ("human", "timeout"):
            position = Position(event["position"])
            session.submissions[position] = Action(event["action"])
            if event["source"] == "timeout":
                session.timed_out[position] = True
            session._maybe_resolve()
        elif kind == "ack":
            session.acks.add(Position(event["position"]))
            session._maybe_advance_feedback()
        # agent choices and the finished marker recompute deterministically
    session._recording = True
    return session


class SessionStore:
    """All live sessions of one service instance, with optional persistence."""

    def __init__(self, store_dir: str | Path | None = None):
        self.store_dir = Path(store_dir) if store_dir else None
        if self.store_dir:
            self.store_dir.mkdir(parents=True, exist_ok=True)
        self.sessions: dict[str, LiveSession] = {}
        self.lock = threading.Lock()

    def _log_path(self, session_id: str) -> Path | None:
        return self.store_dir / f"{session_id}.jsonl" if self.store_dir else None

    def create(self, config_doc: dict, session_id: str | None = None,
               clock: Callable[[], float] = time.monotonic) -> LiveSession:
        config = parse_session_config(config_doc)
        with self.lock:
            sid = session_id or f"live-{secrets.token_hex(4)}"
            if sid in self.sessions:
                raise SessionStateError(409, f"session {sid!r} already exists")
            log_path = self._log_path(sid)
            if log_path is not None and log_path.exists():
                raise SessionStateError(409, f"session log for {sid!r} already exists")
            session = LiveSession(sid, config, config_doc, log_path, clock)
            self.sessions[sid] = session
        session.log_creation()
        with session.lock:
            session.start_if_ready()
        return session

    def get(self, session_id: str) -> LiveSession:
        with self.lock:
            session = self.sessions.get(session_id)
        if session is None:
            session = self.recover(session_id)
        if session is None:
            raise SessionStateError(404, f"unknown session {session_id!r}")
        return session

    def recover(self, session_id: str) -> LiveSession | None:
        if self.store_dir is None:
            return None
        log_path = self._log_path(session_id)
        if log_path is None or not log_path.exists():
            return None
        session = replay_session(session_id, log_path)
        with self.lock:
            self.sessions[session_id] = session
        return session


def create_app(store_dir: str | Path | None = None,
               clock: Callable[[], float] = time.monotonic) -> FastAPI:
    app = FastAPI(title="netprotect live sessions")
    store = SessionStore(store_dir)
    app.state.store = store

    def _wrap(fn):
        try:
            return fn()
        except SessionStateError as exc:
            raise HTTPException(status_code=exc.status, detail=str(exc)) from exc
        except (ConfigError, GameError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.post("/sessions", status_code=201)
    def create_session(body: dict = Body(...)):
        def run():
            session = store.create(body.get("config", {}), body.get("session_id"),
                                   clock=clock)
            return {
                "session_id": session.session_id,
                "join_tokens": session.join_tokens(),
                "phase": session.phase.as_dict(),
            }
        return _wrap(run)

    @app.get("/sessions/{session_id}/status")
    def status(session_id: str):
        def run():
            session = store.get(session_id)
            with session.lock:
                session.check_timeout()
                return {"session_id": session.session_id,
                        "phase": session.phase.as_dict()}
        return _wrap(run)

    @app.post("/sessions/{session_id}/join")
    def join(session_id: str, body: dict = Body(...)):
        return _wrap(lambda: store.get(session_id).join(body.get("token", "")))

    @app.get("/sessions/{session_id}/state")
    def state(session_id: str, x_seat_token: str | None = Header(default=None)):
        return _wrap(lambda: store.get(session_id).state_view(x_seat_token))

    @app.post("/sessions/{session_id}/choice")
    def choice(session_id: str, body: dict = Body(...),
               x_seat_token: str | None = Header(default=None)):
        def run():
            return store.get(session_id).submit_choice(
                x_seat_token, int(body.get("part", 0)), int(body.get("round", 0)),
                str(body.get("action", "")))
        return _wrap(run)

    @app.post("/sessions/{session_id}/ack")
    def ack(session_id: str, body: dict = Body(...),
            x_seat_token: str | None = Header(default=None)):
        def run():
            return store.get(session_id).ack_feedback(
                x_seat_token, int(body.get("part", 0)), int(body.get("round", 0)))
        return _wrap(run)

    @app.get("/sessions/{session_id}/log")
    def download_log(session_id: str, fmt: str = "csv"):
        def run():
            records = store.get(session_id).completed_records()
            if fmt == "jsonl":
                lines = records_to_json(records)
                return PlainTextResponse(lines, media_type="application/json")
            if fmt == "csv":
                return PlainTextResponse(records_to_csv(records), media_type="text/csv")
            raise SessionStateError(400, f"unknown log format {fmt!r}")
        return _wrap(run)

    return app
