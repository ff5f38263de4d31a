"""Session engine: two 10-round parts, feedback, random paid rounds.

Reproducibility contract: one master seed fans out into keyed substreams
(group, part, round, position), so adding groups or replications never
perturbs the draws of existing ones. The per-round stepping lives in
`GroupRunner` and is shared verbatim by the live HTTP service, which is what
makes a zero-human live session equal a batch run record for record.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .agents import AgentSpec, Observation, decide, menu_for
from .game import (
    Action,
    BallBox,
    GameError,
    GameParameters,
    Position,
    POSITIONS,
    Topology,
    Treatment,
    apply_profile,
    default_topology,
    draw_ball,
)

ROUNDS_PER_PART = 10

#: Session type -> treatment labels of (part 1, part 2).
SESSION_TYPES: dict[str, tuple[str, str]] = {
    "ind_then_net_baseline": ("bas-ind", "bas-net"),
    "net_then_ind_baseline": ("bas-net", "bas-ind"),
    "ind_then_net_decoy": ("dec-ind", "dec-net"),
    "net_then_ind_decoy": ("dec-net", "dec-ind"),
}

# stream tags keeping the keyed substreams disjoint
_TAG_DRAW = 0
_TAG_PAID = 1
_TAG_AGENT_SEED = 2
_TAG_REASSIGN = 3


@dataclass(frozen=True)
class HumanSeat:
    """Marker for a seat occupied by a live participant."""


Seat = AgentSpec | HumanSeat


@dataclass
class SessionConfig:
    session_id: str
    session_type: str
    groups: list[list[Seat]]
    rounds_per_part: int = ROUNDS_PER_PART
    topology: Topology | None = None
    params: GameParameters | None = None
    master_seed: int = 0
    #: Re-draw the seat -> position map for part 2 (the lab kept it fixed).
    reassign_positions: bool = False
    #: Live-service only: seconds before an absent human defaults to NoBuy.
    round_timeout_s: float | None = None

    def __post_init__(self) -> None:
        if self.session_type not in SESSION_TYPES:
            raise GameError(f"unknown session type {self.session_type!r}")
        if not self.groups:
            raise GameError("session needs at least one group")
        for seats in self.groups:
            if len(seats) != 6:
                raise GameError("every group needs exactly 6 seats")
        if self.topology is None:
            self.topology = default_topology()
        if self.params is None:
            self.params = GameParameters()

    def treatments(self) -> tuple[Treatment, Treatment]:
        first, second = SESSION_TYPES[self.session_type]
        return Treatment.from_label(first), Treatment.from_label(second)

    def has_humans(self) -> bool:
        return any(isinstance(s, HumanSeat) for g in self.groups for s in g)


@dataclass(frozen=True)
class RoundRecord:
    """One position's outcome in one round; the unit of the choice log."""

    session_id: str
    group_id: int
    part: int
    treatment: str
    round: int
    position: str
    degree: int
    action: str
    loss_probability: float
    draw: str
    payoff: int
    paid_round: bool
    timed_out: bool = False


CSV_COLUMNS = (
    "session_id", "group_id", "part", "treatment", "round", "position",
    "degree", "action", "loss_probability", "draw", "payoff", "paid_round",
    "timed_out",
)


def _stream(*key: int) -> np.random.Generator:
    return np.random.default_rng(list(key))


def derived_agent_seed(master_seed: int, group_id: int, seat_index: int) -> int:
    seq = np.random.SeedSequence([master_seed, _TAG_AGENT_SEED, group_id, seat_index])
    return int(seq.generate_state(1)[0])


def effective_agent(seat: Seat, master_seed: int, group_id: int, seat_index: int) -> AgentSpec:
    if isinstance(seat, HumanSeat):
        raise GameError("human seats cannot be auto-played")
    if seat.seed is not None:
        return seat
    return replace(seat, seed=derived_agent_seed(master_seed, group_id, seat_index))


def paid_round_for(master_seed: int, group_id: int, part: int, rounds: int) -> int:
    """Uniform paid round in 1..rounds for one group and part."""
    rng = _stream(master_seed, _TAG_PAID, group_id, part)
    return int(rng.integers(1, rounds + 1))


def build_observation(
    position: Position,
    treatment: Treatment,
    topology: Topology,
    params: GameParameters,
    part_index: int,
    round_index: int,
    prev_profile: Mapping[Position, Action] | None,
    prev_loss_probs: Mapping[Position, float] | None,
) -> Observation:
    """Feedback causality: round r sees exactly round r-1, nothing newer."""
    degree = topology.degree(position)
    return Observation(
        position=position,
        degree=degree,
        menu=menu_for(treatment, degree, params),
        treatment=treatment,
        topology=topology,
        params=params,
        round_index=round_index,
        part_index=part_index,
        prev_profile=prev_profile,
        prev_loss_probs=prev_loss_probs,
    )


@dataclass
class RoundResult:
    part: int
    round: int
    treatment: str
    profile: dict[Position, Action]
    boxes: dict[Position, BallBox]
    loss_probs: dict[Position, float]
    draws: dict[Position, str]
    payoffs: dict[Position, int]


class GroupRunner:
    """Round stepping for one 6-seat group, shared by batch and live modes."""

    def __init__(self, config: SessionConfig, group_id: int):
        self.config = config
        self.group_id = group_id
        self.seat_positions = self._positions_for_part(1)
        self.prev: RoundResult | None = None

    def _positions_for_part(self, part: int) -> list[Position]:
        if part == 2 and self.config.reassign_positions:
            rng = _stream(self.config.master_seed, _TAG_REASSIGN, self.group_id)
            order = rng.permutation(6)
            return [POSITIONS[i] for i in order]
        return list(POSITIONS)

    def start_part(self, part: int) -> None:
        self.seat_positions = self._positions_for_part(part)
        self.prev = None  # a new treatment starts with a fresh screen

    def treatment_for(self, part: int) -> Treatment:
        return self.config.treatments()[part - 1]

    def observation(self, position: Position, part: int, round_index: int) -> Observation:
        return build_observation(
            position,
            self.treatment_for(part),
            self.config.topology,
            self.config.params,
            part,
            round_index,
            None if self.prev is None else self.prev.profile,
            None if self.prev is None else self.prev.loss_probs,
        )

    def agent_decisions(self, part: int, round_index: int) -> dict[Position, Action]:
        """Decisions for every agent seat (skips human seats)."""
        out: dict[Position, Action] = {}
        for seat_index, seat in enumerate(self.config.groups[self.group_id]):
            if isinstance(seat, HumanSeat):
                continue
            position = self.seat_positions[seat_index]
            agent = effective_agent(seat, self.config.master_seed, self.group_id, seat_index)
            out[position] = decide(agent, self.observation(position, part, round_index))
        return out

    def resolve_round(
        self, part: int, round_index: int, profile: Mapping[Position, Action]
    ) -> RoundResult:
        treatment = self.treatment_for(part)
        boxes = apply_profile(self.config.topology, treatment, self.config.params, profile)
        draws: dict[Position, str] = {}
        payoffs: dict[Position, int] = {}
        for pos_index, p in enumerate(POSITIONS):
            rng = _stream(self.config.master_seed, _TAG_DRAW, self.group_id,
                          part, round_index, pos_index)
            colour = draw_ball(boxes[p], rng)
            pay = self.config.params.endowment - self.config.params.cost(profile[p])
            if colour != "green":
                pay -= self.config.params.loss
            draws[p] = colour
            payoffs[p] = pay
        result = RoundResult(
            part=part,
            round=round_index,
            treatment=treatment.label,
            profile=dict(profile),
            boxes=boxes,
            loss_probs={p: boxes[p].loss_probability for p in POSITIONS},
            draws=draws,
            payoffs=payoffs,
        )
        self.prev = result
        return result

    def records_for(self, result: RoundResult, paid_rounds: Mapping[int, int],
                    timed_out: Mapping[Position, bool] | None = None) -> list[RoundRecord]:
        timed_out = timed_out or {}
        return [
            RoundRecord(
                session_id=self.config.session_id,
                group_id=self.group_id,
                part=result.part,
                treatment=result.treatment,
                round=result.round,
                position=p.value,
                degree=self.config.topology.degree(p),
                action=result.profile[p].value,
                loss_probability=result.loss_probs[p],
                draw=result.draws[p],
                payoff=result.payoffs[p],
                paid_round=paid_rounds[result.part] == result.round,
                timed_out=bool(timed_out.get(p, False)),
            )
            for p in POSITIONS
        ]

    def paid_rounds(self) -> dict[int, int]:
        return {
            part: paid_round_for(self.config.master_seed, self.group_id, part,
                                 self.config.rounds_per_part)
            for part in (1, 2)
        }


def run_session(config: SessionConfig) -> list[RoundRecord]:
    """Run every group of an all-agent session; deterministic given the seed."""
    if config.has_humans():
        raise GameError("run_session is batch-only; human seats need the live service")
    records: list[RoundRecord] = []
    for group_id in range(len(config.groups)):
        runner = GroupRunner(config, group_id)
        paid = runner.paid_rounds()
        for part in (1, 2):
            runner.start_part(part)
            for round_index in range(1, config.rounds_per_part + 1):
                profile = runner.agent_decisions(part, round_index)
                result = runner.resolve_round(part, round_index, profile)
                records.extend(runner.records_for(result, paid))
    return records


def records_to_csv(records: Iterable[RoundRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        d = asdict(r)
        writer.writerow([
            d["session_id"], d["group_id"], d["part"], d["treatment"], d["round"],
            d["position"], d["degree"], d["action"], repr(d["loss_probability"]),
            d["draw"], d["payoff"], str(d["paid_round"]).lower(),
            str(d["timed_out"]).lower(),
        ])
    return buf.getvalue()


def records_to_json(records: Iterable[RoundRecord]) -> str:
    return json.dumps([asdict(r) for r in records], indent=2)


def records_from_csv(text: str) -> list[RoundRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise GameError(f"unexpected log columns: {reader.fieldnames}")
    out = []
    for row in reader:
        out.append(RoundRecord(
            session_id=row["session_id"],
            group_id=int(row["group_id"]),
            part=int(row["part"]),
            treatment=row["treatment"],
            round=int(row["round"]),
            position=row["position"],
            degree=int(row["degree"]),
            action=row["action"],
            loss_probability=float(row["loss_probability"]),
            draw=row["draw"],
            payoff=int(row["payoff"]),
            paid_round=row["paid_round"] == "true",
            timed_out=row["timed_out"] == "true",
        ))
    return out


def summarize_actions(records: Iterable[RoundRecord]) -> dict[str, dict[str, float]]:
    """Aggregate action shares per treatment label."""
    counts: dict[str, dict[str, int]] = {}
    for r in records:
        bucket = counts.setdefault(r.treatment, {a.value: 0 for a in Action})
        bucket[r.action] += 1
    out: dict[str, dict[str, float]] = {}
    for label, bucket in sorted(counts.items()):
        total = sum(bucket.values())
        out[label] = {a: n / total for a, n in bucket.items()}
        out[label]["total"] = total
    return out


def batch(
    configs: Sequence[SessionConfig],
    replications: int,
    seed_schedule: Sequence[int],
) -> tuple[list[RoundRecord], dict[str, dict[str, float]]]:
    """Independent seeded replications of each config, plus action shares."""
    if not configs or replications < 1:
        raise GameError("batch needs at least one config and one replication")
    if len(seed_schedule) < replications:
        raise GameError("seed schedule shorter than the replication count")
    records: list[RoundRecord] = []
    for config in configs:
        for rep in range(replications):
            run_cfg = replace(
                config,
                session_id=f"{config.session_id}-r{rep}" if replications > 1 else config.session_id,
                master_seed=seed_schedule[rep],
            )
            records.extend(run_session(run_cfg))
    return records, summarize_actions(records)
