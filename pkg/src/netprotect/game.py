"""Core mechanics of the 6-player network protection game.

Six players sit on fixed network positions A..F. Each round every player
owns a box of 100 balls (red/brown/green); one ball is drawn per player and
a red or brown draw costs the loss amount. Players may buy protection
tokens that convert balls to green in their own box and, when externalities
are enabled, in other members' boxes.

Everything in this module is a pure function of its inputs; randomness is
an explicit generator argument, never ambient state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

import numpy as np


class Position(str, Enum):
    """Network seat label. The degree map A..F -> (1,3,2,3,2,1) is fixed."""

    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"
    F = "F"

    def __str__(self) -> str:  # so f-strings print "A" not "Position.A"
        return self.value


POSITIONS: tuple[Position, ...] = tuple(Position)

#: Degree each position must have under any admissible topology.
POSITION_DEGREES: dict[Position, int] = {
    Position.A: 1,
    Position.B: 3,
    Position.C: 2,
    Position.D: 3,
    Position.E: 2,
    Position.F: 1,
}


class Action(str, Enum):
    NO_BUY = "no_buy"
    TOKEN_X = "token_x"
    TOKEN_Y = "token_y"

    def __str__(self) -> str:
        return self.value


#: Canonical action order used for profile enumeration and tie-breaking.
ACTION_ORDER: tuple[Action, ...] = (Action.NO_BUY, Action.TOKEN_X, Action.TOKEN_Y)


class GameError(ValueError):
    """Invalid game input (bad degree, malformed profile, bad topology)."""


@dataclass(frozen=True)
class BallBox:
    """Composition of one player's 100-ball box."""

    red: int
    brown: int
    green: int

    def __post_init__(self) -> None:
        if self.red < 0 or self.brown < 0 or self.green < 0:
            raise GameError(f"negative ball count in {self}")
        if self.red + self.brown + self.green != 100:
            raise GameError(f"box must hold exactly 100 balls, got {self}")

    @property
    def loss_probability(self) -> float:
        return (self.red + self.brown) / 100.0

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.red, self.brown, self.green)


@dataclass(frozen=True)
class Treatment:
    """One cell of the 2x2 design: network externalities x decoy option."""

    externalities: bool
    decoy: bool

    @property
    def label(self) -> str:
        return ("dec-" if self.decoy else "bas-") + ("net" if self.externalities else "ind")

    @classmethod
    def from_label(cls, label: str) -> "Treatment":
        try:
            prefix, suffix = label.split("-")
            return cls(externalities={"net": True, "ind": False}[suffix],
                       decoy={"dec": True, "bas": False}[prefix])
        except (ValueError, KeyError):
            raise GameError(f"unknown treatment label {label!r}") from None

    def actions(self) -> tuple[Action, ...]:
        """Admissible actions: Token Y exists only in decoy treatments."""
        return ACTION_ORDER if self.decoy else ACTION_ORDER[:2]


TREATMENTS: tuple[Treatment, ...] = (
    Treatment(externalities=False, decoy=False),  # bas-ind
    Treatment(externalities=True, decoy=False),   # bas-net
    Treatment(externalities=False, decoy=True),   # dec-ind
    Treatment(externalities=True, decoy=True),    # dec-net
)


def _normalize_edge(edge: Iterable[str | Position]) -> tuple[Position, Position]:
    a, b = (Position(str(v)) for v in edge)
    if a == b:
        raise GameError(f"self-loop {a}-{b} not allowed")
    return (a, b) if a.value < b.value else (b, a)


@dataclass(frozen=True)
class Topology:
    """Simple connected 6-node graph whose degree sequence matches the risk tiers.

    The exact edge set is a configuration input; the default below realizes
    the required degrees (A,F: 1; C,E: 2; B,D: 3).
    """

    edges: tuple[tuple[Position, Position], ...]

    def __post_init__(self) -> None:
        edges = tuple(sorted(_normalize_edge(e) for e in self.edges))
        object.__setattr__(self, "edges", edges)
        if len(edges) != 6:
            raise GameError(f"topology needs exactly 6 edges, got {len(edges)}")
        if len(set(edges)) != 6:
            raise GameError("duplicate edges in topology")
        neigh: dict[Position, set[Position]] = {p: set() for p in POSITIONS}
        for a, b in edges:
            neigh[a].add(b)
            neigh[b].add(a)
        for p in POSITIONS:
            if len(neigh[p]) != POSITION_DEGREES[p]:
                raise GameError(
                    f"position {p} must have degree {POSITION_DEGREES[p]}, got {len(neigh[p])}"
                )
        # connectivity (6 nodes, BFS from A)
        seen = {Position.A}
        frontier = [Position.A]
        while frontier:
            seen.update(nxt := [q for p in frontier for q in neigh[p] if q not in seen])
            frontier = nxt
        if len(seen) != 6:
            raise GameError("topology must be connected")
        object.__setattr__(self, "_neighbors", {p: frozenset(neigh[p]) for p in POSITIONS})

    def neighbors(self, p: Position) -> frozenset[Position]:
        return self._neighbors[p]  # type: ignore[attr-defined]

    def degree(self, p: Position) -> int:
        return POSITION_DEGREES[p]


DEFAULT_EDGES = (("A", "B"), ("B", "C"), ("B", "D"), ("C", "D"), ("D", "E"), ("E", "F"))


def default_topology() -> Topology:
    return Topology(tuple(_normalize_edge(e) for e in DEFAULT_EDGES))


def _default_initial_boxes() -> dict[int, BallBox]:
    return {
        1: BallBox(red=15, brown=25, green=60),
        2: BallBox(red=30, brown=25, green=45),
        3: BallBox(red=45, brown=25, green=30),
    }


@dataclass(frozen=True)
class GameParameters:
    """All treatment constants. Defaults are the lab values."""

    endowment: int = 150
    loss: int = 100
    cost_x: int = 32
    cost_y: int = 42
    initial_boxes: dict[int, BallBox] = field(default_factory=_default_initial_boxes)
    own_red_x: dict[int, int] = field(default_factory=lambda: {1: 10, 2: 20, 3: 30})
    own_red_y: dict[int, int] = field(default_factory=lambda: {1: 8, 2: 16, 3: 24})
    ext_brown_per_buyer: int = 5
    ext_red_x_to_nonbuyer: int = 10
    ext_red_y_to_nonbuyer: int = 8
    ext_red_x_to_y_buyer: int = 2
    #: Whether a Y buyer's own box also receives the 5 brown->green conversion.
    y_brown_includes_self: bool = False

    def __post_init__(self) -> None:
        for name in ("endowment", "loss", "cost_x", "cost_y", "ext_brown_per_buyer",
                     "ext_red_x_to_nonbuyer", "ext_red_y_to_nonbuyer", "ext_red_x_to_y_buyer"):
            if getattr(self, name) < 0:
                raise GameError(f"{name} must be non-negative")
        for d in (1, 2, 3):
            if d not in self.initial_boxes:
                raise GameError(f"initial box missing for degree {d}")
            # decoy dominance precondition: Y converts less and costs more
            if not (self.own_red_y[d] < self.own_red_x[d]):
                raise GameError("own_red_y must be strictly below own_red_x for every degree")
        if not (self.cost_y > self.cost_x):
            raise GameError("cost_y must exceed cost_x (dominated decoy)")

    def cost(self, action: Action) -> int:
        if action is Action.TOKEN_X:
            return self.cost_x
        if action is Action.TOKEN_Y:
            return self.cost_y
        return 0

    def own_red_conversion(self, action: Action, degree: int) -> int:
        if action is Action.TOKEN_X:
            return self.own_red_x[degree]
        if action is Action.TOKEN_Y:
            return self.own_red_y[degree]
        return 0


def initial_box(degree: int, params: GameParameters | None = None) -> BallBox:
    """Initial composition for a degree tier (1, 2 or 3)."""
    params = params or GameParameters()
    if degree not in (1, 2, 3):
        raise GameError(f"degree must be 1, 2 or 3, got {degree}")
    return params.initial_boxes[degree]


def validate_profile(profile: Mapping[Position, Action], treatment: Treatment) -> None:
    if set(profile) != set(POSITIONS):
        raise GameError("profile must assign an action to each of the six positions")
    if not treatment.decoy and any(a is Action.TOKEN_Y for a in profile.values()):
        raise GameError("Token Y is not available without the decoy option")


def _convert(box: list[int], source: int, amount: int) -> None:
    # source: 0 = red, 1 = brown; converted balls become green (index 2)
    moved = min(amount, box[source])
    box[source] -= moved
    box[2] += moved


def apply_profile(
    topology: Topology,
    treatment: Treatment,
    params: GameParameters,
    profile: Mapping[Position, Action],
) -> dict[Position, BallBox]:
    """Post-purchase boxes for a simultaneous action profile.

    Per position, starting from the degree tier box:
      1. own effect: a bought token converts its own-schedule count red->green;
      2. externalities on: every other buyer converts `ext_brown_per_buyer`
         brown->green here (a Y buyer also converts in its own box when
         `y_brown_includes_self` is set);
      3. externalities on and this position bought nothing: each X-buying
         neighbour converts 10 red, each Y-buying neighbour 8 red;
      4. externalities on, decoy on and this position bought Y: each X-buying
         neighbour converts 2 red.

    Conversions add up across sources and clamp at the balls available, applied
    in a fixed order (own effect, then brown, then red, buyers scanned A->F) so
    results stay reproducible even for parameterizations where clamping binds.
    """
    validate_profile(profile, treatment)
    boxes: dict[Position, list[int]] = {}
    for p in POSITIONS:
        box = list(initial_box(topology.degree(p), params).as_tuple())
        _convert(box, 0, params.own_red_conversion(profile[p], topology.degree(p)))
        boxes[p] = box

    if treatment.externalities:
        for p in POSITIONS:
            box = boxes[p]
            mine = profile[p]
            for q in POSITIONS:
                if profile[q] is Action.NO_BUY:
                    continue
                includes_me = q != p or (
                    profile[q] is Action.TOKEN_Y and params.y_brown_includes_self
                )
                if includes_me:
                    _convert(box, 1, params.ext_brown_per_buyer)
            if mine is Action.NO_BUY:
                for q in POSITIONS:
                    if q in topology.neighbors(p):
                        if profile[q] is Action.TOKEN_X:
                            _convert(box, 0, params.ext_red_x_to_nonbuyer)
                        elif profile[q] is Action.TOKEN_Y:
                            _convert(box, 0, params.ext_red_y_to_nonbuyer)
            elif mine is Action.TOKEN_Y and treatment.decoy:
                for q in POSITIONS:
                    if q in topology.neighbors(p) and profile[q] is Action.TOKEN_X:
                        _convert(box, 0, params.ext_red_x_to_y_buyer)

    return {p: BallBox(*box) for p, box in boxes.items()}


def loss_probability(box: BallBox) -> float:
    """Chance of drawing a losing (red or brown) ball."""
    return box.loss_probability


def expected_payoff(
    position: Position,
    profile: Mapping[Position, Action],
    boxes: Mapping[Position, BallBox],
    params: GameParameters,
) -> float:
    """Expected ECU: endowment - token cost - loss * loss probability."""
    action = profile[position]
    return params.endowment - params.cost(action) - params.loss * boxes[position].loss_probability


DRAW_COLOURS = ("red", "brown", "green")


def draw_ball(box: BallBox, rng: np.random.Generator) -> str:
    """One categorical draw from the box."""
    r = rng.random() * 100.0
    if r < box.red:
        return "red"
    if r < box.red + box.brown:
        return "brown"
    return "green"


@dataclass(frozen=True)
class RoundOutcome:
    draw: str
    payoff: int


def realize_round(
    boxes: Mapping[Position, BallBox],
    profile: Mapping[Position, Action],
    params: GameParameters,
    rng: np.random.Generator,
) -> dict[Position, RoundOutcome]:
    """Draw one ball per position (A->F order) and settle realized payoffs."""
    out: dict[Position, RoundOutcome] = {}
    for p in POSITIONS:
        colour = draw_ball(boxes[p], rng)
        payoff = params.endowment - params.cost(profile[p])
        if colour != "green":
            payoff -= params.loss
        out[p] = RoundOutcome(draw=colour, payoff=payoff)
    return out
