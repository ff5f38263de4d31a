"""Exhaustive strategic analysis of the protection game.

With six players and at most three actions the full normal form is tiny
(2^6 or 3^6 profiles), so everything here is exact enumeration: best
responses, pure-strategy Nash equilibria, strict dominance and the
utilitarian optimum. Expected utilities are computed analytically from the
binary loss lottery, never by sampling.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping

from .game import (
    Action,
    GameError,
    GameParameters,
    Position,
    POSITIONS,
    Topology,
    Treatment,
    apply_profile,
    default_topology,
)

#: Relative tolerance for expected-utility ties.
TIE_TOL = 1e-9


def _tie_tol(values) -> float:
    # Utility magnitudes vary over dozens of orders across CRRA/CARA levels,
    # so the tie tolerance must scale with the values being compared.
    return TIE_TOL * max(max(abs(v) for v in values), 1e-300)


@dataclass(frozen=True)
class UtilitySpec:
    """Utility over final wealth (endowment - cost - realized loss).

    kinds:
      risk_neutral        u(w) = w
      crra                u(w) = w^(1-rho)/(1-rho), log at rho = 1
      cara                u(w) = (1 - exp(-alpha w))/alpha, linear at alpha = 0

    `scale` and `shift` apply an affine transform, which must never change
    any argmax; equilibrium results are invariant to them.
    """

    kind: str = "risk_neutral"
    rho: float = 0.0
    alpha: float = 0.0
    scale: float = 1.0
    shift: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("risk_neutral", "crra", "cara"):
            raise GameError(f"unknown utility kind {self.kind!r}")
        if self.scale <= 0:
            raise GameError("utility scale must be positive (strictly increasing)")

    def u(self, wealth: float) -> float:
        if self.kind == "crra":
            if wealth <= 0:
                raise GameError("CRRA utility needs positive wealth")
            if abs(self.rho - 1.0) < 1e-12:
                base = math.log(wealth)
            else:
                base = wealth ** (1.0 - self.rho) / (1.0 - self.rho)
        elif self.kind == "cara":
            if abs(self.alpha) < 1e-12:
                base = wealth
            else:
                base = (1.0 - math.exp(-self.alpha * wealth)) / self.alpha
        else:
            base = wealth
        return self.scale * base + self.shift

    @classmethod
    def parse(cls, text: str) -> "UtilitySpec":
        """Parse "risk_neutral", "crra:RHO" or "cara:ALPHA"."""
        if text == "risk_neutral":
            return cls()
        kind, _, arg = text.partition(":")
        if kind == "crra":
            return cls(kind="crra", rho=float(arg))
        if kind == "cara":
            return cls(kind="cara", alpha=float(arg))
        raise GameError(f"cannot parse utility spec {text!r}")

    def describe(self) -> str:
        if self.kind == "crra":
            return f"crra:{self.rho:g}"
        if self.kind == "cara":
            return f"cara:{self.alpha:g}"
        return "risk_neutral"


RISK_NEUTRAL = UtilitySpec()


def expected_utility_of_box(
    loss_prob: float, action: Action, params: GameParameters, utility: UtilitySpec
) -> float:
    good = params.endowment - params.cost(action)
    bad = good - params.loss
    return (1.0 - loss_prob) * utility.u(good) + loss_prob * utility.u(bad)


def enumerate_profiles(treatment: Treatment) -> Iterator[dict[Position, Action]]:
    """All action profiles, positions A..F as lexicographic digits."""
    for combo in itertools.product(treatment.actions(), repeat=6):
        yield dict(zip(POSITIONS, combo))


@dataclass
class _PayoffTable:
    """Expected utility of every position under every profile."""

    treatment: Treatment
    actions: tuple[Action, ...]
    profiles: list[tuple[Action, ...]]
    eu: list[tuple[float, ...]]
    index: dict[tuple[Action, ...], int]

    @classmethod
    def build(
        cls,
        treatment: Treatment,
        utility: UtilitySpec,
        topology: Topology,
        params: GameParameters,
    ) -> "_PayoffTable":
        actions = treatment.actions()
        profiles: list[tuple[Action, ...]] = []
        eu: list[tuple[float, ...]] = []
        for combo in itertools.product(actions, repeat=6):
            prof = dict(zip(POSITIONS, combo))
            boxes = apply_profile(topology, treatment, params, prof)
            eu.append(tuple(
                expected_utility_of_box(boxes[p].loss_probability, prof[p], params, utility)
                for p in POSITIONS
            ))
            profiles.append(combo)
        return cls(treatment, actions, profiles, eu, {c: i for i, c in enumerate(profiles)})

    def deviation_index(self, idx: int, pos: int, action: Action) -> int:
        k = len(self.actions)
        stride = k ** (5 - pos)
        cur = self.actions.index(self.profiles[idx][pos])
        return idx + (self.actions.index(action) - cur) * stride

    def best_actions(self, idx: int, pos: int) -> set[Action]:
        values = {a: self.eu[self.deviation_index(idx, pos, a)][pos] for a in self.actions}
        top = max(values.values())
        tol = _tie_tol(values.values())
        return {a for a, v in values.items() if v >= top - tol}


@dataclass
class SolverReport:
    treatment: Treatment
    utility: UtilitySpec
    equilibria: list[dict[Position, Action]]
    dominated: dict[Position, set[Action]]
    social_optimum: dict[Position, Action]
    social_welfare: float
    payoff_table: list[tuple[tuple[Action, ...], tuple[float, ...]]] = field(repr=False)

    def to_json_dict(self, include_payoffs: bool = True) -> dict:
        out = {
            "treatment": self.treatment.label,
            "utility": self.utility.describe(),
            "equilibria": [
                {p.value: a.value for p, a in eq.items()} for eq in self.equilibria
            ],
            "dominated": {
                p.value: sorted(a.value for a in acts) for p, acts in self.dominated.items()
            },
            "social_optimum": {p.value: a.value for p, a in self.social_optimum.items()},
            "social_welfare": self.social_welfare,
        }
        if include_payoffs:
            out["payoff_table"] = [
                {"profile": [a.value for a in combo], "expected_utility": list(values)}
                for combo, values in self.payoff_table
            ]
        return out


def best_responses(
    profile: Mapping[Position, Action],
    position: Position,
    treatment: Treatment,
    utility: UtilitySpec = RISK_NEUTRAL,
    topology: Topology | None = None,
    params: GameParameters | None = None,
) -> set[Action]:
    """Actions maximizing expected utility, others held fixed; ties kept."""
    topology = topology or default_topology()
    params = params or GameParameters()
    values: dict[Action, float] = {}
    for action in treatment.actions():
        trial = dict(profile)
        trial[position] = action
        boxes = apply_profile(topology, treatment, params, trial)
        values[action] = expected_utility_of_box(
            boxes[position].loss_probability, action, params, utility
        )
    top = max(values.values())
    tol = _tie_tol(values.values())
    return {a for a, v in values.items() if v >= top - tol}


def _strictly_dominated(table: _PayoffTable) -> dict[Position, set[Action]]:
    k = len(table.actions)
    out: dict[Position, set[Action]] = {p: set() for p in POSITIONS}
    for pos in range(6):
        stride = k ** (5 - pos)
        # indices of profiles where `pos` plays the first action
        base_indices = [i for i, combo in enumerate(table.profiles)
                        if combo[pos] is table.actions[0]]
        for a in table.actions:
            ai = table.actions.index(a)
            for b in table.actions:
                if b is a:
                    continue
                bi = table.actions.index(b)
                if all(
                    table.eu[i + bi * stride][pos]
                    > table.eu[i + ai * stride][pos]
                    + _tie_tol((table.eu[i + bi * stride][pos], table.eu[i + ai * stride][pos]))
                    for i in base_indices
                ):
                    out[POSITIONS[pos]].add(a)
                    break
    return out


def pure_nash(
    treatment: Treatment,
    utility: UtilitySpec = RISK_NEUTRAL,
    topology: Topology | None = None,
    params: GameParameters | None = None,
) -> SolverReport:
    """Brute-force solver: equilibria, dominance and welfare in one sweep."""
    topology = topology or default_topology()
    params = params or GameParameters()
    table = _PayoffTable.build(treatment, utility, topology, params)

    equilibria: list[dict[Position, Action]] = []
    best_welfare = -math.inf
    best_idx = 0
    for idx, combo in enumerate(table.profiles):
        welfare = sum(table.eu[idx])
        if welfare > best_welfare + _tie_tol((welfare, best_welfare if idx else welfare)):
            best_welfare, best_idx = welfare, idx
        if all(combo[pos] in table.best_actions(idx, pos) for pos in range(6)):
            equilibria.append(dict(zip(POSITIONS, combo)))

    return SolverReport(
        treatment=treatment,
        utility=utility,
        equilibria=equilibria,
        dominated=_strictly_dominated(table),
        social_optimum=dict(zip(POSITIONS, table.profiles[best_idx])),
        social_welfare=best_welfare,
        payoff_table=list(zip(table.profiles, table.eu)),
    )


def social_optimum(
    treatment: Treatment,
    utility: UtilitySpec = RISK_NEUTRAL,
    topology: Topology | None = None,
    params: GameParameters | None = None,
) -> tuple[dict[Position, Action], float]:
    """Profile maximizing total expected utility; first in profile order wins ties."""
    report = pure_nash(treatment, utility, topology, params)
    return report.social_optimum, report.social_welfare
