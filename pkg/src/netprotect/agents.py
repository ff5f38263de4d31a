"""Behavioral decision models producing round-by-round choices.

Four agent kinds share one interface:
  random            fixed probability vector over the admissible menu
  myopic_br         best response to last round's profile
  eu                logit (softmax) choice over myopic expected utilities
  decoy_susceptible logit over EU plus an asymmetric-dominance bonus, the
                    simplest model in which an attribute-dominated Token Y
                    raises Token X's choice probability

All agents evaluate actions against the previous round's profile (round 1:
everyone assumed unprotected), which makes `eu` the smooth counterpart of
`myopic_br`. Decisions are deterministic given (spec, observation, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .equilibrium import UtilitySpec, expected_utility_of_box
from .game import (
    ACTION_ORDER,
    Action,
    GameError,
    GameParameters,
    Position,
    POSITIONS,
    Topology,
    Treatment,
    apply_profile,
)

AGENT_KINDS = ("random", "myopic_br", "eu", "decoy_susceptible")


@dataclass(frozen=True)
class MenuEntry:
    """One selectable option with the attributes the chooser sees."""

    action: Action
    cost: int
    own_red_conversion: int


def menu_for(treatment: Treatment, degree: int, params: GameParameters) -> tuple[MenuEntry, ...]:
    return tuple(
        MenuEntry(a, params.cost(a), params.own_red_conversion(a, degree))
        for a in treatment.actions()
    )


@dataclass(frozen=True)
class Observation:
    """Everything a seat knows when choosing in a round.

    Previous-round fields are None in the first round of a part. The game
    rules themselves (topology, parameters, treatment) are common knowledge
    from the instructions, so they ride along for payoff evaluation.
    """

    position: Position
    degree: int
    menu: tuple[MenuEntry, ...]
    treatment: Treatment
    topology: Topology
    params: GameParameters
    round_index: int
    part_index: int
    prev_profile: Mapping[Position, Action] | None = None
    prev_loss_probs: Mapping[Position, float] | None = None


@dataclass(frozen=True)
class AgentSpec:
    """Configuration of one behavioral agent."""

    kind: str
    p_vector: tuple[float, ...] | None = None
    utility: UtilitySpec | None = None
    logit_temperature: float | None = None
    theta: float | None = None
    seed: int | None = None
    #: Plumbing for order effects: added to every token's value in part 2.
    part2_buy_bonus: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in AGENT_KINDS:
            raise GameError(f"unknown agent kind {self.kind!r}")
        if self.kind == "random":
            if self.p_vector is None:
                raise GameError("random agent needs a probability vector")
            if len(self.p_vector) not in (2, 3):
                raise GameError("probability vector needs 2 or 3 entries")
            if any(p < 0 for p in self.p_vector) or abs(sum(self.p_vector) - 1.0) > 1e-9:
                raise GameError("probability vector must be non-negative and sum to 1")
        if self.kind in ("eu", "decoy_susceptible"):
            if self.logit_temperature is None or self.logit_temperature <= 0:
                raise GameError("logit temperature must be positive")
        if self.kind == "decoy_susceptible":
            if self.theta is None or self.theta < 0:
                raise GameError("theta must be non-negative")

    def _utility(self) -> UtilitySpec:
        return self.utility or UtilitySpec()


def _myopic_values(agent: AgentSpec, obs: Observation) -> dict[Action, float]:
    """Expected utility of each menu action against last round's profile."""
    prev = dict(obs.prev_profile) if obs.prev_profile is not None else {
        p: Action.NO_BUY for p in POSITIONS
    }
    utility = agent._utility()
    values: dict[Action, float] = {}
    for entry in obs.menu:
        trial = dict(prev)
        trial[obs.position] = entry.action
        boxes = apply_profile(obs.topology, obs.treatment, obs.params, trial)
        v = expected_utility_of_box(
            boxes[obs.position].loss_probability, entry.action, obs.params, utility
        )
        if obs.part_index == 2 and entry.action is not Action.NO_BUY:
            v += agent.part2_buy_bonus
        values[entry.action] = v
    return values


def dominance_margin(a: MenuEntry, b: MenuEntry) -> float:
    """Net share of attributes (cost, own conversion) on which `a` beats `b`.

    Counting advantages makes the margin scale-free, so no explicit
    normalization of the attribute columns is needed. Range [-1, 1].
    """
    adv_a = int(a.cost < b.cost) + int(a.own_red_conversion > b.own_red_conversion)
    adv_b = int(b.cost < a.cost) + int(b.own_red_conversion > a.own_red_conversion)
    return (adv_a - adv_b) / 2.0


def attraction_bonus(entry: MenuEntry, menu: tuple[MenuEntry, ...]) -> float:
    """Sum of positive dominance margins of `entry` over the rest of the menu.

    Positive only for options that attribute-wise beat some alternative on
    net, e.g. Token X once the pricier, weaker Token Y joins the menu.
    """
    return sum(
        max(0.0, dominance_margin(entry, other))
        for other in menu
        if other.action is not entry.action
    )


def _softmax(values: list[float], temperature: float) -> list[float]:
    scaled = [v / temperature for v in values]
    top = max(scaled)
    weights = [math.exp(v - top) for v in scaled]
    total = sum(weights)
    return [w / total for w in weights]


def _validate_menu(obs: Observation) -> None:
    expected = obs.treatment.actions()
    if tuple(e.action for e in obs.menu) != expected:
        raise GameError(
            f"menu {[e.action.value for e in obs.menu]} does not match "
            f"treatment {obs.treatment.label}"
        )


def choice_probabilities(agent: AgentSpec, obs: Observation) -> dict[Action, float]:
    """The exact distribution `decide` samples from; inadmissible actions get 0."""
    _validate_menu(obs)
    menu_actions = [e.action for e in obs.menu]

    if agent.kind == "random":
        # The vector is over the canonical action order; mass on actions the
        # current menu does not offer is a configuration error.
        if len(agent.p_vector) < len(menu_actions):
            raise GameError(
                f"probability vector of length {len(agent.p_vector)} does not "
                f"cover a {len(menu_actions)}-option menu"
            )
        if any(p > 0 for p in agent.p_vector[len(menu_actions):]):
            raise GameError("probability vector puts mass on inadmissible actions")
        probs = dict(zip(menu_actions, agent.p_vector))
    elif agent.kind == "myopic_br":
        values = _myopic_values(agent, obs)
        top = max(values.values())
        tol = 1e-9 * max(1.0, max(abs(v) for v in values.values()))
        chosen = next(a for a in ACTION_ORDER if a in values and values[a] >= top - tol)
        probs = {a: (1.0 if a is chosen else 0.0) for a in menu_actions}
    else:
        values = _myopic_values(agent, obs)
        if agent.kind == "decoy_susceptible":
            for entry in obs.menu:
                values[entry.action] += agent.theta * attraction_bonus(entry, obs.menu)
        dist = _softmax([values[a] for a in menu_actions], agent.logit_temperature)
        probs = dict(zip(menu_actions, dist))

    out = {a: 0.0 for a in ACTION_ORDER}
    out.update(probs)
    return out


def decide(agent: AgentSpec, obs: Observation) -> Action:
    """Sample one action; identical (spec, observation, seed) gives identical output."""
    probs = choice_probabilities(agent, obs)
    seed = agent.seed if agent.seed is not None else 0
    rng = np.random.default_rng([seed, obs.part_index, obs.round_index])
    r = rng.random()
    acc = 0.0
    menu_actions = [e.action for e in obs.menu]
    for action in menu_actions:
        acc += probs[action]
        if r < acc:
            return action
    return menu_actions[-1]
