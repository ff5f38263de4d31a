"""JSON run configuration: topology, parameters, agents, session layout.

Every knob defaults to the lab values, so an empty config runs a faithful
decoy-network session with behavioral agents.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

from .agents import AGENT_KINDS, AgentSpec
from .engine import SESSION_TYPES, HumanSeat, Seat, SessionConfig
from .equilibrium import UtilitySpec
from .game import BallBox, GameError, GameParameters, Topology, default_topology


class ConfigError(ValueError):
    pass


def parse_topology(doc: Mapping[str, Any] | None) -> Topology:
    if doc is None:
        return default_topology()
    try:
        return Topology(tuple(tuple(edge) for edge in doc["edges"]))
    except (KeyError, TypeError, GameError) as exc:
        raise ConfigError(f"bad topology: {exc}") from exc


def _degree_map(doc: Mapping[str, Any], value_fn) -> dict[int, Any]:
    out = {}
    for key, value in doc.items():
        degree = int(key)
        if degree not in (1, 2, 3):
            raise ConfigError(f"degree keys must be 1..3, got {key!r}")
        out[degree] = value_fn(value)
    return out


def parse_params(doc: Mapping[str, Any] | None) -> GameParameters:
    if doc is None:
        return GameParameters()
    kwargs: dict[str, Any] = {}
    scalar_keys = ("endowment", "loss", "cost_x", "cost_y", "ext_brown_per_buyer",
                   "ext_red_x_to_nonbuyer", "ext_red_y_to_nonbuyer",
                   "ext_red_x_to_y_buyer", "y_brown_includes_self")
    for key in scalar_keys:
        if key in doc:
            kwargs[key] = doc[key]
    try:
        if "initial_boxes" in doc:
            kwargs["initial_boxes"] = _degree_map(
                doc["initial_boxes"], lambda v: BallBox(*v))
        for key in ("own_red_x", "own_red_y"):
            if key in doc:
                kwargs[key] = _degree_map(doc[key], int)
        unknown = set(doc) - set(scalar_keys) - {"initial_boxes", "own_red_x", "own_red_y"}
        if unknown:
            raise ConfigError(f"unknown parameter keys: {sorted(unknown)}")
        return GameParameters(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad parameters: {exc}") from exc


def parse_utility(value: Any) -> UtilitySpec:
    try:
        if value is None:
            return UtilitySpec()
        if isinstance(value, str):
            return UtilitySpec.parse(value)
        return UtilitySpec(**value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad utility spec {value!r}: {exc}") from exc


def parse_seat(doc: Mapping[str, Any]) -> Seat:
    kind = doc.get("kind")
    if kind == "human":
        return HumanSeat()
    if kind not in AGENT_KINDS:
        raise ConfigError(f"unknown agent kind {kind!r}")
    try:
        return AgentSpec(
            kind=kind,
            p_vector=tuple(doc["p_vector"]) if "p_vector" in doc else None,
            utility=parse_utility(doc.get("utility")),
            logit_temperature=doc.get("logit_temperature"),
            theta=doc.get("theta"),
            seed=doc.get("seed"),
            part2_buy_bonus=doc.get("part2_buy_bonus", 0.0),
        )
    except (GameError, TypeError) as exc:
        raise ConfigError(f"bad agent spec {doc!r}: {exc}") from exc


def default_agent() -> AgentSpec:
    return AgentSpec(kind="decoy_susceptible", utility=UtilitySpec(),
                     logit_temperature=8.0, theta=2.0)


def parse_session_config(doc: Mapping[str, Any]) -> SessionConfig:
    session_type = doc.get("session_type", "net_then_ind_decoy")
    if session_type not in SESSION_TYPES:
        raise ConfigError(f"unknown session type {session_type!r}")
    groups_doc = doc.get("groups")
    if groups_doc is None:
        groups: list[list[Seat]] = [[default_agent() for _ in range(6)]]
    else:
        groups = [[parse_seat(seat) for seat in group] for group in groups_doc]
    try:
        config = SessionConfig(
            session_id=doc.get("session_id", "session"),
            session_type=session_type,
            groups=groups,
            rounds_per_part=doc.get("rounds_per_part", 10),
            topology=parse_topology(doc.get("topology")),
            params=parse_params(doc.get("params")),
            master_seed=doc.get("master_seed", 0),
            reassign_positions=doc.get("reassign_positions", False),
            round_timeout_s=doc.get("round_timeout_s"),
        )
    except GameError as exc:
        raise ConfigError(str(exc)) from exc
    _check_agents_fit_menus(config)
    return config


def _check_agents_fit_menus(config: SessionConfig) -> None:
    # Both parts of a session share the decoy flag, so a random agent's
    # vector must fit the menu size; catching it here beats failing mid-round.
    menu_size = 3 if config.treatments()[0].decoy else 2
    for group in config.groups:
        for seat in group:
            if isinstance(seat, AgentSpec) and seat.kind == "random":
                if len(seat.p_vector) < menu_size:
                    raise ConfigError(
                        f"random agent vector {seat.p_vector} is shorter than the "
                        f"{menu_size}-option menu of {config.session_type}")
                if any(p > 0 for p in seat.p_vector[menu_size:]):
                    raise ConfigError(
                        f"random agent vector {seat.p_vector} puts mass on Token Y, "
                        f"which {config.session_type} does not offer")


def load_config(path: str | Path) -> tuple[SessionConfig, dict]:
    """Read a JSON config file; returns (session config, raw document)."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return parse_session_config(doc), doc
