"""Run configuration files.

A config is one TOML document::

    seed = 7
    rounds = 100000
    buckets = 256              # default bucket count for model_free players

    [epsilon]                  # defaults for bandit players
    initial = 0.1
    halve_every = 200000

    [prune]
    first = 20000
    growth = 2.0
    max = 4

    [output]
    result = "result.json"
    roundlog = "rounds.csv"
    models = "models"

    [[players]]
    kind = "nash"

    [[players]]
    kind = "fixed"
    a = 0.6

Per-player keys override the section defaults.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .strategies import REGISTRY, Strategy, make_strategy

_TOP_KEYS = {"seed", "seeds", "rounds", "buckets", "log_every", "seating", "epsilon", "prune", "output", "players", "experiment"}
_EPS_KEYS = {"initial": "epsilon", "halve_every": "halve_every", "zero_after": "zero_after"}
_PRUNE_KEYS = {"first": "prune_first", "growth": "prune_growth", "max": "max_prunes"}
_OUTPUT_KEYS = {"result", "roundlog", "models", "curve"}
_EXPERIMENT_KEYS = {"window_fraction", "curve_every", "curve_window"}


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class TournamentConfig:
    players: list[dict]
    rounds: int
    seed: int = 0
    seeds: Optional[list[int]] = None
    buckets: int = 256
    log_every: int = 1
    seating: Optional[list[int]] = None
    epsilon: dict = field(default_factory=dict)
    prune: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    experiment: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict) -> "TournamentConfig":
        unknown = set(raw) - _TOP_KEYS
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown key")
        rounds = _int(raw, "rounds", required=True)
        if rounds < 0:
            raise ConfigError("rounds", "must be >= 0")
        seed = _int(raw, "seed", default=0)
        seeds = raw.get("seeds")
        if seeds is not None:
            if not isinstance(seeds, list) or not seeds or not all(isinstance(s, int) for s in seeds):
                raise ConfigError("seeds", "must be a non-empty list of integers")
        buckets = _int(raw, "buckets", default=256)
        if buckets < 2:
            raise ConfigError("buckets", "must be >= 2")
        log_every = _int(raw, "log_every", default=1)
        if log_every < 1:
            raise ConfigError("log_every", "must be >= 1")
        players = raw.get("players")
        if not isinstance(players, list) or not players:
            raise ConfigError("players", "need at least one [[players]] entry")
        for i, p in enumerate(players):
            if not isinstance(p, dict) or "kind" not in p:
                raise ConfigError(f"players[{i}]", "each player needs a kind")
            if p["kind"] not in REGISTRY:
                raise ConfigError(f"players[{i}].kind", f"unknown kind {p['kind']!r}")
        seating = raw.get("seating")
        if seating is not None and sorted(seating) != list(range(len(players))):
            raise ConfigError("seating", "must be a permutation of player ids")
        sections = {}
        for name, allowed in (("epsilon", _EPS_KEYS), ("prune", _PRUNE_KEYS), ("output", _OUTPUT_KEYS), ("experiment", _EXPERIMENT_KEYS)):
            sec = raw.get(name, {})
            if not isinstance(sec, dict):
                raise ConfigError(name, "must be a table")
            bad = set(sec) - set(allowed)
            if bad:
                raise ConfigError(f"{name}.{sorted(bad)[0]}", "unknown key")
            sections[name] = dict(sec)
        eps = sections["epsilon"].get("initial")
        if eps is not None and not 0.0 <= eps <= 1.0:
            raise ConfigError("epsilon.initial", "must lie in [0, 1]")
        cfg = cls(
            [dict(p) for p in players], rounds, seed, seeds, buckets, log_every, seating,
            sections["epsilon"], sections["prune"], sections["output"], sections["experiment"],
        )
        cfg.build_players()  # validates per-player parameters
        return cfg

    @classmethod
    def load(cls, path) -> "TournamentConfig":
        with open(path, "rb") as fh:
            try:
                raw = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError("<file>", f"not valid TOML: {exc}") from None
        return cls.from_dict(raw)

    def player_specs(self) -> list[dict]:
        specs = []
        for p in self.players:
            spec = dict(p)
            if spec["kind"] == "model_free":
                spec.setdefault("m", self.buckets)
            if spec["kind"] == "bandit":
                for key, param in _EPS_KEYS.items():
                    if key in self.epsilon:
                        spec.setdefault(param, self.epsilon[key])
                for key, param in _PRUNE_KEYS.items():
                    if key in self.prune:
                        spec.setdefault(param, self.prune[key])
            specs.append(spec)
        return specs

    def build_players(self) -> list[Strategy]:
        out = []
        for i, spec in enumerate(self.player_specs()):
            params = {k: v for k, v in spec.items() if k != "kind"}
            try:
                out.append(make_strategy(spec["kind"], **params))
            except ValueError as exc:
                raise ConfigError(f"players[{i}]", str(exc)) from None
        return out

    def run_seeds(self) -> list[int]:
        return list(self.seeds) if self.seeds else [self.seed]

    def resolved(self) -> dict[str, Any]:
        out = {
            "rounds": self.rounds,
            "seed": self.seed,
            "buckets": self.buckets,
            "log_every": self.log_every,
            "players": self.player_specs(),
        }
        if self.seeds:
            out["seeds"] = list(self.seeds)
        if self.seating is not None:
            out["seating"] = list(self.seating)
        return out


def _int(raw: dict, key: str, default: Optional[int] = None, required: bool = False) -> int:
    if key not in raw:
        if required:
            raise ConfigError(key, "missing")
        return default
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(key, f"must be an integer, got {value!r}")
    return value
