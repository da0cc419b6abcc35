"""Configuration resolution: flag > environment > config file > default.

Every tunable has a CLI flag, a CLAUSEVIZ_* environment override, and a
JSON config-file key (the flag name with dashes replaced by underscores).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Callable, Optional

from .graph import ReductionKind, WeightFunction
from .heat import DEFAULT_PALETTE, HeatConfig, HeatMode, parse_palette
from .layout import LayoutConfig
from .session import SessionConfig

ENV_PREFIX = "CLAUSEVIZ_"


def _parse_chunk_policy(value: str):
    if value == "drain":
        return "drain"
    return int(value)


def _parse_palette_opt(value: str):
    return parse_palette(value)


@dataclass(frozen=True)
class Option:
    name: str  # flag spelling, dash-separated
    default: object
    parse: Callable[[str], object]  # applied to env/file string values
    help: str = ""

    @property
    def key(self) -> str:
        return self.name.replace("-", "_")

    @property
    def env_var(self) -> str:
        return ENV_PREFIX + self.key.upper()


OPTIONS = [
    Option("reduction", "ring", str, "hyperedge reduction: ring|clique"),
    Option("weight-fn", "inverse-size-minus-one", str,
           "clause weight: inverse-size-minus-one|inverse-size|exponential-decay"),
    Option("heat-mode", "window", str, "heat mode: window|decay"),
    Option("heat-k", 1000, int, "heat window width / decay span"),
    Option("palette", DEFAULT_PALETTE, _parse_palette_opt,
           "comma-separated #RRGGBB stops, cold to hot"),
    Option("contract-target", 30000, int, "contraction target node count"),
    Option("seed", 0, int, "seed for contraction and layout"),
    Option("iterations", 500, int, "layout iterations"),
    Option("theta", 0.9, float, "Barnes-Hut opening angle"),
    Option("cooling", 0.1, float, "initial layout step fraction"),
    Option("attraction-scale", 1.0, float, "ideal edge length scale"),
    Option("fps", 30.0, float, "frame rate"),
    Option("checkpoint-interval", 10000, int, "events between checkpoints"),
    Option("chunk-policy", "drain", _parse_chunk_policy,
           "events per frame: drain | <int>"),
    Option("ram-budget-events", 0, int,
           "spill event log to disk beyond this many events (0 = never)"),
]

OPTION_BY_KEY = {opt.key: opt for opt in OPTIONS}


def load_config_file(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fp:
        data = json.load(fp)
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must hold a JSON object")
    unknown = set(data) - set(OPTION_BY_KEY)
    if unknown:
        raise ValueError(f"unknown config file keys: {sorted(unknown)}")
    return data


def resolve(flag_values: dict, config_path: Optional[str] = None,
            env: Optional[dict] = None) -> dict:
    """Merge option sources; flag values of None mean 'not given'."""
    env = os.environ if env is None else env
    file_values = load_config_file(config_path) if config_path else {}
    resolved = {}
    for opt in OPTIONS:
        value = opt.default
        if opt.key in file_values:
            raw = file_values[opt.key]
            value = opt.parse(raw) if isinstance(raw, str) else raw
        if opt.env_var in env:
            value = opt.parse(env[opt.env_var])
        flag = flag_values.get(opt.key)
        if flag is not None:
            value = flag
        resolved[opt.key] = value
    return resolved


def session_config_from(resolved: dict, **overrides) -> SessionConfig:
    palette = resolved["palette"]
    if isinstance(palette, str):
        palette = parse_palette(palette)
    config = SessionConfig(
        reduction=ReductionKind(resolved["reduction"]),
        weight_fn=WeightFunction(resolved["weight_fn"]),
        heat=HeatConfig(mode=HeatMode(resolved["heat_mode"]),
                        k=resolved["heat_k"], palette=tuple(palette)),
        layout=LayoutConfig(iterations=resolved["iterations"],
                            seed=resolved["seed"],
                            attraction_scale=resolved["attraction_scale"],
                            theta=resolved["theta"],
                            cooling=resolved["cooling"]),
        contract_target=resolved["contract_target"],
        seed=resolved["seed"],
        checkpoint_interval=resolved["checkpoint_interval"],
        frame_rate=resolved["fps"],
        chunk_policy=resolved["chunk_policy"],
        ram_budget_events=resolved["ram_budget_events"] or None,
    )
    for key, value in overrides.items():
        setattr(config, key, value)
    return config
