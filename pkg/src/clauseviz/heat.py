"""Per-variable heat from the learned-clause stream, and color mapping.

Two modes: a sliding window of the last k added clauses with occurrence
counts normalized by the window maximum, or a linear decay from 1 to 0
over the k events after a variable was last touched.  Both are functions
of the event-log prefix alone, so recomputing from a prefix reproduces
live accumulation exactly -- that is what makes rewind and seek exact.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .contraction import ContractionHierarchy
from .model import ClauseEvent, EventKind

RGB = Tuple[int, int, int]

#: cold -> hot: dark blue, yellow, red
DEFAULT_PALETTE: tuple = ((0, 0, 139), (255, 255, 0), (255, 0, 0))


class OutOfRangeError(ValueError):
    pass


class HeatMode(enum.Enum):
    WINDOW = "window"
    DECAY = "decay"


@dataclass
class HeatConfig:
    mode: HeatMode = HeatMode.WINDOW
    k: int = 1000  # window width in clauses / decay span in events
    palette: tuple = DEFAULT_PALETTE
    include_deletes: bool = False  # deletions advance time only, by default

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if len(self.palette) < 2:
            raise ValueError("palette needs at least 2 stops")


class HeatState:
    """Common interface; concrete behavior lives in the two subclasses."""

    config: HeatConfig
    now: int  # sequence number of the last applied event, -1 initially

    def apply(self, event: ClauseEvent) -> None:
        raise NotImplementedError

    def value(self, var: int) -> float:
        raise NotImplementedError

    def values(self, num_variables: int) -> np.ndarray:
        """Heat for variables 1..num_variables as a (num+1)-long array."""
        raise NotImplementedError

    def copy(self) -> "HeatState":
        raise NotImplementedError

    def _counts_heat(self, event: ClauseEvent) -> bool:
        if event.clause is None or not event.clause:
            return False
        if event.kind is EventKind.ADD:
            return True
        return self.config.include_deletes


class WindowHeat(HeatState):
    """Occurrence counts over the last k heat-carrying clauses."""

    def __init__(self, config: HeatConfig):
        self.config = config
        self.now = -1
        self.window: deque = deque()
        self.counts: dict = {}

    def apply(self, event: ClauseEvent) -> None:
        self.now = event.sequence
        if not self._counts_heat(event):
            return
        # canonical clauses are sorted by variable and tautology-free, so
        # this is a strictly increasing variable tuple
        variables = tuple(-l if l < 0 else l for l in event.clause)
        self.window.append(variables)
        for v in variables:
            self.counts[v] = self.counts.get(v, 0) + 1
        if len(self.window) > self.config.k:
            evicted = self.window.popleft()
            for v in evicted:
                c = self.counts[v] - 1
                if c:
                    self.counts[v] = c
                else:
                    del self.counts[v]

    def _max_count(self) -> int:
        return max(self.counts.values()) if self.counts else 0

    def value(self, var: int) -> float:
        m = self._max_count()
        if m == 0:
            return 0.0
        return self.counts.get(var, 0) / m

    def values(self, num_variables: int) -> np.ndarray:
        out = np.zeros(num_variables + 1, dtype=np.float64)
        m = self._max_count()
        if m:
            for v, c in self.counts.items():
                if v <= num_variables:
                    out[v] = c / m
        return out

    def copy(self) -> "WindowHeat":
        clone = WindowHeat(self.config)
        clone.now = self.now
        clone.window = deque(self.window)
        clone.counts = dict(self.counts)
        return clone

    def __eq__(self, other):
        return (isinstance(other, WindowHeat) and self.now == other.now
                and self.window == other.window and self.counts == other.counts)


class DecayHeat(HeatState):
    """Heat 1.0 at touch, linearly down to 0 over the next k events."""

    def __init__(self, config: HeatConfig):
        self.config = config
        self.now = -1
        self.last_touch: dict = {}

    def apply(self, event: ClauseEvent) -> None:
        self.now = event.sequence
        if not self._counts_heat(event):
            return
        for l in event.clause:
            self.last_touch[-l if l < 0 else l] = event.sequence

    def value(self, var: int) -> float:
        touched = self.last_touch.get(var)
        if touched is None:
            return 0.0
        h = 1.0 - (self.now - touched) / self.config.k
        return h if h > 0.0 else 0.0

    def values(self, num_variables: int) -> np.ndarray:
        out = np.zeros(num_variables + 1, dtype=np.float64)
        for v, touched in self.last_touch.items():
            if v <= num_variables:
                h = 1.0 - (self.now - touched) / self.config.k
                if h > 0.0:
                    out[v] = h
        return out

    def copy(self) -> "DecayHeat":
        clone = DecayHeat(self.config)
        clone.now = self.now
        clone.last_touch = dict(self.last_touch)
        return clone

    def __eq__(self, other):
        return (isinstance(other, DecayHeat) and self.now == other.now
                and self.last_touch == other.last_touch)


def make_heat_state(config: HeatConfig) -> HeatState:
    if config.mode is HeatMode.WINDOW:
        return WindowHeat(config)
    return DecayHeat(config)


def aggregate_heat(hierarchy: ContractionHierarchy,
                   fine_values: np.ndarray) -> np.ndarray:
    """Supernode heat = arithmetic mean of its member variables' heat.

    `fine_values` is indexed by variable id (entry 0 unused); returns an
    array indexed by top-level node id.
    """
    proj = hierarchy.projection_array()
    num_top = hierarchy.top.num_nodes
    n = min(len(fine_values), len(proj)) - 1
    sums = np.bincount(proj[1:n + 1], weights=fine_values[1:n + 1],
                       minlength=num_top + 1)
    counts = np.bincount(proj[1:n + 1], minlength=num_top + 1)
    out = np.zeros(num_top + 1, dtype=np.float64)
    nz = counts > 0
    out[nz] = sums[nz] / counts[nz]
    return out


def heat_to_color(heat: float, palette: Sequence[RGB] = DEFAULT_PALETTE) -> RGB:
    """Piecewise-linear interpolation between equally spaced palette stops."""
    if not 0.0 <= heat <= 1.0:
        raise OutOfRangeError(f"heat {heat} outside [0, 1]")
    segments = len(palette) - 1
    scaled = heat * segments
    idx = int(scaled)
    if idx >= segments:
        return tuple(palette[-1])
    frac = scaled - idx
    lo = palette[idx]
    hi = palette[idx + 1]
    return tuple(int(lo[c] + (hi[c] - lo[c]) * frac + 0.5) for c in range(3))


def color_hex(rgb: RGB) -> str:
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def parse_palette(spec: str) -> tuple:
    """Comma-separated '#RRGGBB' stops, cold to hot."""
    stops = []
    for part in spec.split(","):
        part = part.strip().lstrip("#")
        if len(part) != 6:
            raise ValueError(f"bad palette stop {part!r}")
        stops.append(tuple(int(part[i:i + 2], 16) for i in (0, 2, 4)))
    if len(stops) < 2:
        raise ValueError("palette needs at least 2 stops")
    return tuple(stops)
