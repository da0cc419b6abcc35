"""Force-directed 2D placement of weighted graphs.

Spring embedder in the Fruchterman-Reingold family: quadtree-approximated
repulsion (k^2/d per unit mass), attraction along edges proportional to
edge weight times d^2/k (heavier edges pull harder, which is what makes a
relayout reflect learned-clause weight), and a linearly cooling step cap.
Everything is deterministic for a fixed (graph, config, warm start): rng
placement is seeded, coincident points separate by an id-derived jitter,
and force accumulation order is fixed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional, TextIO

import numpy as np

from . import kernels
from .contraction import (ContractionHierarchy, build_hierarchy, single_level,
                          DEFAULT_TARGET_SIZE)
from .graph import GraphState, WeightedGraph

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


class EmptyGraphError(ValueError):
    pass


@dataclass
class LayoutConfig:
    iterations: int = 500
    seed: int = 0
    attraction_scale: float = 1.0
    theta: float = 0.9  # Barnes-Hut opening angle
    cooling: float = 0.1  # initial step cap as a fraction of the bbox diagonal
    time_budget_s: Optional[float] = None  # wall-clock cap, off by default

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0.0 < self.theta <= 1.5:
            raise ValueError("theta must be in (0, 1.5]")


@dataclass
class Positions:
    """Coordinates for nodes 1..n (row i holds node i+1), in the unit box."""

    xy: np.ndarray
    completed_iterations: int = 0

    @property
    def num_nodes(self) -> int:
        return self.xy.shape[0]

    def get(self, node_id: int):
        return float(self.xy[node_id - 1, 0]), float(self.xy[node_id - 1, 1])

    def as_dict(self) -> dict:
        return {i + 1: (float(x), float(y)) for i, (x, y) in enumerate(self.xy)}

    def copy(self) -> "Positions":
        return Positions(self.xy.copy(), self.completed_iterations)


def write_positions(pos: Positions, fp: TextIO) -> None:
    """'node_id x y' lines; floats use repr so a round trip is exact."""
    for i in range(pos.num_nodes):
        fp.write(f"{i + 1} {float(pos.xy[i, 0])!r} {float(pos.xy[i, 1])!r}\n")


def read_positions(lines: Iterable[str]) -> dict:
    """Parse 'node_id x y' lines into a warm-start dict."""
    out = {}
    for line in lines:
        parts = line.split()
        if not parts:
            continue
        out[int(parts[0])] = (float(parts[1]), float(parts[2]))
    return out


def _prenormalize(xy: np.ndarray, known: np.ndarray) -> None:
    """Map known rows into the unit box, aspect preserved, in place.

    Subtracting the bbox corner (not the centroid) keeps the transform
    exact for exactly-representable translations, which makes the layout
    translation invariant in the warm-start sense.
    """
    pts = xy[known]
    if len(pts) == 0:
        return
    mn = pts.min(axis=0)
    extent = float((pts.max(axis=0) - mn).max())
    if extent <= 0.0:
        xy[known] = 0.5
        return
    xy[known] = (pts - mn) / extent


def _normalize_unit(xy: np.ndarray) -> np.ndarray:
    """Final map to [0,1]^2: longer axis spans exactly [0,1], both centered."""
    mn = xy.min(axis=0)
    span = xy.max(axis=0) - mn
    extent = float(span.max())
    if extent <= 0.0:
        return np.full_like(xy, 0.5)
    out = (xy - mn) / extent
    pad = (1.0 - span / extent) * 0.5
    return out + pad


def _fill_missing(xy, known, graph: WeightedGraph, seed: int) -> None:
    """Place nodes without a warm position: neighbor centroid, else rng."""
    if known.all():
        return
    sums = np.zeros_like(xy)
    counts = np.zeros(len(xy))
    for (u, v), _w in graph.edges.items():
        if known[u - 1] and not known[v - 1]:
            sums[v - 1] += xy[u - 1]
            counts[v - 1] += 1.0
        elif known[v - 1] and not known[u - 1]:
            sums[u - 1] += xy[v - 1]
            counts[u - 1] += 1.0
    rng = np.random.default_rng([seed, 0xF1])
    for i in np.nonzero(~known)[0]:
        if counts[i] > 0:
            xy[i] = sums[i] / counts[i]
        else:
            xy[i] = rng.random(2)


def layout(graph: WeightedGraph, config: LayoutConfig,
           warm_start: Optional[dict | Positions] = None) -> Positions:
    """Place every node of the graph; fully deterministic given the inputs.

    `warm_start` may be a Positions (same node universe) or a partial
    {node_id: (x, y)} dict; missing nodes start at the centroid of their
    placed neighbors, or at an rng position if isolated.
    """
    n = graph.num_nodes
    if n == 0:
        raise EmptyGraphError("cannot lay out an empty graph")

    if warm_start is not None:
        xy = np.zeros((n, 2), dtype=np.float64)
        known = np.zeros(n, dtype=bool)
        if isinstance(warm_start, Positions):
            m = min(n, warm_start.num_nodes)
            xy[:m] = warm_start.xy[:m]
            known[:m] = True
        else:
            for node_id, (x, y) in warm_start.items():
                if 1 <= node_id <= n:
                    xy[node_id - 1] = (x, y)
                    known[node_id - 1] = True
        _prenormalize(xy, known)
        _fill_missing(xy, known, graph, config.seed)
    else:
        xy = np.random.default_rng(config.seed).random((n, 2))

    x = np.ascontiguousarray(xy[:, 0])
    y = np.ascontiguousarray(xy[:, 1])

    eu, ev, ew = graph.to_arrays()
    eu = eu - 1
    ev = ev - 1

    k = config.attraction_scale * math.sqrt(1.0 / n)
    coef = k * k
    span_x = float(x.max() - x.min()) if n > 1 else 0.0
    span_y = float(y.max() - y.min()) if n > 1 else 0.0
    t0 = config.cooling * math.hypot(span_x, span_y)
    if t0 <= 0.0:
        t0 = config.cooling

    iterations = config.iterations
    started = time.monotonic()
    completed = 0
    for it in range(iterations):
        t = t0 * (1.0 - it / iterations)
        fx, fy = kernels.repulsion_forces(x, y, config.theta, coef)
        if len(eu):
            dx = x[eu] - x[ev]
            dy = y[eu] - y[ev]
            d = np.hypot(dx, dy)
            a = ew * d / k
            np.add.at(fx, eu, -a * dx)
            np.add.at(fy, eu, -a * dy)
            np.add.at(fx, ev, a * dx)
            np.add.at(fy, ev, a * dy)
        flen = np.hypot(fx, fy)
        moving = flen > 0.0
        scale = np.minimum(flen[moving], t) / flen[moving]
        x[moving] += fx[moving] * scale
        y[moving] += fy[moving] * scale
        completed = it + 1
        if (config.time_budget_s is not None
                and time.monotonic() - started > config.time_budget_s
                and completed < iterations):
            import logging
            logging.getLogger("clauseviz.layout").warning(
                "layout time budget hit after %d/%d iterations",
                completed, iterations)
            break

    out = _normalize_unit(np.column_stack((x, y)))
    return Positions(out, completed)


def multilevel_layout(hierarchy: ContractionHierarchy,
                      config: LayoutConfig) -> Positions:
    """Lay out the coarsest level, then expand supernodes level by level.

    Members of a supernode start on a small disc around it (golden-angle
    spiral, member rank by id) and the finer graph is laid out warm.
    Returns level-0 positions.
    """
    graphs = hierarchy.graphs
    pos = layout(graphs[-1], config)
    for level in range(len(hierarchy.levels) - 1, -1, -1):
        fine_graph = graphs[level]
        mapping = hierarchy.levels[level].mapping
        n = fine_graph.num_nodes
        members: dict = {}
        xy = np.zeros((n, 2), dtype=np.float64)
        radius = 0.25 / math.sqrt(n)
        for fine in range(1, n + 1):
            coarse = mapping[fine]
            rank = members.get(coarse, 0)
            members[coarse] = rank + 1
            cx, cy = pos.get(coarse)
            angle = GOLDEN_ANGLE * rank
            r = radius * math.sqrt(rank + 1)
            xy[fine - 1] = (cx + r * math.cos(angle), cy + r * math.sin(angle))
        pos = layout(fine_graph, config, warm_start=Positions(xy))
    return pos


def project_warm_start(old_hierarchy: ContractionHierarchy,
                       old_positions: Positions,
                       new_hierarchy: ContractionHierarchy) -> dict:
    """Warm positions for the new top level from the old one.

    Each new supernode starts at the mean old position of its member
    variables (taken through the old hierarchy); members unknown to the
    old hierarchy contribute nothing.
    """
    old_proj = old_hierarchy.projection_array()
    new_proj = new_hierarchy.projection_array()
    num_new_top = new_hierarchy.top.num_nodes
    sums = np.zeros((num_new_top + 1, 2), dtype=np.float64)
    counts = np.zeros(num_new_top + 1, dtype=np.float64)
    shared = min(len(old_proj), len(new_proj)) - 1
    for var in range(1, shared + 1):
        old_top = old_proj[var]
        if old_top < 1 or old_top > old_positions.num_nodes:
            continue
        s = new_proj[var]
        sums[s] += old_positions.xy[old_top - 1]
        counts[s] += 1.0
    warm = {}
    for s in range(1, num_new_top + 1):
        if counts[s] > 0:
            warm[s] = (sums[s, 0] / counts[s], sums[s, 1] / counts[s])
    return warm


def relayout_from_session(graph_state: GraphState,
                          old_hierarchy: ContractionHierarchy,
                          old_positions: Positions,
                          config: LayoutConfig,
                          target_size: int = DEFAULT_TARGET_SIZE,
                          max_levels: int = 10):
    """Drift-free relayout with weights adjusted by the event history.

    Rebuilds the fine graph from the live clause multiset, rebuilds the
    hierarchy when the graph exceeds the contraction target, and runs the
    layout warm-started from the current positions mapped through the new
    hierarchy.  Returns (Positions, ContractionHierarchy).
    """
    fine = graph_state.rebuild()
    if fine.num_nodes > target_size:
        hierarchy = build_hierarchy(fine, target_size, max_levels,
                                    seed=config.seed)
    else:
        hierarchy = single_level(fine)
    warm = project_warm_start(old_hierarchy, old_positions, hierarchy)
    positions = layout(hierarchy.top, config, warm_start=warm)
    return positions, hierarchy
