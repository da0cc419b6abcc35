"""Weighted variable-interaction graph built and maintained from clauses.

A clause is a hyperedge over its variables; it enters the graph through a
reduction (ring or clique expansion) and contributes a weight that falls
off with clause size.  The live graph is the accumulated sum of the
contributions of all currently-live clauses, maintained incrementally
under add/delete events and rebuildable from scratch for drift-free
relayouts.
"""

from __future__ import annotations

import enum
import math
from typing import Iterable, Optional, TextIO, Tuple

import numpy as np

from .model import Clause, ClauseEvent, CnfFormula, EventKind

#: Edges whose accumulated weight falls to or below this are removed;
#: distinguishes true zero from floating-point residue.
EDGE_EPS = 1e-9


class ReductionKind(enum.Enum):
    RING = "ring"
    CLIQUE = "clique"


class WeightFunction(enum.Enum):
    """Per-clause edge weight, strictly decreasing in clause size."""

    INVERSE_SIZE_MINUS_ONE = "inverse-size-minus-one"  # 1/(|c|-1)
    INVERSE_SIZE = "inverse-size"                      # 1/|c|
    EXPONENTIAL_DECAY = "exponential-decay"            # 2^(1-|c|)

    def weight(self, size: int) -> float:
        if self is WeightFunction.INVERSE_SIZE_MINUS_ONE:
            return 1.0 / (size - 1)
        if self is WeightFunction.INVERSE_SIZE:
            return 1.0 / size
        return 2.0 ** (1 - size)


def reduce_clause(clause: Clause, kind: ReductionKind) -> list:
    """Variable pairs (u < v) a canonical clause contributes edges to.

    Ring: consecutive sorted variables plus the (min, max) closing pair,
    |c| pairs for |c| >= 3.  Clique: all |c|(|c|-1)/2 pairs.  Both give
    the single pair for |c| = 2 and nothing for |c| <= 1.
    """
    size = len(clause)
    if size <= 1:
        return []
    if size == 2:
        u = -clause[0] if clause[0] < 0 else clause[0]
        v = -clause[1] if clause[1] < 0 else clause[1]
        return [(u, v)]
    variables = [(-l if l < 0 else l) for l in clause]
    if kind is ReductionKind.RING:
        pairs = [(variables[i], variables[i + 1]) for i in range(size - 1)]
        pairs.append((variables[0], variables[size - 1]))
        return pairs
    return [(variables[i], variables[j])
            for i in range(size) for j in range(i + 1, size)]


class WeightedGraph:
    """Undirected graph on nodes 1..num_nodes with positive edge weights."""

    __slots__ = ("num_nodes", "edges")

    def __init__(self, num_nodes: int = 0, edges: Optional[dict] = None):
        self.num_nodes = num_nodes
        self.edges = edges if edges is not None else {}

    def ensure_node(self, node: int) -> None:
        if node > self.num_nodes:
            self.num_nodes = node

    def add_weight(self, u: int, v: int, delta: float) -> None:
        if u == v:
            raise ValueError("self-loops are not allowed")
        key = (u, v) if u < v else (v, u)
        w = self.edges.get(key, 0.0) + delta
        if w <= EDGE_EPS:
            self.edges.pop(key, None)
        else:
            self.edges[key] = w
        self.ensure_node(key[1])

    def weight(self, u: int, v: int) -> float:
        key = (u, v) if u < v else (v, u)
        return self.edges.get(key, 0.0)

    @property
    def node_count(self) -> int:
        return self.num_nodes

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def total_weight(self) -> float:
        return math.fsum(self.edges.values())

    def sorted_edges(self) -> list:
        return sorted(self.edges.items())

    def to_arrays(self):
        """(u, v, w) numpy arrays in sorted edge order, nodes 1-based."""
        items = self.sorted_edges()
        m = len(items)
        eu = np.empty(m, dtype=np.int64)
        ev = np.empty(m, dtype=np.int64)
        ew = np.empty(m, dtype=np.float64)
        for i, ((u, v), w) in enumerate(items):
            eu[i] = u
            ev[i] = v
            ew[i] = w
        return eu, ev, ew

    def csr(self):
        """Symmetric CSR adjacency over 0-based node indices."""
        n = self.num_nodes
        eu, ev, ew = self.to_arrays()
        deg = np.zeros(n, dtype=np.int64)
        np.add.at(deg, eu - 1, 1)
        np.add.at(deg, ev - 1, 1)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        indices = np.empty(indptr[-1], dtype=np.int64)
        weights = np.empty(indptr[-1], dtype=np.float64)
        fill = indptr[:-1].copy()
        for u, v, w in zip(eu - 1, ev - 1, ew):
            indices[fill[u]] = v
            weights[fill[u]] = w
            fill[u] += 1
            indices[fill[v]] = u
            weights[fill[v]] = w
            fill[v] += 1
        return indptr, indices, weights

    def copy(self) -> "WeightedGraph":
        return WeightedGraph(self.num_nodes, dict(self.edges))


class GraphState:
    """Live VIG under clause events: graph + live clause multiset.

    Formula clauses and added clauses increment the multiset; deletions
    decrement and are matched by canonical clause value.  Deleting a
    clause with live count 0 (including deletes that reference dropped
    tautologies) is a warning-counted no-op.
    """

    def __init__(self, num_variables: int, reduction: ReductionKind,
                 weight_fn: WeightFunction):
        self.reduction = reduction
        self.weight_fn = weight_fn
        self.graph = WeightedGraph(num_variables)
        self.multiset: dict = {}
        self.unknown_deletes = 0

    @classmethod
    def build_initial(cls, formula: CnfFormula, reduction: ReductionKind,
                      weight_fn: WeightFunction) -> "GraphState":
        state = cls(formula.num_variables, reduction, weight_fn)
        for clause in formula.clauses:
            state._add_clause(clause)
        return state

    def _pair_deltas(self, clause: Clause, sign: float):
        if len(clause) < 2:
            return []
        w = sign * self.weight_fn.weight(len(clause))
        return [(pair, w) for pair in reduce_clause(clause, self.reduction)]

    def _add_clause(self, clause: Clause):
        self.multiset[clause] = self.multiset.get(clause, 0) + 1
        deltas = self._pair_deltas(clause, 1.0)
        for (u, v), dw in deltas:
            self.graph.add_weight(u, v, dw)
        for lit in clause:
            self.graph.ensure_node(-lit if lit < 0 else lit)
        return deltas

    def _delete_clause(self, clause: Clause):
        count = self.multiset.get(clause, 0)
        if count == 0:
            self.unknown_deletes += 1
            return []
        if count == 1:
            del self.multiset[clause]
        else:
            self.multiset[clause] = count - 1
        deltas = self._pair_deltas(clause, -1.0)
        for (u, v), dw in deltas:
            self.graph.add_weight(u, v, dw)
        return deltas

    def apply_event(self, event: ClauseEvent):
        """Apply one event; returns the ((u, v), dw) edge deltas it caused."""
        clause = event.clause
        if clause is None:  # tautology: occupies its sequence number only
            if event.kind is EventKind.DELETE:
                self.unknown_deletes += 1
            return []
        if event.kind is EventKind.ADD:
            return self._add_clause(clause)
        return self._delete_clause(clause)

    def rebuild(self) -> WeightedGraph:
        """From-scratch graph over the live multiset (no incremental drift)."""
        g = WeightedGraph(self.graph.num_nodes)
        for clause, count in self.multiset.items():
            if len(clause) < 2:
                continue
            w = count * self.weight_fn.weight(len(clause))
            for u, v in reduce_clause(clause, self.reduction):
                g.add_weight(u, v, w)
        return g

    def snapshot(self) -> dict:
        return {
            "edges": dict(self.graph.edges),
            "num_nodes": self.graph.num_nodes,
            "multiset": dict(self.multiset),
            "unknown_deletes": self.unknown_deletes,
        }

    def restore(self, snap: dict) -> None:
        self.graph = WeightedGraph(snap["num_nodes"], dict(snap["edges"]))
        self.multiset = dict(snap["multiset"])
        self.unknown_deletes = snap["unknown_deletes"]


def write_edge_list(graph: WeightedGraph, fp: TextIO) -> None:
    """Plain 'u v w' lines in sorted edge order."""
    for (u, v), w in graph.sorted_edges():
        fp.write(f"{u} {v} {w!r}\n")


def read_edge_list(lines: Iterable[str]) -> WeightedGraph:
    g = WeightedGraph()
    for line in lines:
        parts = line.split()
        if not parts:
            continue
        u, v, w = int(parts[0]), int(parts[1]), float(parts[2])
        g.add_weight(u, v, w)
    return g


def write_dot(graph: WeightedGraph, fp: TextIO, name: str = "vig") -> None:
    fp.write(f"graph {name} {{\n")
    for (u, v), w in graph.sorted_edges():
        fp.write(f"  {u} -- {v} [weight={w!r}];\n")
    fp.write("}\n")
