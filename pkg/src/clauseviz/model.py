"""Core domain types: literals, clauses, formulas, and clause events.

Literals are plain nonzero signed ints (DIMACS convention: sign is the
polarity, absolute value is the 1-based variable index).  A clause in
canonical form is a tuple of literals, deduplicated and sorted by variable
index.  The canonical form makes the ring reduction a direct traversal of
the stored clause and makes clause values usable as dict keys.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

Literal = int
Clause = tuple  # tuple[int, ...] in canonical form

#: canonicalize() result for the empty clause.
EMPTY_CLAUSE: Clause = ()


class EventKind(enum.Enum):
    ADD = "add"
    DELETE = "delete"


def variable(lit: Literal) -> int:
    return abs(lit)


def canonicalize(literals) -> Optional[Clause]:
    """Normalize a raw literal list into canonical clause form.

    Returns ``()`` for the empty clause and ``None`` for tautologies
    (a variable occurring with both polarities).  Duplicate literals are
    removed and the result is sorted by variable index.  Idempotent, and
    invariant under permutation of the input.
    """
    if not literals:
        return EMPTY_CLAUSE
    seen = set(literals)
    for lit in seen:
        if lit == 0:
            raise ValueError("literal 0 is not a valid literal")
        if -lit in seen:
            return None
    return tuple(sorted(seen, key=abs))


def is_tautology(canonical: Optional[Clause]) -> bool:
    return canonical is None


@dataclass(frozen=True, slots=True)
class ClauseEvent:
    """One Add or Delete of a clause.

    ``clause`` holds the canonical form; ``None`` marks a tautology that
    still occupies its sequence number so replay offsets stay aligned with
    the proof file.  ``sequence`` is assigned by the consumer at ingest
    (-1 = not yet assigned).
    """

    kind: EventKind
    clause: Optional[Clause]
    sequence: int = -1

    @property
    def is_add(self) -> bool:
        return self.kind is EventKind.ADD


@dataclass
class CnfFormula:
    """A parsed CNF instance: header variable count plus canonical clauses."""

    num_variables: int
    clauses: list = field(default_factory=list)

    def max_variable(self) -> int:
        m = self.num_variables
        for clause in self.clauses:
            for lit in clause:
                v = -lit if lit < 0 else lit
                if v > m:
                    m = v
        return m
