"""Parsers and writers for DIMACS CNF files and textual DRAT proofs.

Both parsers are streaming: they consume an iterable of lines and hold at
most one clause in memory, so multi-million-clause proofs never need to fit
in RAM.  Diagnostics that are tolerated by design (tautologies, clause
count mismatches, literals beyond the declared variable count) are logged
as warnings instead of raised.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Iterator, TextIO, Tuple

from .model import Clause, CnfFormula, EventKind, canonicalize

log = logging.getLogger("clauseviz.formats")


class FormatError(ValueError):
    """Base class for unrecoverable input-format defects."""


class MalformedHeader(FormatError):
    pass


class NonIntegerToken(FormatError):
    def __init__(self, token: str, line_no: int):
        super().__init__(f"non-integer token {token!r} on line {line_no}")
        self.token = token
        self.line_no = line_no


class UnterminatedClause(FormatError):
    pass


@dataclass(frozen=True)
class DimacsHeader:
    num_variables: int
    num_clauses: int


def _parse_header(line: str, line_no: int) -> DimacsHeader:
    parts = line.split()
    if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
        raise MalformedHeader(f"bad 'p cnf' header on line {line_no}: {line!r}")
    try:
        num_vars, num_clauses = int(parts[2]), int(parts[3])
    except ValueError:
        raise MalformedHeader(f"non-numeric header counts on line {line_no}: {line!r}")
    if num_vars < 0 or num_clauses < 0:
        raise MalformedHeader(f"negative counts in header on line {line_no}")
    return DimacsHeader(num_vars, num_clauses)


def parse_dimacs(lines: Iterable[str]) -> CnfFormula:
    """Parse a DIMACS CNF stream into a CnfFormula with canonical clauses.

    Tautological clauses are dropped with a warning.  Literals above the
    declared variable count extend ``num_variables`` with a warning.  A
    clause count differing from the header is a warning, not an error.
    """
    header = None
    clauses = []
    current: list[int] = []
    num_vars = 0
    tautologies = 0
    line_no = 0
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("c") or stripped.startswith("%"):
            continue
        if header is None:
            if not stripped.startswith("p"):
                raise MalformedHeader(
                    f"clause data before 'p cnf' header on line {line_no}")
            header = _parse_header(stripped, line_no)
            num_vars = header.num_variables
            continue
        for tok in stripped.split():
            try:
                lit = int(tok)
            except ValueError:
                raise NonIntegerToken(tok, line_no)
            if lit == 0:
                canonical = canonicalize(current)
                current = []
                if canonical is None:
                    tautologies += 1
                    continue
                for l in canonical:
                    v = -l if l < 0 else l
                    if v > num_vars:
                        log.warning(
                            "variable %d exceeds declared count %d; extending",
                            v, num_vars)
                        num_vars = v
                clauses.append(canonical)
            else:
                current.append(lit)
    if header is None:
        raise MalformedHeader("missing 'p cnf' header")
    if current:
        raise UnterminatedClause(
            f"end of input inside a clause (line {line_no})")
    if tautologies:
        log.warning("dropped %d tautological clause(s)", tautologies)
    if len(clauses) + tautologies != header.num_clauses:
        log.warning("header declares %d clauses, found %d",
                    header.num_clauses, len(clauses) + tautologies)
    return CnfFormula(num_variables=num_vars, clauses=clauses)


def parse_dimacs_file(path) -> CnfFormula:
    with open(path, "r", encoding="utf-8") as fp:
        return parse_dimacs(fp)


RawEvent = Tuple[EventKind, Tuple[int, ...]]


def parse_drat(lines: Iterable[str]) -> Iterator[RawEvent]:
    """Lazily parse a textual DRAT stream into (kind, raw literals) pairs.

    The literals are yielded verbatim (uncanonicalized) because sequence
    numbering and canonicalization happen at consumer ingest; tautologies
    must survive until then so proof positions stay aligned.  Deletions of
    clauses never added are not this parser's concern.
    """
    kind = EventKind.ADD
    current: list[int] = []
    in_clause = False
    line_no = 0
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if not in_clause and (stripped.startswith("c") or stripped.startswith("%")):
            continue
        tokens = stripped.split()
        start = 0
        if not in_clause and tokens and tokens[0] == "d":
            kind = EventKind.DELETE
            in_clause = True
            start = 1
        for tok in tokens[start:]:
            if not in_clause and tok == "d":
                kind = EventKind.DELETE
                in_clause = True
                continue
            try:
                lit = int(tok)
            except ValueError:
                raise NonIntegerToken(tok, line_no)
            if lit == 0:
                yield (kind, tuple(current))
                current = []
                kind = EventKind.ADD
                in_clause = False
            else:
                current.append(lit)
                in_clause = True
    if in_clause:
        raise UnterminatedClause(
            f"end of input inside a proof line (line {line_no})")


def parse_drat_file(path) -> Iterator[RawEvent]:
    with open(path, "r", encoding="utf-8") as fp:
        yield from parse_drat(fp)


def write_dimacs(formula: CnfFormula, fp: TextIO) -> None:
    fp.write(f"p cnf {formula.num_variables} {len(formula.clauses)}\n")
    for clause in formula.clauses:
        fp.write(" ".join(str(l) for l in clause))
        fp.write(" 0\n")


def write_drat(events: Iterable[RawEvent], fp: TextIO) -> None:
    for kind, lits in events:
        body = " ".join(str(l) for l in lits)
        if kind is EventKind.DELETE:
            fp.write(f"d {body} 0\n" if body else "d 0\n")
        else:
            fp.write(f"{body} 0\n" if body else "0\n")
