import io
import time

import pytest

from clauseviz.formats import (MalformedHeader, NonIntegerToken,
                               UnterminatedClause, parse_dimacs, parse_drat,
                               write_dimacs, write_drat)
from clauseviz.model import EventKind


def _dimacs(text):
    return parse_dimacs(io.StringIO(text))


def test_parse_dimacs_basic():
    f = _dimacs("p cnf 3 2\n1 -2 0\n2 3 0\n")
    assert f.num_variables == 3
    assert f.clauses == [(1, -2), (2, 3)]


def test_parse_dimacs_dedup():
    f = _dimacs("c comment\np cnf 1 1\n1 1 0\n")
    assert f.num_variables == 1
    assert f.clauses == [(1,)]


def test_parse_dimacs_tautology_dropped():
    f = _dimacs("p cnf 2 1\n1 -1 0\n")
    assert f.num_variables == 2
    assert f.clauses == []


def test_parse_dimacs_extends_variables(caplog):
    f = _dimacs("p cnf 2 1\n1 5 0\n")
    assert f.num_variables == 5


def test_parse_dimacs_count_mismatch_is_warning():
    f = _dimacs("p cnf 2 5\n1 2 0\n")
    assert len(f.clauses) == 1


def test_parse_dimacs_multiline_and_multiclause_lines():
    f = _dimacs("p cnf 4 2\n1 2\n3 0 4 0\n")
    assert f.clauses == [(1, 2, 3), (4,)]


def test_parse_dimacs_errors():
    with pytest.raises(MalformedHeader):
        _dimacs("1 2 0\n")
    with pytest.raises(MalformedHeader):
        _dimacs("p dnf 1 1\n1 0\n")
    with pytest.raises(NonIntegerToken) as exc:
        _dimacs("p cnf 2 1\n1 x 0\n")
    assert exc.value.line_no == 2
    with pytest.raises(UnterminatedClause):
        _dimacs("p cnf 2 1\n1 2\n")
    with pytest.raises(MalformedHeader):
        _dimacs("")


def _drat(text):
    return list(parse_drat(io.StringIO(text)))


def test_parse_drat_basic():
    events = _drat("3 0\nd 1 -2 0\n")
    assert events == [(EventKind.ADD, (3,)), (EventKind.DELETE, (1, -2))]


def test_parse_drat_empty_clause():
    assert _drat("0\n") == [(EventKind.ADD, ())]


def test_parse_drat_comment_skip():
    assert _drat("c hint\n-4 5 0\n") == [(EventKind.ADD, (-4, 5))]


def test_parse_drat_keeps_raw_literals():
    # canonicalization happens at ingest, not in the parser
    assert _drat("3 1 3 0\n") == [(EventKind.ADD, (3, 1, 3))]


def test_parse_drat_multiline_clause_and_unterminated():
    assert _drat("1 2\n3 0\n") == [(EventKind.ADD, (1, 2, 3))]
    with pytest.raises(UnterminatedClause):
        _drat("1 2\n")


def test_parse_drat_concatenation_property(rng):
    text_a = "1 2 0\nd 1 2 0\nc x\n3 0\n"
    text_b = "d 3 0\n-1 -2 0\n"
    joined = _drat(text_a + text_b)
    assert joined == _drat(text_a) + _drat(text_b)


def test_dimacs_round_trip():
    f = _dimacs("p cnf 4 3\n1 -2 0\n2 3 4 0\n-4 0\n")
    buf = io.StringIO()
    write_dimacs(f, buf)
    again = _dimacs(buf.getvalue())
    assert again == f


def test_drat_round_trip():
    events = [(EventKind.ADD, (1, -2)), (EventKind.DELETE, (3,)),
              (EventKind.ADD, ())]
    buf = io.StringIO()
    write_drat(events, buf)
    assert _drat(buf.getvalue()) == events


def test_parser_throughput_100k_clauses_per_sec(rng):
    # property from the module contract: >= 100k clauses/sec at mean len 10
    lines = []
    for _ in range(50000):
        lits = rng.integers(1, 1000, size=10)
        signs = rng.integers(0, 2, size=10) * 2 - 1
        lines.append(" ".join(str(int(l * s)) for l, s in zip(lits, signs)) + " 0\n")
    text = "".join(lines)
    start = time.perf_counter()
    count = sum(1 for _ in parse_drat(io.StringIO(text)))
    elapsed = time.perf_counter() - start
    assert count == 50000
    assert count / elapsed >= 100000, f"only {count / elapsed:.0f} clauses/sec"
