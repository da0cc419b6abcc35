import numpy as np
import pytest

from clauseviz.model import ClauseEvent, EventKind, canonicalize


def random_clause(rng, num_vars, max_len=10):
    """Raw literal tuple; may contain duplicates but no complementary pair."""
    size = int(rng.integers(1, max_len + 1))
    variables = rng.choice(np.arange(1, num_vars + 1),
                           size=min(size, num_vars), replace=False)
    signs = rng.integers(0, 2, size=len(variables)) * 2 - 1
    return tuple(int(v * s) for v, s in zip(variables, signs))


def random_events(rng, count, num_vars, max_len=10, delete_prob=0.3):
    """Deterministic add/delete stream; deletes reuse earlier clauses."""
    events = []
    added = []
    for seq in range(count):
        if added and rng.random() < delete_prob:
            clause = added[int(rng.integers(0, len(added)))]
            events.append(ClauseEvent(EventKind.DELETE, canonicalize(clause), seq))
        else:
            clause = random_clause(rng, num_vars, max_len)
            added.append(clause)
            events.append(ClauseEvent(EventKind.ADD, canonicalize(clause), seq))
    return events


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
