"""Producer -> TCP -> consumer -> session -> API, wired like the view CLI."""

import http.client
import json
import sys
import threading
import time

import numpy as np
import pytest

from clauseviz.api import ApiServer
from clauseviz.cli import main
from clauseviz.layout import LayoutConfig
from clauseviz.model import CnfFormula, EventKind, canonicalize
from clauseviz.session import (EventLog, PlaybackStatus, Session,
                               SessionConfig, SessionRunner)
from clauseviz.wire import ConsumerServer


@pytest.fixture
def stack():
    formula = CnfFormula(30, [canonicalize((i, i + 1)) for i in range(1, 30)])
    config = SessionConfig(layout=LayoutConfig(iterations=15, seed=0),
                           frame_rate=200.0, checkpoint_interval=500)
    session = Session(formula, config)
    consumer = ConsumerServer("127.0.0.1", 0, session.log).start()
    runner = SessionRunner(session).start()
    api = ApiServer(runner, "127.0.0.1", 0).start()
    yield session, consumer, runner, api
    api.stop()
    runner.stop()
    consumer.stop()


def _write_proof(path, num_events, num_vars=30, seed=3):
    rng = np.random.default_rng(seed)
    lines = []
    live = []
    for _ in range(num_events):
        if live and rng.random() < 0.35:
            clause = live.pop(int(rng.integers(0, len(live))))
            lines.append("d " + " ".join(map(str, clause)) + " 0")
        else:
            size = int(rng.integers(1, 6))
            variables = rng.choice(np.arange(1, num_vars + 1), size=size,
                                   replace=False)
            signs = rng.integers(0, 2, size=size) * 2 - 1
            clause = [int(v * s) for v, s in zip(variables, signs)]
            live.append(clause)
            lines.append(" ".join(map(str, clause)) + " 0")
    path.write_text("\n".join(lines) + "\n")
    return num_events


def test_full_pipeline(stack, tmp_path, capsys):
    session, consumer, runner, api = stack
    proof = tmp_path / "run.drat"
    total = _write_proof(proof, 2000)
    runner.submit(session.play)

    code = main(["produce", "--proof", str(proof),
                 "--connect", f"127.0.0.1:{consumer.port}",
                 "--num-variables", "30"])
    assert code == 0

    deadline = time.monotonic() + 20
    while time.monotonic() < deadline:
        if session.status is PlaybackStatus.ENDED:
            break
        time.sleep(0.02)
    assert session.status is PlaybackStatus.ENDED
    assert len(session.log) == total
    assert session.cursor == total

    conn = http.client.HTTPConnection("127.0.0.1", api.port, timeout=10)
    conn.request("GET", "/api/state")
    state = json.loads(conn.getresponse().read())["state"]
    conn.close()
    assert state["log_length"] == total
    assert state["log_closed"] is True

    # rewind over the streamed history and spot-check against scratch replay
    from clauseviz.graph import GraphState
    from clauseviz.heat import make_heat_state
    target = 777
    runner.submit(lambda: session.seek(target))
    oracle = GraphState.build_initial(session.formula, session.config.reduction,
                                      session.config.weight_fn)
    heat = make_heat_state(session.config.heat)
    for ev in session.log.iter_range(0, target):
        oracle.apply_event(ev)
        heat.apply(ev)
    assert session.graph_state.multiset == oracle.multiset
    assert session.heat_state == heat


def test_throttled_producer(stack, tmp_path):
    session, consumer, runner, api = stack
    proof = tmp_path / "slow.drat"
    _write_proof(proof, 50)
    start = time.monotonic()
    code = main(["produce", "--proof", str(proof),
                 "--connect", f"127.0.0.1:{consumer.port}",
                 "--rate", "200"])
    elapsed = time.monotonic() - start
    assert code == 0
    assert elapsed >= 0.2  # 50 events at 200/s


def test_solver_adapter_subprocess(stack, tmp_path):
    session, consumer, runner, api = stack
    # a "solver" that prints a tiny DRAT proof to stdout
    script = tmp_path / "fake_solver.py"
    script.write_text(
        "import sys\n"
        "sys.stdout.write('1 2 0\\nc comment\\nd 1 2 0\\n5 0\\n0\\n')\n")
    code = main(["produce", "--solver", f"{sys.executable} {script}",
                 "--connect", f"127.0.0.1:{consumer.port}"])
    assert code == 0
    deadline = time.monotonic() + 10
    while len(session.log) < 4 and time.monotonic() < deadline:
        time.sleep(0.02)
    kinds = [session.log.get(i).kind for i in range(4)]
    assert kinds == [EventKind.ADD, EventKind.DELETE, EventKind.ADD,
                     EventKind.ADD]
    assert session.log.get(3).clause == ()  # the empty clause ends the proof
