import json
import socket
import threading
import time

import pytest

from clauseviz.cli import main
from clauseviz.config import OPTIONS, resolve, session_config_from

CNF = "p cnf 4 4\n1 2 0\n2 3 0\n3 4 0\n4 1 0\n"
DRAT = "1 3 0\nd 1 2 0\n2 4 0\nd 2 3 0\n0\n"


@pytest.fixture
def cnf_file(tmp_path):
    path = tmp_path / "f.cnf"
    path.write_text(CNF)
    return path


@pytest.fixture
def drat_file(tmp_path):
    path = tmp_path / "p.drat"
    path.write_text(DRAT)
    return path


def test_unknown_flag_exits_1(capsys):
    assert main(["transform", "--cnf", "x.cnf", "--bogus"]) == 1
    err = capsys.readouterr().err
    assert "usage" in err.lower()


def test_missing_subcommand_exits_1():
    assert main([]) == 1


def test_runtime_error_exits_2(tmp_path, capsys):
    assert main(["transform", "--cnf", str(tmp_path / "missing.cnf")]) == 2
    assert "error" in capsys.readouterr().err.lower()


def test_transform_edge_list(cnf_file, tmp_path, capsys):
    out = tmp_path / "edges.txt"
    code = main(["transform", "--cnf", str(cnf_file), "--out", str(out),
                 "--reduction", "ring", "--stats"])
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 4
    assert lines[0].split()[:2] == ["1", "2"]
    stats = json.loads(capsys.readouterr().out)
    assert stats["variables"] == 4 and stats["edges"] == 4


def test_transform_dot_layout_hierarchy(cnf_file, tmp_path):
    dot = tmp_path / "g.dot"
    pos = tmp_path / "g.pos"
    hier = tmp_path / "hier"
    code = main(["transform", "--cnf", str(cnf_file), "--dot", str(dot),
                 "--layout-out", str(pos), "--hierarchy-out", str(hier),
                 "--contract-target", "2", "--iterations", "30"])
    assert code == 0
    assert dot.read_text().startswith("graph vig {")
    assert len(pos.read_text().splitlines()) >= 1


def test_transform_warm_start_round_trip(cnf_file, tmp_path):
    pos_a = tmp_path / "a.pos"
    pos_b = tmp_path / "b.pos"
    assert main(["transform", "--cnf", str(cnf_file), "--layout-out",
                 str(pos_a), "--iterations", "40"]) == 0
    # warm-starting from the previous result must parse and run
    assert main(["transform", "--cnf", str(cnf_file), "--layout-out",
                 str(pos_b), "--warm-start", str(pos_a),
                 "--iterations", "10"]) == 0
    from clauseviz.layout import read_positions
    with open(pos_b) as fp:
        parsed = read_positions(fp)
    assert set(parsed) == {1, 2, 3, 4}


def test_render_writes_frames_and_manifest(cnf_file, drat_file, tmp_path, capsys):
    out = tmp_path / "frames"
    code = main(["render", "--cnf", str(cnf_file), "--proof", str(drat_file),
                 "--out", str(out), "--frames", "3", "--width", "200",
                 "--height", "120", "--iterations", "20", "--stats"])
    assert code == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["frame-000000.png", "frame-000001.png",
                     "frame-000002.png", "manifest.json"]
    stats = json.loads(capsys.readouterr().out)
    assert stats["frames"] == 3 and stats["events"] == 5


def test_produce_against_plain_socket(drat_file, capsys):
    received = bytearray()
    ready = threading.Event()
    done = threading.Event()
    srv = socket.create_server(("127.0.0.1", 0))
    port = srv.getsockname()[1]

    def serve():
        ready.set()
        conn, _ = srv.accept()
        while True:
            chunk = conn.recv(65536)
            if not chunk:
                break
            received.extend(chunk)
        conn.close()
        done.set()

    t = threading.Thread(target=serve, daemon=True)
    t.start()
    ready.wait(5)
    code = main(["produce", "--proof", str(drat_file),
                 "--connect", f"127.0.0.1:{port}", "--stats"])
    assert code == 0
    assert done.wait(10)
    srv.close()
    stats = json.loads(capsys.readouterr().out)
    assert stats == {"sent": 5, "terminated": True}
    from clauseviz.wire import decode_all, MessageKind
    msgs = decode_all(bytes(received))
    assert msgs[0].kind is MessageKind.HELLO
    assert msgs[-1].kind is MessageKind.TERMINATE
    assert len(msgs) == 7  # hello + 5 events + terminate


def test_produce_connection_refused_exits_2(drat_file, capsys):
    # pick a port with nothing behind it
    probe = socket.create_server(("127.0.0.1", 0))
    port = probe.getsockname()[1]
    probe.close()
    assert main(["produce", "--proof", str(drat_file),
                 "--connect", f"127.0.0.1:{port}"]) == 2


# -- config precedence -------------------------------------------------------

def test_defaults_resolve():
    resolved = resolve({}, None, env={})
    assert resolved["reduction"] == "ring"
    assert resolved["heat_k"] == 1000
    assert resolved["chunk_policy"] == "drain"


def test_file_overrides_default(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"heat_k": 42, "reduction": "clique"}))
    resolved = resolve({}, str(cfg), env={})
    assert resolved["heat_k"] == 42
    assert resolved["reduction"] == "clique"


def test_env_overrides_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"heat_k": 42}))
    resolved = resolve({}, str(cfg), env={"CLAUSEVIZ_HEAT_K": "77"})
    assert resolved["heat_k"] == 77


def test_flag_overrides_env(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"heat_k": 42}))
    resolved = resolve({"heat_k": 99}, str(cfg),
                       env={"CLAUSEVIZ_HEAT_K": "77"})
    assert resolved["heat_k"] == 99


def test_every_option_has_env_and_file_key(tmp_path):
    # precedence covered option by option: file beats default, env beats file
    file_values = {}
    env = {}
    for opt in OPTIONS:
        if opt.key == "chunk_policy":
            file_values[opt.key] = "7"
            env[opt.env_var] = "9"
        elif opt.key == "palette":
            file_values[opt.key] = "#000000,#ffffff"
            env[opt.env_var] = "#111111,#eeeeee"
        elif isinstance(opt.default, (int, float)) and not isinstance(opt.default, bool):
            file_values[opt.key] = type(opt.default)(opt.default + 1)
            env[opt.env_var] = str(type(opt.default)(opt.default + 2))
        else:
            alt = {"ring": "clique", "inverse-size-minus-one": "inverse-size",
                   "window": "decay", "drain": "5"}
            file_values[opt.key] = alt.get(opt.default, opt.default)
            env[opt.env_var] = alt.get(opt.default, opt.default)
    cfg = tmp_path / "all.json"
    cfg.write_text(json.dumps(file_values))
    from_file = resolve({}, str(cfg), env={})
    from_env = resolve({}, str(cfg), env=env)
    defaults = resolve({}, None, env={})
    for opt in OPTIONS:
        assert from_file[opt.key] != defaults[opt.key] or \
            file_values[opt.key] == opt.default
        assert from_env[opt.key] != from_file[opt.key] or \
            env[opt.env_var] == str(file_values[opt.key])


def test_unknown_config_file_key_rejected(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"no_such_option": 1}))
    with pytest.raises(ValueError):
        resolve({}, str(cfg), env={})


def test_session_config_from_resolved():
    resolved = resolve({"reduction": "clique", "heat_mode": "decay"},
                       None, env={})
    config = session_config_from(resolved)
    assert config.reduction.value == "clique"
    assert config.heat.mode.value == "decay"
    assert config.layout.iterations == 500


def test_cli_env_override_applies(cnf_file, tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("CLAUSEVIZ_REDUCTION", "clique")
    out = tmp_path / "edges.txt"
    assert main(["transform", "--cnf", str(cnf_file), "--out", str(out),
                 "--stats"]) == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["edges"] == 4  # ring of binary clauses == clique of them
