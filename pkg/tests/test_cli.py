import csv
import io
import json

import pytest

from noregret_stackelberg import random_game
from noregret_stackelberg.cli import main
from noregret_stackelberg.gamefile import dump_game
from noregret_stackelberg.games import ce1_game, ce2_game


def cli(*args):
    out = io.StringIO()
    return main(list(args), out=out), out.getvalue()


@pytest.fixture
def game_files(tmp_path):
    paths = {}
    for name, g in (("ce1", ce1_game()), ("ce2", ce2_game())):
        paths[name] = tmp_path / f"{name}.yaml"
        paths[name].write_text(dump_game(g))
    return paths


def test_values_ce1(game_files, tmp_path):
    code, _ = cli("values", str(game_files["ce1"]), "--output", str(tmp_path / "r.json"))
    assert code == 0
    report = json.loads((tmp_path / "r.json").read_text())
    assert report["values"]["V_pure"]["value"] == pytest.approx(1.0, abs=1e-9)


def test_values_ce2_stdout(game_files):
    code, text = cli("values", str(game_files["ce2"]), "--grid", "0.1")
    report = json.loads(text)
    assert code == 0 and report["grid_resolution"] == 0.1
    assert report["values"]["v_mixed"]["value"] == pytest.approx(0.0, abs=1e-6)
    assert report["values"]["v_corr"]["value"] == pytest.approx(-1 / 3, abs=1e-6)
    assert all(link["ok"] for link in report["chain"])


def test_values_size_cap(tmp_path, capsys):
    p = tmp_path / "big.yaml"
    p.write_text(dump_game(random_game((5, 5, 5, 2), seed=0)))
    code, _ = cli("values", str(p))
    assert code == 2
    assert "unsupported size" in capsys.readouterr().err


def test_values_parse_error(tmp_path, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text("players: 2\nactions: [[a], [b]]\nutilities: [[1], [x]]\n")
    code, _ = cli("values", str(p))
    assert code == 1
    assert f"{p}:3:" in capsys.readouterr().err


def test_counterexample_headlines(tmp_path):
    code, text = cli("counterexample", "ce1", "--rounds", "100", "--out-dir", str(tmp_path))
    assert code == 0 and "avg 0 < V_pure 1" in text
    rows = list(csv.reader((tmp_path / "ce1_trajectory.csv").open()))
    assert len(rows) == 101 and {tuple(r[2:]) for r in rows[1:]} == {("T", "L", "E")}
    code, text = cli("counterexample", "ce2", "--rounds", "9")
    assert "avg -1/3 < v_mixed 0" in text
    code, text = cli("counterexample", "ce2", "--rounds", "1", "--out-dir", str(tmp_path))
    assert "avg 0 = v_mixed 0" in text
    rows = list(csv.reader((tmp_path / "ce2_trajectory.csv").open()))
    assert rows[1:] == [["0", "1", "T", "L", "E"]]


def test_counterexample_rejects_bad_rounds():
    with pytest.raises(SystemExit):
        cli("counterexample", "ce1", "--rounds", "0")


SIM = """\
mode: simulate
game: builtin:ce2
learners: {{kind: internal-regret-matching}}
optimizer: {{kind: fixed-mixed, alpha: [1.0]}}
rounds: {rounds}
seeds: [0, 1]
"""


def test_simulate_to_stdout(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(SIM.format(rounds=1))
    code, text = cli("simulate", str(cfg))
    rows = list(csv.reader(io.StringIO(text)))
    assert code == 0 and len(rows) == 3 and [r[1] for r in rows[1:]] == ["1", "1"]


def test_simulate_writes_files(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(SIM.format(rounds=100_000) + "checkpoints: [100000]\noutput: {metrics_csv: out/m.csv}\n")
    assert cli("simulate", str(cfg))[0] == 0
    rows = list(csv.DictReader((tmp_path / "out" / "m.csv").open()))
    assert all(float(r["dist_ced"]) <= 0.05 for r in rows)


def test_simulate_scripted_optimizer(tmp_path):
    from fixtures import ce2_two_actions

    (tmp_path / "g.yaml").write_text(dump_game(ce2_two_actions()))
    cfg = tmp_path / "c.yaml"
    cfg.write_text(
        "mode: simulate\ngame: g.yaml\nlearners: {kind: external-regret-matching}\n"
        "optimizer: {kind: scripted, sequence: [E, F, F]}\nrounds: 30\nseeds: [0]\n"
        "output: {metrics_csv: m.csv, trajectory_csv: t.csv}\n"
    )
    assert cli("simulate", str(cfg))[0] == 0
    rows = list(csv.DictReader((tmp_path / "t.csv").open()))
    assert [r["a3"] for r in rows[:6]] == ["E", "F", "F", "E", "F", "F"]


def test_simulate_config_error(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(SIM.format(rounds=0))
    assert cli("simulate", str(cfg))[0] == 1
    assert "c.yaml:5:" in capsys.readouterr().err


GUARANTEE = """\
mode: guarantee
game: builtin:ce2
learners: {{kind: {kind}}}
rounds: 2000
seeds: [0, 1, 2]
epsilon: {eps}
"""


def test_guarantee_pass(tmp_path):
    cfg = tmp_path / "g.yaml"
    cfg.write_text(GUARANTEE.format(kind="internal-regret-matching", eps=0.05))
    code, text = cli("guarantee", str(cfg))
    assert code == 0
    assert "benchmark v_corr" in text
    assert "expected-value bound (mean over seeds)" in text and text.count("PASS") == 2


def test_guarantee_external_uses_hannan(tmp_path):
    cfg = tmp_path / "g.yaml"
    cfg.write_text(GUARANTEE.format(kind="external-regret-matching", eps=0.05) + "output: {report: r.txt}\n")
    code, text = cli("guarantee", str(cfg))
    assert code == 0
    assert "benchmark v_h" in (tmp_path / "r.txt").read_text()
    assert "PASS" in text


@pytest.mark.parametrize("kind, eps", [("internal-regret-matching", 0), ("scripted-ce2", 0.05)])
def test_guarantee_refusals(tmp_path, kind, eps):
    cfg = tmp_path / "g.yaml"
    cfg.write_text(GUARANTEE.format(kind=kind, eps=eps))
    assert cli("guarantee", str(cfg))[0] == 1


def test_internal_error_exit_code(monkeypatch, game_files, capsys):
    from noregret_stackelberg import cli as cli_module
    from noregret_stackelberg.errors import InternalInvariantError

    def broken(*a, **k):
        raise InternalInvariantError("polytope LP returned infeasible")

    monkeypatch.setattr(cli_module, "stackelberg_report", broken)
    assert cli("values", str(game_files["ce2"]))[0] == 3
    assert "internal error" in capsys.readouterr().err
