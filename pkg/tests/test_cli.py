import csv
import json
from pathlib import Path

import pytest

from urlab import cli
from urlab.scenario import ConfigError, build_scenario, load_config, set_dotted
from urlab.verdict import URVerdict

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

VACUUM = """
seed = 1
[basis]
kind = "fock"
N = 20
[states.vac]
kind = "fock"
n = 0
[states.one]
kind = "fock"
n = 1
[observables]
p = {op = "p"}
q = {op = "q"}
[[relations]]
name = "schrodinger_two"
observables = ["p", "q"]
states = ["vac"]
expect = "saturated"
"""


def write(tmp_path, text, name="s.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_eval_vacuum_config(tmp_path, capsys):
    assert run("eval", CONFIGS / "vacuum.toml", "--out", tmp_path) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["status"] == "ok"
    assert [v["name"] for v in report["verdicts"]] == [
        "heisenberg_kennard", "trace_two", "schrodinger_two"]
    assert all(v["saturated"] for v in report["verdicts"])
    assert capsys.readouterr().out.count("ok  ") == 3


def test_report_replays(tmp_path):
    cfg = write(tmp_path, VACUUM)
    assert run("eval", cfg, "--out", tmp_path / "a") == 0
    assert run("eval", tmp_path / "a" / "report.json", "--out", tmp_path / "b") == 0
    a = json.loads((tmp_path / "a" / "report.json").read_text())
    b = json.loads((tmp_path / "b" / "report.json").read_text())
    assert a == b


def test_corrupted_state_is_config_error(tmp_path, capsys):
    assert run("eval", CONFIGS / "corrupted.toml", "--out", tmp_path) == 2
    assert "norm 0.9" in capsys.readouterr().err


@pytest.mark.parametrize("patch, message", [
    (lambda t: t.replace('states = ["vac"]', 'states = ["ghost"]'), "unknown state"),
    (lambda t: t.replace('"schrodinger_two"', '"made_up"'), "unknown name"),
    (lambda t: t.replace("seed = 1", ""), "seed"),
    (lambda t: t + "[tolerances]\nsaturation = -1\n", "positive"),
    (lambda t: t.replace('kind = "fock"\nN = 20', 'kind = "fock"\nN = 1'), "N >= 2"),
    (lambda t: t + "[[[", "parse"),
])
def test_config_errors(tmp_path, capsys, patch, message):
    assert run("eval", write(tmp_path, patch(VACUUM)), "--out", tmp_path) == 2
    assert message in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert run("eval", tmp_path / "nope.toml") == 2


def test_missed_saturation_exits_one(tmp_path):
    cfg = write(tmp_path, VACUUM.replace('states = ["vac"]', 'states = ["one"]'))
    assert run("eval", cfg, "--out", tmp_path) == 1
    assert not list(tmp_path.glob("certificate_*.json"))


def test_violation_writes_certificate(tmp_path, monkeypatch):
    def fake(name, obs, states, **kw):
        return [URVerdict(name, 0.0, 1.0, kw["tol"], kw["floor"])]

    monkeypatch.setattr(cli, "evaluate", fake)
    assert run("eval", write(tmp_path, VACUUM), "--out", tmp_path) == 1
    cert = json.loads((tmp_path / "certificate_000.json").read_text())
    assert cert["verdict"]["margin"] == -1.0
    amps = cert["states"][0]["amplitudes"]
    assert amps[0] == [1.0, 0.0] and len(amps) == 20
    assert len(cert["observables"]) == 2


def test_seed_override(tmp_path, monkeypatch):
    text = VACUUM + '[states.r]\nkind = "random"\nlevels = 5\n'
    cfg = write(tmp_path, text)
    monkeypatch.setenv("URLAB_SEED", "99")
    assert run("eval", cfg, "--out", tmp_path) == 0
    assert json.loads((tmp_path / "report.json").read_text())["seed"] == 99
    monkeypatch.setenv("URLAB_SEED", "x")
    assert run("eval", cfg, "--out", tmp_path) == 2


def test_tolerance_flags(tmp_path):
    cfg = write(tmp_path, VACUUM.replace('states = ["vac"]', 'states = ["one"]'))
    # Fock |1> misses saturation by 2.0; a huge saturation tolerance accepts it
    assert run("eval", cfg, "--tol-sat", "3", "--out", tmp_path) == 0
    assert run("eval", cfg, "--tol-sat", "-1", "--out", tmp_path) == 2


def test_eval_csv(tmp_path):
    assert run("eval", write(tmp_path, VACUUM), "--format", "csv", "--out", tmp_path) == 0
    rows = list(csv.DictReader((tmp_path / "verdicts.csv").open()))
    assert rows[0]["verdict"] == "schrodinger_two" and rows[0]["ok"] == "True"


def test_squeeze_sweep(tmp_path):
    assert run("sweep", CONFIGS / "squeeze_sweep.toml", "--out", tmp_path) == 0
    with (tmp_path / "sweep.csv").open() as fh:
        header = fh.readline().strip().split(",")
    assert header == cli.SWEEP_COLUMNS
    rows = list(csv.DictReader((tmp_path / "sweep.csv").open()))
    assert [float(r["value"]) for r in rows] == [0.0, 0.25, 0.5, 0.75, 1.0]
    for r in rows:
        assert float(r["lhs"]) == pytest.approx(0.25, abs=1e-12)


def test_rotation_sweep(tmp_path):
    assert run("sweep", CONFIGS / "rotation_sweep.toml", "--out", tmp_path, "--jobs", "2") == 0
    rows = list(csv.DictReader((tmp_path / "sweep.csv").open()))
    hk = [float(r["margin"]) for r in rows if r["relation"] == "heisenberg_kennard"]
    sch = [float(r["margin"]) for r in rows if r["relation"] == "schrodinger_two"]
    assert max(hk) - min(hk) > 0.3
    assert max(abs(m) for m in sch) < 1e-12
    assert [int(r["index"]) for r in rows] == sorted(int(r["index"]) for r in rows)


def test_empty_sweep(tmp_path):
    cfg = write(tmp_path, VACUUM + '[sweep]\nparameter = "states.vac.n"\nvalues = []\n')
    assert run("sweep", cfg, "--out", tmp_path) == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines == [",".join(cli.SWEEP_COLUMNS)]


def test_sweep_json_and_bad_parameter(tmp_path):
    cfg = write(tmp_path, VACUUM + '[sweep]\nparameter = "states.vac.n"\nvalues = [0, 2]\n')
    assert run("sweep", cfg, "--format", "json", "--out", tmp_path) == 1
    rows = json.loads((tmp_path / "sweep.json").read_text())["rows"]
    assert [r["ok"] for r in rows] == [True, False]
    bad = write(tmp_path, VACUUM + '[sweep]\nparameter = "states.zzz.n"\nvalues = [1]\n', "b.toml")
    assert run("sweep", bad, "--out", tmp_path) == 2


def test_lemma_fuzz_command(tmp_path, capsys):
    code = run("lemma-fuzz", "--n", 3, "--m", 2, "--samples", 50, "--seed", 7, "--out", tmp_path)
    assert code == 0
    data = json.loads((tmp_path / "lemma_fuzz.json").read_text())
    assert data["seed"] == 7 and data["violations"] == 0
    assert "lemma_minor_sum" in capsys.readouterr().out


def test_minimize_command(tmp_path):
    cfg = write(tmp_path, VACUUM + """
[minimize]
relation = "schrodinger_two"
family = {kind = "gaussian", N = 30}
start = [0.1, 0.0, 0.1, 0.3]
budget = 300
""")
    assert run("minimize", cfg, "--out", tmp_path) == 0
    res = json.loads((tmp_path / "minimize.json").read_text())
    assert res["best_margin"] <= res["start_margin"]
    assert len(res["trace"]) == res["n_evals"]


def test_scenario_helpers():
    cfg = {"a": {"b": {"c": 1}}}
    set_dotted(cfg, "a.b.c", 2)
    assert cfg["a"]["b"]["c"] == 2
    with pytest.raises(ConfigError):
        set_dotted(cfg, "a.x.c", 1)
    with pytest.raises(ConfigError):
        load_config("/nonexistent.toml")


def test_scenario_inline_objects():
    sc = build_scenario({
        "seed": 0,
        "basis": {"kind": "generic", "dim": 2},
        "states": {"plus": {"kind": "amplitudes", "values": [[0.6, 0], [0, 0.8]]},
                   "mix": {"kind": "density", "values": [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]}},
        "observables": {"X": {"matrix": [[[0, 0], [1, 0]], [[1, 0], [0, 0]]]},
                        "Z": {"matrix": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]}},
        "transforms": {"s": {"kind": "scale", "alphas": [2.0], "source": ["X", "Z"]}},
    })
    assert sc.states["plus"].vector[1] == 0.8j
    assert not sc.states["mix"].is_pure
    assert set(sc.observables) == {"X", "Z", "X_s", "Z_s"}
    assert sc.observables["Z_s"].matrix[0, 0] == 2.0
