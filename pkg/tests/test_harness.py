import math

import numpy as np
import pytest

from nomacast import baselines
from nomacast.harness import (FIGURE_IDS, ConfigError, ScenarioConfig, aggregate_csv, dumps, load,
                              loads, raw_csv, read_raw, reaggregate, replicate_figure, run_trials,
                              trial_seeds, write_outputs)
from nomacast.harness.cli import main
from nomacast.harness.selftest import run_selftest

TINY = """
[scenario]
name = tiny
kind = PowerMin
model = A
antennas = 4
users = 1
schemes = NOMA, SDMA, OMA, SDR

[sweep]
variable = rate
values = 1, 2

[run]
trials = 2
seed = 3
"""


@pytest.fixture(scope="module")
def tiny():
    cfg = loads(TINY)
    return cfg, run_trials(cfg)


@pytest.mark.parametrize("fig", FIGURE_IDS)
def test_figure_configs_round_trip(fig):
    cfg = replicate_figure(fig)
    assert loads(dumps(cfg)) == cfg
    assert replicate_figure(fig, trials=3).trials == 3


def test_figure_parameters():
    f5 = replicate_figure("f5")
    assert (f5.kind, f5.model, f5.sweep_variable, f5.rate, f5.antennas, f5.users) == \
        ("PowerMin", "D", "delta_d", 4.0, 6, 4)
    assert list(f5.sweep_values) == [0, 10, 20, 30, 40, 50]
    f13 = replicate_figure("f13")
    assert (f13.kind, f13.model, f13.antennas, f13.users, f13.p_c_w) == ("EE", "E", 6, 5, 30.0)
    conv = replicate_figure("conv")
    assert conv.kind == "Convergence" and conv.trials == 200
    assert set(conv.schemes) == {"Alg1", "Alg3"}
    assert replicate_figure("f4").trials == 150
    with pytest.raises(ConfigError):
        replicate_figure("f99")


@pytest.mark.parametrize("patch", [
    ("kind = PowerMin", "kind = Nope"),
    ("values = 1, 2", "values = 2, 1"),
    ("values = 1, 2", "values ="),
    ("trials = 2", "trials = 0"),
    ("schemes = NOMA, SDMA, OMA, SDR", "schemes = EEmax"),
    ("model = A", "model = D"),
    ("[run]", "[bogus]"),
    ("seed = 3", "seed = 3\ncolour = red"),
    ("antennas = 4", "antennas = four"),
])
def test_config_errors(patch):
    with pytest.raises(ConfigError):
        loads(TINY.replace(*patch))


def test_config_defaults_and_overrides():
    cfg = loads(TINY)
    assert cfg.mm_tol == 1e-4 and cfg.max_mm_iters == 50 and cfg.noise_dbm == -80.0
    assert cfg.with_overrides(trials=None, seed=9).seed == 9
    assert ScenarioConfig(kind="PowerMin", sweep_variable="rate", sweep_values=(1.0,)).trials == 150


def test_trial_seeds_deterministic():
    assert trial_seeds(7, 5) == trial_seeds(7, 5)
    assert trial_seeds(7, 5)[:3] == trial_seeds(7, 3)
    assert len(set(trial_seeds(7, 50))) == 50


def test_one_row_per_trial_point_scheme(tiny):
    cfg, rows = tiny
    assert len(rows) == 2 * 2 * 4
    assert {r.status for r in rows} <= {"ok", "infeasible", "failed"}
    assert [r.trial for r in rows] == sorted(r.trial for r in rows)
    by = {(r.trial, r.sweep, r.scheme): r.objective for r in rows}
    for t in range(2):
        for v in (1.0, 2.0):
            assert by[t, v, "SDR"] <= by[t, v, "NOMA"] + 1e-6


def test_single_point_single_trial():
    cfg = loads(TINY).with_overrides(trials=1)
    cfg = loads(dumps(cfg).replace("values = 1.0, 2.0", "values = 1.0"))
    rows = run_trials(cfg)
    assert len(rows) == len(cfg.schemes)
    assert all(r.status in ("ok", "infeasible") for r in rows)


def test_deterministic_and_parallel_invariant(tiny):
    cfg, rows = tiny
    again = run_trials(cfg, jobs=2)
    assert raw_csv(cfg, again) == raw_csv(cfg, rows)
    assert aggregate_csv(cfg, again) == aggregate_csv(cfg, rows)


def test_reaggregation_round_trip(tiny, tmp_path):
    cfg, rows = tiny
    paths = write_outputs(cfg, rows, tmp_path)
    with open(paths["aggregate"]) as fh:
        assert reaggregate(paths["raw"]) == fh.read()
    cfg2, rows2 = read_raw(paths["raw"])
    assert cfg2 == cfg.with_overrides(out=cfg2.out)
    for a, b in zip(rows, rows2):
        assert (a.trial, a.seed, a.sweep, a.scheme, a.status, a.mm_iterations, a.converged) == \
            (b.trial, b.seed, b.sweep, b.scheme, b.status, b.mm_iterations, b.converged)
        assert a.objective == b.objective or (math.isnan(a.objective) and math.isnan(b.objective))


def test_aggregate_columns(tiny):
    cfg, rows = tiny
    text = aggregate_csv(cfg, rows)
    assert text.startswith("# nomacast ")
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    header = body[0].split(",")
    assert header[:6] == ["series", "sweep", "scheme", "n_ok", "n_infeasible", "n_failed"]
    rec = dict(zip(header, body[1].split(",")))
    ok = [r.objective for r in rows if r.sweep == 1.0 and r.scheme == "NOMA" and r.status == "ok"]
    mean = math.fsum(ok) / len(ok)
    assert float(rec["mean"]) == mean
    assert float(rec["mean_dbm"]) == pytest.approx(10 * np.log10(mean), abs=1e-12)
    assert float(rec["mean_db_domain"]) <= float(rec["mean_dbm"]) + 1e-12


def test_cli_run_and_exit_codes(tmp_path, capsys):
    ini = tmp_path / "tiny.ini"
    ini.write_text(TINY.replace("trials = 2", "trials = 1"))
    out = tmp_path / "out"
    assert main(["run", str(ini), "--out", str(out), "--tol", "1e-3"]) == 0
    raw = (out / "tiny_raw.csv").read_text()
    assert "mm_tol = 0.001" in raw
    for suffix in ("aggregate.csv", "timing.csv", "summary.txt"):
        assert (out / f"tiny_{suffix}").exists()
    bad = tmp_path / "bad.ini"
    bad.write_text(TINY.replace("kind = PowerMin", "kind = Nope"))
    assert main(["run", str(bad)]) == 2
    assert main(["run", str(tmp_path / "missing.ini")]) == 2
    assert main(["replicate", "f99"]) == 2
    assert main(["run", str(ini), "--jobs", "0"]) == 2
    capsys.readouterr()


def test_cli_numerical_failure_exit_code(tmp_path, monkeypatch):
    def boom(spec):
        raise FloatingPointError("injected")

    monkeypatch.setattr(baselines, "solve_power_min_oma", boom)
    ini = tmp_path / "tiny.ini"
    ini.write_text(TINY.replace("trials = 2", "trials = 1"))
    assert main(["run", str(ini), "--out", str(tmp_path / "o")]) == 3
    cfg, rows = read_raw(str(tmp_path / "o" / "tiny_raw.csv"))
    assert [r.status for r in rows if r.scheme == "OMA"] == ["failed", "failed"]
    assert all(r.status != "failed" for r in rows if r.scheme != "OMA")


def test_selftest_passes(capsys):
    assert run_selftest() is True
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 5


def test_load_from_file(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text(dumps(replicate_figure("f10")))
    assert load(str(p)) == replicate_figure("f10")
