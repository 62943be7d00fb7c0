import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stoeuler.cli import CSV_HEADER, EXIT_CONFIG, EXIT_INVARIANT, EXIT_OK, main, run
from stoeuler.config import ConfigError, RunConfig, load_preset
from stoeuler.core import Grid


@pytest.mark.parametrize("pid", ["test1", "test2", "test3", "test4"])
def test_presets_share_experiment_settings(pid):
    cfg = RunConfig(preset=pid).resolve()
    assert cfg.gravity == 2.0 and cfg.law_mode == "shallow_water"
    assert cfg.sigma == (1.0,) * 5
    assert cfg.horizon == 10.0
    rho, _ = cfg.initial_state()
    assert np.all(rho == 1.0)


def integrals(pid):
    cfg = RunConfig(preset=pid).resolve()
    rho, q = cfg.initial_state()
    dx = Grid(cfg.cells).dx
    return rho.sum() * dx, q.sum() * dx


def test_preset_invariants():
    assert integrals("test2") == (1.0, 0.5)
    assert integrals("test1") == (1.0, 0.5)
    assert integrals("test3") == (1.0, 0.0)
    assert integrals("test4") == (1.0, 0.0)
    rho, q = RunConfig(preset="test4").resolve().initial_state()
    x = Grid(256).centers
    np.testing.assert_array_equal(q, np.where(x < 0.5, -0.5, 0.5))


def test_unknown_preset():
    with pytest.raises(ConfigError):
        load_preset("test9")
    with pytest.raises(ConfigError):
        RunConfig(preset="nope").resolve()


def test_explicit_fields_win_over_preset():
    cfg = RunConfig(preset="test1", u_left=0.25, horizon=1.0).resolve()
    assert cfg.u_left == 0.25 and cfg.u_right == 0.0 and cfg.horizon == 1.0


def test_toml_round_trip_full():
    cfg = RunConfig(preset="test3", kappa_bound=8.0, localize_kappa=4.0, seed=2**63 + 5).resolve()
    back = RunConfig.from_toml(cfg.to_toml())
    assert back == cfg


@settings(max_examples=50, deadline=None)
@given(
    eps=st.floats(0, 1, allow_nan=False),
    tau=st.floats(1e-9, 1.0),
    sigma=st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=6),
    seed=st.integers(0, 2**64 - 1),
    snaps=st.booleans(),
)
def test_toml_round_trip_property(eps, tau, sigma, seed, snaps):
    cfg = RunConfig(epsilon=eps, tau=tau, sigma=tuple(sigma), seed=seed, emit_snapshots=snaps, output_dir="a b/ü")
    assert RunConfig.from_toml(cfg.to_toml()) == cfg


def test_dotted_keys_and_tables_are_equivalent():
    a = RunConfig.from_toml('scheme.epsilon = 0.01\nnoise.sigma = [1, 2]\ngrid.cells = 64\n')
    b = RunConfig.from_toml('[scheme]\nepsilon = 0.01\n[noise]\nsigma = [1.0, 2.0]\n[grid]\ncells = 64\n')
    assert a == b
    assert a.sigma == (1.0, 2.0)


@pytest.mark.parametrize(
    "text",
    ["scheme.epsilon = 'x'", "bogus = 1", "grid.cells = 1.5", "seed = true", "noise.sigma = [true]", "[[["],
)
def test_bad_config_text(text):
    with pytest.raises(ConfigError):
        RunConfig.from_toml(text)


@pytest.mark.parametrize(
    "cfg",
    [
        RunConfig(horizon=0.0031, tau=1e-3),
        RunConfig(cells=2),
        RunConfig(noise_kind="weird"),
        RunConfig(law_mode="normalized", gamma=1.4),
        RunConfig(seed=-1),
        RunConfig(epsilon=-1.0),
    ],
)
def test_invalid_resolved_configs(cfg):
    with pytest.raises(ConfigError):
        cfg.resolve()


def small_args(tmp_path, *extra):
    return ["--preset", "test3", "--realizations", "4", "--horizon", "0.02", "--cells", "32",
            "--out", str(tmp_path), *extra]


def test_run_writes_outputs(tmp_path):
    assert main(small_args(tmp_path, "--snapshots")) == EXIT_OK
    lines = (tmp_path / "stats.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == CSV_HEADER
    # default stride is 100 steps, so only t = 0 and the horizon are recorded
    assert len(lines) == 3
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["passed"] and summary["preset"] == "test3"
    assert (tmp_path / "snapshots" / "manifest.txt").exists()
    resolved = RunConfig.from_file(tmp_path / "config.toml")
    assert resolved.realizations == 4


def test_csv_values_have_17_digits(tmp_path):
    assert main(small_args(tmp_path)) == EXIT_OK
    row = (tmp_path / "stats.csv").read_text(encoding="utf-8").splitlines()[2].split(",")
    assert len(row) == 9
    assert float(row[1]) == float("%.17g" % float(row[1]))
    assert row[8].isdigit()


def test_identical_runs_give_identical_csv(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(small_args(a, "--seed", "17")) == EXIT_OK
    assert main(small_args(b, "--seed", "17")) == EXIT_OK
    assert (a / "stats.csv").read_bytes() == (b / "stats.csv").read_bytes()
    c = tmp_path / "c"
    main(small_args(c, "--seed", "18"))
    assert (a / "stats.csv").read_bytes() != (c / "stats.csv").read_bytes()


def test_flags_override_config_file(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text('preset = "test2"\nrealizations = 99\nhorizon = 0.02\ngrid.cells = 32\n', encoding="utf-8")
    out = tmp_path / "out"
    assert main(["--config", str(path), "--realizations", "2", "--out", str(out)]) == EXIT_OK
    resolved = RunConfig.from_file(out / "config.toml")
    assert resolved.realizations == 2 and resolved.preset == "test2"


def test_config_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("scheme.tau = 'fast'\n", encoding="utf-8")
    assert main(["--config", str(bad)]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err
    assert main(["--config", str(tmp_path / "missing.toml")]) == EXIT_CONFIG
    assert main(["--preset", "test7"]) == EXIT_CONFIG
    assert main(["--horizon", "0.0031", "--out", str(tmp_path / "x")]) == EXIT_CONFIG


def test_invariant_failure_exit_1(tmp_path):
    # a vacuum region violates strict positivity
    cfg = RunConfig(preset="test3", rho_right=0.0, noise_kind="zero", epsilon=0.0, realizations=1,
                    horizon=0.004, cells=32, output_dir=str(tmp_path))
    assert run(cfg) == EXIT_INVARIANT
    record = json.loads((tmp_path / "failure.json").read_text())
    assert record["failures"][0]["check"] == "positivity"


def test_zero_noise_time_average_non_increasing(tmp_path):
    x_cfg = RunConfig(preset="test1", noise_kind="zero", realizations=1, horizon=0.4, cells=64,
                      output_dir=str(tmp_path))
    assert run(x_cfg) == EXIT_OK
    data = np.genfromtxt(tmp_path / "stats.csv", delimiter=",", names=True, encoding="utf-8")
    tavg = data["time_avg_energy"]
    assert np.all(np.diff(tavg) <= 1e-12)


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "stoeuler", *small_args(tmp_path)], capture_output=True)
    assert proc.returncode == 0
    assert (tmp_path / "stats.csv").exists()
