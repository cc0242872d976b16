import io
import subprocess
import sys
import textwrap

import numpy as np
import pytest

from nmbattery.cli import (EXIT_CHECK_FAILED, EXIT_IO, EXIT_OK, EXIT_SOLVER,
                           EXIT_VALIDATION, SIMULATE_COLUMNS, SWEEP_COLUMNS, main)
from nmbattery.io import RunConfig, load_config, read_table

COHERENT = """
[system]
eta = 2.0
g1 = 0.7
g2 = 0.7
delta = 0.0

[grid]
t_end = 20
n_steps = 4000
"""

TRANSITION = """
[system]
eta = 1.5
g1 = 0.7
g2 = 0.7

[grid]
t_end = 20
n_steps = 4000

[sweep]
delta_min = 0.0
delta_max = 2.0
delta_step = 0.05
resolution = 0.01
"""


@pytest.fixture
def write_cfg(tmp_path):
    def _write(text, name="run.ini"):
        path = tmp_path / name
        path.write_text(textwrap.dedent(text))
        return str(path)
    return _write


def run(*argv, environ=None):
    buf = io.StringIO()
    rc = main(list(argv), environ=environ or {}, stream=buf)
    return rc, buf.getvalue()


def test_simulate_coherent_charging_has_work(write_cfg, tmp_path):
    out = tmp_path / "coherent.csv"
    rc, _ = run("simulate", "--config", write_cfg(COHERENT), "--out", str(out))
    assert rc == EXIT_OK
    meta, cols, rows, _ = read_table(out)
    assert cols == SIMULATE_COLUMNS
    data = np.array(rows)
    assert data.shape == (4001, 9)
    assert data[:, cols.index("ergotropy")].max() > 0
    assert meta["grid.solver"] == "ode" and meta["command"] == "simulate"
    assert meta["system.eta"] == 2.0


def test_simulate_zero_coupling_all_zero(write_cfg, tmp_path):
    out = tmp_path / "zero.csv"
    rc, _ = run("simulate", "--config", write_cfg("[grid]\nn_steps = 100\n"), "--out", str(out))
    assert rc == EXIT_OK
    _, cols, rows, _ = read_table(out)
    data = np.array(rows)
    for name in ("c2sq", "deltaE", "power", "ergotropy"):
        assert not np.any(data[:, cols.index(name)])


def test_simulate_deterministic(write_cfg, tmp_path):
    cfg = write_cfg(COHERENT)
    out = tmp_path / "a.csv"
    run("simulate", "--config", cfg, "--out", str(out))
    first = out.read_bytes()
    run("simulate", "--config", cfg, "--out", str(out))
    assert out.read_bytes() == first


def test_simulate_fixed_precision(write_cfg):
    rc, text = run("simulate", "--config", write_cfg(COHERENT), "--out", "-")
    line = [ln for ln in text.splitlines() if ln and not ln.startswith("#")][200]
    for cell in line.split(","):
        digits = cell.lstrip("-").split("e")[0].replace(".", "").lstrip("0")
        assert len(digits) <= 15


def test_json_matches_csv(write_cfg, tmp_path):
    cfg = write_cfg(COHERENT)
    run("simulate", "--config", cfg, "--out", str(tmp_path / "r.csv"))
    run("simulate", "--config", cfg, "--out", str(tmp_path / "r.json"), "--format", "json")
    m1, c1, r1, _ = read_table(tmp_path / "r.csv")
    m2, c2, r2, _ = read_table(tmp_path / "r.json")
    strip = lambda m: {k: v for k, v in m.items() if not k.startswith("output.")}
    assert strip(m1) == strip(m2) and c1 == c2
    assert m2["output.format"] == "json"
    np.testing.assert_array_equal(np.array(r1), np.array(r2))


def test_solver_flag_and_env(write_cfg, tmp_path):
    cfg = write_cfg(COHERENT)
    out = tmp_path / "x.csv"
    run("simulate", "--config", cfg, "--out", str(out), environ={"NMBATTERY_SOLVER": "laplace"})
    assert read_table(out)[0]["grid.solver"] == "laplace"
    run("simulate", "--config", cfg, "--out", str(out), "--solver", "quadrature",
        environ={"NMBATTERY_SOLVER": "laplace"})
    assert read_table(out)[0]["grid.solver"] == "quadrature"
    run("simulate", "--out", str(out), environ={"NMBATTERY_CONFIG": cfg,
                                               "NMBATTERY_CROSS_SIGN": "bracket"})
    meta = read_table(out)[0]
    assert meta["system.cross_sign"] == "bracket" and meta["system.eta"] == 2.0


def test_solvers_agree_through_cli(write_cfg, tmp_path):
    cfg = write_cfg(COHERENT)
    cols = {}
    for solver in ("ode", "laplace", "quadrature"):
        out = tmp_path / f"{solver}.csv"
        run("simulate", "--config", cfg, "--out", str(out), "--solver", solver)
        _, names, rows, _ = read_table(out)
        cols[solver] = np.array(rows)[:, names.index("c2sq")]
    assert np.max(np.abs(cols["ode"] - cols["laplace"])) < 1e-7
    assert np.max(np.abs(cols["ode"] - cols["quadrature"])) < 1e-7


def test_round_trip_config(write_cfg, tmp_path):
    path = write_cfg(TRANSITION + "\n[initial]\ntheta = 0.3\nphi = 1.2\n")
    out = tmp_path / "rt.csv"
    run("simulate", "--config", path, "--out", str(out))
    meta = read_table(out)[0]
    cfg = RunConfig.from_flat(meta)
    expected = load_config(path)
    expected.output.path = str(out)
    assert cfg == expected


def test_sweep_reports_critical_block(write_cfg, tmp_path):
    out = tmp_path / "sweep.csv"
    rc, _ = run("sweep", "--config", write_cfg(TRANSITION), "--out", str(out), "--threads", "2")
    assert rc == EXIT_OK
    meta, cols, rows, trailer = read_table(out)
    assert cols == SWEEP_COLUMNS
    assert len(rows) == 41
    assert 1.0 <= trailer["critical.delta_c"] <= 1.2
    assert trailer["critical.bracket_hi"] - trailer["critical.bracket_lo"] <= 0.01
    assert trailer["critical.jump"] > 0
    deriv = [r[cols.index("dWmax_dDelta")] for r in rows]
    assert all(np.isfinite(deriv))


def test_sweep_below_onset_reports_none(write_cfg, tmp_path):
    out = tmp_path / "s.json"
    text = TRANSITION.replace("delta_max = 2.0", "delta_max = 0.6").replace("delta_step = 0.05",
                                                                       "delta_step = 0.2")
    rc, _ = run("sweep", "--config", write_cfg(text), "--out", str(out), "--format", "json")
    assert rc == EXIT_OK
    _, _, rows, trailer = read_table(out)
    assert len(rows) == 4
    assert trailer == {"critical": "none"}


def test_sweep_single_point(write_cfg, tmp_path):
    text = TRANSITION.replace("delta_max = 2.0", "delta_max = 0.0")
    out = tmp_path / "one.csv"
    rc, _ = run("sweep", "--config", write_cfg(text), "--out", str(out))
    assert rc == EXIT_OK
    _, cols, rows, trailer = read_table(out)
    assert len(rows) == 1
    assert np.isnan(rows[0][cols.index("dWmax_dDelta")])
    assert trailer == {"critical": "none"}


def test_phase_diagram_30x30_matches_sweep(write_cfg, tmp_path):
    text = TRANSITION + """
[diagram]
eta_min = 0
eta_max = 2
eta_num = 30
delta_min = 0
delta_max = 2
delta_num = 30
"""
    text = text.replace("n_steps = 4000", "n_steps = 2000")
    out = tmp_path / "pd.csv"
    rc, _ = run("phase-diagram", "--config", write_cfg(text), "--out", str(out),
                "--threads", "0")
    assert rc == EXIT_OK
    _, cols, rows, _ = read_table(out)
    assert len(rows) == 900
    data = np.array([r[:4] for r in rows], dtype=float)
    etas = np.unique(data[:, 0])
    eta_row = float(etas[np.argmin(np.abs(etas - 1.5))])
    row = data[data[:, 0] == eta_row]

    sweep_cfg = text.replace("eta = 1.5", f"eta = {eta_row!r}").replace(
        "delta_step = 0.05", f"delta_step = {2 / 29!r}")
    sout = tmp_path / "row.csv"
    run("sweep", "--config", write_cfg(sweep_cfg, "row.ini"), "--out", str(sout))
    _, scols, srows, _ = read_table(sout)
    np.testing.assert_allclose([r[0] for r in srows], row[:, 1], atol=1e-12)
    np.testing.assert_allclose([r[scols.index("W_max")] for r in srows], row[:, 2], atol=1e-12)

    _, bcols, brows, _ = read_table(tmp_path / "pd_boundary.csv")
    assert bcols == ["eta_over_gamma", "delta_onset_over_gamma"]
    assert len(brows) == 30


def test_phase_diagram_single_cell(write_cfg, tmp_path):
    text = "[diagram]\neta_min = 1\neta_max = 1\neta_num = 1\ndelta_min = 0\ndelta_max = 0\ndelta_num = 1\n[grid]\nn_steps = 200\n"
    out = tmp_path / "one.csv"
    assert run("phase-diagram", "--config", write_cfg(text), "--out", str(out))[0] == EXIT_OK
    assert len(read_table(out)[2]) == 1


def test_phase_diagram_malformed_grid(write_cfg, tmp_path, capsys):
    text = "[diagram]\neta_min = 2\neta_max = 1\n"
    rc, _ = run("phase-diagram", "--config", write_cfg(text), "--out", str(tmp_path / "x.csv"))
    assert rc == EXIT_VALIDATION
    assert "diagram.eta_min" in capsys.readouterr().err


def test_validate_coherent_point_passes(write_cfg):
    rc, text = run("validate", "--config", write_cfg(COHERENT))
    assert rc == EXIT_OK
    assert "PASS" in text


def test_validate_coarse_grid_fails(write_cfg):
    text = TRANSITION.replace("n_steps = 4000", "n_steps = 20").replace("t_end = 20", "t_end = 10")
    rc, out = run("validate", "--config", write_cfg(text))
    assert rc == EXIT_CHECK_FAILED
    assert "FAIL" in out and "max deviation" in out


def test_validate_invalid_gamma(write_cfg):
    rc, out = run("validate", "--config", write_cfg("[system]\ngamma = 0\ng2 = -1\n"))
    assert rc == EXIT_VALIDATION
    assert "system.gamma: gamma must be positive" in out
    assert "system.g2: couplings must be non-negative" in out


def test_unparseable_and_unknown_keys(write_cfg, capsys):
    rc, _ = run("simulate", "--config", write_cfg("[system]\neta = fast\nfoo = 1\n"))
    assert rc == EXIT_VALIDATION
    err = capsys.readouterr().err
    assert "system.eta" in err and "system.foo" in err


def test_solver_failure_exit_code(write_cfg, tmp_path):
    text = "[system]\neta = 30\ng1 = 40\ng2 = 40\n[grid]\nn_steps = 4\n"
    rc, _ = run("simulate", "--config", write_cfg(text), "--out", str(tmp_path / "x.csv"))
    assert rc == EXIT_SOLVER


def test_io_failure_exit_code(write_cfg, tmp_path):
    rc, _ = run("simulate", "--config", write_cfg(COHERENT),
                "--out", str(tmp_path / "missing" / "x.csv"))
    assert rc == EXIT_IO
    rc, _ = run("simulate", "--config", str(tmp_path / "nope.ini"))
    assert rc == EXIT_IO


def test_module_entry_point(write_cfg):
    proc = subprocess.run([sys.executable, "-m", "nmbattery", "validate", "--config",
                           write_cfg(COHERENT)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "PASS" in proc.stdout
