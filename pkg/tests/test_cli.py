"""End-to-end runs of the command-line scenarios.

Each test drives sta.cli.main directly with --out pointing into tmp_path
and asserts on the parsed CSV or on the exit code and stderr text.
"""

import json
from pathlib import Path

import numpy as np
import pytest

import sta.counterdiabatic as cdmod
from sta.cli import main

TWO_PI = 2.0 * np.pi
WINDOW = 5.0 / np.sqrt(TWO_PI**2 * 0.01)  # default half-window, ns


def run(tmp_path, scenario, *args, out="out.csv"):
    path = tmp_path / out
    code = main([scenario, "--out", str(path), *args])
    return code, path


def table(path):
    return np.genfromtxt(path, delimiter=",", names=True)


def header(path):
    return Path(path).read_text().splitlines()[0]


def config_file(tmp_path, payload, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def test_rap_csv_structure(tmp_path):
    code, path = run(tmp_path, "rap", "--dt", "0.01")
    assert code == 0
    assert header(path) == "t_ns,P1,P2,norm2,adiab_ratio"
    rows = table(path)
    assert abs(rows["t_ns"][0] + WINDOW) < 1e-12
    assert abs(rows["t_ns"][-1] - WINDOW) < 1e-12
    assert rows["P1"][0] == 0.0 and rows["P2"][0] == 1.0 and rows["norm2"][0] == 1.0
    # decay only removes norm; the bare sweep also leaves population behind
    assert np.all(np.diff(rows["norm2"]) <= 1e-12)
    assert rows["norm2"][-1] < 1.0
    assert rows["P2"][-1] > 0.05
    assert np.max(rows["adiab_ratio"]) > 1.0


def test_rap_pure_decay_matches_exponential(tmp_path):
    cfg = config_file(tmp_path, {"rabi_peak_mhz": 0.0, "dt_ns": 0.01})
    code, path = run(tmp_path, "rap", "--config", cfg)
    assert code == 0
    rows = table(path)
    gamma = TWO_PI * 0.002
    expected = np.exp(-gamma * (rows["t_ns"] - rows["t_ns"][0]))
    np.testing.assert_allclose(rows["P2"], expected, atol=1e-9)
    assert np.all(rows["P1"] == 0.0)
    np.testing.assert_allclose(rows["norm2"], rows["P2"], atol=1e-16)


def test_rap_grid_refinement_agrees(tmp_path):
    _, coarse = run(tmp_path, "rap", "--dt", "0.02", out="coarse.csv")
    _, fine = run(tmp_path, "rap", "--dt", "0.005", out="fine.csv")
    last_c, last_f = table(coarse)[-1], table(fine)[-1]
    for name in ("P1", "P2", "norm2"):
        assert abs(last_c[name] - last_f[name]) < 1e-8


def test_rap_cd_transfer_and_leakage(tmp_path):
    code, path = run(tmp_path, "rap-cd", "--dt", "0.005")
    assert code == 0
    assert header(path) == "t_ns,P1,P2,norm2,c_minus_abs"
    rows = table(path)
    assert rows["P2"][0] > 0.999                       # starts on the upper branch
    assert rows["P2"][-1] < 1e-10                      # full inversion
    assert abs(rows["norm2"][-1] - np.exp(-0.1)) < 1e-6
    assert np.max(rows["c_minus_abs"]) < 1e-5


def test_rap_cd_lossless_is_unitary(tmp_path):
    cfg = config_file(tmp_path, {"gamma_mhz": 0.0, "dt_ns": 0.005})
    code, path = run(tmp_path, "rap-cd", "--config", cfg)
    assert code == 0
    rows = table(path)
    assert np.max(np.abs(rows["norm2"] - 1.0)) < 1e-7
    assert rows["P1"][-1] > 1.0 - 1e-6


def test_approx_scenario_equals_flag(tmp_path):
    _, exact = run(tmp_path, "rap-cd", "--dt", "0.01", out="exact.csv")
    _, flagged = run(tmp_path, "rap-cd", "--approx", "--dt", "0.01", out="flag.csv")
    _, scenario = run(tmp_path, "rap-cd-approx", "--dt", "0.01", out="scen.csv")
    assert flagged.read_bytes() == scenario.read_bytes()
    e, a = table(exact), table(flagged)
    gap = max(np.max(np.abs(e["P1"] - a["P1"])), np.max(np.abs(e["P2"] - a["P2"])))
    # dropping Re C is visible in the populations but stays below a percent
    assert 1e-4 < gap < 0.01


def test_cd_terms_csv(tmp_path):
    code, path = run(tmp_path, "cd-terms", "--dt", "0.01")
    assert code == 0
    assert header(path) == "t_ns,c_real_rad_per_ns,c_imag_rad_per_ns,adiab_ratio"
    rows = table(path)
    mid = int(np.argmin(np.abs(rows["t_ns"])))
    assert abs(rows["c_real_rad_per_ns"][mid]) < 1e-12
    assert abs(rows["c_imag_rad_per_ns"][mid] - 0.015709534221371106) < 1e-9
    assert abs(rows["adiab_ratio"][mid] - 0.0250037504688047) < 1e-6
    assert np.max(np.abs(rows["c_imag_rad_per_ns"])) > np.max(np.abs(rows["c_real_rad_per_ns"]))
    assert np.max(rows["adiab_ratio"]) > 1.0


def test_oscillator_default_csv(tmp_path):
    code, path = run(tmp_path, "oscillator")
    assert code == 0
    assert header(path) == ("t_s,q_m,v_m_per_s,energy_J,energy_over_omega_Js,"
                            "omega_sq_rad2_per_s2,rho,q_oracle_m,v_oracle_m_per_s")
    rows = table(path)
    assert len(rows) == 501 + 2001 + 501  # one display period on each side
    t = rows["t_s"]
    i0, i1 = 501, 501 + 2000
    assert t[i0] == 0.0 and abs(t[i1] - 0.025) < 1e-15
    np.testing.assert_allclose(t[0], -0.004, rtol=1e-12)
    np.testing.assert_allclose(t[-1], 0.425, rtol=1e-12)

    np.testing.assert_allclose(rows["q_m"][i0], 1e-6, rtol=1e-12)
    np.testing.assert_allclose(rows["rho"][-1], 10.0, rtol=1e-9)
    np.testing.assert_allclose(rows["omega_sq_rad2_per_s2"][-1], (TWO_PI * 2.5) ** 2,
                               rtol=1e-9)
    np.testing.assert_allclose(rows["energy_J"][i0], 1.7765287921960842e-31, rtol=1e-12)
    np.testing.assert_allclose(rows["energy_J"][i1] / rows["energy_J"][i0], 0.01, rtol=1e-9)

    # adiabatic invariant E/omega agrees at the two ends, and the default
    # trap never inverts, so the column has no gaps
    ew = rows["energy_over_omega_Js"]
    assert np.all(np.isfinite(ew))
    np.testing.assert_allclose(ew[0], 1.1309733552923255e-34, rtol=1e-12)
    np.testing.assert_allclose(ew[-1], ew[0], rtol=1e-9)

    assert np.max(np.abs(rows["q_m"] - rows["q_oracle_m"])) < 1e-6 * np.max(np.abs(rows["q_m"]))
    assert np.max(np.abs(rows["v_m_per_s"] - rows["v_oracle_m_per_s"])) < \
        1e-6 * np.max(np.abs(rows["v_m_per_s"]))


def test_oscillator_fast_inverted_trap(tmp_path):
    cfg = config_file(tmp_path, {"tf_ms": 1.0, "n_shortcut": 201, "n_ellipse": 11})
    code, path = run(tmp_path, "oscillator", "--config", cfg)
    assert code == 0  # an expulsive transient is physical, not an error
    rows = table(path)
    assert np.min(rows["omega_sq_rad2_per_s2"]) < 0.0
    assert np.isnan(rows["energy_over_omega_Js"]).any()
    assert np.all(np.isfinite(rows["q_m"]))


def test_oscillator_initial_velocity(tmp_path):
    cfg = config_file(tmp_path, {"v0_um_per_ms": 2.0, "n_shortcut": 101, "n_ellipse": 11})
    code, path = run(tmp_path, "oscillator", "--config", cfg)
    assert code == 0
    rows = table(path)
    assert len(rows) == 11 + 101 + 11
    i0 = 11
    assert rows["t_s"][i0] == 0.0
    np.testing.assert_allclose(rows["q_m"][i0], 1e-6, rtol=1e-9)
    np.testing.assert_allclose(rows["v_m_per_s"][i0], 2e-3, rtol=1e-9)


def test_check_passes(tmp_path, capsys):
    code, path = run(tmp_path, "check", out="report.txt")
    out = capsys.readouterr().out
    assert code == 0
    assert out.count("PASS") == 6 and "FAIL" not in out
    assert out.rstrip().endswith("all checks passed")
    assert path.read_text() == out


def test_check_detects_sign_error(monkeypatch, capsys):
    def flipped(schedule, t):
        return cdmod.bare_hamiltonian(schedule, t) - cdmod.cd_correction(schedule, t)

    monkeypatch.setattr(cdmod, "cd_hamiltonian", flipped)
    code = main(["check"])
    out = capsys.readouterr().out
    assert code == 4
    assert "FAIL transitionless-branch-leakage" in out
    assert "PASS biorthogonality-closure-reconstruction" in out
    assert out.rstrip().endswith("some checks FAILED")


def test_check_tightened_tolerances_fail(tmp_path, capsys):
    cfg = config_file(tmp_path, {"tolerance_scale": 1e-6})
    code = main(["check", "--config", cfg])
    out = capsys.readouterr().out
    assert code == 4
    assert "FAIL" in out and "measured=" in out
    assert out.rstrip().endswith("some checks FAILED")


def test_unknown_config_key(tmp_path, capsys):
    cfg = config_file(tmp_path, {"bogus_key": 1})
    code, _ = run(tmp_path, "rap", "--config", cfg)
    err = capsys.readouterr().err
    assert code == 2
    assert "sta: config error:" in err and "bogus_key" in err


@pytest.mark.parametrize("scenario,payload", [
    ("rap", {"dt_ns": 0}),
    ("rap", {"gamma_mhz": -1.0}),
    ("rap", {"chirp_a_ghz2": 0.0}),
    ("rap", {"rabi_peak_mhz": True}),
    ("rap", {"dt_ns": float("nan")}),
    ("oscillator", {"n_shortcut": 2.5}),
    ("oscillator", {"n_ellipse": 1}),
    ("oscillator", {"mass_kg": 0.0}),
    ("check", {"tolerance_scale": 0.0}),
])
def test_bad_config_values(tmp_path, capsys, scenario, payload):
    cfg = config_file(tmp_path, payload)
    code, _ = run(tmp_path, scenario, "--config", cfg)
    assert code == 2
    assert "sta: config error:" in capsys.readouterr().err


def test_config_file_errors(tmp_path, capsys):
    code, _ = run(tmp_path, "rap", "--config", str(tmp_path / "missing.json"))
    assert code == 2 and "cannot read config file" in capsys.readouterr().err

    broken = tmp_path / "broken.json"
    broken.write_text("{")
    code, _ = run(tmp_path, "rap", "--config", str(broken))
    assert code == 2 and "not valid JSON" in capsys.readouterr().err

    listy = tmp_path / "list.json"
    listy.write_text("[1, 2]")
    code, _ = run(tmp_path, "rap", "--config", str(listy))
    assert code == 2 and "JSON object" in capsys.readouterr().err


def test_flag_misuse(tmp_path, capsys):
    code, _ = run(tmp_path, "oscillator", "--window-factor", "3.0")
    assert code == 2 and "window-factor" in capsys.readouterr().err

    code, _ = run(tmp_path, "rap", "--approx")
    assert code == 2 and "--approx" in capsys.readouterr().err

    code, _ = run(tmp_path, "rap", "--dt", "-1.0")
    assert code == 2

    code, _ = run(tmp_path, "oscillator", "--dt", "1.0")  # beyond tf
    assert code == 2


def test_unknown_scenario_exits_via_argparse(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["frobnicate"])
    assert excinfo.value.code == 2
    capsys.readouterr()


def test_default_output_name(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["cd-terms", "--dt", "0.1"]) == 0
    assert (tmp_path / "cd-terms.csv").exists()


def test_runs_are_deterministic(tmp_path):
    _, a = run(tmp_path, "rap", "--dt", "0.05", out="a.csv")
    _, b = run(tmp_path, "rap", "--dt", "0.05", out="b.csv")
    assert a.read_bytes() == b.read_bytes()

    cfg = config_file(tmp_path, {"n_shortcut": 101, "n_ellipse": 11})
    _, c = run(tmp_path, "oscillator", "--config", cfg, out="c.csv")
    _, d = run(tmp_path, "oscillator", "--config", cfg, out="d.csv")
    assert c.read_bytes() == d.read_bytes()


def test_runtime_failure_exit_code(tmp_path, capsys):
    # absurd decay rate at a 1 ns step overflows RK4 almost immediately
    cfg = config_file(tmp_path, {"gamma_mhz": 1e9, "dt_ns": 1.0})
    code, _ = run(tmp_path, "rap", "--config", cfg)
    assert code == 3
    assert "sta: runtime error:" in capsys.readouterr().err
