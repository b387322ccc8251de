"""Reproduction harness: tables, sweeps, design/simulate commands, CLI."""

from __future__ import annotations

import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from nvsync import cli, experiments
from nvsync.experiments import (
    KHZ,
    TABLE1_REFERENCE,
    TABLE2_REFERENCE,
    SweepSpec,
    TableRow,
    fig2_records,
    fig3_records,
    resonant_sequence,
    simulate_table_row,
    table_records,
    write_csv,
)

TWO_PI = 2.0 * math.pi


# ------------------------------------------------------------ domain types


def test_sweep_spec_grids():
    log = SweepSpec(variable="b1", start=1e3, stop=1e6, points=4)
    assert np.allclose(log.grid(), [1e3, 1e4, 1e5, 1e6])
    lin = SweepSpec(variable="bz", start=1.0, stop=2.0, points=3, spacing="linear")
    assert np.allclose(lin.grid(), [1.0, 1.5, 2.0])


def test_sweep_spec_validation():
    with pytest.raises(ValueError, match="variable"):
        SweepSpec(variable="phi", start=1.0, stop=2.0, points=2)
    with pytest.raises(ValueError, match="spacing"):
        SweepSpec(variable="b1", start=1.0, stop=2.0, points=2, spacing="geo")
    with pytest.raises(ValueError, match="model"):
        SweepSpec(variable="b1", start=1.0, stop=2.0, points=2, model="exact")
    with pytest.raises(ValueError, match="points"):
        SweepSpec(variable="b1", start=1.0, stop=2.0, points=1)
    with pytest.raises(ValueError, match="positive"):
        SweepSpec(variable="b1", start=0.0, stop=2.0, points=2)


def test_table_row_clamps_roundoff():
    row = TableRow(1.0, 2.0, 3.0, 1.0 + 5e-10, 0.5, -5e-10, 1.0, 1.0)
    assert row.f_sync1_aperp0 == 1.0
    assert row.f_sync2_aperp == 0.0


def test_table_row_validation():
    with pytest.raises(ValueError, match="outside"):
        TableRow(1.0, 2.0, 3.0, 1.1, 0.5, 0.5, 1.0, 1.0)
    with pytest.raises(ValueError, match="gate times"):
        TableRow(1.0, 2.0, 3.0, 0.5, 0.5, 0.5, 0.0, 1.0)


def test_reference_tables_frozen():
    assert len(TABLE1_REFERENCE) == 9
    assert len(TABLE2_REFERENCE) == 5
    row = TABLE1_REFERENCE[1]
    assert (row.a_par_khz, row.omega_l_khz, row.a_perp_khz) == (25.0, 1980.0, 10.0)
    assert row.f_sync1_aperp0 == 0.99999
    assert row.tg2_us == 2990.0


# --------------------------------------------------------- row simulation


def test_resonant_sequence_design():
    a_par, omega_l = TWO_PI * 25e3, TWO_PI * 430e3
    seq = resonant_sequence(a_par, omega_l)
    assert seq.n_pulses == 0
    assert seq.b1 == pytest.approx(a_par / math.sqrt(3.0), rel=1e-12)
    assert seq.t_gate == pytest.approx(math.sqrt(3.0) * math.pi / a_par, rel=1e-12)
    assert seq.omega == pytest.approx(omega_l - a_par, rel=1e-12)


def test_simulate_table_row_frozen_values():
    # regression pin at the table integrator resolution, linear waveform
    row = simulate_table_row(TABLE1_REFERENCE[6])  # (400, 430, 20)
    assert row.f_sync1_aperp0 == pytest.approx(0.2866197313, abs=1e-6)
    assert row.f_sync1_aperp == pytest.approx(0.2552290632, abs=1e-6)
    assert row.f_sync2_aperp == pytest.approx(0.2883452168, abs=1e-6)
    assert row.tg1_us == pytest.approx(2.165064, abs=1e-4)
    assert row.tg2_us == pytest.approx(1.964413, abs=1e-4)


def test_simulate_table_row_circular_removes_the_breakdown():
    row = simulate_table_row(TABLE1_REFERENCE[6], waveform="circular")
    assert row.f_sync1_aperp0 == pytest.approx(1.0, abs=1e-7)
    assert row.f_sync1_aperp > 0.99


def test_table_records_canonical_order_and_deviations():
    refs = (TABLE1_REFERENCE[6],)
    recs = table_records(refs)
    assert [r["waveform"] for r in recs] == ["linear", "circular"]
    for rec in recs:
        assert set(rec) == set(experiments._TABLE_HEADER)
        assert rec["f_sync2_aperp_dev"] == pytest.approx(
            abs(rec["f_sync2_aperp"] - rec["f_sync2_aperp_ref"]), abs=1e-15
        )
        assert rec["tg2_ref_us"] == 21.0


def test_table_command_outputs_are_byte_identical(tmp_path):
    refs = TABLE2_REFERENCE[:2]
    out1, out2 = tmp_path / "a", tmp_path / "b"
    experiments._table_command("table2", refs, out1, None)
    experiments._table_command("table2", refs, out2, None)
    assert (out1 / "table2.csv").read_bytes() == (out2 / "table2.csv").read_bytes()
    assert (out1 / "table2.json").read_bytes() == (out2 / "table2.json").read_bytes()
    lines = (out1 / "table2.csv").read_text().splitlines()
    assert lines[0].startswith("waveform,a_par_khz")
    assert len(lines) == 1 + 2 * 2  # header + rows x waveforms
    payload = json.loads((out1 / "table2.json").read_text())
    assert payload["schema_version"] == 1
    assert payload["command"] == "table2"


# -------------------------------------------------------------- fig sweeps


def test_fig2_fidelity_weak_drive_limit():
    assert experiments.fig2_fidelity(TWO_PI * 200e3, TWO_PI * 1e3) == pytest.approx(
        0.9999976868, abs=1e-8
    )


def test_fig2_records_structure():
    sweep = SweepSpec(variable="b1", start=1e4, stop=1e5, points=7)
    recs = fig2_records(a_par_khz=(200.0,), sweep=sweep)
    sweeps = [r for r in recs if r["series"] == "sweep"]
    syncs = [r for r in recs if r["series"] == "sync"]
    assert len(sweeps) == 7
    assert all(10.0 <= r["b1_khz"] <= 100.0 for r in recs)
    assert all(r["f_avg"] > 1 - 1e-6 for r in syncs)
    keys = [(r["a_par_khz"], r["series"], r["b1_khz"]) for r in recs]
    assert keys == sorted(keys)


def test_fig3_records_contain_the_benchmark_point():
    recs = fig3_records(a_par_khz=(200.0,), n_pulses_max=4, m_max=4, n_max=4)
    match = [
        r for r in recs if (r["n"], r["m"], r["n_pulses"]) == (3, 2, 2)
    ]
    assert len(match) == 1
    r = match[0]
    assert r["t_g_us"] == pytest.approx(9.6825, abs=1e-3)
    assert r["t_g_ref_long_us"] == pytest.approx(19.3649, abs=1e-3)
    assert r["b1_khz"] == pytest.approx(361.478, abs=1e-2)
    assert r["bz_gauss_min"] == pytest.approx(385.911, abs=1e-2)


def test_cmd_fig2_writes_artifacts(tmp_path):
    cfg = {"points": 5, "b1_min_hz": 1e4, "b1_max_hz": 1e5, "a_par_khz": (200.0,)}
    recs = experiments.cmd_fig2(tmp_path, "csv", cfg)
    assert (tmp_path / "fig2.csv").exists()
    svg = (tmp_path / "fig2.svg").read_text()
    ET.fromstring(svg)  # well formed
    assert svg.startswith("<svg ")
    header = (tmp_path / "fig2.csv").read_text().splitlines()[0]
    assert header == "a_par_khz,b1_khz,f_avg,series"
    assert len(recs) >= 5


def test_cmd_fig3_json_format(tmp_path):
    cfg = {"a_par_khz": (100.0,), "n_pulses_max": 2, "m_max": 2, "n_max": 2}
    recs = experiments.cmd_fig3(tmp_path, "json", cfg)
    payload = json.loads((tmp_path / "fig3.json").read_text())
    assert payload["command"] == "fig3"
    assert payload["records"] == recs
    assert (tmp_path / "fig3.svg").exists()
    assert not (tmp_path / "fig3.csv").exists()


def test_write_records_rejects_unknown_format(tmp_path):
    with pytest.raises(ValueError, match="format"):
        experiments._write_records(tmp_path, "x", ("a",), [{"a": 1.0}], "yaml")


def test_write_csv_number_format(tmp_path):
    p = write_csv(tmp_path / "t.csv", ("a", "b"), [{"a": 1.0 / 3.0, "b": "s"}])
    assert p.read_text() == "a,b\n0.3333333333,s\n"


# ---------------------------------------------------------------- commands


def test_cmd_design_feasible():
    report = experiments.cmd_design(
        {"a_par_over_2pi_hz": 200e3, "omega_l_over_2pi_hz": 430e3,
         "a_perp_over_2pi_hz": 20e3}
    )
    assert "error" not in report
    assert report["resonant"]["n_pulses"] == 2
    assert report["resonant"]["b1_over_2pi_hz"] == pytest.approx(361478.446, abs=1e-2)
    assert report["detuned"]["b1_over_2pi_hz"] == pytest.approx(119881.751, abs=1e-2)
    names = {f["name"] for f in report["resonant_regime_flags"]}
    assert "b1_vs_nuclear_detuning" in names


def test_cmd_design_infeasible():
    report = experiments.cmd_design(
        {"a_par_over_2pi_hz": 200e3, "omega_l_over_2pi_hz": 430e3,
         "max_b1_over_2pi_hz": 1.0}
    )
    assert report["error"]["stage"] == "resonant"
    assert "no feasible" in report["error"]["message"]


def test_cmd_simulate_round_trip():
    a_par, omega_l = 50e3, 200e3
    seq = resonant_sequence(TWO_PI * a_par, TWO_PI * omega_l)
    report = experiments.cmd_simulate(
        {
            "register": {"a_par_over_2pi_hz": a_par, "omega_l_over_2pi_hz": omega_l},
            "sequence": {
                "n_pulses": 0,
                "tau_s": seq.tau,
                "b1_over_2pi_hz": seq.b1 / TWO_PI,
                "omega_over_2pi_hz": seq.omega / TWO_PI,
            },
            "integrator": {"steps_per_period": 16, "max_refinements": 6},
            "compare": {"model": "offres"},
        }
    )
    assert report["convergence"]["converged"]
    assert report["fidelity"]["f_avg"] > 0.99
    assert report["propagator"]["dim"] == 4
    assert report["register"]["a_par_over_2pi_hz"] == pytest.approx(a_par)


def test_cmd_simulate_without_comparison():
    report = experiments.cmd_simulate(
        {
            "register": {"a_par_over_2pi_hz": 10e3, "omega_l_over_2pi_hz": 100e3},
            "sequence": {"tau_s": 1e-6, "b1_over_2pi_hz": 1e3, "omega_over_2pi_hz": 9e4},
            "integrator": {"steps_per_period": 8, "max_refinements": 0},
            "compare": {"model": "none"},
        }
    )
    assert "fidelity" not in report
    assert report["propagator"]["schema_version"] == 1


# --------------------------------------------------------------------- CLI


def test_cli_fig3(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"fig3": {"a_par_khz": [100.0], "n_pulses_max": 2,
                                        "m_max": 2, "n_max": 2}}))
    rc = cli.main(["fig3", "--config", str(cfg), "--out", str(tmp_path / "out")])
    assert rc == 0
    assert (tmp_path / "out" / "fig3.csv").exists()
    assert "fig3:" in capsys.readouterr().out


def test_cli_table2(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"table": {"waveforms": ["linear"]}}))
    rc = cli.main(["table2", "--config", str(cfg), "--out", str(tmp_path / "out")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "computed / reference" in out
    assert (tmp_path / "out" / "table2.csv").exists()
    assert (tmp_path / "out" / "table2.json").exists()


def test_cli_design_feasible_and_not(tmp_path, capsys):
    ok = tmp_path / "ok.json"
    ok.write_text(json.dumps({"a_par_over_2pi_hz": 200e3, "omega_l_over_2pi_hz": 430e3}))
    rc = cli.main(["design", "--config", str(ok), "--out", str(tmp_path / "out")])
    assert rc == 0
    assert json.loads((tmp_path / "out" / "design.json").read_text())["resonant"]

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"a_par_over_2pi_hz": 200e3, "omega_l_over_2pi_hz": 430e3,
                               "max_b1_over_2pi_hz": 1.0}))
    rc = cli.main(["design", "--config", str(bad), "--out", str(tmp_path / "out2")])
    assert rc == 2
    assert "infeasible" in capsys.readouterr().err


def test_cli_design_requires_config():
    with pytest.raises(SystemExit):
        cli.main(["design"])


def test_cli_simulate_toml_and_unconverged(tmp_path, capsys):
    toml = tmp_path / "sim.toml"
    toml.write_text(
        "\n".join(
            [
                "[simulate.register]",
                "a_par_over_2pi_hz = 50e3",
                "omega_l_over_2pi_hz = 200e3",
                "[simulate.sequence]",
                "tau_s = 2e-6",
                "b1_over_2pi_hz = 5e3",
                "omega_over_2pi_hz = 150e3",
                "[simulate.integrator]",
                "steps_per_period = 8",
                "max_refinements = 6",
            ]
        )
    )
    rc = cli.main(["simulate", "--config", str(toml), "--out", str(tmp_path / "out")])
    assert rc == 0
    assert (tmp_path / "out" / "simulate.json").exists()
    assert "f_avg" in capsys.readouterr().out

    hopeless = tmp_path / "sim2.json"
    hopeless.write_text(
        json.dumps(
            {
                "register": {"a_par_over_2pi_hz": 50e3, "omega_l_over_2pi_hz": 200e3},
                "sequence": {"tau_s": 2e-6, "b1_over_2pi_hz": 5e3,
                             "omega_over_2pi_hz": 150e3},
                "integrator": {"steps_per_period": 1, "tol": 1e-15,
                               "max_refinements": 1},
            }
        )
    )
    rc = cli.main(["simulate", "--config", str(hopeless), "--out", str(tmp_path / "out2")])
    assert rc == 1
    assert "did not converge" in capsys.readouterr().err


def test_cli_rejects_unknown_command():
    with pytest.raises(SystemExit):
        cli.main(["fig9"])


def test_seed_variable_is_inert(tmp_path, monkeypatch):
    # reserved for stochastic extensions; must not affect outputs today
    base = fig3_records(a_par_khz=(60.0,), n_pulses_max=2, m_max=2, n_max=2)
    monkeypatch.setenv("NVSYNC_SEED", "12345")
    assert fig3_records(a_par_khz=(60.0,), n_pulses_max=2, m_max=2, n_max=2) == base
