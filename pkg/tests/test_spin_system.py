"""Register operators, Hamiltonians, configuration round trips."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from nvsync.spin_system import (
    COMPUTATIONAL_INDICES,
    TWO_PI,
    PhysicalConstants,
    SpinRegisterConfig,
    build_operators,
    drive_hamiltonian,
    regime_report,
    static_hamiltonian,
)

KHZ = TWO_PI * 1e3


def test_spin_commutators():
    ops = build_operators()
    for x, y, z in ((ops.sx_e, ops.sy_e, ops.sz_e), (ops.ix_n, ops.iy_n, ops.iz_n)):
        assert np.allclose(x @ y - y @ x, 1j * z, atol=1e-14)


def test_spin_casimirs():
    ops = build_operators()
    s2 = ops.sx_e @ ops.sx_e + ops.sy_e @ ops.sy_e + ops.sz_e @ ops.sz_e
    i2 = ops.ix_n @ ops.ix_n + ops.iy_n @ ops.iy_n + ops.iz_n @ ops.iz_n
    assert np.allclose(s2, 2.0 * np.eye(3), atol=1e-14)  # s(s+1), s=1
    assert np.allclose(i2, 0.75 * np.eye(2), atol=1e-14)  # s=1/2


def test_product_operators_commute_across_subsystems():
    ops = build_operators()
    assert np.allclose(ops.sz6 @ ops.ix6, ops.ix6 @ ops.sz6, atol=1e-14)
    assert COMPUTATIONAL_INDICES == (2, 3, 4, 5)


def test_constants_defaults():
    c = PhysicalConstants()
    assert c.d / TWO_PI == pytest.approx(2.88e9)
    assert c.gamma_e / TWO_PI == pytest.approx(28.00e9)
    assert c.gamma_n / TWO_PI == pytest.approx(10.705e6)


def test_static_hamiltonian_is_hermitian_and_ms_block_diagonal():
    cfg = SpinRegisterConfig(b_z=0.04, a_par=200.0 * KHZ, a_perp=20.0 * KHZ)
    h = static_hamiltonian(cfg)
    assert np.linalg.norm(h - h.conj().T) < 1e-6 * np.linalg.norm(h)
    # no matrix element connects different m_s levels
    for i in range(6):
        for j in range(6):
            if i // 2 != j // 2:
                assert h[i, j] == 0.0


@pytest.mark.parametrize("m_s,row", [(1.0, 0), (0.0, 1), (-1.0, 2)])
def test_branch_nuclear_splitting(m_s, row):
    # within one m_s level the nuclear gap is hypot(m_s A_perp, w_l + m_s A_par)
    cfg = SpinRegisterConfig(b_z=0.02, a_par=130.0 * KHZ, a_perp=45.0 * KHZ)
    h = static_hamiltonian(cfg)
    block = h[2 * row : 2 * row + 2, 2 * row : 2 * row + 2]
    gap = float(np.diff(np.linalg.eigvalsh(block))[0])
    expected = math.hypot(m_s * cfg.a_perp, cfg.omega_l + m_s * cfg.a_par)
    # eigenvalue roundoff scales with the zero-field-splitting diagonal
    assert gap == pytest.approx(expected, rel=1e-9)


def test_config_validation():
    with pytest.raises(ValueError, match="b_z"):
        SpinRegisterConfig(b_z=-1e-3, a_par=1.0)
    with pytest.raises(ValueError, match="a_perp"):
        SpinRegisterConfig(b_z=0.01, a_par=1.0, a_perp=-1.0)


def test_omega_l_and_delta():
    cfg = SpinRegisterConfig(b_z=0.05, a_par=0.0)
    assert cfg.omega_l == pytest.approx(cfg.constants.gamma_n * 0.05)
    # below the level anticrossing the +1 detuning grows with the field
    assert cfg.delta == pytest.approx(2.0 * cfg.constants.gamma_e * 0.05)
    high = SpinRegisterConfig(b_z=0.2, a_par=0.0)  # past it: saturates at 2D
    assert high.delta == pytest.approx(2.0 * high.constants.d)


def test_from_dict_accepts_exactly_one_field_spec():
    base = {"a_par_over_2pi_hz": 25e3}
    cfg = SpinRegisterConfig.from_dict({**base, "omega_l_over_2pi_hz": 430e3})
    assert cfg.omega_l / TWO_PI == pytest.approx(430e3)
    cfg2 = SpinRegisterConfig.from_dict({**base, "b_z_tesla": 0.0402})
    assert cfg2.b_z == pytest.approx(0.0402)
    with pytest.raises(ValueError, match="not both"):
        SpinRegisterConfig.from_dict(
            {**base, "b_z_tesla": 0.04, "omega_l_over_2pi_hz": 430e3}
        )
    with pytest.raises(ValueError, match="needs"):
        SpinRegisterConfig.from_dict(base)


def test_from_dict_custom_constants():
    cfg = SpinRegisterConfig.from_dict(
        {
            "omega_l_over_2pi_hz": 1e5,
            "constants": {"gamma_n_over_2pi_hz_per_t": 5.0e6},
        }
    )
    assert cfg.constants.gamma_n / TWO_PI == pytest.approx(5.0e6)
    assert cfg.b_z == pytest.approx(1e5 / 5.0e6)
    assert cfg.constants.d / TWO_PI == pytest.approx(2.88e9)  # untouched default


def test_to_dict_round_trip():
    cfg = SpinRegisterConfig(b_z=0.0402, a_par=25.0 * KHZ, a_perp=10.0 * KHZ)
    back = SpinRegisterConfig.from_dict(cfg.to_dict())
    assert back.b_z == pytest.approx(cfg.b_z, rel=1e-15)
    assert back.a_par == pytest.approx(cfg.a_par, rel=1e-15)
    assert back.a_perp == pytest.approx(cfg.a_perp, rel=1e-15)


def test_from_file_toml_and_json(tmp_path):
    toml = tmp_path / "reg.toml"
    toml.write_text('omega_l_over_2pi_hz = 430e3\na_par_over_2pi_hz = 25e3\n')
    cfg = SpinRegisterConfig.from_file(toml)
    assert cfg.a_par / TWO_PI == pytest.approx(25e3)
    js = tmp_path / "reg.json"
    js.write_text(json.dumps({"b_z_tesla": 0.01, "a_par_over_2pi_hz": 1e3}))
    assert SpinRegisterConfig.from_file(js).b_z == pytest.approx(0.01)


def test_drive_hamiltonian_shape_and_amplitude():
    ops = build_operators()
    h = drive_hamiltonian(t=0.0, b1=1.0e4, omega=2.0e5, phi=0.0)
    assert np.allclose(h, 2.0e4 * ops.ix6, atol=1e-10)
    # quarter period of the carrier later the field is through zero
    h2 = drive_hamiltonian(t=math.pi / (2 * 2.0e5), b1=1.0e4, omega=2.0e5, phi=0.0)
    assert np.linalg.norm(h2) < 1e-10


def test_regime_report_flags():
    cfg = SpinRegisterConfig(b_z=0.0402, a_par=200.0 * KHZ, a_perp=20.0 * KHZ)
    flags = {f.name: f for f in regime_report(cfg, b1=30.0 * KHZ)}
    assert set(flags) == {
        "b1_vs_ms_plus1_splitting",
        "a_perp_vs_nuclear_detuning",
        "b1_vs_nuclear_detuning",
    }
    detuning = abs(cfg.omega_l - cfg.a_par)
    assert flags["b1_vs_nuclear_detuning"].ratio == pytest.approx(30.0 * KHZ / detuning)
    assert flags["a_perp_vs_nuclear_detuning"].ratio == pytest.approx(20.0 * KHZ / detuning)
    assert flags["b1_vs_ms_plus1_splitting"].ratio == pytest.approx(30.0 * KHZ / cfg.delta)
    assert flags["b1_vs_ms_plus1_splitting"].passed
    assert not flags["b1_vs_nuclear_detuning"].passed  # 30/230 > 0.1


def test_regime_report_degenerate_detuning():
    cfg = SpinRegisterConfig.from_dict(
        {"omega_l_over_2pi_hz": 2e5, "a_par_over_2pi_hz": 2e5}
    )
    flags = {f.name: f for f in regime_report(cfg, b1=1.0 * KHZ)}
    assert math.isinf(flags["b1_vs_nuclear_detuning"].ratio)
