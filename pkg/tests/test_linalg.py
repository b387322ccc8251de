"""Dense helper routines: unitarity, phase alignment, exponentials."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from nvsync.linalg import (
    dagger,
    expm_herm,
    expm_herm_batch,
    matrix_from_json,
    matrix_to_json,
    phase_aligned_distance,
    unitarity_defect,
)

from conftest import random_unitary


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (a + dagger(a)) / 2.0


def test_dagger_is_conjugate_transpose(rng):
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert np.array_equal(dagger(a), a.conj().T)


def test_unitarity_defect_zero_for_unitary(rng):
    u = random_unitary(4, rng)
    assert unitarity_defect(u) < 1e-14


def test_unitarity_defect_detects_scaling(rng):
    u = 1.1 * random_unitary(3, rng)
    # ||1.21 I - I|| = 0.21 * sqrt(3)
    assert unitarity_defect(u) == pytest.approx(0.21 * np.sqrt(3.0), rel=1e-12)


def test_phase_aligned_distance_kills_global_phase(rng):
    a = random_unitary(4, rng)
    assert phase_aligned_distance(a, np.exp(0.37j) * a) < 1e-13


def test_phase_aligned_distance_is_a_minimum(rng):
    a = random_unitary(4, rng)
    b = random_unitary(4, rng)
    d = phase_aligned_distance(a, b)
    for theta in np.linspace(0.0, 2.0 * np.pi, 17):
        assert d <= np.linalg.norm(a - np.exp(1j * theta) * b) + 1e-12


def test_expm_herm_matches_scipy(rng):
    h = random_hermitian(4, rng)
    t = 0.73
    assert np.linalg.norm(expm_herm(h, t) - expm(-1j * h * t)) < 1e-12


def test_expm_herm_unitary_at_huge_norm(rng):
    # GHz generator over microseconds: ||H t|| ~ 1e4, still exactly unitary
    h = random_hermitian(6, rng, scale=1e10)
    u = expm_herm(h, 1e-6)
    assert unitarity_defect(u) < 1e-12


@given(t=st.floats(-5.0, 5.0), s=st.floats(-5.0, 5.0))
def test_expm_herm_is_a_one_parameter_group(t, s):
    rng = np.random.default_rng(7)
    h = random_hermitian(3, rng)
    lhs = expm_herm(h, t) @ expm_herm(h, s)
    assert np.linalg.norm(lhs - expm_herm(h, t + s)) < 1e-12


def test_expm_herm_batch_matches_loop(rng):
    hs = np.stack([random_hermitian(4, rng) for _ in range(5)])
    batch = expm_herm_batch(hs, 0.41)
    for k in range(5):
        assert np.linalg.norm(batch[k] - expm_herm(hs[k], 0.41)) < 1e-12


def test_matrix_json_round_trip(rng):
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    data = matrix_to_json(m)
    assert data[0][0] == [pytest.approx(m[0, 0].real), pytest.approx(m[0, 0].imag)]
    assert np.array_equal(matrix_from_json(data), m)
