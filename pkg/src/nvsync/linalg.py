"""Small dense linear-algebra helpers shared across the package.

Everything here works on plain complex numpy arrays; no physics enters.
"""

from __future__ import annotations

import numpy as np


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def unitarity_defect(u: np.ndarray) -> float:
    """Frobenius norm of U^dag U - 1."""
    d = u.shape[0]
    return float(np.linalg.norm(dagger(u) @ u - np.eye(d)))


def phase_aligned_distance(a: np.ndarray, b: np.ndarray) -> float:
    """min over theta of ||A - exp(i theta) B||_F.

    The minimum is attained when exp(i theta) aligns with Tr(B^dag A).
    Formed as the norm of the aligned difference, not via the closed form
    sqrt(||A||^2 + ||B||^2 - 2 |Tr|), whose cancellation floors the result
    near sqrt(eps) for nearly equal unitaries.
    """
    overlap = np.trace(dagger(b) @ a)
    phase = overlap / abs(overlap) if abs(overlap) > 0.0 else 1.0
    return float(np.linalg.norm(a - phase * b))


def expm_herm(h: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(-i H t) for Hermitian H via eigendecomposition.

    Unitary to machine precision regardless of ||H t||, which matters when
    the generator carries GHz-scale diagonal entries over microsecond steps.
    """
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ dagger(v)


def expm_herm_batch(hs: np.ndarray, t: float = 1.0) -> np.ndarray:
    """Batched exp(-i H t) over a stack of Hermitian matrices (n, d, d)."""
    w, v = np.linalg.eigh(hs)
    phases = np.exp(-1j * w * t)
    return np.einsum("nij,nj,nkj->nik", v, phases, v.conj())


def matrix_to_json(m: np.ndarray) -> list:
    """Row-major nested list of [re, im] pairs."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def matrix_from_json(data: list) -> np.ndarray:
    rows = [[complex(re, im) for re, im in row] for row in data]
    return np.array(rows, dtype=complex)
