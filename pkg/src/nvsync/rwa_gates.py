"""Rotating-frame gate algebra for the DDrf nuclear-spin gate.

A DDrf gate interleaves an rf drive on the nucleus with a CPMG-style
electron decoupling train (tau - pi - 2tau - pi - tau)^(N/2), N even.  The
rf runs through K = N+1 segments of durations tau, 2tau, ..., 2tau, tau
with a per-segment carrier phase; each electron pi pulse swaps which
nuclear branch sees the drive on resonance.

Everything in this module lives in the frame rotating at the rf carrier,
after the rotating-wave approximation and restriction to the computational
subspace.  With the lab drive 2*B1*cos(w t + phi)*Ix and a frame rotating
about +z at w, the retained co-rotating term is

    B1 * (cos(phi) Ix + sin(phi) Iy),

so a segment of carrier phase phi rotates the resonant branch about the
in-plane axis at angle phi.  On resonance (w = omega_l - A_par) the branch
with the electron in m_s=-1 is driven; the m_s=0 branch is detuned by
A_par.  Two nuclear models are supported:

* ``weak``   -- the detuned branch ignores the drive entirely and just
  precesses: U0(t) = exp(-i A_par t Iz).
* ``offres`` -- the detuned branch keeps the full off-resonant generator
  H0 = A_par Iz + B1 (cos(phi) Ix + sin(phi) Iy).

Basis order of 4x4 propagators: |0 e ,0 n>, |0,1>, |1,0>, |1,1> with
|0>_e = m_s=0 and |1>_e = m_s=-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import dagger, matrix_from_json, matrix_to_json, unitarity_defect

TWO_PI = 2.0 * math.pi

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)
ID2 = np.eye(2, dtype=complex)

# ideal CNOT, electron control in the basis above
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)

UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class Propagator:
    """A propagator with its frame tag and leakage bookkeeping.

    ``frame`` is one of "lab", "interaction", "nuclear-subspace";
    ``leakage`` is the population lost from the subspace the matrix acts
    on (0 for closed evolutions).  Unitarity is enforced at construction
    unless leakage is nonzero.
    """

    matrix: np.ndarray
    frame: str = "interaction"
    leakage: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"propagator must be square, got {m.shape}")
        if not 0.0 <= self.leakage <= 1.0:
            raise ValueError(f"leakage out of range: {self.leakage}")
        if self.leakage == 0.0:
            defect = unitarity_defect(m)
            if defect > UNITARITY_TOL:
                raise ValueError(f"propagator not unitary, defect {defect:.3e}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "dim": self.dim,
            "frame": self.frame,
            "leakage": self.leakage,
            "matrix": matrix_to_json(self.matrix),
        }

    @classmethod
    def from_json(cls, data: dict) -> "Propagator":
        return cls(
            matrix=matrix_from_json(data["matrix"]),
            frame=data.get("frame", "interaction"),
            leakage=float(data.get("leakage", 0.0)),
        )


@dataclass(frozen=True)
class DdrfSequence:
    """Parameters of one DDrf block: N pulses, interpulse spacing, rf settings.

    n_pulses = 0 degenerates to a single uninterrupted rf segment of
    duration 2*tau (no decoupling); otherwise n_pulses must be even.
    phi_tau is the per-segment phase increment, varphi the overall rf phase
    that picks the rotation axis.  l_larmor records the Larmor-locking
    integer when tau was chosen as l * 2*pi / omega_l (bookkeeping only;
    the lock itself is arranged through the static field, not checked
    here).
    """

    n_pulses: int
    tau: float
    b1: float
    omega: float = 0.0
    varphi: float = 0.0
    phi_tau: float = 0.0
    l_larmor: int | None = None

    def __post_init__(self):
        if self.n_pulses < 0 or self.n_pulses % 2 != 0:
            raise ValueError(f"n_pulses must be even and >= 0, got {self.n_pulses}")
        if self.tau <= 0.0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.b1 < 0.0:
            raise ValueError(f"b1 must be >= 0, got {self.b1}")

    @property
    def n_segments(self) -> int:
        return self.n_pulses + 1 if self.n_pulses else 1

    @property
    def t_gate(self) -> float:
        return 2.0 * self.n_pulses * self.tau if self.n_pulses else 2.0 * self.tau

    def segment_durations(self) -> list[float]:
        if self.n_pulses == 0:
            return [2.0 * self.tau]
        mids = [2.0 * self.tau] * (self.n_pulses - 1)
        return [self.tau] + mids + [self.tau]

    def phases(self) -> np.ndarray:
        return phase_schedule(self.n_segments, self.phi_tau, self.varphi)


def phase_schedule(n_segments: int, phi_tau: float, varphi: float) -> np.ndarray:
    """Carrier phase of each rf segment, k = 1..n_segments.

    phi_k = varphi + (k-1)*phi_tau + pi*[k odd], reduced mod 2*pi.  The pi
    on odd segments flips the drive axis each time the electron returns to
    the branch addressed first, which turns the echo train into a
    conditional rotation instead of an echo of the drive itself.
    """
    if n_segments < 1:
        raise ValueError(f"need at least one segment, got {n_segments}")
    k = np.arange(1, n_segments + 1)
    phases = np.mod(varphi + (k - 1) * phi_tau + math.pi * (k % 2), TWO_PI)
    # float mod rounds tiny negatives up to the modulus itself
    phases[phases == TWO_PI] = 0.0
    return phases


def rz(theta: float) -> np.ndarray:
    """exp(-i theta Iz): z rotation of the nucleus by angle theta."""
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def r_axis(theta: float, phi: float) -> np.ndarray:
    """Rotation by theta about the in-plane axis (cos phi, sin phi, 0)."""
    n_sigma = math.cos(phi) * SIGMA_X + math.sin(phi) * SIGMA_Y
    return math.cos(theta / 2.0) * ID2 - 1j * math.sin(theta / 2.0) * n_sigma


def u0_free(t: float, a_par: float) -> Propagator:
    """Undriven detuned branch of the weak model: exp(-i A_par t Iz)."""
    return Propagator(rz(a_par * t), frame="nuclear-subspace")


def u1_drive(t: float, b1: float, phi: float) -> Propagator:
    """Resonantly driven branch: rotation by B1*t about the phase-phi axis."""
    return Propagator(r_axis(b1 * t, phi), frame="nuclear-subspace")


def u0_offres(t: float, a_par: float, b1: float, phi: float) -> Propagator:
    """Detuned branch with the drive kept: exp(-i H0 t).

    H0 = A_par Iz + B1 (cos phi Ix + sin phi Iy) rotates the Bloch vector
    at angular rate 2*Omega, Omega = sqrt((A_par/2)^2 + (B1/2)^2), about
    the tilted unit axis (B1 cos phi, B1 sin phi, A_par)/(2*Omega).
    """
    omega_r = 0.5 * math.hypot(a_par, b1)
    if omega_r == 0.0:
        return Propagator(ID2.copy(), frame="nuclear-subspace")
    n_sigma = (
        b1 * math.cos(phi) * SIGMA_X + b1 * math.sin(phi) * SIGMA_Y + a_par * SIGMA_Z
    ) / (2.0 * omega_r)
    mat = math.cos(omega_r * t) * ID2 - 1j * math.sin(omega_r * t) * n_sigma
    return Propagator(mat, frame="nuclear-subspace")


def block_diag_branches(v0: np.ndarray, v1: np.ndarray) -> np.ndarray:
    """|0><0|_e (x) v0 + |1><1|_e (x) v1 as a 4x4 matrix."""
    out = np.zeros((4, 4), dtype=complex)
    out[:2, :2] = v0
    out[2:, 2:] = v1
    return out


def assemble_ddrf(seq: DdrfSequence, a_par: float, model: str = "weak") -> Propagator:
    """Time-ordered propagator of a DDrf block in the rotating frame.

    Returns the 4x4 block matrix diag(V0, V1): V0 for the electron
    starting in |0> (m_s=0, so the nucleus is driven resonantly during the
    even segments, after an odd number of pi pulses), V1 for the electron
    starting in |1> (driven during odd segments).  The electron pi pulses
    are bookkept by the branch alternation; their overall (-i)^N factor is
    a global phase and is omitted.
    """
    if model not in ("weak", "offres"):
        raise ValueError(f"model must be 'weak' or 'offres', got {model!r}")
    phases = seq.phases()
    if len(phases) != seq.n_segments:
        raise ValueError("phase schedule length does not match segment count")
    v0 = ID2.copy()
    v1 = ID2.copy()
    for k, (dt, phi) in enumerate(zip(seq.segment_durations(), phases), start=1):
        u_res = u1_drive(dt, seq.b1, phi).matrix
        if model == "offres":
            u_off = u0_offres(dt, a_par, seq.b1, phi).matrix
        else:
            u_off = u0_free(dt, a_par).matrix
        if k % 2 == 1:
            v0 = u_off @ v0
            v1 = u_res @ v1
        else:
            v0 = u_res @ v0
            v1 = u_off @ v1
    return Propagator(block_diag_branches(v0, v1), frame="interaction")


def crot_closed_form(seq: DdrfSequence, a_par: float) -> Propagator:
    """Closed form the weak model collapses to: V = Vz * Vcrot.

    Vz = 1_e (x) Rz(N A_par tau) tracks the unconditional precession of
    the detuned branch; Vcrot rotates the nucleus by -/+ N B1 tau about
    the varphi axis conditioned on the electron being in |0>/|1>.
    Requires the phase increment phi_tau = A_par * tau in the schedule;
    valid for even n_pulses >= 2.
    """
    if seq.n_pulses < 2:
        raise ValueError("closed form needs an even pulse number >= 2")
    theta_z = seq.n_pulses * a_par * seq.tau
    theta_x = seq.n_pulses * seq.b1 * seq.tau
    v_z = block_diag_branches(rz(theta_z), rz(theta_z))
    v_crot = block_diag_branches(
        r_axis(theta_x, seq.varphi), r_axis(-theta_x, seq.varphi)
    )
    return Propagator(v_z @ v_crot, frame="interaction")


def electron_rz(theta: float) -> np.ndarray:
    """4x4 z rotation of the electron qubit."""
    return block_diag_branches(np.exp(-0.5j * theta) * ID2, np.exp(0.5j * theta) * ID2)


def cnot_from_crot(v: Propagator, vz_angle: float = 0.0) -> Propagator:
    """Undo the known local content of a varphi=0 CROT with N B1 tau = pi/2.

    Applies exp(-i pi/4) * (Rz_e(-pi/2) (x) 1) * (1 (x) Rx_n(-pi/2)) after
    stripping Vz(vz_angle); for an ideal input this returns CNOT up to
    numerical noise.  Inputs with other conditional angles come back
    unfixed -- compare those against their own closed-form target instead.
    """
    if v.dim != 4:
        raise ValueError("expected a 4x4 computational-subspace propagator")
    correction = (
        np.exp(-0.25j * math.pi)
        * electron_rz(-0.5 * math.pi)
        @ np.kron(np.eye(2), r_axis(-0.5 * math.pi, 0.0))
    )
    v_z = block_diag_branches(rz(vz_angle), rz(vz_angle))
    return Propagator(
        correction @ dagger(v_z) @ v.matrix, frame=v.frame, leakage=v.leakage
    )
