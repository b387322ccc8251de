"""NV-center electron / 13C nuclear spin register.

The register is an electron spin S=1 coupled to a single 13C nucleus I=1/2,
written in the product basis

    |m_s=+1> |m_s=0> |m_s=-1|  (x)  |m_I=+1/2> |m_I=-1/2>

so the 6-dim index is 2*e + nu with e in {0: m_s=+1, 1: m_s=0, 2: m_s=-1}
and nu in {0: +1/2, 1: -1/2}.  The computational subspace is spanned by
m_s in {0, -1}, i.e. indices (2, 3, 4, 5); the m_s=+1 pair only hosts
leakage.  Qubit convention: |0>_e = m_s=0, |1>_e = m_s=-1, |0>_n = +1/2,
|1>_n = -1/2.

All internal angular frequencies are rad/s.  Constructors and serializers
speak Hz ("*_over_2pi_hz" keys) and Tesla.

Static Hamiltonian (secular hyperfine, rad/s):

    H0 = D Sz^2 + gamma_e Bz Sz + gamma_n Bz Iz + A_par Sz Iz + A_perp Sz Ix

and the rf drive on the nucleus is  H_d(t) = 2 B1 cos(w t + phi) Ix.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

TWO_PI = 2.0 * math.pi

# spin-1 operators, basis (+1, 0, -1)
SX_E = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / math.sqrt(2.0)
SY_E = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex) / math.sqrt(2.0)
SZ_E = np.diag([1.0, 0.0, -1.0]).astype(complex)

# spin-1/2 operators, basis (+1/2, -1/2)
IX_N = np.array([[0, 1], [1, 0]], dtype=complex) / 2.0
IY_N = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2.0
IZ_N = np.diag([0.5, -0.5]).astype(complex)

ID2 = np.eye(2, dtype=complex)
ID3 = np.eye(3, dtype=complex)

# lifted to the 6-dim product space
SX6 = np.kron(SX_E, ID2)
SY6 = np.kron(SY_E, ID2)
SZ6 = np.kron(SZ_E, ID2)
IX6 = np.kron(ID3, IX_N)
IY6 = np.kron(ID3, IY_N)
IZ6 = np.kron(ID3, IZ_N)

COMPUTATIONAL_INDICES = (2, 3, 4, 5)


@dataclass(frozen=True)
class SpinOperators:
    """The register's spin operators bundled for passing around.

    sx_e..sz_e are the bare spin-1 matrices, ix_n..iz_n the bare spin-1/2
    ones; the 6-dim members carry the same names with suffix 6 and act on
    the product space.
    """

    sx_e: np.ndarray
    sy_e: np.ndarray
    sz_e: np.ndarray
    ix_n: np.ndarray
    iy_n: np.ndarray
    iz_n: np.ndarray
    sx6: np.ndarray
    sy6: np.ndarray
    sz6: np.ndarray
    ix6: np.ndarray
    iy6: np.ndarray
    iz6: np.ndarray
    computational_indices: tuple = COMPUTATIONAL_INDICES


def build_operators() -> SpinOperators:
    """Fresh copies of all register operators (callers may not mutate them)."""
    return SpinOperators(
        sx_e=SX_E.copy(),
        sy_e=SY_E.copy(),
        sz_e=SZ_E.copy(),
        ix_n=IX_N.copy(),
        iy_n=IY_N.copy(),
        iz_n=IZ_N.copy(),
        sx6=SX6.copy(),
        sy6=SY6.copy(),
        sz6=SZ6.copy(),
        ix6=IX6.copy(),
        iy6=IY6.copy(),
        iz6=IZ6.copy(),
    )


@dataclass(frozen=True)
class PhysicalConstants:
    """Register constants in rad/s (/T where a field is involved).

    Defaults: zero-field splitting D/2pi = 2.88 GHz, electron gyromagnetic
    ratio 28.0 GHz/T (g = 2.00 times mu_B/h = 14.0 GHz/T), 13C nuclear
    gyromagnetic ratio 10.705 MHz/T.
    """

    d: float = TWO_PI * 2.88e9
    gamma_e: float = TWO_PI * 28.00e9
    gamma_n: float = TWO_PI * 10.705e6

    @classmethod
    def from_dict(cls, data: dict) -> "PhysicalConstants":
        base = cls()
        return cls(
            d=TWO_PI * float(data.get("d_over_2pi_hz", base.d / TWO_PI)),
            gamma_e=TWO_PI * float(data.get("gamma_e_over_2pi_hz_per_t", base.gamma_e / TWO_PI)),
            gamma_n=TWO_PI * float(data.get("gamma_n_over_2pi_hz_per_t", base.gamma_n / TWO_PI)),
        )


@dataclass(frozen=True)
class SpinRegisterConfig:
    """Static configuration: field along the NV axis plus hyperfine couplings.

    Parameters
    ----------
    b_z : float
        Magnetic field along the NV axis, Tesla.  Must be >= 0.
    a_par : float
        Secular hyperfine component A_par, rad/s (sign free).
    a_perp : float
        Transverse hyperfine component A_perp, rad/s.  Stored >= 0; a
        negative input is equivalent under reflection of the nuclear x axis
        and is rejected to keep one convention.
    constants : PhysicalConstants
    """

    b_z: float
    a_par: float
    a_perp: float = 0.0
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    def __post_init__(self):
        if self.b_z < 0.0:
            raise ValueError(f"b_z must be >= 0 T, got {self.b_z}")
        if self.a_perp < 0.0:
            raise ValueError("a_perp must be >= 0 (negative values are an x-axis reflection)")

    @property
    def omega_l(self) -> float:
        """Nuclear Larmor frequency gamma_n * Bz, rad/s."""
        return self.constants.gamma_n * self.b_z

    @property
    def delta(self) -> float:
        """Detuning scale of the unused m_s=+1 level, rad/s.

        Below the ground-state level anticrossing the +1 level sits
        2*gamma_e*Bz above the driven manifold; past it the splitting
        saturates at 2D.
        """
        ze = self.constants.gamma_e * self.b_z
        return 2.0 * ze if ze < self.constants.d else 2.0 * self.constants.d

    @classmethod
    def from_dict(cls, data: dict) -> "SpinRegisterConfig":
        constants = PhysicalConstants.from_dict(data.get("constants", {}))
        if "b_z_tesla" in data and "omega_l_over_2pi_hz" in data:
            raise ValueError("give b_z_tesla or omega_l_over_2pi_hz, not both")
        if "b_z_tesla" in data:
            b_z = float(data["b_z_tesla"])
        elif "omega_l_over_2pi_hz" in data:
            b_z = TWO_PI * float(data["omega_l_over_2pi_hz"]) / constants.gamma_n
        else:
            raise ValueError("config needs b_z_tesla or omega_l_over_2pi_hz")
        return cls(
            b_z=b_z,
            a_par=TWO_PI * float(data.get("a_par_over_2pi_hz", 0.0)),
            a_perp=TWO_PI * float(data.get("a_perp_over_2pi_hz", 0.0)),
            constants=constants,
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "SpinRegisterConfig":
        path = Path(path)
        text = path.read_text()
        if path.suffix.lower() == ".toml":
            try:
                import tomllib  # py >= 3.11
            except ImportError:
                import tomli as tomllib
            data = tomllib.loads(text)
        else:
            data = json.loads(text)
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "b_z_tesla": self.b_z,
            "a_par_over_2pi_hz": self.a_par / TWO_PI,
            "a_perp_over_2pi_hz": self.a_perp / TWO_PI,
            "constants": {
                "d_over_2pi_hz": self.constants.d / TWO_PI,
                "gamma_e_over_2pi_hz_per_t": self.constants.gamma_e / TWO_PI,
                "gamma_n_over_2pi_hz_per_t": self.constants.gamma_n / TWO_PI,
            },
        }


def static_hamiltonian(cfg: SpinRegisterConfig) -> np.ndarray:
    """6x6 static Hamiltonian in rad/s (see module docstring)."""
    c = cfg.constants
    return (
        c.d * SZ6 @ SZ6
        + c.gamma_e * cfg.b_z * SZ6
        + c.gamma_n * cfg.b_z * IZ6
        + cfg.a_par * SZ6 @ IZ6
        + cfg.a_perp * SZ6 @ IX6
    )


def drive_hamiltonian(t: float, b1: float, omega: float, phi: float) -> np.ndarray:
    """Linearly polarized rf drive 2*B1*cos(w t + phi) Ix at instant t, rad/s."""
    return 2.0 * b1 * math.cos(omega * t + phi) * IX6


@dataclass(frozen=True)
class RegimeFlag:
    name: str
    ratio: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.ratio < self.threshold


def regime_report(cfg: SpinRegisterConfig, b1: float, threshold: float = 0.1) -> list[RegimeFlag]:
    """Small-parameter checks behind the two-level reduction of the register.

    Each flag is a ratio that should stay well below one:

    * ``b1_vs_ms_plus1_splitting`` -- rf amplitude against the detuning of
      the unused m_s=+1 level (keeps leakage negligible),
    * ``a_perp_vs_nuclear_detuning`` -- transverse hyperfine against
      |omega_l - A_par| (keeps the nuclear quantization axes near z),
    * ``b1_vs_nuclear_detuning`` -- rf amplitude against |omega_l - A_par|
      (keeps the off-resonant nuclear branch dispersive).
    """
    detuning = abs(cfg.omega_l - cfg.a_par)

    def ratio(num: float) -> float:
        if num == 0.0:
            return 0.0
        return num / detuning if detuning > 0.0 else math.inf

    return [
        RegimeFlag("b1_vs_ms_plus1_splitting", b1 / cfg.delta if b1 else 0.0, threshold),
        RegimeFlag("a_perp_vs_nuclear_detuning", ratio(cfg.a_perp), threshold),
        RegimeFlag("b1_vs_nuclear_detuning", ratio(b1), threshold),
    ]
