"""Synchronized electron-nuclear gates on an NV register.

Design, closed-form modeling and full lab-frame simulation of DDrf-style
conditional rotations between the NV electron spin and a nearby 13C
nucleus, built around drive-amplitude synchronization of the undriven
nuclear branch.  See the README for the command line surface.
"""

from .fidelity import FidelityReport, average_gate_fidelity, corrected_cnot_fidelity
from .full_dynamics import (
    EvolveResult,
    IntegratorSpec,
    PulseEvent,
    electron_echo_phase,
    evolve,
    project_computational,
    schedule_from_ddrf,
    to_interaction_frame,
)
from .rwa_gates import (
    CNOT,
    DdrfSequence,
    Propagator,
    assemble_ddrf,
    cnot_from_crot,
    crot_closed_form,
    electron_rz,
    phase_schedule,
)
from .spin_system import (
    PhysicalConstants,
    SpinRegisterConfig,
    build_operators,
    drive_hamiltonian,
    regime_report,
    static_hamiltonian,
)
from .sync_design import (
    DetunedGate,
    GateTimeAudit,
    SyncParams,
    b1_sync,
    bz_sync,
    collapse_is_exact,
    detuned_gate_params,
    enumerate_bz_ratios,
    fastest_gate,
    gate_time,
    sync_params,
    sync_target,
    tau_sync,
)

__version__ = "0.1.0"

__all__ = [
    "CNOT",
    "DdrfSequence",
    "DetunedGate",
    "EvolveResult",
    "FidelityReport",
    "GateTimeAudit",
    "IntegratorSpec",
    "PhysicalConstants",
    "Propagator",
    "PulseEvent",
    "SpinRegisterConfig",
    "SyncParams",
    "assemble_ddrf",
    "average_gate_fidelity",
    "b1_sync",
    "build_operators",
    "bz_sync",
    "cnot_from_crot",
    "collapse_is_exact",
    "corrected_cnot_fidelity",
    "crot_closed_form",
    "detuned_gate_params",
    "drive_hamiltonian",
    "electron_echo_phase",
    "electron_rz",
    "enumerate_bz_ratios",
    "evolve",
    "fastest_gate",
    "gate_time",
    "phase_schedule",
    "project_computational",
    "regime_report",
    "schedule_from_ddrf",
    "static_hamiltonian",
    "sync_params",
    "sync_target",
    "tau_sync",
    "to_interaction_frame",
    "__version__",
]
