"""Success probability, fidelities, the per-eigenstate quality factors and support bound."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..fockcore import DensityMatrix, FockError, Ket, OperatorMatrix, coherent_ket
from ..channels import conditional_evolve, evolve
from ..gatesynth import KerrSpec, cycle_eigenvalues, diagonal_power, repeated_conditional, target_unitary

MIN_SUCCESS = 1e-12


def success_probability(psi: Ket, OR: OperatorMatrix) -> float:
    """P_s = <psi|O_R^dagger O_R|psi>."""
    out = OR.entries @ psi.amplitudes
    return float(np.vdot(out, out).real)


def conditional_fidelity(psi: Ket, OT: OperatorMatrix, OR: OperatorMatrix) -> float:
    """|<psi|O_T^dagger O_R|psi>|^2 / P_s."""
    if not OT.unitary:
        raise FockError("target operator must be unitary")
    out = OR.entries @ psi.amplitudes
    p_s = float(np.vdot(out, out).real)
    if p_s < MIN_SUCCESS:
        raise FockError(f"success probability {p_s:.2e} too small for a fidelity")
    overlap = np.vdot(OT.entries @ psi.amplitudes, out)
    return float(abs(overlap) ** 2 / p_s)


def deterministic_fidelity(rho_out: DensityMatrix, psi_target: Ket) -> float:
    """Overlap <psi_T|rho|psi_T> with a pure target."""
    v = psi_target.amplitudes
    return float(np.vdot(v, rho_out.entries @ v).real)


class QualityFactors(NamedTuple):
    qf: complex
    qs: float
    qs_expansion: float


def qfqs_diagonal(m_A, m_B, tau: float, R: int) -> QualityFactors:
    """Diagonal elements of Q_f = O_T^dagger O_R and Q_s = O_R^dagger O_R on one eigenstate.

    ``qs_expansion`` is the leading small-tau form 1 - 4 m_A^2 m_B^2 (m_A^2 + m_B^2) R tau^6.
    Accepts scalars or broadcastable arrays.
    """
    o1, _ = cycle_eigenvalues(m_A, m_B, tau)
    m_A = np.asarray(m_A, dtype=float)
    m_B = np.asarray(m_B, dtype=float)
    T = 2.0 * R * tau**2
    qf = np.exp(-1j * T * m_A * m_B) * diagonal_power(o1, R)
    qs = np.abs(o1) ** (2 * R)
    approx = 1 - success_deficit_expansion(m_A, m_B, tau, R)
    if np.ndim(qf) == 0:
        return QualityFactors(complex(qf), float(qs), float(approx))
    return QualityFactors(qf, qs, approx)


def success_deficit(m_A, m_B, tau: float, R: int):
    """1 - <m|Q_s|m> without cancellation.

    Uses 1 - |O_1|^2 = 4 s_A^2 s_B^2 (s_A^2 + s_B^2 - 2 s_A^2 s_B^2) with s = sin(tau m).
    """
    sa2 = np.sin(tau * np.asarray(m_A, dtype=float)) ** 2
    sb2 = np.sin(tau * np.asarray(m_B, dtype=float)) ** 2
    one_step = 4 * sa2 * sb2 * (sa2 + sb2 - 2 * sa2 * sb2)
    return -np.expm1(R * np.log1p(-one_step))


def success_deficit_expansion(m_A, m_B, tau: float, R: int):
    """Leading small-tau success deficit 4 m_A^2 m_B^2 (m_A^2 + m_B^2) R tau^6."""
    m_A = np.asarray(m_A, dtype=float)
    m_B = np.asarray(m_B, dtype=float)
    return 4 * m_A**2 * m_B**2 * (m_A**2 + m_B**2) * R * tau**6


def support_bound(epsilon: float, R: int, T: float) -> float:
    """Largest |m| with m^6 < epsilon R^2 / T^3."""
    if epsilon <= 0 or R <= 0 or T <= 0:
        raise FockError("epsilon, R and T must be positive")
    return float((epsilon * R**2 / T**3) ** (1 / 6))


def self_kerr_model_deficit(beta: complex, T: float, R: int) -> float:
    """Large-amplitude estimate 9 T^3 |beta|^10 / R^2 of 1 - F."""
    return 9 * T**3 * abs(beta) ** 10 / R**2


@dataclass(frozen=True)
class ScalingRow:
    R: int
    tau: float
    deficit: float
    model: float

    @property
    def ratio(self) -> float:
        return self.deficit / self.model


def self_kerr_deterministic_deficit(beta: complex, T: float, R: int, n_max: int) -> tuple[float, float, float]:
    """Lossless deterministic run on |beta>; returns (1 - F, P_s, F_c)."""
    psi, _ = coherent_ket(beta, n_max)
    spec = KerrSpec.from_repetitions("self", T, R, n_max).gate_spec()
    rho, _ = evolve(psi.dm(), spec, track_success=False)
    target = Ket(spec.space, target_unitary(spec).entries @ psi.amplitudes)
    _, p_s = conditional_evolve(psi, spec)
    f_c = conditional_fidelity(psi, target_unitary(spec), repeated_conditional(spec))
    return 1.0 - deterministic_fidelity(rho, target), p_s, f_c


def fidelity_scaling_probe(beta: complex, T: float, R_list, n_max: int = 25) -> list[ScalingRow]:
    """Measured deterministic deficit against 9 T^3 |beta|^10 / R^2 for each R."""
    rows = []
    for R in R_list:
        deficit, _, _ = self_kerr_deterministic_deficit(beta, T, int(R), n_max)
        rows.append(
            ScalingRow(int(R), float(np.sqrt(T / (2 * R))), deficit, self_kerr_model_deficit(beta, T, int(R)))
        )
    return rows
