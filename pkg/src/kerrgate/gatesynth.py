"""Qubit-mediated synthesis of exp(i T A B) from dispersive-type couplings.

One elementary cycle is U_xyxy = U_x U_y U_x^dagger U_y^dagger with
U_x = exp(i tau sigma_x A) and U_y = exp(i tau sigma_y B). Projecting the qubit
onto |g> (the sigma_z = -1 state) leaves

    O_1 = 1 - 2 sin^2(tau A) sin^2(tau B) + (i/2) sin(2 tau A) sin(2 tau B)
        = exp(2 i tau^2 A B) + O(tau^4),

so R cycles approximate the target exp(i T A B) with T = 2 R tau^2.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .fockcore import (
    FockError,
    FockSpace,
    OperatorMatrix,
    embed,
    ladder_ops,
    operator_trig,
    pauli,
    qubit_block,
    qubit_excited,
    qubit_ground,
    spectral_map,
    tensor,
)

log = logging.getLogger(__name__)

COMMUTATOR_TOL = 1e-10
RESIDUE_MAX = 1e-3


@dataclass(frozen=True)
class GateSpec:
    """Commuting Hermitian pair (A, B) on the oscillator space, step strength and repetitions."""

    A: OperatorMatrix
    B: OperatorMatrix
    tau: float
    R: int
    axes: tuple[str, str] = ("x", "y")

    def __post_init__(self):
        if self.A.space != self.B.space:
            raise FockError("A and B must act on the same (joint) oscillator space")
        if not (self.A.hermitian and self.B.hermitian):
            raise FockError("A and B must be hermitian")
        if not self.tau > 0:
            raise FockError(f"tau must be positive, got {self.tau}")
        if int(self.R) != self.R or self.R < 1:
            raise FockError(f"R must be a positive integer, got {self.R}")
        if tuple(self.axes) != ("x", "y"):
            raise FockError("only the (x, y) axis assignment is supported")
        if not (self.A.diagonal and self.B.diagonal):
            a, b = self.A.entries, self.B.entries
            comm = np.max(np.abs(a @ b - b @ a))
            if comm > COMMUTATOR_TOL:
                raise FockError(f"[A, B] != 0 (max deviation {comm:.2e})")
        object.__setattr__(self, "R", int(self.R))

    @property
    def T(self) -> float:
        return 2.0 * self.R * self.tau**2

    @property
    def space(self) -> FockSpace:
        return self.A.space

    @property
    def diagonal(self) -> bool:
        return self.A.diagonal and self.B.diagonal

    def with_steps(self, tau: float, R: int) -> GateSpec:
        return GateSpec(self.A, self.B, tau, R, self.axes)


@dataclass(frozen=True)
class KerrSpec:
    """Self-Kerr (A = B = n) or cross-Kerr (A = n_1, B = n_2) at total strength T."""

    kind: str
    T: float
    tau: float
    n_max: int

    def __post_init__(self):
        if self.kind not in ("self", "cross"):
            raise FockError(f"kind must be 'self' or 'cross', got {self.kind!r}")
        if self.T <= 0 or self.tau <= 0:
            raise FockError("T and tau must be positive")
        if self.repetitions < 1:
            raise FockError(f"T={self.T}, tau={self.tau} rounds to zero repetitions")

    @classmethod
    def from_repetitions(cls, kind: str, T: float, R: int, n_max: int) -> KerrSpec:
        return cls(kind, T, float(np.sqrt(T / (2.0 * R))), n_max)

    @property
    def repetitions(self) -> int:
        return int(round(self.T / (2.0 * self.tau**2)))

    @property
    def residue(self) -> float:
        """Relative mismatch |T - 2 R tau^2| / T caused by rounding R."""
        return abs(self.T - 2.0 * self.repetitions * self.tau**2) / self.T

    def operators(self) -> tuple[OperatorMatrix, OperatorMatrix]:
        _, n = ladder_ops(self.n_max)
        if self.kind == "self":
            return n, n
        space = FockSpace.oscillators(self.n_max, self.n_max)
        return embed(n, 0, space), embed(n, 1, space)

    def gate_spec(self, strict: bool = False) -> GateSpec:
        if self.residue > 1e-12:
            log.info("R=%d realizes T with relative residue %.2e", self.repetitions, self.residue)
        if strict and self.residue >= RESIDUE_MAX:
            raise FockError(f"rounding residue {self.residue:.2e} exceeds {RESIDUE_MAX}")
        A, B = self.operators()
        return GateSpec(A, B, self.tau, self.repetitions)


def coupling_unitary(A: OperatorMatrix, axis: str, tau: float) -> OperatorMatrix:
    """exp(i tau sigma_axis (x) A) = 1 (x) cos(tau A) + i sigma_axis (x) sin(tau A)."""
    if not A.hermitian:
        raise FockError("coupling operator must be hermitian")
    s = pauli(axis)
    eye2 = OperatorMatrix.identity(s.space)
    c = operator_trig(A, tau, "cos")
    sn = operator_trig(A, tau, "sin")
    entries = tensor([eye2, c]).entries + 1j * tensor([s, sn]).entries
    return OperatorMatrix(s.space + A.space, entries, unitary=True)


def geometric_cycle(spec: GateSpec) -> OperatorMatrix:
    """The four-pulse product U_x U_y U_x^dagger U_y^dagger on qubit (x) oscillators."""
    ux = coupling_unitary(spec.A, spec.axes[0], spec.tau).entries
    uy = coupling_unitary(spec.B, spec.axes[1], spec.tau).entries
    u = ux @ uy @ ux.conj().T @ uy.conj().T
    return OperatorMatrix(pauli("x").space + spec.space, u, unitary=True)


def _trig_parts(spec: GateSpec):
    sa = operator_trig(spec.A, spec.tau, "sin").entries
    sb = operator_trig(spec.B, spec.tau, "sin").entries
    s2a = operator_trig(spec.A, 2 * spec.tau, "sin").entries
    s2b = operator_trig(spec.B, 2 * spec.tau, "sin").entries
    return sa @ sa, sb @ sb, s2a, s2b


def geometric_cycle_closed_form(spec: GateSpec) -> OperatorMatrix:
    """Closed-form expansion of the cycle in the Pauli basis (valid when [A, B] = 0)."""
    sa2, sb2, s2a, s2b = _trig_parts(spec)
    eye = np.eye(spec.space.dim)
    kron = np.kron
    u = (
        kron(np.eye(2), eye - 2 * sa2 @ sb2)
        + 1j * kron(pauli("x").entries, s2a @ sb2)
        - 1j * kron(pauli("y").entries, sa2 @ s2b)
        - 0.5j * kron(pauli("z").entries, s2a @ s2b)
    )
    return OperatorMatrix(pauli("x").space + spec.space, u, unitary=True)


def conditional_ops(spec: GateSpec) -> tuple[OperatorMatrix, OperatorMatrix]:
    """O_1 = <g|U_xyxy|g> (success branch) and O_2 = <e|U_xyxy|g> (error branch)."""
    if spec.diagonal:
        a, b, t = spec.A.diag.real, spec.B.diag.real, spec.tau
        o1, o2 = cycle_eigenvalues(a, b, t)
        return (
            OperatorMatrix.from_diagonal(spec.space, o1, hermitian=False),
            OperatorMatrix.from_diagonal(spec.space, o2, hermitian=False),
        )
    sa2, sb2, s2a, s2b = _trig_parts(spec)
    eye = np.eye(spec.space.dim)
    o1 = eye - 2 * sa2 @ sb2 + 0.5j * s2a @ s2b
    o2 = -sa2 @ s2b + 1j * s2a @ sb2
    return OperatorMatrix(spec.space, o1), OperatorMatrix(spec.space, o2)


def cycle_eigenvalues(m_a, m_b, tau):
    """Scalar O_1 and O_2 on a joint eigenstate with eigenvalues (m_a, m_b)."""
    m_a = np.asarray(m_a, dtype=float)
    m_b = np.asarray(m_b, dtype=float)
    sa, sb = np.sin(tau * m_a), np.sin(tau * m_b)
    s2a, s2b = np.sin(2 * tau * m_a), np.sin(2 * tau * m_b)
    o1 = 1 - 2 * sa**2 * sb**2 + 0.5j * s2a * s2b
    o2 = -(sa**2) * s2b + 1j * s2a * sb**2
    return o1, o2


def diagonal_power(values, R: int):
    """values**R in polar form; keeps |values|**R accurate for large R."""
    values = np.asarray(values, dtype=complex)
    if R == 1:
        return values
    return np.abs(values) ** R * np.exp(1j * R * np.angle(values))


def target_unitary(spec: GateSpec, T: float | None = None) -> OperatorMatrix:
    """Ideal gate exp(i T A B); T defaults to 2 R tau^2."""
    T = spec.T if T is None else T
    if spec.diagonal:
        phase = np.exp(1j * T * spec.A.diag.real * spec.B.diag.real)
        return OperatorMatrix.from_diagonal(spec.space, phase, hermitian=False, unitary=True)
    ab = spec.A.entries @ spec.B.entries
    prod = OperatorMatrix(spec.space, 0.5 * (ab + ab.conj().T), hermitian=True)
    return spectral_map(prod, lambda lam: np.exp(1j * T * lam), unitary=True)


def repeated_conditional(spec: GateSpec) -> OperatorMatrix:
    """O_R = (O_1)^R."""
    o1, _ = conditional_ops(spec)
    if o1.diagonal:
        return OperatorMatrix.from_diagonal(spec.space, diagonal_power(o1.diag, spec.R), hermitian=False)
    return OperatorMatrix(spec.space, np.linalg.matrix_power(o1.entries, spec.R))


def _cycle_blocks(spec: GateSpec) -> np.ndarray:
    """Per-eigenstate 2x2 qubit blocks of U_xyxy for diagonal (A, B); shape (d, 2, 2)."""
    u = geometric_cycle_closed_form(spec).entries
    d = spec.space.dim
    t = u.reshape(2, d, 2, d)
    idx = np.arange(d)
    return t[:, idx, :, idx]


def no_reinit_conditional(spec: GateSpec) -> OperatorMatrix:
    """<g|(U_xyxy)^R|g>: R cycles with the qubit kept between them."""
    g = qubit_ground()
    if spec.diagonal:
        blocks = np.linalg.matrix_power(_cycle_blocks(spec), spec.R)
        return OperatorMatrix.from_diagonal(spec.space, blocks[:, 1, 1], hermitian=False)
    u = geometric_cycle(spec)
    uR = OperatorMatrix(u.space, np.linalg.matrix_power(u.entries, spec.R))
    return qubit_block(uR, g, g)


def no_reinit_check(spec: GateSpec, subspace=None) -> float:
    """Max-norm distance between <g|U^R|g> and (<g|U|g>)^R.

    ``subspace`` optionally restricts the comparison to the given basis indices; at
    fixed T the agreement only improves where tau * |m| is small.
    """
    if spec.R == 1:
        return 0.0
    kept = no_reinit_conditional(spec).entries
    reset = repeated_conditional(spec).entries
    diff = kept - reset
    if subspace is not None:
        idx = np.asarray(subspace)
        diff = diff[np.ix_(idx, idx)]
    return float(np.max(np.abs(diff)))


def error_branch(spec: GateSpec) -> OperatorMatrix:
    """<e|U_xyxy|g> taken from the full cycle (oracle for :func:`conditional_ops`)."""
    return qubit_block(geometric_cycle(spec), qubit_excited(), qubit_ground())
