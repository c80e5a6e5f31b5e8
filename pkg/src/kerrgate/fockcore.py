"""Truncated Fock-space linear algebra.

Every object lives on a :class:`FockSpace`, an ordered list of tensor-factor
dimensions. The global ordering is qubit first, then oscillator modes.
All arrays are copied on construction and frozen (``writeable=False``).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from math import lgamma
from typing import Iterable, Sequence

import numpy as np

QUBIT_DIM = 2

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
NORM_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-9
COHERENT_TRUNCATION_MAX = 1e-6


class FockError(ValueError):
    """Raised when a state or operator violates its structural contract."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=complex, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class FockSpace:
    """Ordered tensor product of finite factors (qubit = 2, oscillator = n_max + 1)."""

    factors: tuple[int, ...]

    def __post_init__(self):
        factors = tuple(int(d) for d in self.factors)
        if not factors:
            raise FockError("a FockSpace needs at least one factor")
        if any(d < 1 for d in factors):
            raise FockError(f"factor dimensions must be >= 1, got {factors}")
        object.__setattr__(self, "factors", factors)

    @property
    def dim(self) -> int:
        return int(np.prod(self.factors))

    def __len__(self) -> int:
        return len(self.factors)

    def __add__(self, other: FockSpace) -> FockSpace:
        return FockSpace(self.factors + other.factors)

    @classmethod
    def oscillators(cls, *n_max: int) -> FockSpace:
        return cls(tuple(n + 1 for n in n_max))


@dataclass(frozen=True)
class Ket:
    """State vector. ``normalized=False`` marks an unnormalized intermediate."""

    space: FockSpace
    amplitudes: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.shape != (self.space.dim,):
            raise FockError(f"amplitude length {amps.shape[0]} != space dim {self.space.dim}")
        if self.normalized and abs(np.linalg.norm(amps) - 1.0) > NORM_TOL:
            raise FockError(f"ket norm {np.linalg.norm(amps):.3e} is not 1")
        object.__setattr__(self, "amplitudes", amps)

    def dm(self) -> DensityMatrix:
        return DensityMatrix(self.space, np.outer(self.amplitudes, self.amplitudes.conj()))

    def inner(self, other: Ket) -> complex:
        """Return <self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class OperatorMatrix:
    """Square matrix on a FockSpace with verified structural flags."""

    space: FockSpace
    entries: np.ndarray
    diagonal: bool = False
    hermitian: bool = False
    unitary: bool = False

    def __post_init__(self):
        m = _frozen(self.entries)
        d = self.space.dim
        if m.shape != (d, d):
            raise FockError(f"operator shape {m.shape} does not match space dim {d}")
        object.__setattr__(self, "entries", m)
        self.validate()

    def validate(self) -> None:
        """Raise if any set flag is not a true property of the entries."""
        m = self.entries
        if self.diagonal and np.count_nonzero(m - np.diag(np.diag(m))):
            raise FockError("operator flagged diagonal has nonzero off-diagonal entries")
        if self.hermitian and np.max(np.abs(m - m.conj().T), initial=0.0) >= HERMITIAN_TOL:
            raise FockError("operator flagged hermitian is not")
        if self.unitary:
            dev = np.max(np.abs(m.conj().T @ m - np.eye(len(m))), initial=0.0)
            if dev >= UNITARY_TOL:
                raise FockError(f"operator flagged unitary deviates by {dev:.2e}")

    @classmethod
    def from_diagonal(cls, space: FockSpace, values, **flags) -> OperatorMatrix:
        values = np.asarray(values)
        hermitian = flags.pop("hermitian", bool(np.all(np.imag(values) == 0)))
        return cls(space, np.diag(values), diagonal=True, hermitian=hermitian, **flags)

    @classmethod
    def identity(cls, space: FockSpace) -> OperatorMatrix:
        return cls(space, np.eye(space.dim), diagonal=True, hermitian=True, unitary=True)

    @property
    def diag(self) -> np.ndarray:
        return np.diag(self.entries)

    @property
    def dag(self) -> OperatorMatrix:
        return OperatorMatrix(
            self.space, self.entries.conj().T, self.diagonal, self.hermitian, self.unitary
        )

    def __matmul__(self, other):
        if isinstance(other, Ket):
            _check_same_space(self.space, other.space)
            return Ket(self.space, self.entries @ other.amplitudes, normalized=False)
        _check_same_space(self.space, other.space)
        diagonal = self.diagonal and other.diagonal
        if diagonal:
            entries = np.diag(self.diag * other.diag)
        else:
            entries = self.entries @ other.entries
        return OperatorMatrix(self.space, entries, diagonal=diagonal)

    def expect(self, state) -> complex:
        if isinstance(state, Ket):
            return complex(np.vdot(state.amplitudes, self.entries @ state.amplitudes))
        return complex(np.trace(self.entries @ state.entries))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace matrix. Positivity is checked by :meth:`is_physical`."""

    space: FockSpace
    entries: np.ndarray

    def __post_init__(self):
        m = _frozen(self.entries)
        d = self.space.dim
        if m.shape != (d, d):
            raise FockError(f"density matrix shape {m.shape} does not match space dim {d}")
        herm = np.max(np.abs(m - m.conj().T), initial=0.0)
        if herm >= HERMITIAN_TOL:
            raise FockError(f"density matrix not hermitian (deviation {herm:.2e})")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise FockError(f"density matrix trace {tr!r} is not 1")
        object.__setattr__(self, "entries", m)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries)[0])

    def is_physical(self, tol: float = POSITIVITY_TOL) -> bool:
        return self.min_eigenvalue() >= -tol

    def expect(self, op: OperatorMatrix) -> complex:
        return op.expect(self)

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.entries))


def _check_same_space(a: FockSpace, b: FockSpace) -> None:
    if a != b:
        raise FockError(f"space mismatch: {a.factors} vs {b.factors}")


# --- constructors ------------------------------------------------------------


def coherent_amplitudes(beta: complex, n_max: int) -> tuple[np.ndarray, float]:
    """Unrenormalized coherent amplitudes up to ``n_max`` and the truncated weight."""
    n = np.arange(n_max + 1)
    log_fact = np.array([lgamma(k + 1) for k in n])
    if beta == 0:
        amps = (n == 0).astype(complex)
    else:
        mag = np.exp(-abs(beta) ** 2 / 2 + n * np.log(abs(beta)) - 0.5 * log_fact)
        amps = mag * np.exp(1j * n * np.angle(beta))
    weight = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))
    return amps, weight


def coherent_ket(beta: complex, n_max: int) -> tuple[Ket, float]:
    """Coherent state |beta> on a single mode, renormalized after truncation.

    Returns the ket together with the probability weight lost to truncation.
    Raises :class:`FockError` when that weight exceeds 1e-6.
    """
    if n_max < 1:
        raise FockError("n_max must be >= 1")
    amps, weight = coherent_amplitudes(beta, n_max)
    if weight > COHERENT_TRUNCATION_MAX:
        raise FockError(
            f"n_max={n_max} truncates weight {weight:.3g} of |beta={beta}>; increase n_max"
        )
    amps = amps / np.linalg.norm(amps)
    return Ket(FockSpace((n_max + 1,)), amps), weight


def fock_ket(n: int, n_max: int) -> Ket:
    amps = np.zeros(n_max + 1, dtype=complex)
    amps[n] = 1.0
    return Ket(FockSpace((n_max + 1,)), amps)


def qubit_ground() -> Ket:
    """|g>, the sigma_z = -1 eigenstate (basis index 1)."""
    return Ket(FockSpace((QUBIT_DIM,)), np.array([0.0, 1.0]))


def qubit_excited() -> Ket:
    """|e>, the sigma_z = +1 eigenstate (basis index 0)."""
    return Ket(FockSpace((QUBIT_DIM,)), np.array([1.0, 0.0]))


def ladder_ops(n_max: int) -> tuple[OperatorMatrix, OperatorMatrix]:
    """Annihilation operator and number operator on {|0>, ..., |n_max>}."""
    if n_max < 1:
        raise FockError("n_max must be >= 1")
    space = FockSpace((n_max + 1,))
    a = np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1)
    number = OperatorMatrix.from_diagonal(space, np.arange(n_max + 1, dtype=float))
    return OperatorMatrix(space, a), number


_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli(axis: str) -> OperatorMatrix:
    try:
        m = _PAULI[axis]
    except KeyError:
        raise FockError(f"unknown Pauli axis {axis!r}; expected one of x, y, z") from None
    return OperatorMatrix(
        FockSpace((QUBIT_DIM,)), m, diagonal=axis == "z", hermitian=True, unitary=True
    )


def tensor(parts: Sequence):
    """Kronecker product of kets or operators, in the order given."""
    parts = list(parts)
    if not parts:
        raise FockError("tensor of nothing")
    if all(isinstance(p, Ket) for p in parts):
        space = reduce(lambda s, p: s + p.space, parts[1:], parts[0].space)
        amps = reduce(np.kron, [p.amplitudes for p in parts])
        return Ket(space, amps, normalized=all(p.normalized for p in parts))
    if all(isinstance(p, OperatorMatrix) for p in parts):
        space = reduce(lambda s, p: s + p.space, parts[1:], parts[0].space)
        entries = reduce(np.kron, [p.entries for p in parts])
        return OperatorMatrix(
            space,
            entries,
            diagonal=all(p.diagonal for p in parts),
            hermitian=all(p.hermitian for p in parts),
            unitary=all(p.unitary for p in parts),
        )
    raise FockError("tensor() parts must be all Ket or all OperatorMatrix")


def embed(op: OperatorMatrix, factor: int, space: FockSpace) -> OperatorMatrix:
    """Lift a single-factor operator onto ``space`` at position ``factor``."""
    if op.space.factors != (space.factors[factor],):
        raise FockError(f"operator dim {op.space.dim} does not fit factor {factor} of {space}")
    parts = [OperatorMatrix.identity(FockSpace((d,))) for d in space.factors]
    parts[factor] = op
    return tensor(parts)


# --- spectral functions ----------------------------------------------------


def operator_trig(A: OperatorMatrix, theta: float, kind: str) -> OperatorMatrix:
    """sin(theta A) or cos(theta A) for Hermitian A.

    Diagonal inputs map elementwise; otherwise V f(theta Lambda) V^dagger.
    """
    fn = {"sin": np.sin, "cos": np.cos}.get(kind)
    if fn is None:
        raise FockError(f"kind must be 'sin' or 'cos', got {kind!r}")
    return spectral_map(A, lambda lam: fn(theta * lam), hermitian=True)


def spectral_map(A: OperatorMatrix, fn, hermitian: bool = False, unitary: bool = False):
    """Apply a scalar function to a Hermitian operator through its spectrum."""
    if not A.hermitian:
        raise FockError("spectral functions require a hermitian operator")
    if A.diagonal:
        return OperatorMatrix.from_diagonal(
            A.space, fn(A.diag.real), hermitian=hermitian, unitary=unitary
        )
    lam, vecs = np.linalg.eigh(A.entries)
    entries = (vecs * fn(lam)) @ vecs.conj().T
    if hermitian:
        entries = 0.5 * (entries + entries.conj().T)
    return OperatorMatrix(A.space, entries, hermitian=hermitian, unitary=unitary)


# --- partial operations --------------------------------------------------------


def _as_array(rho) -> np.ndarray:
    return rho.entries if hasattr(rho, "entries") else np.asarray(rho)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Trace out every factor not listed in ``keep``."""
    keep = sorted(set(keep))
    dims = rho.space.factors
    if not keep:
        raise FockError("keep set must be nonempty")
    if keep[0] < 0 or keep[-1] >= len(dims):
        raise FockError(f"keep indices {keep} out of range for {len(dims)} factors")
    n = len(dims)
    t = rho.entries.reshape(dims + dims)
    # einsum with repeated labels for the traced factors
    letters = "abcdefghijklmnopqrstuvwxyz"
    rows = [letters[i] for i in range(n)]
    cols = [letters[i] if i not in keep else letters[n + i] for i in range(n)]
    out = [letters[i] for i in keep] + [letters[n + i] for i in keep]
    reduced = np.einsum("".join(rows + cols) + "->" + "".join(out), t)
    kdims = tuple(dims[i] for i in keep)
    d = int(np.prod(kdims))
    m = reduced.reshape(d, d)
    return DensityMatrix(FockSpace(kdims), 0.5 * (m + m.conj().T))


def qubit_block(U: OperatorMatrix, bra: Ket, ket: Ket) -> OperatorMatrix:
    """Oscillator operator <bra|U|ket> for U on qubit (factor 0) x oscillators."""
    if U.space.factors[0] != QUBIT_DIM:
        raise FockError("first factor must be the qubit")
    osc = FockSpace(U.space.factors[1:])
    blocks = U.entries.reshape(QUBIT_DIM, osc.dim, QUBIT_DIM, osc.dim)
    m = np.einsum("i,iajb,j->ab", bra.amplitudes.conj(), blocks, ket.amplitudes)
    return OperatorMatrix(osc, m)


def partial_transpose(rho, factor: int) -> OperatorMatrix:
    """Transpose the indices of one tensor factor. Accepts DensityMatrix or OperatorMatrix."""
    dims = rho.space.factors
    if not 0 <= factor < len(dims):
        raise FockError(f"factor {factor} out of range for {len(dims)} factors")
    n = len(dims)
    t = _as_array(rho).reshape(dims + dims)
    axes = list(range(2 * n))
    axes[factor], axes[n + factor] = axes[n + factor], axes[factor]
    m = t.transpose(axes).reshape(rho.space.dim, rho.space.dim)
    hermitian = np.max(np.abs(m - m.conj().T), initial=0.0) < HERMITIAN_TOL
    return OperatorMatrix(rho.space, m, hermitian=bool(hermitian))


def trace_norm(M) -> float:
    """Sum of absolute eigenvalues of a Hermitian operator."""
    if isinstance(M, OperatorMatrix) and not M.hermitian:
        raise FockError("trace_norm is only defined here for hermitian input")
    m = _as_array(M)
    if not isinstance(M, (OperatorMatrix, DensityMatrix)):
        if np.max(np.abs(m - m.conj().T), initial=0.0) >= HERMITIAN_TOL:
            raise FockError("trace_norm is only defined here for hermitian input")
    return float(np.sum(np.abs(np.linalg.eigvalsh(m))))
