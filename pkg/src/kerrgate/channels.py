"""Trace-preserving evolution: qubit-mediated cycles interleaved with oscillator loss."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import comb
from typing import Iterator

import numpy as np

from .fockcore import (
    DensityMatrix,
    FockError,
    FockSpace,
    Ket,
    OperatorMatrix,
)
from .gatesynth import GateSpec, conditional_ops, repeated_conditional

log = logging.getLogger(__name__)

COMPLETENESS_TOL = 1e-12
DRIFT_TOL = 1e-12
MIN_SUCCESS = 1e-12


@dataclass(frozen=True)
class LossSpec:
    """Per-cycle beam-splitter loss with transmittance ``eta`` on the listed oscillator modes."""

    eta: float = 1.0
    modes: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 < self.eta <= 1:
            raise FockError(f"eta must lie in (0, 1], got {self.eta}")
        object.__setattr__(self, "modes", tuple(sorted(set(self.modes))))
        if self.eta < 1 and not self.modes:
            raise FockError("lossy LossSpec needs at least one mode")

    @property
    def lossless(self) -> bool:
        return self.eta == 1.0

    @classmethod
    def none(cls) -> LossSpec:
        return cls()


@dataclass(frozen=True)
class EvolutionRecord:
    step: int
    trace_kept: float
    mean_photon: tuple[float, ...]
    renormalized: bool = False


def loss_kraus(eta: float, n_max: int) -> list[OperatorMatrix]:
    """Amplitude-damping Kraus set, <n-k|K_k|n> = sqrt(C(n,k) eta^(n-k) (1-eta)^k)."""
    if not 0 < eta <= 1:
        raise FockError(f"eta must lie in (0, 1], got {eta}")
    space = FockSpace((n_max + 1,))
    if eta == 1:
        return [OperatorMatrix.identity(space)]
    ops = []
    for k in range(n_max + 1):
        m = np.zeros((n_max + 1, n_max + 1))
        for n in range(k, n_max + 1):
            m[n - k, n] = np.sqrt(comb(n, k) * eta ** (n - k) * (1 - eta) ** k)
        ops.append(OperatorMatrix(space, m, diagonal=k == 0))
    return ops


def apply_kraus(rho: np.ndarray, kraus: list[OperatorMatrix], factor: int, dims) -> np.ndarray:
    """Apply a single-factor channel to a raw density matrix on ``dims``."""
    return _ModeChannel(kraus, factor, tuple(dims))(rho)


class _ModeChannel:
    """Single-factor channel as a (d^2 x d^2) superoperator acting on a raw matrix."""

    def __init__(self, kraus, factor: int, dims: tuple[int, ...]):
        d = dims[factor]
        ks = np.array([k.entries for k in kraus])
        if ks.shape[1:] != (d, d):
            raise FockError(f"Kraus dim {ks.shape[1]} does not match factor dim {d}")
        # S[(a, a'), (c, c')] = sum_k K[a, c] conj(K[a', c'])
        self.superop = np.einsum("kac,kbd->abcd", ks, ks.conj()).reshape(d * d, d * d)
        self.factor = factor
        self.dims = dims
        n = len(dims)
        self._perm = [factor, n + factor] + [i for i in range(2 * n) if i not in (factor, n + factor)]
        self._inv = np.argsort(self._perm)

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        dims = self.dims
        D = int(np.prod(dims))
        d = dims[self.factor]
        t = rho.reshape(dims + dims).transpose(self._perm)
        rest = t.shape[2:]
        t = (self.superop @ t.reshape(d * d, -1)).reshape((d, d) + rest)
        return t.transpose(self._inv).reshape(D, D)


def _completeness_error(O1: OperatorMatrix, O2: OperatorMatrix) -> float:
    if O1.diagonal and O2.diagonal:
        return float(np.max(np.abs(np.abs(O1.diag) ** 2 + np.abs(O2.diag) ** 2 - 1)))
    c = O1.entries.conj().T @ O1.entries + O2.entries.conj().T @ O2.entries
    return float(np.max(np.abs(c - np.eye(len(c)))))


def deterministic_step(rho: DensityMatrix, O1: OperatorMatrix, O2: OperatorMatrix) -> DensityMatrix:
    """One qubit-traced cycle: rho -> O_1 rho O_1^dagger + O_2 rho O_2^dagger."""
    err = _completeness_error(O1, O2)
    if err > COMPLETENESS_TOL:
        raise FockError(f"O1, O2 are not a complete Kraus pair (deviation {err:.2e})")
    if rho.space != O1.space:
        raise FockError("state and operators live on different spaces")
    out = _StepMap(O1, O2)(rho.entries)
    return DensityMatrix(rho.space, 0.5 * (out + out.conj().T))


class _StepMap:
    """The two-Kraus cycle map on raw arrays; Schur product when both operators are diagonal."""

    def __init__(self, O1: OperatorMatrix, O2: OperatorMatrix):
        self.diagonal = O1.diagonal and O2.diagonal
        if self.diagonal:
            o1, o2 = O1.diag, O2.diag
            self.mask = np.outer(o1, o1.conj()) + np.outer(o2, o2.conj())
            self.success_mask = np.outer(o1, o1.conj())
        else:
            self.o1, self.o2 = O1.entries, O2.entries

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        if self.diagonal:
            return self.mask * rho
        o1, o2 = self.o1, self.o2
        return o1 @ rho @ o1.conj().T + o2 @ rho @ o2.conj().T

    def success(self, rho: np.ndarray) -> np.ndarray:
        if self.diagonal:
            return self.success_mask * rho
        return self.o1 @ rho @ self.o1.conj().T


def _mean_photons(rho: np.ndarray, dims: tuple[int, ...]) -> tuple[float, ...]:
    pops = np.real(np.diag(rho)).reshape(dims)
    out = []
    for mode, d in enumerate(dims):
        axes = tuple(i for i in range(len(dims)) if i != mode)
        marg = pops.sum(axis=axes) if axes else pops
        out.append(float(np.dot(np.arange(d), marg)))
    return tuple(out)


def evolve_iter(
    rho0: DensityMatrix, spec: GateSpec, loss: LossSpec | None = None, track_success: bool = True
) -> Iterator[tuple[EvolutionRecord, np.ndarray]]:
    """Yield (record, raw density matrix) after every cycle-plus-loss step.

    ``trace_kept`` follows the unnormalized post-selected branch (O_1 each step,
    loss applied to it as well), i.e. the cumulative conditional success probability.
    The yielded arrays must be treated as read-only.
    """
    loss = loss or LossSpec.none()
    if rho0.space != spec.space:
        raise FockError(f"state space {rho0.space.factors} != gate space {spec.space.factors}")
    dims = spec.space.factors
    if loss.modes and max(loss.modes) >= len(dims):
        raise FockError(f"loss modes {loss.modes} out of range for {len(dims)} modes")
    O1, O2 = conditional_ops(spec)
    err = _completeness_error(O1, O2)
    if err > COMPLETENESS_TOL:
        raise FockError(f"O1, O2 are not a complete Kraus pair (deviation {err:.2e})")
    step_map = _StepMap(O1, O2)
    channels = []
    if not loss.lossless:
        for mode in loss.modes:
            kraus = loss_kraus(loss.eta, dims[mode] - 1)
            channels.append(_ModeChannel(kraus, mode, dims))

    rho = np.array(rho0.entries)
    branch = np.array(rho0.entries) if track_success else None
    for step in range(1, spec.R + 1):
        rho = step_map(rho)
        for ch in channels:
            rho = ch(rho)
        tr = np.trace(rho).real
        renorm = abs(tr - 1.0) > DRIFT_TOL
        if renorm:
            log.warning("trace drift %.3e at step %d; renormalizing", tr - 1.0, step)
            rho = rho / tr
        kept = float("nan")
        if branch is not None:
            branch = step_map.success(branch)
            for ch in channels:
                branch = ch(branch)
            kept = float(np.trace(branch).real)
        yield EvolutionRecord(step, kept, _mean_photons(rho, dims), renorm), rho


def evolve(
    rho0: DensityMatrix, spec: GateSpec, loss: LossSpec | None = None, track_success: bool = True
) -> tuple[DensityMatrix, list[EvolutionRecord]]:
    """R cycles of the deterministic map, each followed by loss on ``loss.modes``."""
    records = []
    rho = rho0.entries
    for rec, rho in evolve_iter(rho0, spec, loss, track_success):
        records.append(rec)
    return DensityMatrix(spec.space, 0.5 * (rho + rho.conj().T)), records


def conditional_evolve(psi0: Ket, spec: GateSpec) -> tuple[Ket, float]:
    """Post-selected (qubit measured in |g> every cycle) lossless evolution."""
    if psi0.space != spec.space:
        raise FockError("ket and gate live on different spaces")
    OR = repeated_conditional(spec)
    out = OR.entries @ psi0.amplitudes
    p_s = float(np.vdot(out, out).real)
    if p_s < MIN_SUCCESS:
        raise FockError(f"success probability {p_s:.2e} vanishes; input outside gate support")
    return Ket(spec.space, out / np.sqrt(p_s)), p_s
