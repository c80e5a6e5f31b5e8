"""Negativity of two-mode states and of their Gaussian counterparts.

Quadratures use x = a + a^dagger, p = -i(a - a^dagger); the vacuum covariance is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..fockcore import DensityMatrix, FockError, partial_transpose, trace_norm

UNCERTAINTY_TOL = 1e-9


@dataclass(frozen=True)
class MomentData:
    mean: np.ndarray  # (<x1>, <p1>, <x2>, <p2>, ...)
    covariance: np.ndarray

    def __post_init__(self):
        cov = np.asarray(self.covariance, dtype=float)
        if np.max(np.abs(cov - cov.T), initial=0.0) > 1e-12:
            raise FockError("covariance matrix must be symmetric")

    @property
    def n_modes(self) -> int:
        return len(self.mean) // 2

    def satisfies_uncertainty(self, tol: float = UNCERTAINTY_TOL) -> bool:
        herm = self.covariance + 1j * symplectic_form(self.n_modes)
        return bool(np.linalg.eigvalsh(herm)[0] >= -tol)


@dataclass(frozen=True)
class NegativityReport:
    N: float
    N_G: float

    @property
    def difference(self) -> float:
        return self.N - self.N_G


def symplectic_form(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def negativity(rho: DensityMatrix, split: int = 1) -> float:
    """(||rho^PT||_1 - 1) / 2 with the transpose taken on factor ``split``."""
    pt = partial_transpose(rho, split)
    return max(0.0, (trace_norm(pt) - 1) / 2)


def _annihilators(dims) -> list[np.ndarray]:
    ops = []
    for k, d in enumerate(dims):
        parts = [np.eye(dk) for dk in dims]
        parts[k] = np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1)
        full = parts[0]
        for q in parts[1:]:
            full = np.kron(full, q)
        ops.append(full)
    return ops


def quadrature_moments(rho: DensityMatrix) -> MomentData:
    """First moments and symmetrized covariance of (x_1, p_1, ..., x_n, p_n).

    Only <a>, <a a> and <a^dagger a> are read off the truncated matrix (these are exact
    there); <a a^dagger> follows from the commutator.
    """
    dims = rho.space.factors
    n = len(dims)
    m = rho.entries
    ops = _annihilators(dims)
    a = np.array([np.trace(m @ op) for op in ops])
    aa = np.array([[np.trace(m @ ops[j] @ ops[k]) for k in range(n)] for j in range(n)])
    ada = np.array([[np.trace(m @ ops[j].conj().T @ ops[k]) for k in range(n)] for j in range(n)])
    # central moments of b = (a_1, a_1^+, a_2, a_2^+, ...)
    d_aa = aa - np.outer(a, a)
    d_ada = ada - np.outer(a.conj(), a)
    G = np.empty((2 * n, 2 * n), dtype=complex)
    G[0::2, 0::2] = d_aa
    G[1::2, 1::2] = d_aa.conj().T
    G[1::2, 0::2] = d_ada
    G[0::2, 1::2] = d_ada.T + np.eye(n)
    L = np.kron(np.eye(n), np.array([[1, 1], [-1j, 1j]]))
    cov = np.real(L @ G @ L.T)
    mean = np.empty(2 * n)
    mean[0::2] = 2 * a.real
    mean[1::2] = 2 * a.imag
    return MomentData(mean, 0.5 * (cov + cov.T))


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    n = len(cov) // 2
    ev = np.abs(np.linalg.eigvals(1j * symplectic_form(n) @ cov))
    return np.sort(ev)[::2]


def gaussian_negativity(moments: MomentData, split: int = 1) -> float:
    """Negativity of the Gaussian state sharing the given moments (two modes)."""
    if moments.n_modes != 2:
        raise FockError("Gaussian negativity is implemented for two modes")
    if not moments.satisfies_uncertainty():
        raise FockError("covariance violates the uncertainty relation")
    flip = np.ones(4)
    flip[2 * split + 1] = -1.0
    cov_pt = flip[:, None] * moments.covariance * flip[None, :]
    nu = symplectic_eigenvalues(cov_pt)[0]
    return max(0.0, (1 - nu) / (2 * nu))


def negativity_report(rho: DensityMatrix, split: int = 1) -> NegativityReport:
    return NegativityReport(negativity(rho, split), gaussian_negativity(quadrature_moments(rho), split))
