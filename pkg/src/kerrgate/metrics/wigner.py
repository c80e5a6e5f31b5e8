"""Single-mode Wigner functions and counting of their negative regions.

Convention: x = a + a^dagger, p = -i(a - a^dagger), alpha = (x + i p) / 2 and
W(alpha) = (2/pi) Tr[rho D(alpha) Parity D(alpha)^dagger], so the vacuum peaks at 2/pi and
W integrates to one against d^2 alpha = dx dp / 4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..fockcore import DensityMatrix, FockError

DEFAULT_EXTENT = 6.0
DEFAULT_POINTS = 241
EDGE_POPULATION_MAX = 1e-6
REGION_THRESHOLD = 1e-2
DISPLACEMENT_PAD = 60


@dataclass(frozen=True)
class WignerGrid:
    x: np.ndarray
    p: np.ndarray
    values: np.ndarray  # values[i, j] = W(x[j], p[i])

    @property
    def x_range(self) -> tuple[float, float]:
        return float(self.x[0]), float(self.x[-1])

    @property
    def p_range(self) -> tuple[float, float]:
        return float(self.p[0]), float(self.p[-1])

    @property
    def resolution(self) -> tuple[int, int]:
        return len(self.x), len(self.p)

    def integral(self) -> float:
        """Riemann sum of W over d^2 alpha."""
        dx = self.x[1] - self.x[0]
        dp = self.p[1] - self.p[0]
        return float(self.values.sum() * dx * dp / 4)

    def peak(self) -> float:
        return float(np.max(np.abs(self.values)))

    def at(self, x: float, p: float) -> float:
        j = int(np.argmin(np.abs(self.x - x)))
        i = int(np.argmin(np.abs(self.p - p)))
        return float(self.values[i, j])


def default_axis(extent: float = DEFAULT_EXTENT, points: int = DEFAULT_POINTS) -> np.ndarray:
    return np.linspace(-extent, extent, points)


def _check_single_mode(rho: DensityMatrix) -> np.ndarray:
    if len(rho.space) != 1:
        raise FockError("Wigner functions are computed for single-mode states only")
    m = rho.entries
    if abs(m[-1, -1]) > EDGE_POPULATION_MAX:
        raise FockError(
            f"population {abs(m[-1, -1]):.2e} at the truncation edge; increase n_max"
        )
    return m


def wigner(rho: DensityMatrix, x=None, p=None) -> WignerGrid:
    """Wigner function on a rectangular grid (default [-6, 6]^2, 241 x 241)."""
    m = _check_single_mode(rho)
    x = default_axis() if x is None else np.asarray(x, dtype=float)
    p = default_axis() if p is None else np.asarray(p, dtype=float)
    X, P = np.meshgrid(x, p)
    alpha = (X + 1j * P) / 2
    return WignerGrid(x, p, _wigner_recursive(m, alpha))


def _wigner_recursive(rho: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    # w[n] holds the Wigner function of |m><n| for the current row m; upper triangle only,
    # the lower half enters through 2 Re.
    d = rho.shape[0]
    a2 = 2 * alpha
    a2c = np.conj(a2)
    w = [None] * d
    w[0] = (2 / np.pi) * np.exp(-2 * np.abs(alpha) ** 2).astype(complex)
    total = rho[0, 0].real * w[0].real
    for n in range(1, d):
        w[n] = a2 * w[n - 1] / np.sqrt(n)
        total += 2 * np.real(rho[0, n] * w[n])
    for m in range(1, d):
        prev = w[m]
        w[m] = (a2c * prev - np.sqrt(m) * w[m - 1]) / np.sqrt(m)
        total += rho[m, m].real * w[m].real
        for n in range(m + 1, d):
            nxt = (a2 * w[n - 1] - np.sqrt(m) * prev) / np.sqrt(n)
            prev = w[n]
            w[n] = nxt
            total += 2 * np.real(rho[m, n] * w[n])
    return total


def displacement(alpha: complex, dim: int) -> np.ndarray:
    """D(alpha) = exp(alpha a^dagger - alpha* a) on ``dim`` levels via the spectrum of the generator."""
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)
    gen = alpha * a.T - np.conj(alpha) * a
    # gen is anti-Hermitian; exponentiate i * Hermitian
    lam, v = np.linalg.eigh(-1j * gen)
    return (v * np.exp(1j * lam)) @ v.conj().T


def wigner_displaced_parity(rho: DensityMatrix, x, p) -> np.ndarray:
    """Direct (slow) evaluation of (2/pi) Tr[rho D Parity D^dagger] on a padded workspace."""
    m = _check_single_mode(rho)
    d = m.shape[0]
    big = d + DISPLACEMENT_PAD
    padded = np.zeros((big, big), dtype=complex)
    padded[:d, :d] = m
    parity = (-1.0) ** np.arange(big)
    out = np.empty((len(p), len(x)))
    for i, pv in enumerate(p):
        for j, xv in enumerate(x):
            D = displacement((xv + 1j * pv) / 2, big)
            shifted = D.conj().T @ padded @ D
            out[i, j] = (2 / np.pi) * np.real(np.sum(parity * np.diag(shifted)))
    return out


def negative_regions(grid: WignerGrid, threshold: float | None = None) -> int:
    """Number of 4-connected components with W < threshold.

    ``threshold`` defaults to -1e-2 times the peak |W|.
    """
    if threshold is None:
        threshold = -REGION_THRESHOLD * grid.peak()
    if threshold >= 0:
        raise FockError("threshold must be negative")
    _, count = ndimage.label(grid.values < threshold)
    return int(count)
