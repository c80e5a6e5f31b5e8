"""Seeded invariant sweeps across all modules, reported as pass/fail per property."""

from __future__ import annotations

import math

import numpy as np

from ..channels import LossSpec, deterministic_step, evolve, loss_kraus
from ..fockcore import DensityMatrix, FockSpace, Ket, OperatorMatrix, coherent_ket, partial_trace, qubit_ground
from ..gatesynth import (
    GateSpec,
    KerrSpec,
    conditional_ops,
    geometric_cycle,
    geometric_cycle_closed_form,
    repeated_conditional,
    target_unitary,
)
from ..metrics import (
    conditional_fidelity,
    deterministic_fidelity,
    gaussian_negativity,
    negativity,
    qfqs_diagonal,
    quadrature_moments,
    success_deficit,
    success_deficit_expansion,
    success_probability,
    wigner,
    wigner_displaced_parity,
)


def _random_diagonal_pair(rng, d):
    space = FockSpace((d,))
    A = OperatorMatrix.from_diagonal(space, rng.uniform(-3, 3, d), hermitian=True)
    B = OperatorMatrix.from_diagonal(space, rng.uniform(-3, 3, d), hermitian=True)
    return A, B


def _random_dense_pair(rng, d):
    """Commuting hermitian pair sharing a random eigenbasis."""
    q, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    space = FockSpace((d,))
    a = q @ np.diag(rng.uniform(-2, 2, d)) @ q.conj().T
    b = q @ np.diag(rng.uniform(-2, 2, d)) @ q.conj().T
    herm = lambda m: OperatorMatrix(space, 0.5 * (m + m.conj().T), hermitian=True)
    return herm(a), herm(b)


def _random_state(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = g @ g.conj().T
    return DensityMatrix(FockSpace((d,)), m / np.trace(m).real)


def _tmsv(r, n_max):
    t = math.tanh(r)
    v = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    for n in range(n_max + 1):
        v[n, n] = (-t) ** n
    v = v.ravel() / np.linalg.norm(v)
    return Ket(FockSpace((n_max + 1, n_max + 1)), v).dm()


def cycle_closed_form(rng) -> float:
    worst = 0.0
    for _ in range(20):
        A, B = _random_diagonal_pair(rng, int(rng.integers(2, 8)))
        spec = GateSpec(A, B, float(rng.uniform(0.01, 0.5)), 1)
        diff = geometric_cycle(spec).entries - geometric_cycle_closed_form(spec).entries
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst


def kraus_completeness(rng) -> float:
    worst = 0.0
    for pair in (_random_diagonal_pair, _random_dense_pair):
        for _ in range(10):
            A, B = pair(rng, int(rng.integers(2, 7)))
            o1, o2 = conditional_ops(GateSpec(A, B, float(rng.uniform(0.01, 0.5)), 1))
            total = o1.entries.conj().T @ o1.entries + o2.entries.conj().T @ o2.entries
            worst = max(worst, float(np.max(np.abs(total - np.eye(A.space.dim)))))
    return worst


def map_vs_full_space(rng) -> float:
    worst = 0.0
    g = qubit_ground().dm().entries
    for pair in (_random_diagonal_pair, _random_dense_pair):
        for _ in range(5):
            d = int(rng.integers(2, 6))
            A, B = pair(rng, d)
            spec = GateSpec(A, B, float(rng.uniform(0.01, 0.5)), 1)
            rho = _random_state(rng, d)
            o1, o2 = conditional_ops(spec)
            fast = deterministic_step(rho, o1, o2).entries
            U = geometric_cycle(spec).entries
            full = U @ np.kron(g, rho.entries) @ U.conj().T
            joint = DensityMatrix(FockSpace((2, d)), 0.5 * (full + full.conj().T))
            slow = partial_trace(joint, [1]).entries
            worst = max(worst, float(np.max(np.abs(fast - slow))))
    return worst


def quality_factor_identity(rng) -> float:
    worst = 0.0
    for _ in range(1000):
        m_a, m_b = rng.uniform(-5, 5, 2)
        q = qfqs_diagonal(m_a, m_b, float(rng.uniform(1e-3, 0.2)), int(rng.integers(1, 3000)))
        worst = max(worst, abs(q.qs - abs(q.qf) ** 2))
    return worst


def success_expansion(rng) -> float:
    """Worst relative error of the leading-order success deficit (tau <= 0.02, |m| <= 2)."""
    worst = 0.0
    for _ in range(1000):
        m_a, m_b = rng.uniform(0.05, 2, 2)
        tau = float(rng.uniform(1e-3, 0.02))
        R = int(rng.integers(1, 2500))
        exact = float(success_deficit(m_a, m_b, tau, R))
        model = float(success_deficit_expansion(m_a, m_b, tau, R))
        worst = max(worst, abs(model - exact) / exact)
    return worst


def damping_mean_photon(rng) -> float:
    worst = 0.0
    n_max = 10
    n = np.arange(n_max + 1)
    for _ in range(10):
        eta = float(rng.uniform(0.05, 1))
        rho = _random_state(rng, n_max + 1).entries
        out = sum(k.entries @ rho @ k.entries.conj().T for k in loss_kraus(eta, n_max))
        before = float(np.dot(n, np.diag(rho).real))
        after = float(np.dot(n, np.diag(out).real))
        worst = max(worst, abs(after - eta * before))
    return worst


def damping_coherent(rng) -> float:
    worst = 0.0
    for _ in range(5):
        beta = complex(*rng.uniform(-1.2, 1.2, 2))
        eta = float(rng.uniform(0.1, 1))
        psi, _ = coherent_ket(beta, 30)
        rho = psi.dm().entries
        out = sum(k.entries @ rho @ k.entries.conj().T for k in loss_kraus(eta, 30))
        ref, _ = coherent_ket(math.sqrt(eta) * beta, 30)
        worst = max(worst, float(np.max(np.abs(out - ref.dm().entries))))
    return worst


def tmsv_gaussian_negativity(rng) -> float:
    worst = 0.0
    for r in (0.2, 0.5, 0.8):
        rho = _tmsv(r, 30)
        worst = max(worst, abs(negativity(rho) - gaussian_negativity(quadrature_moments(rho))))
    return worst


def fidelity_lower_bound(rng) -> float:
    """min over lossless runs of F - P_s F_c (must be >= 0)."""
    worst = math.inf
    for kind, T, R, n_max in (("self", 0.4, 20, 12), ("self", 0.8, 50, 14), ("cross", 1.0, 40, 6)):
        spec = KerrSpec.from_repetitions(kind, T, R, n_max).gate_spec()
        if kind == "self":
            psi, _ = coherent_ket(complex(*rng.uniform(-1, 1, 2)), n_max)
        else:
            a, _ = coherent_ket(0.5, n_max)
            psi = Ket(spec.space, np.kron(a.amplitudes, a.amplitudes))
        OT, OR = target_unitary(spec), repeated_conditional(spec)
        rho, _ = evolve(psi.dm(), spec, track_success=False)
        F = deterministic_fidelity(rho, Ket(spec.space, OT.entries @ psi.amplitudes))
        worst = min(worst, F - success_probability(psi, OR) * conditional_fidelity(psi, OT, OR))
    return worst


def wigner_oracle(rng) -> float:
    d = 10
    v = (rng.normal(size=d) + 1j * rng.normal(size=d)) * np.exp(-0.5 * np.arange(d))
    v[-1] = 0
    rho = Ket(FockSpace((d,)), v / np.linalg.norm(v)).dm()
    x = np.linspace(-3, 3, 5)
    p = np.linspace(-3, 3, 5)
    return float(np.max(np.abs(wigner(rho, x, p).values - wigner_displaced_parity(rho, x, p))))


def lossy_trace(rng) -> float:
    a, _ = coherent_ket(0.5, 6)
    spec = KerrSpec.from_repetitions("cross", 1.0, 200, 6).gate_spec()
    psi = Ket(spec.space, np.kron(a.amplitudes, a.amplitudes))
    rho, _ = evolve(psi.dm(), spec, LossSpec(0.99, (0, 1)), track_success=False)
    return abs(np.trace(rho.entries).real - 1) + max(0.0, -rho.min_eigenvalue())


# name -> (probe, comparison, threshold)
PROPERTIES = {
    "cycle product equals closed form": (cycle_closed_form, "<=", 1e-12),
    "O1^dag O1 + O2^dag O2 = 1": (kraus_completeness, "<=", 1e-12),
    "deterministic map equals full-space trace": (map_vs_full_space, "<=", 1e-12),
    "Q_s = |Q_f|^2 on 1000 tuples": (quality_factor_identity, "<=", 1e-14),
    "leading success deficit within 10%": (success_expansion, "<=", 0.1),
    "loss scales mean photon number by eta": (damping_mean_photon, "<=", 1e-12),
    "loss maps coherent to coherent": (damping_coherent, "<=", 1e-8),
    "TMSV Gaussian negativity equals Fock negativity": (tmsv_gaussian_negativity, "<=", 1e-4),
    "F >= P_s F_c on lossless runs": (fidelity_lower_bound, ">=", -1e-12),
    "Wigner recursion equals displaced parity": (wigner_oracle, "<=", 1e-8),
    "lossy evolution stays a state": (lossy_trace, "<=", 1e-9),
}


def run_property_suite(seed: int = 0) -> dict[str, dict]:
    """Run every property with a generator derived from ``seed``; returns name -> result."""
    results = {}
    for k, (name, (probe, op, threshold)) in enumerate(PROPERTIES.items()):
        rng = np.random.default_rng([seed, k])
        value = float(probe(rng))
        passed = value <= threshold if op == "<=" else value >= threshold
        results[name] = {"passed": bool(passed), "value": value, "expected": f"{op} {threshold:g}"}
    return results
