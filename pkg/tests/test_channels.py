import math

import numpy as np
import pytest

from kerrgate.channels import (
    LossSpec,
    apply_kraus,
    conditional_evolve,
    deterministic_step,
    evolve,
    evolve_iter,
    loss_kraus,
)
from kerrgate.fockcore import (
    DensityMatrix,
    FockError,
    FockSpace,
    Ket,
    OperatorMatrix,
    coherent_ket,
    fock_ket,
    ladder_ops,
    partial_trace,
    qubit_ground,
)
from kerrgate.gatesynth import (
    GateSpec,
    KerrSpec,
    conditional_ops,
    geometric_cycle,
    repeated_conditional,
    target_unitary,
)
from kerrgate.metrics import conditional_fidelity, deterministic_fidelity


def random_dm(rng, d, rank=3):
    vs = rng.normal(size=(rank, d)) + 1j * rng.normal(size=(rank, d))
    m = sum(np.outer(v, v.conj()) for v in vs)
    return DensityMatrix(FockSpace((d,)), m / np.trace(m).real)


def self_kerr(n_max, tau, R):
    _, n = ladder_ops(n_max)
    return GateSpec(n, n, tau, R)


def brute_force_step(rho, spec):
    """Tr_q[U (|g><g| x rho) U^dagger] on the full qubit x oscillator space."""
    g = qubit_ground().dm().entries
    U = geometric_cycle(spec).entries
    full = U @ np.kron(g, rho.entries) @ U.conj().T
    joint = DensityMatrix(FockSpace((2,) + spec.space.factors), 0.5 * (full + full.conj().T))
    return partial_trace(joint, range(1, 1 + len(spec.space))).entries


class TestLossKraus:
    def test_unit_transmittance(self):
        ks = loss_kraus(1.0, 6)
        assert len(ks) == 1
        np.testing.assert_array_equal(ks[0].entries, np.eye(7))

    @pytest.mark.parametrize("eta", [0.1, 0.5, 0.9, 1 - 5.6e-4])
    def test_completeness(self, eta):
        ks = loss_kraus(eta, 12)
        assert len(ks) == 13
        total = sum(k.entries.conj().T @ k.entries for k in ks)
        np.testing.assert_allclose(total, np.eye(13), atol=1e-12)

    def test_matrix_elements(self):
        eta = 0.7
        ks = loss_kraus(eta, 5)
        assert ks[2].entries[1, 3] == pytest.approx(math.sqrt(3 * eta * (1 - eta) ** 2))

    def test_coherent_to_coherent(self):
        eta, n_max = 0.9, 25
        psi, _ = coherent_ket(1.0, n_max)
        out = apply_kraus(psi.dm().entries, loss_kraus(eta, n_max), 0, (n_max + 1,))
        damped, _ = coherent_ket(math.sqrt(eta), n_max)
        np.testing.assert_allclose(out, damped.dm().entries, atol=1e-8)

    @pytest.mark.parametrize("seed", range(3))
    def test_mean_photon_contracts(self, seed):
        eta, n_max = 0.83, 9
        rho = random_dm(np.random.default_rng(seed), n_max + 1)
        out = apply_kraus(rho.entries, loss_kraus(eta, n_max), 0, (n_max + 1,))
        n = np.arange(n_max + 1)
        before = np.dot(n, rho.populations())
        after = np.dot(n, np.real(np.diag(out)))
        assert after == pytest.approx(eta * before, abs=1e-10)

    def test_two_mode_acts_on_one_factor(self):
        eta, n_max = 0.6, 4
        a = random_dm(np.random.default_rng(1), 5)
        b = random_dm(np.random.default_rng(2), 5)
        joint = np.kron(a.entries, b.entries)
        ks = loss_kraus(eta, n_max)
        out = apply_kraus(joint, ks, 1, (5, 5))
        b_out = apply_kraus(b.entries, ks, 0, (5,))
        np.testing.assert_allclose(out, np.kron(a.entries, b_out), atol=1e-14)

    @pytest.mark.parametrize("eta", [0.0, -0.1, 1.5])
    def test_bad_eta(self, eta):
        with pytest.raises(FockError):
            loss_kraus(eta, 3)


class TestLossSpec:
    def test_lossy_needs_modes(self):
        with pytest.raises(FockError):
            LossSpec(0.9, ())

    def test_default_lossless(self):
        assert LossSpec.none().lossless


class TestDeterministicStep:
    def test_vacuum_fixed(self):
        spec = self_kerr(6, 0.1, 1)
        o1, o2 = conditional_ops(spec)
        vac = fock_ket(0, 6).dm()
        out = deterministic_step(vac, o1, o2)
        np.testing.assert_array_equal(out.entries, vac.entries)

    @pytest.mark.parametrize("seed", range(3))
    def test_matches_brute_force(self, seed):
        spec = self_kerr(8, 0.1, 1)
        rho = random_dm(np.random.default_rng(seed), 9)
        o1, o2 = conditional_ops(spec)
        np.testing.assert_allclose(
            deterministic_step(rho, o1, o2).entries, brute_force_step(rho, spec), atol=1e-12
        )

    def test_cross_kerr_brute_force(self):
        spec = KerrSpec("cross", 0.2, 0.1, 3).gate_spec()
        v = np.random.default_rng(4).normal(size=16) + 0j
        rho = Ket(spec.space, v / np.linalg.norm(v)).dm()
        o1, o2 = conditional_ops(spec)
        np.testing.assert_allclose(
            deterministic_step(rho, o1, o2).entries, brute_force_step(rho, spec), atol=1e-12
        )

    def test_fock_state_unchanged(self):
        spec = self_kerr(6, 0.2, 1)
        o1, o2 = conditional_ops(spec)
        rho = fock_ket(3, 6).dm()
        np.testing.assert_allclose(deterministic_step(rho, o1, o2).entries, rho.entries, atol=1e-15)

    def test_incomplete_pair_rejected(self):
        spec = self_kerr(4, 0.2, 1)
        o1, _ = conditional_ops(spec)
        with pytest.raises(FockError):
            deterministic_step(fock_ket(1, 4).dm(), o1, o1)


class TestEvolve:
    def test_trace_and_validity_long_run(self):
        spec = KerrSpec.from_repetitions("cross", math.pi, 2500, 3).gate_spec()
        v = np.ones(16) / 4
        rho0 = Ket(spec.space, v).dm()
        rho, records = evolve(rho0, spec, LossSpec(0.999, (0, 1)))
        assert abs(np.trace(rho.entries) - 1) < 1e-9
        assert rho.is_physical()
        assert len(records) == 2500
        assert not any(r.renormalized for r in records)

    def test_single_step_trace(self):
        spec = self_kerr(10, 0.05, 1)
        rho = random_dm(np.random.default_rng(0), 11)
        out, _ = evolve(rho, spec, LossSpec(0.95, (0,)))
        assert abs(np.trace(out.entries) - 1) < 1e-12

    def test_records_monotone(self):
        psi, _ = coherent_ket(1.0, 15)
        spec = self_kerr(15, 0.02, 300)
        _, records = evolve(psi.dm(), spec, LossSpec(1 - 5.6e-4, (0,)))
        kept = [r.trace_kept for r in records]
        assert all(b <= a + 1e-15 for a, b in zip(kept, kept[1:]))
        assert all(r.mean_photon[0] >= 0 for r in records)
        assert records[-1].mean_photon[0] == pytest.approx((1 - 5.6e-4) ** 300, rel=1e-10)

    def test_lossless_trace_kept_is_ps(self):
        psi, _ = coherent_ket(1.0, 15)
        spec = self_kerr(15, 0.05, 80)
        _, records = evolve(psi.dm(), spec)
        _, p_s = conditional_evolve(psi, spec)
        assert records[-1].trace_kept == pytest.approx(p_s, abs=1e-12)

    @pytest.mark.parametrize("tau,R", [(0.05, 100), (0.02, 1000), (0.1, 30)])
    def test_deterministic_beats_product_bound(self, tau, R):
        psi, _ = coherent_ket(1.0, 20)
        spec = self_kerr(20, tau, R)
        rho, _ = evolve(psi.dm(), spec)
        OT, OR = target_unitary(spec), repeated_conditional(spec)
        target = Ket(spec.space, OT.entries @ psi.amplitudes)
        _, p_s = conditional_evolve(psi, spec)
        f_c = conditional_fidelity(psi, OT, OR)
        assert deterministic_fidelity(rho, target) >= p_s * f_c - 1e-12

    def test_error_part_decomposition(self):
        psi, _ = coherent_ket(1.0, 15)
        spec = self_kerr(15, 0.05, 120)
        rho, _ = evolve(psi.dm(), spec)
        phi, p_s = conditional_evolve(psi, spec)
        error = rho.entries - p_s * np.outer(phi.amplitudes, phi.amplitudes.conj())
        assert np.trace(error).real == pytest.approx(1 - p_s, abs=1e-12)
        assert np.linalg.eigvalsh(error)[0] >= -1e-12
        assert deterministic_fidelity(rho, phi) >= p_s - 1e-12

    def test_iter_matches_evolve(self):
        psi, _ = coherent_ket(1.0, 10)
        spec = self_kerr(10, 0.05, 20)
        loss = LossSpec(0.99, (0,))
        final, _ = evolve(psi.dm(), spec, loss)
        *_, (rec, raw) = evolve_iter(psi.dm(), spec, loss)
        assert rec.step == 20
        np.testing.assert_allclose(raw, final.entries, atol=1e-15)

    def test_dimension_mismatch(self):
        spec = self_kerr(5, 0.1, 3)
        with pytest.raises(FockError):
            evolve(fock_ket(0, 6).dm(), spec)

    def test_order_swap_is_small(self):
        n_max, tau, eta = 8, 0.1, 0.97
        spec = self_kerr(n_max, tau, 1)
        o1, o2 = conditional_ops(spec)
        ks = loss_kraus(eta, n_max)
        rng = np.random.default_rng(12)
        v = rng.normal(size=9) * np.exp(-np.arange(9))
        rho = Ket(spec.space, v / np.linalg.norm(v)).dm()
        gate_then_loss = apply_kraus(deterministic_step(rho, o1, o2).entries, ks, 0, (9,))
        lossy = apply_kraus(rho.entries, ks, 0, (9,))
        lossy = DensityMatrix(spec.space, 0.5 * (lossy + lossy.conj().T))
        loss_then_gate = deterministic_step(lossy, o1, o2).entries
        assert np.linalg.norm(gate_then_loss - loss_then_gate) < 10 * (1 - eta) * tau**2

    def test_dense_path_matches_diagonal(self):
        spec = self_kerr(6, 0.1, 15)
        dense_n = OperatorMatrix(spec.A.space, spec.A.entries, hermitian=True)
        dense = GateSpec(dense_n, dense_n, 0.1, 15)
        v = np.exp(-0.5 * np.arange(7)) + 0j
        rho0 = Ket(spec.space, v / np.linalg.norm(v)).dm()
        loss = LossSpec(0.9, (0,))
        a, ra = evolve(rho0, spec, loss)
        b, rb = evolve(rho0, dense, loss)
        np.testing.assert_allclose(a.entries, b.entries, atol=1e-12)
        assert ra[-1].trace_kept == pytest.approx(rb[-1].trace_kept, abs=1e-12)


class TestConditionalEvolve:
    def test_vacuum(self):
        spec = self_kerr(5, 0.05, 100)
        out, p_s = conditional_evolve(fock_ket(0, 5), spec)
        assert p_s == 1.0
        np.testing.assert_array_equal(out.amplitudes, fock_ket(0, 5).amplitudes)

    def test_control_z_success(self):
        spec = KerrSpec.from_repetitions("cross", math.pi, 1000, 1).gate_spec()
        psi = Ket(spec.space, np.ones(4) / 2)
        _, p_s = conditional_evolve(psi, spec)
        assert p_s >= 1 - 1e-4

    @pytest.mark.parametrize("seed", range(3))
    def test_eigen_oracle(self, seed):
        rng = np.random.default_rng(seed)
        spec = KerrSpec("cross", 0.5, 0.05, 4).gate_spec()
        v = rng.normal(size=25) + 1j * rng.normal(size=25)
        psi = Ket(spec.space, v / np.linalg.norm(v))
        _, p_s = conditional_evolve(psi, spec)
        ma, mb = spec.A.diag.real, spec.B.diag.real
        expected = 0.0
        for c, x, y in zip(psi.amplitudes, ma, mb):
            o1 = 1 - 2 * math.sin(spec.tau * x) ** 2 * math.sin(spec.tau * y) ** 2 + 0.5j * math.sin(
                2 * spec.tau * x
            ) * math.sin(2 * spec.tau * y)
            expected += abs(c) ** 2 * abs(o1) ** (2 * spec.R)
        assert p_s == pytest.approx(expected, abs=1e-12)

    def test_empty_support(self):
        # tau = pi/4 on m = 1: O_1 = 0.5 + 0.5i, so P_s = 2^-400
        space = FockSpace((2,))
        a = OperatorMatrix.from_diagonal(space, [0.0, 1.0])
        with pytest.raises(FockError):
            conditional_evolve(Ket(space, [0, 1]), GateSpec(a, a, math.pi / 4, 400))
