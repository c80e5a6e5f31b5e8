import math

import numpy as np
import pytest

from kerrgate.fockcore import (
    DensityMatrix,
    FockError,
    FockSpace,
    Ket,
    OperatorMatrix,
    coherent_ket,
    fock_ket,
)
from kerrgate.gatesynth import KerrSpec, repeated_conditional, target_unitary, cycle_eigenvalues
from kerrgate.metrics import (
    MomentData,
    WignerGrid,
    conditional_fidelity,
    deterministic_fidelity,
    fidelity_scaling_probe,
    gaussian_negativity,
    negative_regions,
    negativity,
    qfqs_diagonal,
    quadrature_moments,
    self_kerr_model_deficit,
    success_deficit,
    success_probability,
    support_bound,
    wigner,
    wigner_displaced_parity,
)


def tmsv(r, n_max):
    t = math.tanh(r)
    v = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    for n in range(n_max + 1):
        v[n, n] = (-t) ** n / math.cosh(r)
    v = v.ravel() / np.linalg.norm(v)
    return Ket(FockSpace((n_max + 1, n_max + 1)), v).dm()


def tmsv_covariance(r):
    c, s = math.cosh(2 * r), math.sinh(2 * r)
    return np.array([[c, 0, -s, 0], [0, c, 0, s], [-s, 0, c, 0], [0, s, 0, c]])


def product(*kets):
    amps = kets[0].amplitudes
    for k in kets[1:]:
        amps = np.kron(amps, k.amplitudes)
    return Ket(FockSpace(tuple(len(k.amplitudes) for k in kets)), amps)


class TestFidelities:
    def test_unitary_success(self):
        psi, _ = coherent_ket(1.0, 15)
        u = OperatorMatrix.from_diagonal(psi.space, np.exp(1j * np.arange(16) ** 2))
        assert success_probability(psi, u) == pytest.approx(1.0, abs=1e-14)

    def test_vacuum_kerr(self):
        spec = KerrSpec("self", 0.8, 0.02, 10).gate_spec()
        assert success_probability(fock_ket(0, 10), repeated_conditional(spec)) == 1.0

    def test_self_kerr_success_high(self):
        psi, _ = coherent_ket(1.0, 25)
        spec = KerrSpec("self", 0.8, 0.02, 25).gate_spec()
        assert success_probability(psi, repeated_conditional(spec)) >= 0.999

    def test_identical_ops(self):
        psi, _ = coherent_ket(0.8, 15)
        spec = KerrSpec("self", 0.4, 0.05, 15).gate_spec()
        ot = target_unitary(spec)
        assert conditional_fidelity(psi, ot, ot) == pytest.approx(1.0, abs=1e-14)

    def test_global_phase_invariance(self):
        psi, _ = coherent_ket(1.0, 15)
        spec = KerrSpec("self", 0.4, 0.05, 15).gate_spec()
        ot = target_unitary(spec)
        rotated = OperatorMatrix(ot.space, np.exp(0.77j) * repeated_conditional(spec).entries)
        assert conditional_fidelity(psi, ot, rotated) == pytest.approx(
            conditional_fidelity(psi, ot, repeated_conditional(spec)), abs=1e-14
        )

    def test_requires_unitary_target(self):
        psi, _ = coherent_ket(1.0, 10)
        spec = KerrSpec("self", 0.4, 0.05, 10).gate_spec()
        with pytest.raises(FockError):
            conditional_fidelity(psi, repeated_conditional(spec), repeated_conditional(spec))

    def test_pure_overlap(self):
        psi, _ = coherent_ket(0.5, 10)
        assert deterministic_fidelity(psi.dm(), psi) == pytest.approx(1.0, abs=1e-14)


class TestQualityFactors:
    def test_null_eigenvalue(self):
        q = qfqs_diagonal(0.0, 3.7, 0.05, 400)
        assert q.qf == 1 and q.qs == 1 and q.qs_expansion == 1

    def test_identity_fuzz(self):
        rng = np.random.default_rng(2024)
        ma = rng.uniform(-5, 5, 1000)
        mb = rng.uniform(-5, 5, 1000)
        tau = rng.uniform(1e-3, 0.2, 1000)
        R = rng.integers(1, 3000, 1000)
        for a, b, t, r in zip(ma, mb, tau, R):
            q = qfqs_diagonal(a, b, t, int(r))
            assert abs(q.qs - abs(q.qf) ** 2) < 1e-14

    def test_identity_long_sequences(self):
        rng = np.random.default_rng(7)
        for a, b, r in zip(rng.uniform(-5, 5, 200), rng.uniform(-5, 5, 200), rng.integers(100, 5000, 200)):
            q = qfqs_diagonal(a, b, 0.02, int(r))
            assert abs(q.qs - abs(q.qf) ** 2) < 1e-14

    def test_expansion_paper_point(self):
        q = qfqs_diagonal(1, 1, 0.02, 1000)
        model = 1 - q.qs_expansion
        assert model == pytest.approx(5.12e-7, rel=1e-12)
        exact = success_deficit(1, 1, 0.02, 1000)
        assert abs(exact - model) / exact < 0.1
        assert 1 - q.qs == pytest.approx(exact, rel=1e-6)

    def test_stable_deficit_matches_direct(self):
        o1, _ = cycle_eigenvalues(1.7, 2.3, 0.15)
        direct = 1 - abs(o1) ** (2 * 7)
        assert success_deficit(1.7, 2.3, 0.15, 7) == pytest.approx(direct, rel=1e-10)


class TestSupportBound:
    def test_unit(self):
        assert support_bound(1, 1, 1) == 1.0

    def test_self_kerr_numbers(self):
        assert support_bound(0.8e-4, 1000, 0.8) == pytest.approx(156.25 ** (1 / 6))
        assert support_bound(0.8e-4, 1000, 0.8) == pytest.approx(2.32, abs=5e-3)

    def test_cube_root_in_R(self):
        assert support_bound(1e-3, 8000, 1) / support_bound(1e-3, 1000, 1) == pytest.approx(2.0)


class TestScalingProbe:
    def test_model_value(self):
        assert self_kerr_model_deficit(1, 0.8, 1000) == pytest.approx(4.608e-6)

    def test_doubling_R(self):
        rows = fidelity_scaling_probe(1.0, 0.8, [1000, 2000])
        assert 3 <= rows[0].deficit / rows[1].deficit <= 5
        assert rows[0].model == pytest.approx(4.608e-6)
        assert rows[0].tau == pytest.approx(0.02)


class TestWigner:
    def test_vacuum(self):
        grid = wigner(fock_ket(0, 10).dm())
        assert grid.at(0, 0) == pytest.approx(2 / math.pi, abs=1e-12)
        assert grid.values.min() >= -1e-9
        assert grid.resolution == (241, 241)

    def test_fock_one(self):
        grid = wigner(fock_ket(1, 10).dm())
        assert grid.at(0, 0) == pytest.approx(-2 / math.pi, abs=1e-12)

    def test_coherent_analytic(self):
        psi, _ = coherent_ket(1.0, 25)
        grid = wigner(psi.dm())
        X, P = np.meshgrid(grid.x, grid.p)
        analytic = (2 / math.pi) * np.exp(-((X - 2) ** 2 + P**2) / 2)
        assert np.max(np.abs(grid.values - analytic)) < 1e-6
        i, j = np.unravel_index(np.argmax(grid.values), grid.values.shape)
        assert (grid.x[j], grid.p[i]) == pytest.approx((2.0, 0.0))

    def test_coherent_phase_direction(self):
        psi, _ = coherent_ket(1j, 25)
        grid = wigner(psi.dm())
        assert grid.at(0, 2) == pytest.approx(2 / math.pi, abs=1e-9)

    @pytest.mark.parametrize("state", ["vac", "coh", "kerr", "mixed"])
    def test_normalization(self, state):
        if state == "vac":
            rho = fock_ket(0, 25).dm()
        elif state == "coh":
            rho = coherent_ket(1.0, 25)[0].dm()
        elif state == "kerr":
            psi, _ = coherent_ket(1.0, 25)
            v = np.exp(1j * 0.8 * np.arange(26) ** 2) * psi.amplitudes
            rho = Ket(psi.space, v).dm()
        else:
            m = 0.5 * fock_ket(2, 25).dm().entries + 0.5 * fock_ket(5, 25).dm().entries
            rho = DensityMatrix(FockSpace((26,)), m)
        assert wigner(rho).integral() == pytest.approx(1.0, abs=1e-3)

    def test_displaced_parity_oracle(self):
        rng = np.random.default_rng(8)
        v = (rng.normal(size=12) + 1j * rng.normal(size=12)) * np.exp(-0.4 * np.arange(12))
        v[-1] = 0
        rho = Ket(FockSpace((12,)), v / np.linalg.norm(v)).dm()
        x = np.linspace(-3, 3, 7)
        p = np.linspace(-2.5, 2.5, 5)
        fast = wigner(rho, x, p).values
        slow = wigner_displaced_parity(rho, x, p)
        np.testing.assert_allclose(fast, slow, atol=1e-8)

    def test_edge_population_rejected(self):
        with pytest.raises(FockError):
            wigner(fock_ket(6, 6).dm())

    def test_two_mode_rejected(self):
        with pytest.raises(FockError):
            wigner(tmsv(0.1, 3))


class TestNegativeRegions:
    def _grid(self, values):
        x = np.arange(values.shape[1], dtype=float)
        p = np.arange(values.shape[0], dtype=float)
        return WignerGrid(x, p, values)

    def test_positive(self):
        assert negative_regions(self._grid(np.ones((5, 5)))) == 0

    def test_four_connectivity(self):
        v = np.ones((5, 5))
        v[1, 1] = -1
        v[2, 2] = -1  # diagonal neighbour: separate under 4-connectivity
        v[3, 3] = -1
        v[3, 4] = -1
        assert negative_regions(self._grid(v)) == 3

    def test_threshold_filters_dust(self):
        v = np.ones((5, 5))
        v[0, 0] = -1e-6
        v[4, 4] = -0.5
        assert negative_regions(self._grid(v)) == 1
        assert negative_regions(self._grid(v), threshold=-1e-7) == 2

    def test_threshold_sign(self):
        with pytest.raises(FockError):
            negative_regions(self._grid(np.ones((3, 3))), threshold=0.1)

    def test_fock_one_single_region(self):
        assert negative_regions(wigner(fock_ket(1, 8).dm())) == 1


class TestNegativity:
    def test_product(self):
        a, _ = coherent_ket(1.0, 12)
        b, _ = coherent_ket(0.5j, 12)
        assert negativity(product(a, b).dm()) == pytest.approx(0, abs=1e-12)

    def test_bell(self):
        v = np.array([1, 0, 0, 1]) / math.sqrt(2)
        assert negativity(Ket(FockSpace((2, 2)), v).dm()) == pytest.approx(0.5)

    def test_control_z_target(self):
        v = np.array([1, 1, 1, -1]) / 2
        assert negativity(Ket(FockSpace((2, 2)), v).dm()) == pytest.approx(0.5)

    def test_local_unitary_invariance(self):
        rng = np.random.default_rng(5)
        d = 5
        v = rng.normal(size=d * d) + 1j * rng.normal(size=d * d)
        rho = Ket(FockSpace((d, d)), v / np.linalg.norm(v)).dm()
        base = negativity(rho)
        for _ in range(3):
            th1, th2 = rng.uniform(0, 2 * math.pi, 2)
            u = np.kron(np.diag(np.exp(1j * th1 * np.arange(d))), np.diag(np.exp(1j * th2 * np.arange(d))))
            rotated = DensityMatrix(rho.space, u @ rho.entries @ u.conj().T)
            assert abs(negativity(rotated) - base) < 1e-9


class TestMoments:
    def test_vacuum(self):
        m = quadrature_moments(product(fock_ket(0, 4), fock_ket(0, 4)).dm())
        np.testing.assert_allclose(m.mean, 0, atol=1e-15)
        np.testing.assert_allclose(m.covariance, np.eye(4), atol=1e-15)

    def test_coherent_vacuum(self):
        a, _ = coherent_ket(1.0, 20)
        m = quadrature_moments(product(a, fock_ket(0, 20)).dm())
        np.testing.assert_allclose(m.mean, [2, 0, 0, 0], atol=1e-12)
        np.testing.assert_allclose(m.covariance, np.eye(4), atol=1e-10)

    def test_coherent_imaginary(self):
        a, _ = coherent_ket(0.5j, 15)
        m = quadrature_moments(product(fock_ket(0, 15), a).dm())
        np.testing.assert_allclose(m.mean, [0, 0, 0, 1], atol=1e-12)

    def test_tmsv_covariance(self):
        m = quadrature_moments(tmsv(0.5, 20))
        np.testing.assert_allclose(m.covariance, tmsv_covariance(0.5), atol=1e-8)
        assert m.satisfies_uncertainty()

    def test_fock_one_variance(self):
        m = quadrature_moments(product(fock_ket(1, 5), fock_ket(0, 5)).dm())
        assert m.covariance[0, 0] == pytest.approx(3.0)
        assert m.covariance[1, 1] == pytest.approx(3.0)


class TestGaussianNegativity:
    def test_vacuum(self):
        assert gaussian_negativity(MomentData(np.zeros(4), np.eye(4))) == pytest.approx(0, abs=1e-15)

    @pytest.mark.parametrize("r", [0.2, 0.5, 0.8])
    def test_tmsv_formula(self, r):
        ng = gaussian_negativity(MomentData(np.zeros(4), tmsv_covariance(r)))
        assert ng == pytest.approx((math.exp(2 * r) - 1) / 2, abs=1e-12)

    def test_tmsv_value(self):
        assert (math.exp(1) - 1) / 2 == pytest.approx(0.859, abs=1e-3)

    @pytest.mark.parametrize("r", [0.2, 0.5, 0.8])
    def test_fock_brute_force_oracle(self, r):
        rho = tmsv(r, 30)
        assert abs(negativity(rho) - gaussian_negativity(quadrature_moments(rho))) < 1e-4

    def test_unphysical(self):
        with pytest.raises(FockError):
            gaussian_negativity(MomentData(np.zeros(4), 0.5 * np.eye(4)))
