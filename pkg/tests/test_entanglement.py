import math

import numpy as np
import pytest

from weylring import core, entanglement as ent, tomography as tomo, topology as topo

KAPPA = 5.0


def random_state(rng):
    v = rng.normal(size=4)
    v = (v[:2] + 1j * v[2:]) / np.linalg.norm(v)
    return core.SingleExcState.from_vector(v)


def wootters_oracle(rho):
    """Direct eigenvalue computation of the spin-flip construction."""
    sysy = np.kron(tomo.PAULI["Y"], tomo.PAULI["Y"])
    rho_tilde = sysy @ rho.conj() @ sysy
    evals = np.sort(np.abs(np.linalg.eigvals(rho @ rho_tilde).real))[::-1]
    mus = np.sqrt(evals)
    return max(0.0, mus[0] - mus[1] - mus[2] - mus[3])


class TestPureConcurrence:
    def test_product_state(self):
        assert ent.concurrence_pure(core.EXCITED) == 0.0
        assert ent.concurrence_pure(core.PHOTON) == 0.0

    def test_bell_state(self):
        s = core.SingleExcState(1 / math.sqrt(2), 1j / math.sqrt(2))
        assert ent.concurrence_pure(s) == pytest.approx(1.0)

    def test_matches_mixed_on_projectors(self):
        rng = np.random.default_rng(20)
        for _ in range(100):
            s = random_state(rng)
            pure = ent.concurrence_pure(s)
            mixed = ent.concurrence_mixed(tomo.embed_two_qubit(s))
            assert abs(pure - mixed) < 1e-10

    def test_phase_invariance_of_eigenvector_concurrence(self):
        rng = np.random.default_rng(21)
        for _ in range(30):
            lam = complex(rng.normal(), rng.normal()) * 2
            p = core.SystemParams(lam, rng.normal(), KAPPA)
            if core.ep_distance(p) < 1e-3 * KAPPA:
                continue
            chi = rng.uniform(0, 2 * np.pi)
            p2 = core.SystemParams(lam * np.exp(1j * chi), p.detuning, KAPPA)
            e1 = ent.concurrence_pure(core.eigensystem(p).u1_r)
            e2 = ent.concurrence_pure(core.eigensystem(p2).u1_r)
            assert e1 == pytest.approx(e2, abs=1e-12)


class TestMixedConcurrence:
    def bell_rho(self):
        b = np.zeros(4, dtype=complex)
        b[1] = b[2] = 1 / math.sqrt(2)
        return np.outer(b, b.conj())

    def test_maximally_mixed(self):
        assert ent.concurrence_mixed(np.eye(4) / 4) == 0.0

    def test_werner_pure_limit(self):
        assert ent.concurrence_mixed(self.bell_rho()) == pytest.approx(1.0, abs=1e-12)

    def test_werner_half(self):
        # max(0, (3p-1)/2) at p = 0.5, from the direct eigen-computation
        w = 0.5 * self.bell_rho() + 0.5 * np.eye(4) / 4
        assert ent.concurrence_mixed(w) == pytest.approx(0.25, abs=1e-12)
        assert wootters_oracle(w) == pytest.approx(0.25, abs=1e-8)

    def test_against_oracle_on_random_states(self):
        rng = np.random.default_rng(22)
        for _ in range(50):
            a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            rho = a @ a.conj().T
            rho /= np.trace(rho).real
            assert ent.concurrence_mixed(rho) == pytest.approx(wootters_oracle(rho), abs=1e-7)

    def test_range(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            rho = a @ a.conj().T
            rho /= np.trace(rho).real
            assert 0.0 <= ent.concurrence_mixed(rho) <= 1.0

    def test_invalid_rho(self):
        with pytest.raises(ValueError):
            ent.concurrence_mixed(np.diag([0.7, 0.7, -0.2, -0.2]).astype(complex))


class TestCurves:
    def test_closed_form_verified_against_eigenvector_oracle(self):
        # verify min(1, 4*(center - r)/kappa) against brute concurrence of
        # the analytic eigenvectors before trusting it as the reference
        radii = np.linspace(0.02, 0.49, 48) * KAPPA
        from_eig = []
        for r in radii:
            p = core.SystemParams(KAPPA / 2 - r, 0.0, KAPPA)
            if core.ep_distance(p) > 1e-6:
                es = core.eigensystem(p)
                e1 = ent.concurrence_pure(es.u1_r)
                e2 = ent.concurrence_pure(es.u2_r)
                assert abs(e1 - e2) < 1e-9
                from_eig.append((r, e1))
        for r, e in from_eig:
            assert e == pytest.approx(ent.e_pi_reference([r], KAPPA)[0], abs=1e-12)
        assert np.abs(
            ent.e_pi_vs_radius(radii, KAPPA) - ent.e_pi_reference(radii, KAPPA)
        ).max() < 1e-12

    def test_pinned_above_ring_and_decreasing_after(self):
        radii = np.linspace(0.02, 0.48, 100) * KAPPA
        e = ent.e_pi_vs_radius(radii, KAPPA)
        below = radii < KAPPA / 4
        assert np.abs(e[below] - 1.0).max() < 1e-12
        after = e[~below]
        assert np.all(np.diff(after) < 0)

    def test_concurrence_vs_phi_trivial_loop(self):
        # B_r/2pi = 0.18 MHz: the whole loop stays above the ring
        spec = topo.standard_loop(KAPPA, 2 * math.pi * 0.18, steps=64)
        curve = ent.concurrence_vs_phi(spec, 1, KAPPA)
        i0 = 0
        i_pi = int(np.argmin(np.abs(curve.phi_values - math.pi)))
        assert curve.e_values[i0] == pytest.approx(1.0, abs=1e-6)
        assert curve.e_values[i_pi] == pytest.approx(1.0, abs=1e-6)

    def test_concurrence_vs_phi_topological_loop(self):
        # B_r/2pi = 0.34 MHz: phi = pi dips below the ring
        r = 2 * math.pi * 0.34
        spec = topo.standard_loop(KAPPA, r, steps=64)
        for mode in (1, 2):
            curve = ent.concurrence_vs_phi(spec, mode, KAPPA)
            i_pi = int(np.argmin(np.abs(curve.phi_values - math.pi)))
            assert curve.e_values[0] == pytest.approx(1.0, abs=1e-6)
            expected = 4 * (KAPPA / 2 - r) / KAPPA
            assert curve.e_values[i_pi] == pytest.approx(expected, abs=1e-9)
            assert curve.e_values[i_pi] < 1.0

    def test_modes_agree_at_zero_detuning_points(self):
        spec = topo.standard_loop(KAPPA, 0.34 * KAPPA, steps=64)
        c1 = ent.concurrence_vs_phi(spec, 1, KAPPA)
        c2 = ent.concurrence_vs_phi(spec, 2, KAPPA)
        for idx in (0, 32, 64):  # phi = 0, pi, 2*pi
            assert c1.e_values[idx] == pytest.approx(c2.e_values[idx], abs=1e-9)

    def test_kink_slopes(self):
        h = 1e-6 * KAPPA
        r0 = KAPPA / 4
        left = (ent.e_pi_vs_radius([r0 - h], KAPPA)[0] - ent.e_pi_vs_radius([r0 - 2 * h], KAPPA)[0]) / h
        right = (ent.e_pi_vs_radius([r0 + 2 * h], KAPPA)[0] - ent.e_pi_vs_radius([r0 + h], KAPPA)[0]) / h
        assert left == pytest.approx(0.0, abs=1e-6)
        assert right - left == pytest.approx(-4.0 / KAPPA, rel=0.01)

    def test_radius_bounds(self):
        with pytest.raises(ValueError):
            ent.e_pi_vs_radius([0.6 * KAPPA], KAPPA)  # beyond the loop center
