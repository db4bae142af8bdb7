import math

import numpy as np
import pytest

from weylring import core, dynamics, estimation as est
from weylring.errors import DegenerateBasisError

KAPPA = 5.0


def noiseless_trajectory(p, times):
    out = []
    for t in times:
        st, _ = dynamics.propagate_nojump(p, core.EXCITED, t)
        out.append((t, np.outer(st.vector, st.vector.conj())))
    return out


class TestCalibration:
    def test_noiseless_recovery(self):
        p_true = core.SystemParams(1.2, 0.4, KAPPA)
        times = np.linspace(0.05, 1.2, 16)
        pe = dynamics.excited_population(p_true, times)
        res = est.calibrate_params(list(zip(times, pe)), core.SystemParams(1.0, 0.6, KAPPA))
        assert res.coupling_mag == pytest.approx(1.2, rel=1e-4)
        assert res.detuning == pytest.approx(0.4, abs=1e-4 * 1.2)
        assert res.converged

    def test_symmetric_generator_zero_detuning(self):
        p_true = core.SystemParams(1.0, 0.0, KAPPA)
        times = np.linspace(0.05, 1.5, 20)
        pe = dynamics.excited_population(p_true, times)
        res = est.calibrate_params(list(zip(times, pe)), core.SystemParams(0.8, 0.15, KAPPA))
        assert abs(res.detuning) < 1e-5

    def test_noisy_recovery_typical(self):
        p_true = core.SystemParams(1.2, 0.4, KAPPA)
        times = np.linspace(0.05, 1.2, 16)
        pe = dynamics.excited_population(p_true, times)
        errs = []
        for seed in range(20):
            rng = np.random.default_rng(dynamics.derive_seed(31, seed))
            noisy = rng.binomial(10_000, np.clip(pe, 0, 1)) / 10_000
            res = est.calibrate_params(list(zip(times, noisy)), core.SystemParams(1.0, 0.5, KAPPA))
            errs.append(abs(res.coupling_mag - 1.2) / 1.2)
        assert np.median(errs) < 0.02

    def test_requires_enough_points(self):
        with pytest.raises(ValueError):
            est.calibrate_params([(0.1, 0.5)] * 4, core.SystemParams(1.0, 0.0, KAPPA))


class TestPredictTrajectory:
    def test_initial_condition(self):
        params = est.eigenfit_from_params(core.SystemParams(1.0, 0.3, KAPPA))
        st = est.predict_trajectory(params, 0.0)
        assert abs(st.c_e0) == pytest.approx(1.0, abs=1e-12)

    def test_matches_nojump_on_grid(self):
        p = core.SystemParams(1.0, 0.3, KAPPA)
        params = est.eigenfit_from_params(p)
        for t in np.linspace(0.0, 2.0, 15):
            a = est.predict_trajectory(params, t)
            b, _ = dynamics.propagate_nojump(p, core.EXCITED, t)
            assert 1.0 - est.eigvec_fidelity(a, b) < 1e-10

    def test_hermitian_rabi(self):
        params = est.eigenfit_from_params(core.SystemParams(1.0, 0.0, 0.0))
        for t in np.linspace(0.0, 2.0, 9):
            st = est.predict_trajectory(params, t)
            assert abs(st.c_e0) ** 2 == pytest.approx(np.cos(t) ** 2, abs=1e-10)

    def test_degenerate_basis_rejected(self):
        params = est.EigenFitParams(1.0, 0.0, 0.7, 0.1, 0.7, 0.1)
        with pytest.raises(DegenerateBasisError):
            est.predict_trajectory(params, 0.5)


class TestFitEigensystem:
    def perturbed_guess(self, p):
        fp = est.eigenfit_from_params(p)
        return est.EigenFitParams(
            fp.a1 * 1.15, fp.b1 * 0.9, min(1.0, fp.c1 * 1.1), fp.d1 + 0.2, fp.c2 * 0.9, fp.d2 - 0.15
        )

    def test_noiseless_recovery(self):
        p = core.SystemParams(1.0, 0.3, KAPPA)
        times = est.default_time_grid(p, 24)
        rep = est.fit_eigensystem(noiseless_trajectory(p, times), self.perturbed_guess(p), kappa=KAPPA)
        assert rep.converged
        es = core.eigensystem(p)
        m = est.match_modes(rep.params, es)
        assert est.eigvec_fidelity(m.state(1), es.u1_r) >= 0.999
        assert est.eigvec_fidelity(m.state(2), es.u2_r) >= 0.999
        e1, e2 = est.physical_energies(m, p)
        assert abs(e1 - es.e1) < 1e-3
        assert abs(e2 - es.e2) < 1e-3

    def test_objective_zero_at_truth(self):
        p = core.SystemParams(1.0, 0.3, KAPPA)
        times = est.default_time_grid(p, 24)
        pairs = noiseless_trajectory(p, times)
        rep = est.fit_eigensystem(pairs, est.eigenfit_from_params(p), kappa=KAPPA)
        assert rep.residual == pytest.approx(-1.0, abs=1e-10)
        assert np.all(rep.fidelities > 1.0 - 1e-10)

    def test_swap_guess_invariance(self):
        p = core.SystemParams(1.0, 0.3, KAPPA)
        times = est.default_time_grid(p, 24)
        pairs = noiseless_trajectory(p, times)
        es = core.eigensystem(p)
        for guess in (self.perturbed_guess(p), self.perturbed_guess(p).swapped()):
            rep = est.fit_eigensystem(pairs, guess, kappa=KAPPA)
            m = est.match_modes(rep.params, es)
            assert est.eigvec_fidelity(m.state(1), es.u1_r) >= 0.999

    def test_noisy_fidelity_typical(self):
        # loop geometry (radius 0.34*kappa about bx = kappa/2), where both
        # modes participate in the trajectory and extraction is reliable
        from weylring import tomography as tomo

        delays = tomo.MappingDelays(0.0, 0.118, KAPPA)
        fids = []
        for phi in (0.0, 2 * np.pi / 3, 4 * np.pi / 3):
            r = 0.34 * KAPPA
            p = core.SystemParams(KAPPA / 2 + r * np.cos(phi), 2 * r * np.sin(phi), KAPPA)
            es = core.eigensystem(p)
            times = est.default_time_grid(p, 24)
            for seed in range(3):
                pairs = []
                for i, t in enumerate(times):
                    st, surv = dynamics.propagate_nojump(p, core.EXCITED, t)
                    rho4 = tomo.synthetic_output_state(st, surv, delays)
                    counts = {
                        b: tomo.sample_counts(rho4, b, 10_000, dynamics.derive_seed(61, seed, i, k))
                        for k, b in enumerate(tomo.MEASUREMENT_SETTINGS)
                    }
                    rec = tomo.reconstruct_density(counts_by_setting=counts)
                    block, _ = tomo.project_single_excitation(rec)
                    pairs.append((t, tomo.invert_mapping_density(block, delays)))
                rep = est.fit_eigensystem(pairs, self.perturbed_guess(p), kappa=KAPPA, patience=3)
                m = est.match_modes(rep.params, es)
                fids.append(est.eigvec_fidelity(m.state(1), es.u1_r))
                fids.append(est.eigvec_fidelity(m.state(2), es.u2_r))
        assert np.median(fids) >= 0.99

    def test_small_gap_flagged(self):
        # near the ring the energy gap collapses and the fit self-reports
        p = core.SystemParams(KAPPA / 4 + 0.0005 * KAPPA, 0.0, KAPPA)
        times = est.default_time_grid(p, 24)
        rep = est.fit_eigensystem(noiseless_trajectory(p, times), est.eigenfit_from_params(p), kappa=KAPPA)
        assert rep.params.gap < 0.05 * KAPPA
        assert "small-gap" in rep.flags

    def test_requires_enough_samples(self):
        p = core.SystemParams(1.0, 0.3, KAPPA)
        with pytest.raises(ValueError):
            est.fit_eigensystem(noiseless_trajectory(p, np.linspace(0.1, 1, 8)),
                                est.eigenfit_from_params(p))


class TestEigvecFidelity:
    def test_identical(self):
        s = core.SingleExcState(0.6, 0.8j)
        assert est.eigvec_fidelity(s, s) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert est.eigvec_fidelity(core.EXCITED, core.PHOTON) == 0.0

    def test_global_phase_invariance(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            v = rng.normal(size=4)
            v = (v[:2] + 1j * v[2:]) / np.linalg.norm(v)
            chi = rng.uniform(0, 2 * np.pi)
            assert est.eigvec_fidelity(v, v * np.exp(1j * chi)) == pytest.approx(1.0, abs=1e-12)

    def test_matches_manual_inner_product(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            a = rng.normal(size=4)
            a = (a[:2] + 1j * a[2:]) / np.linalg.norm(a)
            b = rng.normal(size=4)
            b = (b[:2] + 1j * b[2:]) / np.linalg.norm(b)
            manual = abs(np.sum(np.conj(a) * b)) ** 2
            assert est.eigvec_fidelity(a, b) == pytest.approx(manual, abs=1e-14)


class TestGaugeBookkeeping:
    def test_parameterization_round_trip(self):
        p = core.SystemParams(1.3, -0.7, KAPPA)
        fp = est.eigenfit_from_params(p)
        es = core.eigensystem(p)
        assert est.eigvec_fidelity(fp.state(1), es.u1_r) == pytest.approx(1.0, abs=1e-12)
        assert est.eigvec_fidelity(fp.state(2), es.u2_r) == pytest.approx(1.0, abs=1e-12)
        e1, e2 = est.physical_energies(fp, p)
        assert e1 == pytest.approx(es.e1, abs=1e-12)
        assert e2 == pytest.approx(es.e2, abs=1e-12)

    def test_traceless_gauge(self):
        fp = est.eigenfit_from_params(core.SystemParams(1.3, -0.7, KAPPA))
        e1, e2 = fp.energies
        assert e1 + e2 == 0

    def test_default_time_grid(self):
        p = core.SystemParams(1.0, 0.3, KAPPA)
        grid = est.default_time_grid(p, 24)
        assert len(grid) == 24
        es = core.eigensystem(p)
        horizon = min(2 * math.pi / abs((es.e1 - es.e2).real), 4.0 / KAPPA)
        assert grid[-1] == pytest.approx(horizon)
        assert grid[0] > 0

    def test_report_serialization(self):
        import json

        p = core.SystemParams(1.0, 0.3, KAPPA)
        times = est.default_time_grid(p, 24)
        rep = est.fit_eigensystem(noiseless_trajectory(p, times), est.eigenfit_from_params(p), kappa=KAPPA)
        payload = json.loads(json.dumps(rep.to_dict()))
        assert set(payload) == {"params", "residual", "iterations", "converged", "fidelities", "flags"}
        assert set(payload["params"]) == {"a1", "b1", "c1", "d1", "c2", "d2"}
        assert len(payload["fidelities"]) == 24
