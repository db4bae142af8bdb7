"""Acceptance suite: one test per exit criterion, each at its stated
tolerance, printing a PASS/FAIL line (visible under ``pytest -s``)."""

import math
import time

import numpy as np
import pytest
from scipy.optimize import brentq

from weylring import (
    core,
    dynamics,
    entanglement as ent,
    estimation as est,
    pipeline,
    tomography as tomo,
    topology as topo,
)

KAPPA = 5.0


def report(name, ok, detail=""):
    print(f"ACCEPTANCE {'PASS' if ok else 'FAIL'}: {name}" + (f" [{detail}]" if detail else ""))
    assert ok, f"{name}: {detail}"


def circ_dist(a, b):
    return abs(math.remainder(a - b, 2.0 * math.pi))


def test_eigensystem_exactness():
    # 1e4 random points: energies within 1e-12 relative of a dense
    # eigendecomposition, eigenvector fidelities 1 - 1e-12,
    # biorthonormality within 1e-9 away from the ring; under 5 s
    rng = np.random.default_rng(1001)
    t0 = time.monotonic()
    n = 10_000
    worst_e = worst_f = worst_b = 0.0
    for _ in range(n):
        lam = complex(rng.uniform(-2 * KAPPA, 2 * KAPPA), rng.uniform(-2 * KAPPA, 2 * KAPPA))
        p = core.SystemParams(lam, rng.uniform(-2 * KAPPA, 2 * KAPPA), KAPPA)
        if core.ep_distance(p) <= 1e-3 * KAPPA:
            continue
        es = core.eigensystem(p)
        w, v = np.linalg.eig(core.hamiltonian_matrix(p))
        scale = np.abs(w).max()
        for e, u in ((es.e1, es.u1_r), (es.e2, es.u2_r)):
            k = int(np.argmin(np.abs(w - e)))
            worst_e = max(worst_e, abs(w[k] - e) / scale)
            fid = abs(np.vdot(v[:, k] / np.linalg.norm(v[:, k]), u.vector)) ** 2
            worst_f = max(worst_f, 1.0 - fid)
        worst_b = max(worst_b, np.abs(es.left_matrix @ es.right_matrix - np.eye(2)).max())
    elapsed = time.monotonic() - t0
    ok = worst_e < 1e-12 and worst_f < 1e-12 and worst_b < 1e-9 and elapsed < 5.0
    report(
        "eigensystem exactness",
        ok,
        f"energy {worst_e:.2e}, 1-fidelity {worst_f:.2e}, biorth {worst_b:.2e}, {elapsed:.2f}s",
    )


def test_wer_location():
    # root of the (real) discriminant along the zero-detuning ray
    f = lambda lam: core.discriminant(core.SystemParams(lam, 0.0, KAPPA)).real
    root = brentq(f, 0.1, 2.4, xtol=1e-14)
    ok = abs(root - KAPPA / 4.0) < 1e-10 and abs(root - 1.25) < 1e-10
    report("ring location kappa/4", ok, f"|coupling| = {root!r}")


def test_berry_phase_quantization():
    t0 = time.monotonic()
    errs = []
    for frac in (0.30, 0.35, 0.40, 0.427):
        res = topo.berry_phase(topo.standard_loop(KAPPA, frac * KAPPA, steps=512), KAPPA)
        errs.append(max(circ_dist(res.beta1, -math.pi), circ_dist(res.beta2, -math.pi)))
    for frac in (0.10, 0.126, 0.20):
        res = topo.berry_phase(topo.standard_loop(KAPPA, frac * KAPPA, steps=512), KAPPA)
        errs.append(max(circ_dist(res.beta1, 0.0), circ_dist(res.beta2, 0.0)))
    elapsed = time.monotonic() - t0
    ok = max(errs) < 0.01 * math.pi and elapsed < 30.0
    report("geometric-phase quantization", ok, f"worst {max(errs)/math.pi:.4f}*pi, {elapsed:.2f}s")


def test_transition_radius():
    radii = np.array([0.15, 0.20, 0.24, 0.26, 0.30, 0.35]) * KAPPA
    betas = [topo.berry_phase(topo.standard_loop(KAPPA, r, steps=512), KAPPA).beta1 for r in radii]
    res = topo.detect_transition(radii, betas)
    ok = abs(res.critical_radius - KAPPA / 4.0) <= 0.02 * KAPPA
    report(
        "transition radius",
        ok,
        f"critical {res.critical_radius/KAPPA:.3f}*kappa, bracket {res.uncertainty/KAPPA:.3f}*kappa",
    )


def test_chern_numbers():
    t0 = time.monotonic()
    worst = 0.0
    for frac, c_expect in ((0.30, 1.0), (2 * math.pi * 0.33 / KAPPA, 1.0), (0.503, 1.0),
                           (0.151, 0.0), (0.18, 0.0)):
        integ = topo.chern_integral(topo.SphereSpec.uniform(frac * KAPPA, 64, 64), KAPPA)
        merid = topo.chern_meridian(
            topo.SphereSpec.uniform(frac * KAPPA, 16, 8, theta_margin=0.3), KAPPA
        )
        vals_i = sorted(map(float, integ.values))
        vals_m = sorted(merid.values)
        target = sorted((-c_expect, c_expect))
        worst = max(
            worst,
            max(abs(a - b) for a, b in zip(vals_i, target)),
            max(abs(a - b) for a, b in zip(vals_m, target)),
            max(abs(a - b) for a, b in zip(vals_i, vals_m)),
        )
    elapsed = time.monotonic() - t0
    ok = worst < 0.02 and elapsed < 60.0
    report("Chern numbers (both methods)", ok, f"worst dev {worst:.2e}, {elapsed:.2f}s")


def test_eigenvector_flip():
    poles = np.array([0.0, math.pi])
    r = 2 * math.pi * 0.33
    pp = topo.meridian_populations(r, KAPPA, poles)
    flip1 = abs(pp[1, 0] - pp[0, 0])
    flip2 = abs(pp[1, 1] - pp[0, 1])
    r = 2 * math.pi * 0.14
    thetas = np.linspace(1e-3, math.pi - 1e-3, 301)
    pops = topo.meridian_populations(r, KAPPA, thetas)
    start = topo.meridian_populations(r, KAPPA, np.array([0.0]))[0]
    excursion = np.abs(pops - start).max()
    ok = abs(flip1 - 1) < 0.02 and abs(flip2 - 1) < 0.02 and excursion < 0.5
    report(
        "eigenvector flip vs tilt-and-return",
        ok,
        f"flips ({flip1:.3f}, {flip2:.3f}), max excursion {excursion:.3f}",
    )


def test_concurrence():
    r = 2 * math.pi * 0.18
    curve = ent.concurrence_vs_phi(topo.standard_loop(KAPPA, r, steps=64), 1, KAPPA)
    i_pi = int(np.argmin(np.abs(curve.phi_values - math.pi)))
    e0_err = abs(curve.e_values[0] - 1.0)
    epi_err = abs(curve.e_values[i_pi] - 1.0)

    radii = np.linspace(0.01, 0.49, 97) * KAPPA
    closed_err = np.abs(ent.e_pi_vs_radius(radii, KAPPA) - ent.e_pi_reference(radii, KAPPA)).max()

    h = 1e-6 * KAPPA
    r0 = KAPPA / 4.0
    left = (ent.e_pi_vs_radius([r0 - h], KAPPA)[0] - ent.e_pi_vs_radius([r0 - 2 * h], KAPPA)[0]) / h
    right = (ent.e_pi_vs_radius([r0 + 2 * h], KAPPA)[0] - ent.e_pi_vs_radius([r0 + h], KAPPA)[0]) / h
    slope_jump = left - right

    ok = (
        e0_err < 1e-6
        and epi_err < 1e-6
        and closed_err < 1e-6
        and abs(slope_jump - 4.0 / KAPPA) < 0.01 * 4.0 / KAPPA
    )
    report(
        "concurrence curve and kink",
        ok,
        f"E(0)-1 {e0_err:.1e}, E(pi)-1 {epi_err:.1e}, closed-form {closed_err:.1e}, "
        f"slope jump {slope_jump:.5f} vs {4.0/KAPPA:.5f}",
    )


def test_effective_drive_validation():
    t0 = time.monotonic()
    nu = 2 * math.pi * 660.0
    lam_r = 2 * math.pi * 41.0
    omega_0 = 2 * math.pi * 6000.0
    trunc = dynamics.FockTruncation(2)
    worst = 0.0
    for target in (0.05, 0.10, 0.15):
        mu = dynamics.modulation_index_for_fraction(target)
        base = dynamics.DriveParams(lam_r, omega_0 + nu, omega_0, mu * nu, nu)
        tuned = dynamics.find_sideband_resonance(base, trunc)
        lam_eff = dynamics.effective_coupling(tuned)
        period = 2 * math.pi / (2 * lam_eff)
        rec = dynamics.simulate_driven(tuned, trunc, t=1.3 * period, record_stride=8)
        omega = dynamics.extract_rabi_frequency(rec.times, rec.pe, 2 * lam_eff)
        worst = max(worst, abs(omega / (2 * lam_eff) - 1.0))
    elapsed = time.monotonic() - t0
    ok = worst < 0.02 and elapsed < 120.0
    report("vacuum-Rabi vs effective coupling", ok, f"worst rel dev {worst:.4f}, {elapsed:.1f}s")


def test_pipeline_noiseless():
    cfg = pipeline.load_config(
        {
            "mode": "synthetic-noiseless",
            "berry": {"radii_over_kappa": [0.15, 0.20, 0.30, 0.35], "synthetic_steps": 64},
        }
    )
    rows, summary = pipeline.run_berry(cfg)
    fid_min = min(r["mean_fit_fidelity"] for r in rows)
    statuses = {r["status"] for r in rows}
    crit = summary["transitions"][0]["critical_radius"]
    ok = (
        statuses == {"ok"}
        and fid_min >= 0.999
        and abs(crit - KAPPA / 4.0) <= 0.03 * KAPPA
    )
    report(
        "noiseless synthetic pipeline",
        ok,
        f"min fit fidelity {fid_min:.5f}, critical {crit/KAPPA:.3f}*kappa",
    )


def test_pipeline_with_shot_noise():
    # (a) fitted-eigenvector fidelity on the loop validation geometry
    n_seeds = 20
    cfg = pipeline.load_config({"mode": "synthetic-shots", "shots": 10_000})
    fids = []
    r = 0.34 * KAPPA
    for seed in range(n_seeds):
        for j, phi in enumerate((2 * math.pi / 3, 4 * math.pi / 3)):
            p = core.SystemParams(
                KAPPA / 2 + r * math.cos(phi), 2 * r * math.sin(phi), KAPPA
            )
            rep = pipeline.synthetic_point_fit(p, cfg, ("acc-fid", seed, j))
            es = core.eigensystem(p)
            m = est.match_modes(rep.params, es)
            fids.append(est.eigvec_fidelity(m.state(1), es.u1_r))
            fids.append(est.eigvec_fidelity(m.state(2), es.u2_r))
    med = float(np.median(fids))

    # (b) Chern step across seeds
    cfg = pipeline.load_config(
        {
            "mode": "synthetic-shots",
            "shots": 10_000,
            "seeds": n_seeds,
            "workers": 2,
            "chern": {
                "radii_over_kappa": [0.20, 0.23, 0.27, 0.30],
                "meridian_points": 9,
                "n_theta": 16,
                "n_phi": 8,
                "theta_margin": 0.35,
            },
        }
    )
    rows, _, summary = pipeline.run_chern(cfg)
    criticals = [
        t["critical_radius"] for t in summary["transitions"] if t.get("critical_radius")
    ]
    in_range = [abs(c - KAPPA / 4.0) <= 0.10 * KAPPA / 4.0 for c in criticals]
    ok = med >= 0.99 and len(criticals) == n_seeds and all(in_range)
    report(
        "shot-noise synthetic pipeline",
        ok,
        f"median fidelity {med:.4f}, {sum(in_range)}/{n_seeds} seeds within 10% of kappa/4",
    )


def test_dynamics_consistency():
    p = core.SystemParams(1.0, 0.5, KAPPA)
    rho0 = np.zeros((3, 3), dtype=complex)
    rho0[1, 1] = 1.0
    rho = dynamics.evolve_master(rho0, p, 1.0, 2.5e-4)
    st, surv = dynamics.propagate_nojump(p, core.EXCITED, 1.0)
    block = rho[1:, 1:]
    block_dev = np.abs(block / np.trace(block).real - np.outer(st.vector, st.vector.conj())).max()
    weight_dev = abs(np.trace(block).real - surv)
    trace_dev = abs(np.trace(rho).real - 1.0)

    p_j = core.SystemParams(1.0, 0.0, KAPPA)
    n = 10_000
    _, pops, frac = dynamics.jump_ensemble(777, n, core.EXCITED, p_j, 1.0, 0.005)
    ref = dynamics.evolve_master(rho0, p_j, 1.0, 2.5e-4)
    mc_ok = True
    for k in range(3):
        exact = ref[k, k].real
        se = math.sqrt(max(exact * (1 - exact), 1e-12) / n)
        mc_ok = mc_ok and abs(pops[-1, k] - exact) < 3 * se + 5e-3

    ok = block_dev < 1e-7 and weight_dev < 1e-7 and trace_dev < 1e-8 and mc_ok
    report(
        "dynamics consistency",
        ok,
        f"block dev {block_dev:.1e}, trace dev {trace_dev:.1e}, MC within 3 s.e.: {mc_ok}",
    )
