"""Configuration-driven sweeps: analytic references and the synthetic
end-to-end experiment (conditional dynamics -> mapping damping ->
tomography -> reconstruction -> postselection -> eigensystem fit ->
topology / entanglement outputs).

Every run is a pure function of (config, master seed): sampling seeds
are derived per (radius, point, time, setting) with the splitmix-style
mixer, so reruns and any parallel schedule give identical artifacts.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import entanglement, tomography, topology
from .core import EXCITED, SystemParams, eigensystem, params_from_b
from .dynamics import (
    DriveParams,
    FockTruncation,
    derive_seed,
    effective_coupling,
    excited_population,
    extract_rabi_frequency,
    find_sideband_resonance,
    modulation_index_for_fraction,
    propagate_nojump,
    simulate_driven,
)
from .errors import ConfigError, WeylringError
from .estimation import (
    EigenFitParams,
    default_time_grid,
    eigenfit_from_params,
    eigvec_fidelity,
    fit_eigensystem,
)
from .tomography import MappingDelays
from .topology import SphereSpec, loop_points, standard_loop

CSV_SCHEMA = "weylring-csv v1"

MODES = ("analytic", "synthetic-noiseless", "synthetic-shots")

#: trajectory weight below which a fitted mode's meridian population is
#: treated as unmeasurable (the suppressed-mode regime near the poles)
MIN_MODE_WEIGHT = 0.08

DEFAULT_CONFIG = {
    "kappa": 5.0,
    "lambda_r": 2.0 * math.pi * 41.0,
    "mode": "analytic",
    "shots": 10000,
    "seeds": 1,
    "master_seed": 2024,
    "workers": 1,
    "out_dir": "out",
    "mapping": {"t1": 0.0, "t2": 0.118},
    "fit": {"time_points": 24, "restarts": 8, "patience": 3},
    "berry": {
        "radii_over_kappa": [0.10, 0.126, 0.20, 0.24, 0.26, 0.30, 0.35, 0.40, 0.427],
        "steps": 512,
        "synthetic_steps": 64,
    },
    "chern": {
        "radii_over_kappa": [0.151, 0.176, 0.226, 0.276, 0.339, 0.402, 0.503],
        "n_theta": 64,
        "n_phi": 64,
        "meridian_points": 9,
        "theta_margin": 0.35,
    },
    "concurrence": {
        "phi_radii_over_kappa": [0.226, 0.427],
        "phi_steps": 64,
        "epi_radii_over_kappa": [round(0.02 * k, 4) for k in range(1, 25)],
    },
    "drive": {
        "nu": 2.0 * math.pi * 660.0,
        "omega_0": 2.0 * math.pi * 6000.0,
        "j1_targets": [0.05, 0.10, 0.15],
        "n_max": 2,
        "periods": 1.3,
        "steps_per_drive_period": 64,
    },
}


def _merge_validate(user, schema, path=""):
    if not isinstance(user, dict):
        raise ConfigError(f"section '{path or '<root>'}' must be a mapping")
    out = {}
    for key, default in schema.items():
        here = f"{path}.{key}" if path else key
        if key not in user:
            out[key] = json.loads(json.dumps(default))  # deep copy
        elif isinstance(default, dict):
            out[key] = _merge_validate(user[key], default, here)
        else:
            val = user[key]
            if isinstance(default, bool) or default is None:
                out[key] = val
            elif isinstance(default, (int, float)) and not isinstance(val, (int, float)):
                raise ConfigError(f"'{here}' must be a number, got {type(val).__name__}")
            elif isinstance(default, str) and not isinstance(val, str):
                raise ConfigError(f"'{here}' must be a string, got {type(val).__name__}")
            elif isinstance(default, list) and not isinstance(val, list):
                raise ConfigError(f"'{here}' must be a list, got {type(val).__name__}")
            else:
                out[key] = val
    unknown = set(user) - set(schema)
    if unknown:
        raise ConfigError(f"unknown config key(s) at '{path or '<root>'}': {sorted(unknown)}")
    return out


def load_config(source=None) -> dict:
    """Resolve a config mapping (or JSON file path) against the defaults.

    Unknown keys are rejected; missing keys take their defaults.
    """
    if source is None:
        user = {}
    elif isinstance(source, dict):
        user = source
    else:
        with open(source) as f:
            user = json.load(f)
    cfg = _merge_validate(user, DEFAULT_CONFIG)
    if cfg["mode"] not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {cfg['mode']!r}")
    if cfg["kappa"] <= 0:
        raise ConfigError("kappa must be > 0")
    if cfg["shots"] < 1 or cfg["seeds"] < 1 or cfg["workers"] < 1:
        raise ConfigError("shots, seeds and workers must all be >= 1")
    return cfg


def config_hash(cfg: dict) -> str:
    """Short digest of the physics configuration (execution details like
    the output directory and worker count do not change results)."""
    physics = {k: v for k, v in cfg.items() if k not in ("out_dir", "workers")}
    blob = json.dumps(physics, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    v = float(x)
    return "nan" if math.isnan(v) else f"{v:.17g}"


def write_csv(path, command, cfg, seed, columns, rows):
    with open(path, "w") as f:
        f.write(f"# {CSV_SCHEMA} command={command} config={config_hash(cfg)} seed={seed}\n")
        f.write(",".join(columns) + "\n")
        for row in rows:
            f.write(",".join(_fmt(c) for c in row) + "\n")


def write_json(path, payload):
    with open(path, "w") as f:
        json.dump(payload, f, sort_keys=True, indent=2)
        f.write("\n")


# ---------------------------------------------------------------------------
# synthetic single-point experiment


def synthetic_point_fit(p: SystemParams, cfg: dict, seed_path: tuple, guess: EigenFitParams | None = None):
    """Fitted eigensystem at one model point through the full synthetic chain.

    Simulates the conditional trajectory, applies the mapping damping,
    produces the pre-postselection two-qubit state, measures it (exactly
    or with multinomial shot noise), reconstructs, postselects, undoes
    the mapping damping and fits the eigensystem to the corrected
    trajectory.  ``seed_path`` indexes the derived sampling seeds.
    """
    kappa = cfg["kappa"]
    mapping = MappingDelays(cfg["mapping"]["t1"], cfg["mapping"]["t2"], kappa)
    times = default_time_grid(p, cfg["fit"]["time_points"])
    shots = cfg["shots"] if cfg["mode"] == "synthetic-shots" else None
    master = cfg["master_seed"]

    samples = []
    for i, t in enumerate(times):
        state, survival = propagate_nojump(p, EXCITED, t)
        rho4 = tomography.synthetic_output_state(state, survival, mapping)
        if shots is None:
            rec = tomography.reconstruct_density(expectations=tomography.pauli_expectations(rho4))
        else:
            counts = {
                s: tomography.sample_counts(rho4, s, shots, derive_seed(master, *seed_path, i, k))
                for k, s in enumerate(tomography.MEASUREMENT_SETTINGS)
            }
            rec = tomography.reconstruct_density(counts_by_setting=counts)
        try:
            block, _ = tomography.project_single_excitation(rec)
        except tomography.PostselectionError:
            continue
        samples.append((t, tomography.invert_mapping_density(block, mapping)))
    if len(samples) < 12:
        raise WeylringError(f"only {len(samples)} usable time samples at {p}")

    if guess is None:
        guess = eigenfit_from_params(p)
    report = fit_eigensystem(
        samples,
        guess,
        restarts=cfg["fit"]["restarts"],
        rng_seed=derive_seed(master, *seed_path, 7777),
        kappa=kappa,
        patience=cfg["fit"]["patience"],
    )
    if abs(p.coupling) < 0.05 * kappa:
        report.flags.append("small-coupling")
    return report


def _fit_fidelity_vs_analytic(params: EigenFitParams, p: SystemParams) -> float:
    """Mean fidelity of the fitted pair against the analytic pair."""
    es = eigensystem(p)
    keep = (
        eigvec_fidelity(params.state(1), es.u1_r) + eigvec_fidelity(params.state(2), es.u2_r)
    ) / 2.0
    swap = (
        eigvec_fidelity(params.state(1), es.u2_r) + eigvec_fidelity(params.state(2), es.u1_r)
    ) / 2.0
    return max(keep, swap)


# ---------------------------------------------------------------------------
# sweep tasks (top level, picklable)


def berry_radius_task(args):
    cfg, radius, seed_index = args
    kappa = cfg["kappa"]
    try:
        if cfg["mode"] == "analytic":
            spec = standard_loop(kappa, radius, steps=cfg["berry"]["steps"])
            res = topology.berry_phase(spec, kappa)
            return {
                "seed": seed_index,
                "radius": radius,
                "beta1": res.beta1,
                "beta2": res.beta2,
                "cycles": res.cycles,
                "steps": res.steps,
                "mean_fit_fidelity": 1.0,
                "status": "ok",
            }
        steps = cfg["berry"]["synthetic_steps"]
        probe = topology.track_modes(
            loop_points(standard_loop(kappa, radius, steps=steps, cycles=1)),
            kappa,
            steps_per_cycle=steps,
        )
        cycles = 2 if probe.cycle_swapped[0] else 1
        points = loop_points(standard_loop(kappa, radius, steps=steps, cycles=cycles))
        rights, energies, fids = [], [], []
        guess = None
        for j, b in enumerate(points):
            p = params_from_b(b, kappa)
            rep = synthetic_point_fit(p, cfg, ("berry", _radius_tag(cfg, radius), seed_index, j), guess)
            guess = rep.params
            rights.append(rep.params.right_matrix)
            e1, e2 = rep.params.energies
            energies.append([e1, e2])
            fids.append(_fit_fidelity_vs_analytic(rep.params, p))
        track = topology.track_from_vectors(points, energies, rights, steps_per_cycle=steps)
        b1, b2 = topology.berry_phase_from_track(track)
        return {
            "seed": seed_index,
            "radius": radius,
            "beta1": b1,
            "beta2": b2,
            "cycles": cycles,
            "steps": steps,
            "mean_fit_fidelity": float(np.mean(fids)),
            "status": "ok",
        }
    except WeylringError as exc:
        return {
            "seed": seed_index,
            "radius": radius,
            "beta1": float("nan"),
            "beta2": float("nan"),
            "cycles": 0,
            "steps": 0,
            "mean_fit_fidelity": float("nan"),
            "status": type(exc).__name__,
        }


def _radius_tag(cfg, radius) -> int:
    """Stable integer tag for seed derivation (position in the sweep)."""
    return int(round(radius / cfg["kappa"] * 1e6))


def _continued_analytic_vectors(radius, kappa, theta):
    """Analytic eigenvector pair at a meridian point with labels continued
    from the north pole (closed-form branch bookkeeping)."""
    p = SystemParams(radius * math.sin(theta), 2.0 * radius * math.cos(theta), kappa)
    es = eigensystem(p)
    flipped = (radius < kappa / 4.0) and (theta > math.pi / 2.0)
    return (es.u2_r, es.u1_r) if flipped else (es.u1_r, es.u2_r)


def chern_radius_task(args):
    cfg, radius, seed_index = args
    kappa = cfg["kappa"]
    ch = cfg["chern"]
    try:
        spec = SphereSpec.uniform(radius, ch["n_theta"], ch["n_phi"])
        integral = topology.chern_integral(spec, kappa)
        if cfg["mode"] == "analytic":
            mspec = SphereSpec.uniform(radius, ch["meridian_points"], 8, theta_margin=ch["theta_margin"])
            merid = topology.chern_meridian(mspec, kappa)
            fids = [1.0]
        else:
            thetas = np.linspace(ch["theta_margin"], math.pi - ch["theta_margin"], ch["meridian_points"])
            pops = np.empty((len(thetas), 2))
            weights = np.empty((len(thetas), 2))
            fids = []
            guess = None
            for j, th in enumerate(thetas):
                p = SystemParams(radius * math.sin(th), 2.0 * radius * math.cos(th), kappa)
                rep = synthetic_point_fit(p, cfg, ("chern", _radius_tag(cfg, radius), seed_index, j), guess)
                guess = rep.params
                u_a, u_b = _continued_analytic_vectors(radius, kappa, th)
                # a mode that barely participates in the |e,0> trajectory
                # cannot be extracted there, so its population sample is
                # dropped (below the weight floor) or downweighted; the
                # weights come from the nominal-point analytic expansion
                k = np.linalg.solve(np.column_stack([u_a.vector, u_b.vector]),
                                    np.array([1.0, 0.0], dtype=complex))
                w_ab = np.abs(k) ** 2 / np.sum(np.abs(k) ** 2)
                direct = eigvec_fidelity(rep.params.state(1), u_a) + eigvec_fidelity(rep.params.state(2), u_b)
                crossed = eigvec_fidelity(rep.params.state(1), u_b) + eigvec_fidelity(rep.params.state(2), u_a)
                order = (1, 2) if direct >= crossed else (2, 1)
                refs = (u_a, u_b)
                for col, mode in enumerate(order):
                    st = rep.params.state(mode)
                    weights[j, col] = w_ab[col]
                    pops[j, col] = st.population_e0 if w_ab[col] >= MIN_MODE_WEIGHT else float("nan")
                    if w_ab[col] >= MIN_MODE_WEIGHT:
                        fids.append(eigvec_fidelity(st, refs[col]))
            mspec = SphereSpec.uniform(radius, ch["meridian_points"], 8, theta_margin=ch["theta_margin"])
            merid = topology.chern_meridian(mspec, kappa, data=(thetas, pops, weights))
        return {
            "seed": seed_index,
            "radius": radius,
            "c1_meridian": merid.c1,
            "c2_meridian": merid.c2,
            "c1_integral": integral.c1,
            "c2_integral": integral.c2,
            "fitted_radius": merid.fitted_radius,
            "rms_residual": merid.rms_residual,
            "mean_fit_fidelity": float(np.mean(fids)),
            "status": "ok",
        }
    except WeylringError as exc:
        return {
            "seed": seed_index,
            "radius": radius,
            "c1_meridian": float("nan"),
            "c2_meridian": float("nan"),
            "c1_integral": float("nan"),
            "c2_integral": float("nan"),
            "fitted_radius": float("nan"),
            "rms_residual": float("nan"),
            "mean_fit_fidelity": float("nan"),
            "status": type(exc).__name__,
        }


def _run_tasks(task_fn, arglist, workers: int):
    if workers <= 1 or len(arglist) <= 1:
        return [task_fn(a) for a in arglist]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task_fn, arglist))


# ---------------------------------------------------------------------------
# commands (return rows + summary; CSV/JSON writing lives in the CLI)


def berry_track_rows(cfg: dict):
    """Per-point reference rows along each loop: field components, angle,
    continued energies and |e,0> populations of the analytic modes."""
    kappa = cfg["kappa"]
    out = []
    for f in cfg["berry"]["radii_over_kappa"]:
        spec = standard_loop(kappa, f * kappa, steps=cfg["berry"]["steps"])
        try:
            track = topology.track_modes(loop_points(spec), kappa, steps_per_cycle=spec.steps)
        except WeylringError:
            continue
        phis = 2.0 * math.pi * np.arange(len(loop_points(spec))) / spec.steps
        kept = [i for i in range(len(phis)) if i not in set(track.skipped)]
        pops = np.abs(track.right[:, 0, :]) ** 2
        for row_i, i in enumerate(kept):
            e1, e2 = track.energies[row_i]
            out.append(
                (
                    f * kappa,
                    phis[i],
                    track.points[row_i, 0],
                    track.points[row_i, 1],
                    track.points[row_i, 2],
                    e1.real,
                    e1.imag,
                    e2.real,
                    e2.imag,
                    pops[row_i, 0],
                    pops[row_i, 1],
                )
            )
    return out


def run_berry(cfg: dict):
    kappa = cfg["kappa"]
    radii = [f * kappa for f in cfg["berry"]["radii_over_kappa"]]
    seeds = range(cfg["seeds"] if cfg["mode"] == "synthetic-shots" else 1)
    tasks = [(cfg, r, s) for s in seeds for r in radii]
    rows = _run_tasks(berry_radius_task, tasks, cfg["workers"])

    summary = {"mode": cfg["mode"], "kappa": kappa, "transitions": []}
    for s in seeds:
        sub = [r for r in rows if r["seed"] == s and r["status"] == "ok"]
        if len(sub) >= 2:
            try:
                tr = topology.detect_transition(
                    [r["radius"] for r in sub], [r["beta1"] for r in sub]
                )
                summary["transitions"].append(
                    {
                        "seed": s,
                        "critical_radius": tr.critical_radius,
                        "critical_over_kappa": tr.critical_radius / kappa,
                        "bracket_width": tr.uncertainty,
                    }
                )
            except WeylringError:
                summary["transitions"].append({"seed": s, "critical_radius": None})
    return rows, summary


def run_chern(cfg: dict):
    kappa = cfg["kappa"]
    radii = [f * kappa for f in cfg["chern"]["radii_over_kappa"]]
    seeds = range(cfg["seeds"] if cfg["mode"] == "synthetic-shots" else 1)
    tasks = [(cfg, r, s) for s in seeds for r in radii]
    rows = _run_tasks(chern_radius_task, tasks, cfg["workers"])

    # reference population and connection curves along the meridian
    thetas = np.linspace(0.0, math.pi, 181)
    pop_rows = []
    for r in radii:
        pops = topology.meridian_populations(r, kappa, thetas)
        for th, (p1, p2) in zip(thetas, pops):
            if 1e-3 < th < math.pi - 1e-3:
                try:
                    a_th, a_ph = topology.berry_connection_sphere(r, kappa, th, 0.0)
                except WeylringError:
                    a_th = a_ph = (float("nan"), float("nan"))
            else:
                a_th = a_ph = (float("nan"), float("nan"))
            pop_rows.append((r, th, p1, p2, a_th[0], a_th[1], a_ph[0], a_ph[1]))

    summary = {"mode": cfg["mode"], "kappa": kappa, "transitions": []}
    for s in seeds:
        sub = [r for r in rows if r["seed"] == s and r["status"] == "ok"]
        if len(sub) >= 2:
            try:
                tr = topology.detect_transition(
                    [r["radius"] for r in sub], [r["c2_meridian"] for r in sub]
                )
                summary["transitions"].append(
                    {
                        "seed": s,
                        "critical_radius": tr.critical_radius,
                        "critical_over_kappa": tr.critical_radius / kappa,
                        "bracket_width": tr.uncertainty,
                    }
                )
            except WeylringError:
                summary["transitions"].append({"seed": s, "critical_radius": None})
    return rows, pop_rows, summary


def run_concurrence(cfg: dict):
    kappa = cfg["kappa"]
    cc = cfg["concurrence"]
    phi_rows = []
    for f in cc["phi_radii_over_kappa"]:
        spec = standard_loop(kappa, f * kappa, steps=cc["phi_steps"])
        for mode in (1, 2):
            curve = entanglement.concurrence_vs_phi(spec, mode, kappa)
            for phi, e in zip(curve.phi_values, curve.e_values):
                phi_rows.append((f * kappa, mode, phi, e))

    radii = np.array([f * kappa for f in cc["epi_radii_over_kappa"]])
    e_pi = entanglement.e_pi_vs_radius(radii, kappa)
    e_ref = entanglement.e_pi_reference(radii, kappa)
    epi_rows = [(r, e, ref) for r, e, ref in zip(radii, e_pi, e_ref)]

    # kink: last radius with the concurrence still pinned at 1
    pinned = radii[np.abs(e_pi - 1.0) < 1e-9]
    unpinned = radii[np.abs(e_pi - 1.0) >= 1e-9]
    kink = {
        "last_pinned_radius": float(pinned.max()) if pinned.size else None,
        "first_unpinned_radius": float(unpinned.min()) if unpinned.size else None,
        "expected_kink_radius": kappa / 4.0,
    }
    return phi_rows, epi_rows, {"kappa": kappa, "kink": kink}


def run_validate_drive(cfg: dict):
    dr = cfg["drive"]
    nu = dr["nu"]
    omega_0 = dr["omega_0"]
    lam_r = cfg["lambda_r"]
    trunc = FockTruncation(dr["n_max"])
    rows, results = [], []
    for target in dr["j1_targets"]:
        mu = modulation_index_for_fraction(target)
        base = DriveParams(lam_r, omega_0 + nu, omega_0, mu * nu, nu)
        lam_eff = effective_coupling(base)
        tuned = find_sideband_resonance(base, trunc)
        period = 2.0 * math.pi / (2.0 * lam_eff)
        dt = (2.0 * math.pi / nu) / dr["steps_per_drive_period"]
        rec = simulate_driven(tuned, trunc, t=dr["periods"] * period, dt=dt, record_stride=16)
        omega = extract_rabi_frequency(rec.times, rec.pe, 2.0 * lam_eff)
        p_eff = excited_population(SystemParams(lam_eff, 0.0, 0.0), rec.times)
        for t, pf, pe in zip(rec.times, rec.pe, p_eff):
            rows.append((target, mu, t, pf, pe))
        results.append(
            {
                "j1_target": target,
                "mu": mu,
                "lambda_eff": lam_eff,
                "omega_expected": 2.0 * lam_eff,
                "omega_extracted": omega,
                "ratio": omega / (2.0 * lam_eff),
                "min_pe": float(np.min(rec.pe)),
                "detuning_correction": tuned.omega_0 - base.omega_0,
            }
        )
    return rows, {"nu": nu, "lambda_r": lam_r, "results": results}
