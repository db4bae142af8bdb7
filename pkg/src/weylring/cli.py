"""Command-line entry point.

Subcommands reproduce the sweep artifacts as CSV/JSON files:

  eigensystem     one-point biorthogonal eigensystem as JSON on stdout
  berry           geometric phase versus loop radius
  chern           Chern numbers versus sphere radius + meridian curves
  concurrence     eigenvector concurrence curves and the phi = pi kink
  validate-drive  full driven model versus the effective coupling
  pipeline        berry + chern + concurrence in one run

Exit codes: 0 success, 1 configuration error, 2 domain error
(exceptional-point proximity and friends), 3 convergence failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import pipeline
from .core import SystemParams, eigensystem
from .errors import ConfigError, ConvergenceError, WeylringError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DOMAIN = 2
EXIT_CONVERGENCE = 3


def _add_common(sub):
    sub.add_argument("--config", help="JSON config file (defaults used when omitted)")
    sub.add_argument("--out", help="output directory (overrides config out_dir)")
    sub.add_argument("--seed", type=int, help="master seed (overrides config)")
    sub.add_argument("--workers", type=int, help="parallel sweep workers (overrides config)")


def _resolve(args) -> dict:
    cfg = pipeline.load_config(args.config)
    if args.out is not None:
        cfg["out_dir"] = args.out
    if getattr(args, "seed", None) is not None:
        cfg["master_seed"] = args.seed
    if getattr(args, "workers", None) is not None:
        cfg["workers"] = args.workers
    os.makedirs(cfg["out_dir"], exist_ok=True)
    return cfg


def cmd_eigensystem(args) -> int:
    p = SystemParams(complex(args.lam), args.delta, args.kappa)
    es = eigensystem(p)
    payload = {
        "coupling": [p.coupling.real, p.coupling.imag],
        "detuning": p.detuning,
        "kappa": p.kappa,
        "energies": [[es.e1.real, es.e1.imag], [es.e2.real, es.e2.imag]],
        "right_vectors": [
            [[es.u1_r.c_e0.real, es.u1_r.c_e0.imag], [es.u1_r.c_g1.real, es.u1_r.c_g1.imag]],
            [[es.u2_r.c_e0.real, es.u2_r.c_e0.imag], [es.u2_r.c_g1.real, es.u2_r.c_g1.imag]],
        ],
        "left_covectors": [
            [[z.real, z.imag] for z in es.u1_l],
            [[z.real, z.imag] for z in es.u2_l],
        ],
    }
    json.dump(payload, sys.stdout, sort_keys=True, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def cmd_berry(args) -> int:
    cfg = _resolve(args)
    rows, summary = pipeline.run_berry(cfg)
    cols = ["seed", "radius", "beta1", "beta2", "cycles", "steps", "mean_fit_fidelity", "status"]
    pipeline.write_csv(
        os.path.join(cfg["out_dir"], "berry_vs_radius.csv"),
        "berry", cfg, cfg["master_seed"], cols,
        [[r[c] for c in cols] for r in rows],
    )
    pipeline.write_csv(
        os.path.join(cfg["out_dir"], "loop_track.csv"),
        "berry", cfg, cfg["master_seed"],
        ["radius", "phi", "bx", "by", "bz", "e1_re", "e1_im", "e2_re", "e2_im", "p1_e0", "p2_e0"],
        pipeline.berry_track_rows(cfg),
    )
    pipeline.write_json(os.path.join(cfg["out_dir"], "berry_summary.json"), summary)
    return EXIT_OK


def cmd_chern(args) -> int:
    cfg = _resolve(args)
    rows, pop_rows, summary = pipeline.run_chern(cfg)
    cols = [
        "seed", "radius", "c1_meridian", "c2_meridian", "c1_integral", "c2_integral",
        "fitted_radius", "rms_residual", "mean_fit_fidelity", "status",
    ]
    pipeline.write_csv(
        os.path.join(cfg["out_dir"], "chern_vs_radius.csv"),
        "chern", cfg, cfg["master_seed"], cols,
        [[r[c] for c in cols] for r in rows],
    )
    pipeline.write_csv(
        os.path.join(cfg["out_dir"], "population_vs_theta.csv"),
        "chern", cfg, cfg["master_seed"],
        ["radius", "theta", "p1", "p2", "a_theta1", "a_theta2", "a_phi1", "a_phi2"],
        pop_rows,
    )
    pipeline.write_json(os.path.join(cfg["out_dir"], "chern_summary.json"), summary)
    return EXIT_OK


def cmd_concurrence(args) -> int:
    cfg = _resolve(args)
    phi_rows, epi_rows, summary = pipeline.run_concurrence(cfg)
    pipeline.write_csv(
        os.path.join(cfg["out_dir"], "concurrence_vs_phi.csv"),
        "concurrence", cfg, cfg["master_seed"],
        ["radius", "mode", "phi", "concurrence"],
        phi_rows,
    )
    pipeline.write_csv(
        os.path.join(cfg["out_dir"], "e_pi_vs_radius.csv"),
        "concurrence", cfg, cfg["master_seed"],
        ["radius", "e_pi", "e_reference"],
        epi_rows,
    )
    pipeline.write_json(os.path.join(cfg["out_dir"], "concurrence_summary.json"), summary)
    return EXIT_OK


def cmd_validate_drive(args) -> int:
    cfg = _resolve(args)
    rows, summary = pipeline.run_validate_drive(cfg)
    pipeline.write_csv(
        os.path.join(cfg["out_dir"], "rabi.csv"),
        "validate-drive", cfg, cfg["master_seed"],
        ["j1_target", "mu", "time", "pe_full", "pe_effective"],
        rows,
    )
    pipeline.write_json(os.path.join(cfg["out_dir"], "drive_summary.json"), summary)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    rc = cmd_berry(args)
    rc = rc or cmd_chern(args)
    rc = rc or cmd_concurrence(args)
    return rc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="weylring", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    eig = sub.add_parser("eigensystem", help="one-point eigensystem as JSON")
    eig.add_argument("--lambda", dest="lam", required=True,
                     help="complex coupling, e.g. '1.2' or '1+0.5j' (rad/us)")
    eig.add_argument("--delta", type=float, required=True, help="detuning (rad/us)")
    eig.add_argument("--kappa", type=float, required=True, help="photon decay rate (rad/us)")
    eig.set_defaults(fn=cmd_eigensystem)

    for name, fn in (
        ("berry", cmd_berry),
        ("chern", cmd_chern),
        ("concurrence", cmd_concurrence),
        ("validate-drive", cmd_validate_drive),
        ("pipeline", cmd_pipeline),
    ):
        p = sub.add_parser(name)
        _add_common(p)
        p.set_defaults(fn=fn)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (WeylringError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
