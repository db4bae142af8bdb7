"""Render figures from weylring sweep CSV files.

Consumes only the documented CSV/JSON artifacts (schema ``weylring-csv
v1``); each figure kind overlays the matching theory reference taken
from the run's summary JSON (phase plateaus at 0 and -pi, Chern steps at
0 and +/-1, the piecewise-linear concurrence line).

Invoked as ``ringplot --in data.csv --out fig.png --kind berry-vs-radius
[--summary run_summary.json]``.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

CSV_SCHEMA = "weylring-csv v1"

KINDS = (
    "berry-vs-radius",
    "chern-vs-radius",
    "concurrence-vs-phi",
    "e-pi-vs-radius",
    "population-vs-theta",
    "rabi",
)

REQUIRED_COLUMNS = {
    "berry-vs-radius": ("radius", "beta1", "beta2"),
    "chern-vs-radius": ("radius", "c1_meridian", "c2_meridian"),
    "concurrence-vs-phi": ("radius", "mode", "phi", "concurrence"),
    "e-pi-vs-radius": ("radius", "e_pi", "e_reference"),
    "population-vs-theta": ("radius", "theta", "p1", "p2"),
    "rabi": ("j1_target", "time", "pe_full", "pe_effective"),
}


class SchemaError(Exception):
    """Input file does not match the expected CSV schema."""


@dataclass
class FigureSpec:
    inputs: list
    output: str
    kind: str
    summary: str | None = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        if not self.inputs:
            raise SchemaError("at least one input CSV is required")


def read_sweep_csv(path, required):
    """Columns of one sweep CSV as float arrays (strings pass through).

    Validates the schema tag in the leading comment line and the
    presence of every required column.
    """
    with open(path, newline="") as f:
        head = f.readline()
        if not head.startswith("#") or CSV_SCHEMA not in head:
            raise SchemaError(f"{path}: missing or mismatched schema tag {CSV_SCHEMA!r}")
        reader = csv.DictReader(f)
        names = reader.fieldnames or []
        for col in required:
            if col not in names:
                raise SchemaError(f"{path}: missing column '{col}'")
        rows = list(reader)
    out = {}
    for col in names:
        vals = [r[col] for r in rows]
        try:
            out[col] = np.array([float(v) for v in vals])
        except ValueError:
            out[col] = np.array(vals)
    return out


def load_summary(spec):
    if spec.summary is None:
        return {}
    with open(spec.summary) as f:
        return json.load(f)


def _new_axes():
    fig, ax = plt.subplots(figsize=(5.2, 3.6), dpi=110)
    return fig, ax


def _render_berry(data, summary, ax):
    ok = data.get("status")
    mask = np.ones(len(data["radius"]), dtype=bool) if ok is None else (ok == "ok")
    ax.plot(data["radius"][mask], data["beta1"][mask], "o", label="mode 1")
    ax.plot(data["radius"][mask], data["beta2"][mask], "^", mfc="none", label="mode 2")
    kappa = summary.get("kappa")
    if kappa:
        lo, hi = ax.get_xlim()
        ring = kappa / 4.0
        ax.hlines(0.0, lo, ring, colors="gray", ls="--", lw=1)
        ax.hlines(-math.pi, ring, hi, colors="gray", ls="--", lw=1, label="reference")
        ax.axvline(ring, color="gray", ls=":", lw=1)
        ax.set_xlim(lo, hi)
    ax.set_xlabel("loop radius (rad/us)")
    ax.set_ylabel("geometric phase (rad)")
    ax.legend(loc="center left", fontsize=8)


def _render_chern(data, summary, ax):
    ok = data.get("status")
    mask = np.ones(len(data["radius"]), dtype=bool) if ok is None else (ok == "ok")
    ax.plot(data["radius"][mask], data["c1_meridian"][mask], "o", label="mode 1 (meridian)")
    ax.plot(data["radius"][mask], data["c2_meridian"][mask], "^", mfc="none", label="mode 2 (meridian)")
    if "c1_integral" in data:
        ax.plot(data["radius"][mask], data["c1_integral"][mask], "x", ms=4, label="mode 1 (surface)")
        ax.plot(data["radius"][mask], data["c2_integral"][mask], "+", ms=4, label="mode 2 (surface)")
    kappa = summary.get("kappa")
    if kappa:
        lo, hi = ax.get_xlim()
        ring = kappa / 4.0
        for level, x0, x1 in ((0.0, lo, ring), (1.0, ring, hi), (-1.0, ring, hi)):
            ax.hlines(level, x0, x1, colors="gray", ls="--", lw=1)
        ax.axvline(ring, color="gray", ls=":", lw=1)
        ax.set_xlim(lo, hi)
    ax.set_xlabel("sphere radius (rad/us)")
    ax.set_ylabel("Chern number")
    ax.legend(fontsize=7)


def _render_concurrence_phi(data, summary, ax):
    for radius in np.unique(data["radius"]):
        for mode, style in ((1.0, "-"), (2.0, "--")):
            sel = (data["radius"] == radius) & (data["mode"] == mode)
            if np.any(sel):
                order = np.argsort(data["phi"][sel])
                ax.plot(
                    data["phi"][sel][order],
                    data["concurrence"][sel][order],
                    style,
                    label=f"r={radius:.3g}, mode {int(mode)}",
                )
    ax.set_xlabel("loop angle (rad)")
    ax.set_ylabel("concurrence")
    ax.set_ylim(-0.02, 1.05)
    ax.legend(fontsize=7)


def _render_e_pi(data, summary, ax):
    order = np.argsort(data["radius"])
    ax.plot(data["radius"][order], data["e_pi"][order], "o", label="eigenvector concurrence")
    ax.plot(data["radius"][order], data["e_reference"][order], "-", color="gray",
            lw=1, label="min(1, 4(B_C - r)/kappa)")
    kink = summary.get("kink", {}).get("expected_kink_radius")
    if kink:
        ax.axvline(kink, color="gray", ls=":", lw=1)
    ax.set_xlabel("loop radius (rad/us)")
    ax.set_ylabel("concurrence at phi = pi")
    ax.legend(fontsize=8)


def _render_population(data, summary, ax):
    for radius in np.unique(data["radius"]):
        sel = data["radius"] == radius
        order = np.argsort(data["theta"][sel])
        ax.plot(data["theta"][sel][order], data["p1"][sel][order], "-", label=f"r={radius:.3g}, mode 1")
        ax.plot(data["theta"][sel][order], data["p2"][sel][order], "--", label=f"r={radius:.3g}, mode 2")
    ax.set_xlabel("polar angle (rad)")
    ax.set_ylabel("|e,0> population")
    ax.set_ylim(-0.02, 1.05)
    ax.legend(fontsize=6, ncol=2)


def _render_rabi(data, summary, ax):
    for target in np.unique(data["j1_target"]):
        sel = data["j1_target"] == target
        order = np.argsort(data["time"][sel])
        ax.plot(data["time"][sel][order], data["pe_full"][sel][order], "-", label=f"full, J1={target:g}")
        ax.plot(data["time"][sel][order], data["pe_effective"][sel][order], "--", lw=1,
                label=f"effective, J1={target:g}")
    ax.set_xlabel("time (us)")
    ax.set_ylabel("excited population")
    ax.legend(fontsize=6)


_RENDERERS = {
    "berry-vs-radius": _render_berry,
    "chern-vs-radius": _render_chern,
    "concurrence-vs-phi": _render_concurrence_phi,
    "e-pi-vs-radius": _render_e_pi,
    "population-vs-theta": _render_population,
    "rabi": _render_rabi,
}


def render(spec: FigureSpec) -> str:
    """Write the figure for ``spec`` and return the output path.

    Rendering is read-only over its inputs and reproducible: repeated
    calls produce identical bytes (no timestamps are embedded).
    """
    required = REQUIRED_COLUMNS[spec.kind]
    frames = [read_sweep_csv(path, required) for path in spec.inputs]
    data = {
        col: np.concatenate([f[col] for f in frames])
        for col in frames[0]
        if all(col in f for f in frames)
    }
    summary = load_summary(spec)
    fig, ax = _new_axes()
    try:
        _RENDERERS[spec.kind](data, summary, ax)
        fig.tight_layout()
        fig.savefig(spec.output, metadata={"Software": "ringplots"})
    finally:
        plt.close(fig)
    return spec.output


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="ringplot", description=__doc__)
    ap.add_argument("--in", dest="inputs", action="append", required=True,
                    help="input CSV (repeatable)")
    ap.add_argument("--out", required=True, help="output image path")
    ap.add_argument("--kind", required=True, choices=KINDS)
    ap.add_argument("--summary", help="summary JSON with theory-reference parameters")
    args = ap.parse_args(argv)
    try:
        render(FigureSpec(inputs=args.inputs, output=args.out, kind=args.kind, summary=args.summary))
    except SchemaError as exc:
        print(f"schema-error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
