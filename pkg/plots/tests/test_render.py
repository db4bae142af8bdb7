import json
import subprocess
import sys

import pytest

from ringplots import FigureSpec, SchemaError, render
from ringplots.render import main as ringplot_main

FAST_CONFIG = {
    "mode": "analytic",
    "berry": {"radii_over_kappa": [0.126, 0.20, 0.30, 0.427], "steps": 128},
    "chern": {"radii_over_kappa": [0.176, 0.276, 0.402], "n_theta": 24, "n_phi": 24,
              "meridian_points": 9, "theta_margin": 0.3},
    "concurrence": {"phi_radii_over_kappa": [0.226, 0.427], "phi_steps": 48,
                    "epi_radii_over_kappa": [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45]},
    "drive": {"j1_targets": [0.10], "nu": 4146.9023, "omega_0": 37699.112,
              "n_max": 2, "periods": 1.3, "steps_per_drive_period": 64},
}


@pytest.fixture(scope="session")
def sweep_dir(tmp_path_factory):
    """CSV artifacts produced by the upstream CLI (its external interface)."""
    root = tmp_path_factory.mktemp("sweeps")
    cfg = root / "config.json"
    cfg.write_text(json.dumps(FAST_CONFIG))
    for command in ("pipeline", "validate-drive"):
        proc = subprocess.run(
            [sys.executable, "-m", "weylring.cli", command,
             "--config", str(cfg), "--out", str(root)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
    return root


KIND_TO_FILES = {
    "berry-vs-radius": ("berry_vs_radius.csv", "berry_summary.json"),
    "chern-vs-radius": ("chern_vs_radius.csv", "chern_summary.json"),
    "concurrence-vs-phi": ("concurrence_vs_phi.csv", "concurrence_summary.json"),
    "e-pi-vs-radius": ("e_pi_vs_radius.csv", "concurrence_summary.json"),
    "population-vs-theta": ("population_vs_theta.csv", "chern_summary.json"),
    "rabi": ("rabi.csv", "drive_summary.json"),
}


@pytest.mark.parametrize("kind", sorted(KIND_TO_FILES))
def test_render_all_kinds(sweep_dir, tmp_path, kind):
    csv_name, summary_name = KIND_TO_FILES[kind]
    out = tmp_path / f"{kind}.png"
    render(FigureSpec(
        inputs=[str(sweep_dir / csv_name)],
        output=str(out),
        kind=kind,
        summary=str(sweep_dir / summary_name),
    ))
    assert out.exists()
    assert out.stat().st_size > 1000


def test_rendering_idempotent(sweep_dir, tmp_path):
    spec_a = FigureSpec(
        inputs=[str(sweep_dir / "berry_vs_radius.csv")],
        output=str(tmp_path / "a.png"),
        kind="berry-vs-radius",
        summary=str(sweep_dir / "berry_summary.json"),
    )
    spec_b = FigureSpec(
        inputs=[str(sweep_dir / "berry_vs_radius.csv")],
        output=str(tmp_path / "b.png"),
        kind="berry-vs-radius",
        summary=str(sweep_dir / "berry_summary.json"),
    )
    render(spec_a)
    render(spec_b)
    assert (tmp_path / "a.png").read_bytes() == (tmp_path / "b.png").read_bytes()


def test_rendering_read_only(sweep_dir, tmp_path):
    src = sweep_dir / "e_pi_vs_radius.csv"
    before = src.read_bytes()
    render(FigureSpec(inputs=[str(src)], output=str(tmp_path / "x.png"), kind="e-pi-vs-radius"))
    assert src.read_bytes() == before


def test_missing_column_named(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("# weylring-csv v1 command=berry config=x seed=0\n"
                   "radius,beta1\n1.0,0.0\n")
    with pytest.raises(SchemaError, match="beta2"):
        render(FigureSpec(inputs=[str(bad)], output=str(tmp_path / "x.png"), kind="berry-vs-radius"))


def test_schema_tag_checked(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("# somecsv v9\nradius,beta1,beta2\n1.0,0.0,0.0\n")
    with pytest.raises(SchemaError, match="schema"):
        render(FigureSpec(inputs=[str(bad)], output=str(tmp_path / "x.png"), kind="berry-vs-radius"))


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(SchemaError, match="kind"):
        FigureSpec(inputs=["x.csv"], output="y.png", kind="pie-chart")


def test_cli_exit_codes(sweep_dir, tmp_path):
    out = tmp_path / "cli.png"
    rc = ringplot_main([
        "--in", str(sweep_dir / "rabi.csv"),
        "--out", str(out),
        "--kind", "rabi",
        "--summary", str(sweep_dir / "drive_summary.json"),
    ])
    assert rc == 0 and out.exists()
    bad = tmp_path / "bad.csv"
    bad.write_text("# weylring-csv v1\nradius\n1.0\n")
    rc = ringplot_main(["--in", str(bad), "--out", str(tmp_path / "z.png"), "--kind", "rabi"])
    assert rc == 2
