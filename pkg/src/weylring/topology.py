"""Topological invariants of the exceptional ring.

Workflow: discretize a parameter-space manifold (a circle in the bx-bz
plane or a sphere about the origin), continue the two mode labels along
it by eigenvector overlap, fix the parallel-transport gauge, and
accumulate the geometric phase (loops) or the Berry flux (spheres).

A loop that encircles the ring exchanges the two modes per cycle, so an
eigenvector only closes after two traversals; the accumulated phase is
then -pi per mode.  A sphere that contains the ring carries Chern
numbers {+1, -1}; shrinking it inside the ring drops both to zero.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize_scalar

from .core import BVector, eigensystem_arrays
from .errors import (
    DegenerateBasisError,
    EPProximityError,
    FitQualityError,
    NoTransitionError,
    PoleProximityError,
    RefineGridError,
    TrackingAmbiguityError,
)
from .core import EP_DISCRIMINANT_RTOL

#: consecutive-overlap floor below which mode tracking refuses to guess
TRACKING_OVERLAP_MIN = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class LoopSpec:
    """Circle in the bx-bz plane (by = 0), traversed ``cycles`` times in
    ``steps`` points per cycle."""

    radius: float
    center_bx: float
    center_bz: float = 0.0
    steps: int = 64
    cycles: int = 1

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be > 0")
        if self.steps < 16:
            raise ValueError("steps must be >= 16")
        if self.cycles not in (1, 2):
            raise ValueError("cycles must be 1 or 2")


def standard_loop(kappa: float, radius: float, steps: int = 64, cycles: int = 1) -> LoopSpec:
    """Loop centered at (bx = kappa/2, bz = 0), the sweep geometry whose
    enclosure of the ring depends only on the radius."""
    return LoopSpec(radius=radius, center_bx=kappa / 2.0, steps=steps, cycles=cycles)


@dataclass(frozen=True)
class SphereSpec:
    """Sphere of given radius about the origin, sampled on strictly
    increasing polar angles (interior of (0, pi)) and azimuthal angles."""

    radius: float
    theta_grid: tuple
    phi_grid: tuple

    def __post_init__(self):
        th = np.asarray(self.theta_grid, dtype=float)
        ph = np.asarray(self.phi_grid, dtype=float)
        if self.radius <= 0:
            raise ValueError("radius must be > 0")
        if th.size < 2 or np.any(np.diff(th) <= 0) or th[0] <= 0 or th[-1] >= math.pi:
            raise ValueError("theta_grid must be strictly increasing inside (0, pi)")
        if ph.size < 3 or np.any(np.diff(ph) <= 0) or ph[0] < 0 or ph[-1] >= 2 * math.pi:
            raise ValueError("phi_grid must be strictly increasing inside [0, 2*pi)")
        object.__setattr__(self, "theta_grid", tuple(map(float, th)))
        object.__setattr__(self, "phi_grid", tuple(map(float, ph)))

    @classmethod
    def uniform(cls, radius: float, n_theta: int, n_phi: int, theta_margin: float = 0.05) -> "SphereSpec":
        th = np.linspace(theta_margin, math.pi - theta_margin, n_theta)
        ph = np.linspace(0.0, 2.0 * math.pi, n_phi, endpoint=False)
        return cls(radius=radius, theta_grid=tuple(th), phi_grid=tuple(ph))


@dataclass
class ModeTrack:
    """Eigensystem continued along an ordered parameter path.

    ``right[p, :, n]`` is mode n's unit right eigenvector at point p;
    ``left[p, n, :]`` the matching co-vector row (plain-dot pairing).
    ``cycle_swapped[k]`` records whether the labels returned exchanged
    after cycle k+1.  ``skipped`` lists input indices dropped for sitting
    inside the exceptional-point band.
    """

    points: np.ndarray
    energies: np.ndarray
    right: np.ndarray
    left: np.ndarray
    steps_per_cycle: int | None = None
    cycle_swapped: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    gauge_fixed: bool = False

    def __len__(self):
        return self.points.shape[0]


def loop_points(spec: LoopSpec) -> list[BVector]:
    """Ordered loop samples; point p sits at angle 2*pi*p/steps from the
    +bx axis of the displaced frame.  The list closes on itself: length
    steps*cycles + 1 with the last point equal to the first."""
    n = spec.steps * spec.cycles
    # reduce the step index mod steps so each revisited point is
    # bit-identical to its first visit (exact closure)
    phis = 2.0 * math.pi * (np.arange(n + 1) % spec.steps) / spec.steps
    return [
        BVector(
            bx=spec.center_bx + spec.radius * math.cos(ph),
            by=0.0,
            bz=spec.center_bz + spec.radius * math.sin(ph),
        )
        for ph in phis
    ]


def _match_and_permute(energies, right, left):
    """Sequentially align mode labels by maximal right-vector overlap.

    Operates in place; raises TrackingAmbiguityError if at any step the
    best overlap drops to 1/sqrt(2) or below.
    """
    n_pts = right.shape[0]
    for p in range(1, n_pts):
        ov = np.abs(right[p - 1].conj().T @ right[p])
        if ov[0, 0] * ov[1, 1] >= ov[0, 1] * ov[1, 0]:
            kept = min(ov[0, 0], ov[1, 1])
        else:
            kept = min(ov[0, 1], ov[1, 0])
            energies[p, :] = energies[p, ::-1]
            right[p] = right[p][:, ::-1]
            left[p] = left[p][::-1, :]
        if kept <= TRACKING_OVERLAP_MIN:
            raise TrackingAmbiguityError(
                f"mode overlap {kept:.3f} <= 1/sqrt(2) at path index {p}; refine the discretization"
            )


def _cycle_permutations(right, surviving, steps_per_cycle):
    """Swap/identity verdict at every completed cycle boundary."""
    swapped = []
    n_cycles = (surviving[-1]) // steps_per_cycle
    index_of = {orig: k for k, orig in enumerate(surviving)}
    for c in range(1, n_cycles + 1):
        boundary = c * steps_per_cycle
        if boundary not in index_of:
            raise TrackingAmbiguityError(
                f"cycle boundary point {boundary} was skipped; cannot classify the cycle"
            )
        k = index_of[boundary]
        ov_keep = abs(np.vdot(right[0][:, 0], right[k][:, 0]))
        ov_swap = abs(np.vdot(right[0][:, 0], right[k][:, 1]))
        if max(ov_keep, ov_swap) <= TRACKING_OVERLAP_MIN:
            raise TrackingAmbiguityError("cycle-closure overlap too small to classify")
        swapped.append(ov_swap > ov_keep)
    return swapped


def track_from_vectors(points, energies, rights, kappa: float | None = None,
                       steps_per_cycle: int | None = None) -> ModeTrack:
    """Build a continued ModeTrack from externally supplied eigenvectors
    (e.g. fitted ones).  Columns are normalized; left co-vectors come from
    inverting the right matrix, which requires the two modes to stay
    non-parallel."""
    pts = np.asarray([q.as_array() if isinstance(q, BVector) else q for q in points], dtype=float)
    e = np.array(energies, dtype=complex)
    r = np.array(rights, dtype=complex)
    r = r / np.linalg.norm(r, axis=1, keepdims=True)
    det = r[:, 0, 0] * r[:, 1, 1] - r[:, 0, 1] * r[:, 1, 0]
    if np.any(np.abs(det) < 1e-8):
        raise DegenerateBasisError("right eigenvectors nearly parallel; cannot form left co-vectors")
    left = np.empty_like(r)
    left[:, 0, 0] = r[:, 1, 1] / det
    left[:, 0, 1] = -r[:, 0, 1] / det
    left[:, 1, 0] = -r[:, 1, 0] / det
    left[:, 1, 1] = r[:, 0, 0] / det
    _match_and_permute(e, r, left)
    track = ModeTrack(points=pts, energies=e, right=r, left=left, steps_per_cycle=steps_per_cycle)
    if steps_per_cycle is not None:
        track.cycle_swapped = _cycle_permutations(r, list(range(len(pts))), steps_per_cycle)
    return track


def track_modes(points, kappa: float, steps_per_cycle: int | None = None) -> ModeTrack:
    """Analytic eigensystems along a path with overlap-continued labels.

    Points inside the exceptional-point band are skipped and recorded in
    ``ModeTrack.skipped`` rather than interpolated.
    """
    pts = np.asarray([q.as_array() if isinstance(q, BVector) else q for q in points], dtype=float)
    lam = pts[:, 0] + 1j * pts[:, 1]
    delta = 2.0 * pts[:, 2]
    dis = np.abs(lam) ** 2 + (2.0 * delta + 1j * kappa) ** 2 / 16.0
    good = np.abs(dis) >= EP_DISCRIMINANT_RTOL * kappa**2
    skipped = list(np.flatnonzero(~good))
    if not np.any(good):
        raise EPProximityError("every path point sits inside the exceptional-point band")
    e, r, left = eigensystem_arrays(lam[good], delta[good], kappa)
    e, r, left = e.copy(), r.copy(), left.copy()
    _match_and_permute(e, r, left)
    track = ModeTrack(
        points=pts[good],
        energies=e,
        right=r,
        left=left,
        steps_per_cycle=steps_per_cycle,
        skipped=skipped,
    )
    if steps_per_cycle is not None:
        surviving = list(np.flatnonzero(good))
        track.cycle_swapped = _cycle_permutations(r, surviving, steps_per_cycle)
    return track


def gauge_fix(track: ModeTrack) -> ModeTrack:
    """Parallel-transport gauge: rotate each right eigenvector (and
    counter-rotate its left co-vector) so every backward overlap
    <u_l(p)|u_r(p-1)> is real and positive; the first point keeps its
    phase.  Idempotent."""
    r = track.right.copy()
    left = track.left.copy()
    for p in range(1, len(track)):
        for n in range(2):
            o = left[p, n, :] @ r[p - 1][:, n]
            if abs(o) < 1e-14:
                raise TrackingAmbiguityError(f"vanishing transport overlap at index {p}")
            ph = cmath.exp(1j * cmath.phase(o))
            r[p][:, n] *= ph
            left[p, n, :] /= ph
    return replace(track, right=r, left=left, gauge_fixed=True)


@dataclass
class BerryResult:
    """Geometric phases of the two continued modes around a closed loop."""

    beta1: float
    beta2: float
    cycles: int
    steps: int
    swapped_after_cycle: bool
    skipped_points: int = 0

    @property
    def beta(self):
        return (self.beta1, self.beta2)


def _wrap_phase(beta: float) -> float:
    """Principal value on the negative branch: encircling loops report
    close to -pi (never +pi), trivial loops close to 0."""
    out = math.remainder(beta, 2.0 * math.pi)  # (-pi, pi]
    if out > math.pi / 2.0:
        out -= 2.0 * math.pi
    return out


def berry_phase_from_track(track: ModeTrack) -> tuple:
    """Accumulated geometric phase per mode over a closed, continued track.

    Sums i * <u_l(p)| (u_r(p+1) - u_r(p))> in the parallel-transport
    gauge and adds the closing phase that maps the final transported
    eigenvector back onto the initial one.  The track's last point must
    coincide with its first and the mode labels must close (two cycles
    when one traversal exchanges them).
    """
    if not np.allclose(track.points[0], track.points[-1], atol=1e-12):
        raise ValueError("track is not closed: last point differs from first")
    fixed = track if track.gauge_fixed else gauge_fix(track)
    betas = []
    for n in range(2):
        rs = fixed.right[:, :, n]
        ls = fixed.left[:, n, :]
        fwd = np.einsum("pi,pi->p", ls[:-1], rs[1:])
        s = np.sum(fwd - 1.0)
        closing = ls[0] @ rs[-1]
        if abs(closing) <= TRACKING_OVERLAP_MIN:
            raise TrackingAmbiguityError(
                "mode does not return to itself at closure; run a second cycle"
            )
        beta = -s.imag + cmath.phase(closing)
        betas.append(_wrap_phase(beta))
    return tuple(betas)


def berry_phase(spec: LoopSpec, kappa: float, cycles: str | int = "auto",
                max_steps: int = 8192) -> BerryResult:
    """Geometric phase of each mode around a loop, with automatic cycle
    selection and tracking refinement.

    With ``cycles='auto'`` one traversal is tracked first; if the modes
    come back exchanged (the loop encircles the ring) the phase is
    accumulated over two traversals, otherwise over one.  On tracking
    ambiguity the step count doubles until ``max_steps``.
    """
    if cycles not in ("auto", 1, 2):
        raise ValueError("cycles must be 'auto', 1 or 2")
    steps = spec.steps
    while True:
        try:
            probe = track_modes(
                loop_points(replace(spec, steps=steps, cycles=1)), kappa, steps_per_cycle=steps
            )
            swapped = bool(probe.cycle_swapped[0])
            if cycles == 1 and swapped:
                raise ValueError(
                    "loop exchanges the modes after one cycle; an eigenvector only "
                    "closes after two traversals (pass cycles=2 or 'auto')"
                )
            n_cycles = swapped + 1 if cycles == "auto" else int(cycles)
            if n_cycles == 1:
                track = probe
            else:
                track = track_modes(
                    loop_points(replace(spec, steps=steps, cycles=2)), kappa, steps_per_cycle=steps
                )
            b1, b2 = berry_phase_from_track(track)
            return BerryResult(
                beta1=b1,
                beta2=b2,
                cycles=n_cycles,
                steps=steps,
                swapped_after_cycle=swapped,
                skipped_points=len(track.skipped),
            )
        except TrackingAmbiguityError:
            if steps * 2 > max_steps:
                raise
            steps *= 2


# ---------------------------------------------------------------------------
# spherical manifolds


def _sphere_point(radius, theta, phi):
    return (
        radius * math.sin(theta) * math.cos(phi),
        radius * math.sin(theta) * math.sin(phi),
        radius * math.cos(theta),
    )


def _sphere_eigvecs(radius, kappa, theta, phi):
    bx, by, bz = _sphere_point(radius, theta, phi)
    _, r, _ = eigensystem_arrays(bx + 1j * by, 2.0 * bz, kappa)
    return r


def berry_connection_sphere(radius: float, kappa: float, theta: float, phi: float,
                            step: float = 1e-4):
    """Berry connection components (A_theta, A_phi) of both modes at one
    spherical point, from the self (right-right) overlap convention.

    Finite central differences of the transport-defect phase: the
    connection is -d(arg<u(x)|u(x+dx)>)/dx in the smooth analytic gauge,
    evaluated with mode labels matched across the stencil.  Angles within
    1e-3 of a pole are refused (the phi stencil degenerates there).
    """
    if theta < 1e-3 or theta > math.pi - 1e-3:
        raise PoleProximityError("theta too close to a pole for the angular stencil")
    uc = _sphere_eigvecs(radius, kappa, theta, phi)

    def defect_rate(u_minus, u_plus):
        out = np.empty(2)
        for n in range(2):
            ov_m = [abs(np.vdot(uc[:, n], u_minus[:, m])) for m in range(2)]
            ov_p = [abs(np.vdot(uc[:, n], u_plus[:, m])) for m in range(2)]
            m_m, m_p = int(np.argmax(ov_m)), int(np.argmax(ov_p))
            o_minus = np.vdot(uc[:, n], u_minus[:, m_m])
            o_plus = np.vdot(uc[:, n], u_plus[:, m_p])
            out[n] = (cmath.phase(o_minus) - cmath.phase(o_plus)) / (2.0 * step)
        return out

    a_theta = defect_rate(
        _sphere_eigvecs(radius, kappa, theta - step, phi),
        _sphere_eigvecs(radius, kappa, theta + step, phi),
    )
    a_phi = defect_rate(
        _sphere_eigvecs(radius, kappa, theta, phi - step),
        _sphere_eigvecs(radius, kappa, theta, phi + step),
    )
    return a_theta, a_phi


def meridian_populations(radius: float, kappa: float, thetas) -> np.ndarray:
    """|e,0> population of both continued modes along the phi = 0 meridian.

    Labels are continued from the north pole (theta = 0), where mode 1 is
    the qubit branch (population 1); index [i, n-1] is mode n's population
    at thetas[i].

    On this meridian the discriminant traces the straight segment
    (radius^2 - kappa^2/16) + (i*kappa*radius/2)*cos(theta), so branch
    continuation is exact: the continued square root only leaves the
    principal branch past theta = pi/2, and only when the segment has
    negative real part (radius < kappa/4).
    """
    thetas = np.asarray(thetas, dtype=float)
    lam = radius * np.sin(thetas)
    lam[np.abs(lam) < 1e-12 * radius] = 0.0  # snap the poles (sin(pi) != 0 in floats)
    delta = 2.0 * radius * np.cos(thetas)
    dis = (radius**2 - kappa**2 / 16.0) + 0.5j * kappa * radius * np.cos(thetas)
    root = np.sqrt(dis)
    flip = (radius < kappa / 4.0) & (thetas > math.pi / 2.0)
    s1 = np.where(flip, -root, root)  # continued '+' branch from the north pole
    pops = np.empty((thetas.size, 2))
    for n, s in enumerate((s1, -s1)):
        e_min_delta = s - (2.0 * delta + 1j * kappa) / 4.0
        denom = lam**2 + np.abs(e_min_delta) ** 2
        with np.errstate(invalid="ignore"):
            p = np.where(denom > 0, lam**2 / denom, 0.0)
        # at a pole (lam = 0 exactly) the qubit branch has E - delta = 0
        at_pole = lam == 0.0
        if np.any(at_pole):
            p = np.where(at_pole, (np.abs(e_min_delta) < np.abs(s)) * 1.0, p)
        pops[:, n] = p
    return pops


@dataclass
class ChernResult:
    """Chern numbers extracted from meridian populations."""

    c1: float
    c2: float
    fitted_radius: float
    rms_residual: float

    @property
    def values(self):
        return (self.c1, self.c2)


def chern_meridian(spec: SphereSpec, kappa: float, data=None,
                   rms_threshold: float = 0.1) -> ChernResult:
    """Chern number of each mode as P(pi) - P(0) of the fitted meridian
    population curve.

    ``data`` overrides the analytic populations with measured ones: a
    tuple (thetas, populations (N, 2)) or (thetas, populations, weights)
    with labels continued from the smallest angle.  NaN populations mark
    modes that carried too little trajectory weight to be extracted (the
    suppressed-mode problem near the poles) and are excluded; ``weights``
    (same shape) turn the residual into weighted least squares, the
    natural choice when each mode's extractability varies along the
    meridian.  The fit family is the analytic meridian curve with the
    sphere radius as the single free parameter, searched on both sides
    of the critical radius kappa/4; the fitted curve is evaluated at the
    exact poles, where the populations are pinned to 0 or 1.

    Raises :class:`FitQualityError` when the best weighted-RMS residual
    exceeds ``rms_threshold`` or fewer than six samples are usable.
    """
    weights = None
    if data is None:
        thetas = np.asarray(spec.theta_grid, dtype=float)
        pops = meridian_populations(spec.radius, kappa, thetas)
    else:
        thetas = np.asarray(data[0], dtype=float)
        pops = np.asarray(data[1], dtype=float)
        if len(data) > 2 and data[2] is not None:
            weights = np.asarray(data[2], dtype=float)
        if pops.shape != (thetas.size, 2):
            raise ValueError("data populations must have shape (len(thetas), 2)")
    if weights is None:
        weights = np.ones_like(pops)

    valid = ~np.isnan(pops)
    n_valid = int(valid.sum())
    if n_valid < 6:
        raise FitQualityError(f"only {n_valid} usable population samples")
    w = np.where(valid, weights, 0.0)
    w_total = float(w.sum())
    resid2 = lambda model: np.where(valid, (np.nan_to_num(pops) - model) ** 2, 0.0)
    ring = kappa / 4.0

    def sse_pair(r):
        model = meridian_populations(r, kappa, thetas)
        return float(np.sum(w * resid2(model))), float(np.sum(w * resid2(model[:, ::-1])))

    candidates = []
    for lo, hi in ((0.05 * ring, 0.999 * ring), (1.001 * ring, max(3.0 * ring, 1.5 * spec.radius))):
        res = minimize_scalar(lambda r: min(*sse_pair(r)), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-6 * kappa})
        candidates.append((float(res.fun), float(res.x)))
    sse, r_fit = min(candidates)

    direct, swapped = sse_pair(r_fit)
    poles = meridian_populations(r_fit, kappa, np.array([0.0, math.pi]))
    if swapped < direct:
        poles = poles[:, ::-1]
    rms = math.sqrt(sse / w_total)
    if rms > rms_threshold:
        raise FitQualityError(f"meridian fit weighted RMS {rms:.3f} exceeds {rms_threshold}")
    return ChernResult(
        c1=float(poles[1, 0] - poles[0, 0]),
        c2=float(poles[1, 1] - poles[0, 1]),
        fitted_radius=r_fit,
        rms_residual=rms,
    )


@dataclass
class ChernIntegralResult:
    """Gauge-invariant surface integral of the Berry curvature."""

    c1: int
    c2: int
    raw1: float
    raw2: float

    @property
    def values(self):
        return (self.c1, self.c2)


def chern_integral(spec: SphereSpec, kappa: float) -> ChernIntegralResult:
    """Chern numbers by the plaquette (lattice field strength) method.

    Builds the closed theta-phi grid with single-vector pole caps, takes
    the phase of the product of right-right link overlaps around every
    plaquette and sums; the total is 2*pi times an exact integer as long
    as every plaquette phase stays below pi (else
    :class:`RefineGridError` asks for a finer grid).
    """
    thetas = np.concatenate([[0.0], np.asarray(spec.theta_grid), [math.pi]])
    phis = np.asarray(spec.phi_grid)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    lam = spec.radius * np.sin(tt) * np.exp(1j * pp)
    delta = 2.0 * spec.radius * np.cos(tt)
    _, r, _ = eigensystem_arrays(lam, delta, kappa)
    r = r.copy()

    # the discriminant is phi-independent, so the canonical labels are
    # uniform along each row; continuing labels along one meridian fixes
    # the whole grid
    merid = r[:, 0]  # (T, 2, 2) at phi = phis[0]
    for i in range(1, len(thetas)):
        ov = np.abs(merid[i - 1].conj().T @ merid[i])
        keep = ov[0, 0] * ov[1, 1] >= ov[0, 1] * ov[1, 0]
        kept = min(ov[0, 0], ov[1, 1]) if keep else min(ov[0, 1], ov[1, 0])
        if kept <= TRACKING_OVERLAP_MIN:
            raise TrackingAmbiguityError(
                f"meridian overlap {kept:.3f} too small at row {i}; refine theta grid"
            )
        if not keep:
            r[i:, :, :, :] = r[i:, :, :, ::-1]
            merid = r[:, 0]

    raw = []
    for n in range(2):
        u = r[:, :, :, n]  # (T, F, 2)
        u_right = np.roll(u, -1, axis=1)  # phi neighbor (wraps)
        link_phi = np.einsum("tfc,tfc->tf", u.conj(), u_right)  # u(t,f) -> u(t,f+1)
        link_theta = np.einsum("tfc,tfc->tf", u[:-1].conj(), u[1:])  # u(t,f) -> u(t+1,f)
        w = (
            link_phi[:-1]
            * np.roll(link_theta, -1, axis=1)
            * np.conj(link_phi[1:])
            * np.conj(link_theta)
        )
        angles = np.angle(w)
        if np.abs(angles).max() >= math.pi * 0.999:
            raise RefineGridError("a plaquette phase reached pi; refine the grid")
        # orientation fixed so the flux matches P(pi) - P(0) per mode
        raw.append(float(angles.sum()) / (2.0 * math.pi))
    return ChernIntegralResult(
        c1=int(round(raw[0])), c2=int(round(raw[1])), raw1=raw[0], raw2=raw[1]
    )


# ---------------------------------------------------------------------------
# transition detection


@dataclass
class TransitionEstimate:
    """Bracketed invariant jump along a radius sweep."""

    critical_radius: float
    bracket_low: float
    bracket_high: float

    @property
    def uncertainty(self) -> float:
        return self.bracket_high - self.bracket_low


def detect_transition(radii, invariant_values) -> TransitionEstimate:
    """Locate the invariant jump in a sweep.

    Scans consecutive (sorted) radii for a value change of at least 0.5
    and reports the midpoint of the widest-jump bracket; raises
    :class:`NoTransitionError` when every consecutive change stays below
    0.5.
    """
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(invariant_values, dtype=float)
    if radii.shape != values.shape or radii.size < 2:
        raise ValueError("radii and invariant_values must be equal-length, size >= 2")
    order = np.argsort(radii)
    radii, values = radii[order], values[order]
    jumps = np.abs(np.diff(values))
    if jumps.max() < 0.5:
        raise NoTransitionError("no invariant change >= 0.5 found in the sweep")
    k = int(np.argmax(jumps))
    return TransitionEstimate(
        critical_radius=float((radii[k] + radii[k + 1]) / 2.0),
        bracket_low=float(radii[k]),
        bracket_high=float(radii[k + 1]),
    )
