"""Boundary nodal sets, mass doubling, and the special-point search.

The nodal set of a Steklov eigenfunction restricted to a closed planar curve
is a finite set of points; this module counts it by sign-change bisection on
the trigonometric interpolant of the trace. Mass doubling ratios are measured
both along the boundary (arclength integrals of u^2 over Euclidean balls
intersected with the curve) and on solid balls, and a net search locates a
boundary point whose small ball carries a fixed fraction of the total mass.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field as dfield

import numpy as np

from .errors import (
    DegenerateCenterError,
    RegionError,
    UndersampledError,
)
from .frequency import _disk_integral

TWO_PI = 2.0 * np.pi


# -- boundary zero counting ----------------------------------------------------------


@dataclass
class NodalReport:
    """Zeros of the boundary trace of one eigenpair."""

    eigenvalue: float
    zeros: np.ndarray  # sorted curve parameters of sign-change zeros
    tol: float
    tangential_flags: np.ndarray  # parameters of near-zero non-crossings
    samples: int

    @property
    def count(self):
        return len(self.zeros)

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(["index", "t", "kind"])
        rows = [(t, "crossing") for t in self.zeros] + [
            (t, "tangential") for t in self.tangential_flags
        ]
        for j, (t, kind) in enumerate(sorted(rows)):
            writer.writerow([str(j), f"{t:.17e}", kind])
        return buf.getvalue()

    def to_json(self):
        return json.dumps(
            {
                "eigenvalue": self.eigenvalue,
                "count": self.count,
                "zeros": self.zeros.tolist(),
                "tangential_flags": self.tangential_flags.tolist(),
                "tol": self.tol,
                "samples": self.samples,
            },
            sort_keys=True,
        )


def nyquist_guard(pair):
    """Minimal admissible sample count: 16 trace oscillations per wavelength."""
    lam = pair.eigenvalue
    perimeter = pair.curve.perimeter
    return int(np.ceil(16.0 * lam * perimeter / TWO_PI))


def boundary_zeros(pair, samples=None, tol=1e-12, flag_rel=1e-9):
    """Sign-change zeros of the trace, refined by bisection in parameter.

    Grid intervals whose endpoints both fall below flag_rel times the sup of
    the trace without producing a sign change are reported as suspected
    tangential (even-order) zeros and are not counted.
    """
    guard = nyquist_guard(pair)
    if samples is None:
        samples = max(1024, 2 * guard)
    samples = int(samples)
    if samples < guard:
        raise UndersampledError(
            f"{samples} samples below the oscillation guard {guard}"
        )
    tg = np.linspace(0.0, TWO_PI, samples, endpoint=False)
    f = pair.trace_at(tg)
    fmax = np.max(np.abs(f))
    if fmax == 0.0:
        return NodalReport(
            eigenvalue=pair.eigenvalue,
            zeros=np.array([]),
            tol=tol,
            tangential_flags=np.array([]),
            samples=samples,
        )

    f_next = np.roll(f, -1)
    crossing = np.sign(f) * np.sign(f_next) < 0
    zeros = []
    h = TWO_PI / samples
    for i in np.where(crossing)[0]:
        a, b = tg[i], tg[i] + h
        fa = f[i]
        while b - a > tol:
            m = 0.5 * (a + b)
            fm = float(pair.trace_at([m])[0])
            if fm == 0.0:
                a = b = m
                break
            if np.sign(fm) == np.sign(fa):
                a, fa = m, fm
            else:
                b = m
        zeros.append(0.5 * (a + b) % TWO_PI)

    # near-zero grid runs without a crossing: suspected tangential zeros
    small = np.abs(f) < flag_rel * fmax
    covered = crossing | np.roll(crossing, 1)
    flags = []
    run = None
    for i in range(samples):
        if small[i] and not covered[i]:
            run = i if run is None else run
        else:
            if run is not None:
                flags.append(tg[(run + i - 1) // 2])
                run = None
    if run is not None:
        flags.append(tg[(run + samples - 1) // 2])

    return NodalReport(
        eigenvalue=pair.eigenvalue,
        zeros=np.sort(np.array(zeros)),
        tol=tol,
        tangential_flags=np.array(flags),
        samples=samples,
    )


# -- boundary mass -------------------------------------------------------------------


def _ball_curve_intervals(curve, center, r, probe=8192, tol=1e-13):
    """Parameter intervals {t: |gamma(t) - center| < r}, bisected to tol."""
    center = np.asarray(center, dtype=float)
    tg = np.linspace(0.0, TWO_PI, probe, endpoint=False)
    g = np.linalg.norm(curve.point(tg) - center, axis=1) - r
    if np.all(g < 0):
        return [(0.0, TWO_PI)]
    if np.all(g >= 0):
        return []

    def refine(a, b, ga):
        # ga < 0 means 'a side inside'
        while b - a > tol:
            m = 0.5 * (a + b)
            gm = float(np.linalg.norm(curve.point(np.array([m]))[0] - center) - r)
            if (gm < 0) == (ga < 0):
                a = m
            else:
                b = m
        return 0.5 * (a + b)

    h = TWO_PI / probe
    edges = []
    for i in range(probe):
        j = (i + 1) % probe
        if (g[i] < 0) != (g[j] < 0):
            t_edge = refine(tg[i], tg[i] + h, g[i])
            edges.append((t_edge, "exit" if g[i] < 0 else "enter"))
    intervals = []
    edges.sort()
    # rotate so the list starts with an entry edge
    while edges[0][1] != "enter":
        t, kind = edges.pop(0)
        edges.append((t + TWO_PI, kind))
    for k in range(0, len(edges), 2):
        intervals.append((edges[k][0], edges[k + 1][0]))
    return intervals


def _interval_mass(pair, a, b, tol=1e-11, n_start=32, n_max=512):
    curve = pair.curve

    def quad(n):
        nodes, wts = np.polynomial.legendre.leggauss(n)
        t = 0.5 * (b - a) * (nodes + 1.0) + a
        f = pair.trace_at(t % TWO_PI)
        sp = curve.speed(t % TWO_PI)
        return 0.5 * (b - a) * float(np.sum(wts * f**2 * sp))

    prev, n = None, n_start
    while True:
        cur = quad(n)
        if prev is not None and abs(cur - prev) <= tol * max(abs(cur), 1e-300):
            return cur
        if n >= n_max:
            return cur
        prev, n = cur, 2 * n


def boundary_mass(pair, center, r):
    """Arclength integral of u^2 over the Euclidean ball of radius r about
    center, intersected with the boundary curve."""
    intervals = _ball_curve_intervals(pair.curve, center, r)
    return sum(_interval_mass(pair, a, b) for a, b in intervals)


# -- solid masses ----------------------------------------------------------------------


def solid_mass_v(vfield, center, r):
    """Integral of v^2 over the full ball B(center, r) inside the collar."""
    return _disk_integral(
        lambda p: vfield(p)[0] ** 2, np.asarray(center, dtype=float), r, tol=1e-9
    )


def clipped_ball_mass(pair, center, r, n_r=48, n_theta=256):
    """Integral of u^2 over B(center, r) intersected with the domain.

    Polar grid about the center with per-ray clipping at the boundary, found
    by bisection on the signed tube offset.
    """
    center = np.asarray(center, dtype=float)
    curve = pair.curve
    theta = np.linspace(0.0, TWO_PI, n_theta, endpoint=False)
    dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)

    # per-ray extent of Omega: bisection on the inside indicator
    def inside(rho):
        pts = center + rho[:, None] * dirs
        _, s, _ = curve.nearest_point_many(pts)
        return s < 0

    end_inside = inside(np.full(n_theta, r))
    active = ~end_inside
    # vectorized bisection for the rays that cross the boundary
    lo_a = np.zeros(int(np.sum(active)))
    hi_a = np.full(int(np.sum(active)), r)
    d_act = dirs[active]
    for _ in range(50 if len(lo_a) else 0):
        mid = 0.5 * (lo_a + hi_a)
        pts = center + mid[:, None] * d_act
        _, s, _ = curve.nearest_point_many(pts)
        ins = s < 0
        lo_a[ins] = mid[ins]
        hi_a[~ins] = mid[~ins]
    extent = np.zeros(n_theta)
    extent[~active] = r
    extent[active] = lo_a

    nodes, wts = np.polynomial.legendre.leggauss(n_r)
    total = 0.0
    rr = 0.5 * extent[None, :] * (nodes[:, None] + 1.0)  # (n_r, n_theta)
    w = 0.5 * extent[None, :] * wts[:, None] * rr * (TWO_PI / n_theta)
    pts = center + rr.reshape(-1)[:, None] * np.tile(dirs, (n_r, 1))
    keep = rr.reshape(-1) > 0
    vals = np.zeros(len(pts))
    if np.any(keep):
        v, _ = pair.evaluate_many(pts[keep])
        vals[keep] = v
    total = float(np.sum(vals**2 * w.reshape(-1)))
    return total


def domain_mass(pair, n_r=64, n_theta=512):
    """Integral of u^2 over the whole domain by centroid-star quadrature.

    Requires the domain to be star-shaped with respect to its centroid.
    """
    curve = pair.curve
    center = curve.centroid
    tg = np.linspace(0.0, TWO_PI, 8192, endpoint=False)
    rel = curve.point(tg) - center
    phi = np.unwrap(np.arctan2(rel[:, 1], rel[:, 0]))
    if np.any(np.diff(phi) <= 0) or abs(phi[-1] - phi[0] - TWO_PI * (
        1 - 1.0 / len(tg)
    )) > 0.5:
        if np.any(np.diff(phi) <= 0):
            raise RegionError("domain is not star-shaped about its centroid")
    theta = np.linspace(phi[0], phi[0] + TWO_PI, n_theta, endpoint=False)
    # invert the angle map on the dense grid, then polish by bisection
    t_of_phi = np.interp(theta, phi, tg + np.where(tg < tg[0], TWO_PI, 0))

    def angle_err(t, target):
        rel = curve.point(np.atleast_1d(t))[0] - center
        d = np.arctan2(rel[1], rel[0]) - target
        return (d + np.pi) % TWO_PI - np.pi

    R = np.empty(n_theta)
    h = TWO_PI / len(tg)
    for j in range(n_theta):
        a, b = t_of_phi[j] - h, t_of_phi[j] + h
        ea = angle_err(a, theta[j])
        for _ in range(60):
            m = 0.5 * (a + b)
            em = angle_err(m, theta[j])
            if em == 0.0:
                a = b = m
                break
            if (em < 0) == (ea < 0):
                a, ea = m, em
            else:
                b = m
        tj = 0.5 * (a + b)
        R[j] = np.linalg.norm(curve.point(np.atleast_1d(tj))[0] - center)

    nodes, wts = np.polynomial.legendre.leggauss(n_r)
    rr = 0.5 * R[None, :] * (nodes[:, None] + 1.0)
    w = 0.5 * R[None, :] * wts[:, None] * rr * (TWO_PI / n_theta)
    dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    pts = center + rr.reshape(-1)[:, None] * np.tile(dirs, (n_r, 1))
    vals, _ = pair.evaluate_many(pts)
    return float(np.sum(vals**2 * w.reshape(-1)))


# -- doubling profiles ------------------------------------------------------------------


@dataclass
class DoublingReport:
    """Mass of u^2 (or v^2) against radius at a fixed center, with the
    doubling exponents e(r) = log2(mass(2r)/mass(r))."""

    center: np.ndarray
    mode: str
    radii: np.ndarray
    masses: np.ndarray
    doubling_radii: np.ndarray
    exponents: np.ndarray

    @property
    def max_exponent(self):
        return float(np.max(self.exponents)) if len(self.exponents) else np.nan

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(["r", "mass", "doubling_exponent"])
        emap = {float(r): e for r, e in zip(self.doubling_radii, self.exponents)}
        for r, m in zip(self.radii, self.masses):
            e = emap.get(float(r))
            writer.writerow(
                [f"{r:.17e}", f"{m:.17e}", "" if e is None else f"{e:.17e}"]
            )
        return buf.getvalue()

    def to_json(self):
        return json.dumps(
            {
                "center": self.center.tolist(),
                "mode": self.mode,
                "radii": self.radii.tolist(),
                "masses": self.masses.tolist(),
                "doubling_radii": self.doubling_radii.tolist(),
                "exponents": self.exponents.tolist(),
            },
            sort_keys=True,
        )


def doubling_profile(pair, center, r_min, r_max, mode="boundary", vfield=None,
                     steps_per_octave=4):
    """Mass-versus-radius sweep on a geometric grid containing exact doubles.

    Boundary mode integrates u^2 over ball-curve intersections; solid mode
    integrates v^2 over full balls (the transform field must be supplied).
    """
    if not 0 < r_min < r_max:
        raise ValueError("need 0 < r_min < r_max")
    if mode not in ("boundary", "solid"):
        raise ValueError("mode must be 'boundary' or 'solid'")
    if mode == "solid" and vfield is None:
        raise ValueError("solid mode needs the transformed field")
    center = np.asarray(center, dtype=float)
    k = steps_per_octave
    n = int(np.floor(k * np.log2(r_max / r_min))) + 1
    radii = r_min * 2.0 ** (np.arange(n) / k)

    masses = np.empty(n)
    for j, r in enumerate(radii):
        if mode == "boundary":
            masses[j] = boundary_mass(pair, center, r)
        else:
            masses[j] = solid_mass_v(vfield, center, r)
    if masses[0] <= 0:
        raise DegenerateCenterError("no mass at the smallest radius")

    d_radii, expo = [], []
    for j in range(n - k):
        d_radii.append(radii[j])
        expo.append(np.log2(masses[j + k] / masses[j]))
    return DoublingReport(
        center=center,
        mode=mode,
        radii=radii,
        masses=masses,
        doubling_radii=np.array(d_radii),
        exponents=np.array(expo),
    )


# -- special point search ----------------------------------------------------------------


@dataclass
class SpecialPointReport:
    """Net maximizer of the local solid mass and its control constant."""

    rho: float
    net_size: int
    best_point: np.ndarray
    best_parameter: float
    ball_mass: float
    total_mass: float
    net_masses: np.ndarray = dfield(repr=False, default=None)

    @property
    def constant(self):
        # total <= C_* rho^{-(2n-1)} ball integral, n = 2
        return self.total_mass / (self.rho ** (-3.0) * self.ball_mass)


def boundary_net(curve, spacing, probe=8192):
    """Curve parameters of an equal-arclength net with the given spacing."""
    if spacing >= curve.perimeter / 2:
        raise ValueError("net spacing must be below half the perimeter")
    m = int(np.ceil(curve.perimeter / spacing))
    tg = np.linspace(0.0, TWO_PI, probe, endpoint=False)
    cum = np.concatenate([[0.0], np.cumsum(curve.speed(tg)) * (TWO_PI / probe)])
    targets = curve.perimeter * np.arange(m) / m
    return np.interp(targets, cum[:-1], tg)


def special_point_search(pair, rho, total=None, n_r=48, n_theta=256):
    """Exhaustive rho/2-net search for the boundary point whose rho-ball
    carries the largest share of the squared mass of the extension."""
    curve = pair.curve
    if rho >= curve.max_tube_halfwidth():
        raise ValueError("net ball radius must stay below the tube half-width")
    t_net = boundary_net(curve, rho / 2.0)
    pts = curve.point(t_net)
    masses = np.array(
        [clipped_ball_mass(pair, p, rho, n_r=n_r, n_theta=n_theta) for p in pts]
    )
    best = int(np.argmax(masses))
    if total is None:
        total = domain_mass(pair)
    return SpecialPointReport(
        rho=float(rho),
        net_size=len(t_net),
        best_point=pts[best],
        best_parameter=float(t_net[best]),
        ball_mass=float(masses[best]),
        total_mass=float(total),
        net_masses=masses,
    )


# -- boundary controls solid ---------------------------------------------------------------


@dataclass
class BoundarySolidReport:
    """Both sides of the boundary-controls-solid inequality at one center."""

    center: np.ndarray
    r: float
    eigenvalue: float
    boundary_side: float
    solid_side: float

    @property
    def constant(self):
        """Empirical exponent constant: log2 deficit divided by lambda^5."""
        if self.boundary_side >= self.solid_side:
            return 0.0
        lam5 = max(self.eigenvalue, 1e-300) ** 5
        return float(np.log2(self.solid_side / self.boundary_side) / lam5)


def boundary_controls_solid_check(pair, center, r):
    """Boundary mass at radius r/lambda against (lambda/r) times the solid
    mass at 2r/lambda, recording the empirical doubling-type constant."""
    lam = pair.eigenvalue
    if lam <= 0:
        raise ValueError("requires a positive eigenvalue")
    if 2 * r / lam >= pair.curve.max_tube_halfwidth():
        raise ValueError("solid ball leaves the tube: shrink r")
    center = np.asarray(center, dtype=float)
    lhs = boundary_mass(pair, center, r / lam)
    solid = clipped_ball_mass(pair, center, 2 * r / lam)
    rhs = (lam / r) * solid
    return BoundarySolidReport(
        center=center,
        r=float(r),
        eigenvalue=float(lam),
        boundary_side=float(lhs),
        solid_side=float(rhs),
    )
