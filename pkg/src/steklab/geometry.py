"""Smooth closed planar curves, tube neighborhoods, distance function, reflection map.

Curves are stored as truncated Fourier series for each coordinate, which keeps
gamma, gamma', gamma'' spectrally accurate and curvature exact up to truncation.
The sign convention for tube offsets is s < 0 inside the domain.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    CurvatureSingularityError,
    DegenerateCurveError,
    FootPointError,
    OutOfTubeError,
)

_REGULARITY_TOL = 1e-12


def _fourier_eval(coeffs, t, deriv=0):
    """Evaluate a0 + sum_k (a_k cos kt + b_k sin kt) or a derivative at t.

    coeffs is laid out [a0, a1, b1, a2, b2, ...].
    """
    t = np.asarray(t, dtype=float)
    a0 = coeffs[0]
    rest = coeffs[1:]
    n_modes = len(rest) // 2
    out = np.zeros_like(t)
    if deriv == 0:
        out += a0
    for k in range(1, n_modes + 1):
        a, b = rest[2 * (k - 1)], rest[2 * (k - 1) + 1]
        if a == 0.0 and b == 0.0:
            continue
        kt = k * t
        fac = float(k) ** deriv
        # d/dt cycles (cos, -sin, -cos, sin); sin cycles (sin, cos, -sin, -cos)
        phase = deriv % 4
        if phase == 0:
            out += fac * (a * np.cos(kt) + b * np.sin(kt))
        elif phase == 1:
            out += fac * (-a * np.sin(kt) + b * np.cos(kt))
        elif phase == 2:
            out += fac * (-a * np.cos(kt) - b * np.sin(kt))
        else:
            out += fac * (a * np.sin(kt) - b * np.cos(kt))
    return out


def _segments_intersect(p, q, r, s):
    """Vectorized proper-intersection test for segment batches p->q vs r->s."""

    def cross(o, a, b):
        return (a[..., 0] - o[..., 0]) * (b[..., 1] - o[..., 1]) - (
            a[..., 1] - o[..., 1]
        ) * (b[..., 0] - o[..., 0])

    d1 = cross(r, s, p)
    d2 = cross(r, s, q)
    d3 = cross(p, q, r)
    d4 = cross(p, q, s)
    return ((d1 * d2) < 0) & ((d3 * d4) < 0)


class BoundaryCurve:
    """Closed analytic curve gamma: [0, 2pi) -> R^2 given by Fourier coefficients.

    Validates at construction that the discrete curve is simple, regular and
    counterclockwise.
    """

    def __init__(self, fourier_x, fourier_y, name="", grid_size=1024):
        self.fourier_x = np.asarray(fourier_x, dtype=float)
        self.fourier_y = np.asarray(fourier_y, dtype=float)
        if len(self.fourier_x) % 2 == 0 or len(self.fourier_y) % 2 == 0:
            raise ValueError("coefficient layout is [a0, a1, b1, ...]: odd length")
        self.name = name
        self.grid_size = int(grid_size)
        self.n_modes = max(len(self.fourier_x), len(self.fourier_y)) // 2

        self._tgrid = np.linspace(0.0, 2 * np.pi, self.grid_size, endpoint=False)
        self._pgrid = self.point(self._tgrid)
        sp = self.speed(self._tgrid)
        if np.min(sp) <= _REGULARITY_TOL:
            raise DegenerateCurveError("parametrization is not regular on the grid")
        self._check_simple()

        # signed area via 0.5 * integral (x y' - y x') dt, trapezoid is spectral here
        x, y = self._pgrid[:, 0], self._pgrid[:, 1]
        dx = _fourier_eval(self.fourier_x, self._tgrid, 1)
        dy = _fourier_eval(self.fourier_y, self._tgrid, 1)
        self.area = 0.5 * np.mean(x * dy - y * dx) * 2 * np.pi
        if self.area <= 0:
            raise DegenerateCurveError("orientation must be counterclockwise")
        self.perimeter = float(np.mean(sp) * 2 * np.pi)
        self.diameter = float(
            np.max(self._pgrid[:, 0]) - np.min(self._pgrid[:, 0])
        )
        self.diameter = max(
            self.diameter,
            float(np.max(self._pgrid[:, 1]) - np.min(self._pgrid[:, 1])),
        )
        self.centroid = self._pgrid.mean(axis=0)

        # seed structures for foot-point searches (4x oversampled per design)
        self._tseed = np.linspace(0.0, 2 * np.pi, 4 * self.grid_size, endpoint=False)
        self._pseed = self.point(self._tseed)
        self._tree = cKDTree(self._pseed)
        self._seed_spacing = 2 * np.pi / len(self._tseed)

        kappa = self.curvature(self._tgrid)
        self.max_abs_curvature = float(np.max(np.abs(kappa)))
        self._delta_max = None

    # -- construction helpers -------------------------------------------------

    def _check_simple(self):
        pts = self._pgrid
        n = len(pts)
        p = pts
        q = np.roll(pts, -1, axis=0)
        # all segment pairs excluding self and neighbors
        i = np.arange(n)
        for off in range(2, n - 1):
            j = (i + off) % n
            mask = i < j  # avoid double-count and wrap-adjacency
            if off == n - 1:
                continue
            hit = _segments_intersect(p[i[mask]], q[i[mask]], p[j[mask]], q[j[mask]])
            if np.any(hit):
                raise DegenerateCurveError("curve self-intersects on the sample grid")

    # -- pointwise evaluation --------------------------------------------------

    def point(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack(
            [_fourier_eval(self.fourier_x, t), _fourier_eval(self.fourier_y, t)],
            axis=-1,
        )

    def velocity(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack(
            [_fourier_eval(self.fourier_x, t, 1), _fourier_eval(self.fourier_y, t, 1)],
            axis=-1,
        )

    def acceleration(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack(
            [_fourier_eval(self.fourier_x, t, 2), _fourier_eval(self.fourier_y, t, 2)],
            axis=-1,
        )

    def speed(self, t):
        return np.linalg.norm(self.velocity(t), axis=-1)

    def tangent(self, t):
        v = self.velocity(t)
        return v / np.linalg.norm(v, axis=-1, keepdims=True)

    def normal(self, t):
        """Outward unit normal for a counterclockwise curve."""
        tg = self.tangent(t)
        return np.stack([tg[..., 1], -tg[..., 0]], axis=-1)

    def curvature(self, t):
        v = self.velocity(t)
        a = self.acceleration(t)
        sp = np.linalg.norm(v, axis=-1)
        return (v[..., 0] * a[..., 1] - v[..., 1] * a[..., 0]) / sp**3

    # -- global geometric quantities -------------------------------------------

    def max_tube_halfwidth(self):
        """Largest delta for which (y, t) -> y + t nu(y) is injective.

        Brute-force reach estimate over the sample grid: the two-point bound
        |x - y|^2 / (2 |(y - x) . nu(x)|), capped by 1/max|kappa|.
        """
        if self._delta_max is not None:
            return self._delta_max
        pts = self._pgrid
        nu = self.normal(self._tgrid)
        best = 1.0 / self.max_abs_curvature
        n = len(pts)
        # chunk the pairwise scan to bound memory
        chunk = 256
        for start in range(0, n, chunk):
            blk = slice(start, min(start + chunk, n))
            d = pts[None, :, :] - pts[blk][:, None, :]  # (c, n, 2)
            dist2 = np.einsum("ijk,ijk->ij", d, d)
            dots = np.abs(np.einsum("ijk,ik->ij", d, nu[blk]))
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = dist2 / (2.0 * dots)
            ratio[dots < 1e-14] = np.inf
            ratio[dist2 < 1e-28] = np.inf
            best = min(best, float(np.min(ratio)))
        cap = 1.0 / self.max_abs_curvature
        if best > cap * (1.0 - 1e-9):
            best = cap  # pairwise scan matches the curvature bound to rounding
        self._delta_max = best
        return best

    # -- nearest point / signed distance ---------------------------------------

    def nearest_point_many(self, x, newton_steps=30):
        """Nearest-boundary-point parameters and signed offsets for points x.

        Returns (t, s, gap) where s = sign((x-gamma).nu) |x-gamma| (s < 0 inside)
        and gap = |x - gamma(t) - s nu(t)| measures foot-point consistency
        (it is ~0 exactly when x is within the reach).
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        _, idx = self._tree.query(x)
        t = self._tseed[idx].copy()
        max_step = 1.5 * self._seed_spacing
        for _ in range(newton_steps):
            g = self.point(t)
            v = self.velocity(t)
            a = self.acceleration(t)
            diff = x - g
            f = np.einsum("ij,ij->i", diff, v)
            fp = -np.einsum("ij,ij->i", v, v) + np.einsum("ij,ij->i", diff, a)
            # fp vanishes on the medial axis (e.g. the disk center); the
            # stationarity residual f is zero there too, so hold position
            with np.errstate(divide="ignore", invalid="ignore"):
                step = np.where(np.abs(fp) > 1e-14, f / fp, 0.0)
            np.clip(step, -max_step, max_step, out=step)
            t -= step
            if np.max(np.abs(step)) < 1e-15:
                break
        t = np.mod(t, 2 * np.pi)
        g = self.point(t)
        v = self.velocity(t)
        diff = x - g
        resid = np.abs(np.einsum("ij,ij->i", diff, v))
        dist0 = np.linalg.norm(diff, axis=-1)
        vnorm = np.linalg.norm(v, axis=-1)
        # the dot product carries rounding noise of order eps * |x| * |v|,
        # which dominates the angle test for points very close to the curve
        floor = 1e-12 * max(self.diameter, 1.0) * vnorm
        if np.any(resid > np.maximum(1e-6 * dist0 * vnorm, floor)):
            raise FootPointError("foot-point Newton did not converge")
        nu = self.normal(t)
        dist = np.linalg.norm(diff, axis=-1)
        dot = np.einsum("ij,ij->i", diff, nu)
        s = np.where(dot >= 0, dist, -dist)
        gap = np.linalg.norm(diff - s[:, None] * nu, axis=-1)
        return t, s, gap

    def distance_to_boundary(self, x):
        """Unsigned distance from points x to the curve."""
        _, s, _ = self.nearest_point_many(x)
        return np.abs(s)

    # -- serialization -----------------------------------------------------------

    def to_json(self):
        return json.dumps(
            {
                "name": self.name,
                "fourier_x": list(self.fourier_x),
                "fourier_y": list(self.fourier_y),
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text, grid_size=1024):
        data = json.loads(text)
        return cls(
            data["fourier_x"], data["fourier_y"], name=data.get("name", ""),
            grid_size=grid_size,
        )

    def content_hash(self):
        import hashlib

        return hashlib.sha256(self.to_json().encode()).hexdigest()


# -- built-in curves -------------------------------------------------------------


def disk(radius=1.0, grid_size=1024):
    return BoundaryCurve(
        [0.0, radius, 0.0], [0.0, 0.0, radius], name=f"disk({radius})",
        grid_size=grid_size,
    )


def ellipse(a=2.0, b=1.0, grid_size=1024):
    return BoundaryCurve(
        [0.0, a, 0.0], [0.0, 0.0, b], name=f"ellipse({a},{b})", grid_size=grid_size
    )


def perturbed_disk(eps=0.1, m=3, grid_size=1024):
    """Radial graph r(theta) = 1 + eps*cos(m theta), written as Fourier series."""
    K = m + 1
    cx = np.zeros(2 * K + 1)
    cy = np.zeros(2 * K + 1)

    def add(coeffs, k, a=0.0, b=0.0):
        coeffs[2 * (k - 1) + 1] += a
        coeffs[2 * (k - 1) + 2] += b

    # x = cos t + eps/2 (cos (m+1)t + cos (m-1)t)
    add(cx, 1, a=1.0)
    add(cx, m + 1, a=eps / 2)
    # y = sin t + eps/2 (sin (m+1)t - sin (m-1)t)
    add(cy, 1, b=1.0)
    add(cy, m + 1, b=eps / 2)
    if m - 1 >= 1:
        add(cx, m - 1, a=eps / 2)
        add(cy, m - 1, b=-eps / 2)
    else:
        cx[0] += eps / 2  # cos(0 t) term when m = 1
        # sin(0 t) vanishes
    return BoundaryCurve(cx, cy, name=f"perturbed_disk({eps},{m})", grid_size=grid_size)


def builtin_curve(spec, grid_size=1024):
    """Resolve a built-in curve name like "disk", "ellipse(2,1)", "perturbed_disk(0.1,3)".

    The shell-friendly colon form "ellipse:2,1" is accepted as well.
    """
    spec = spec.strip()
    if ":" in spec and "(" not in spec:
        name, args = spec.split(":", 1)
        spec = f"{name}({args})"
    if spec == "disk":
        return disk(grid_size=grid_size)
    if spec.startswith("ellipse(") and spec.endswith(")"):
        a, b = (float(v) for v in spec[8:-1].split(","))
        return ellipse(a, b, grid_size=grid_size)
    if spec.startswith("perturbed_disk(") and spec.endswith(")"):
        eps, m = spec[15:-1].split(",")
        return perturbed_disk(float(eps), int(m), grid_size=grid_size)
    raise ValueError(f"unknown built-in curve: {spec!r}")


# -- curve sampling ops ------------------------------------------------------------


def curve_eval(curve, t):
    """Point, tangent, outward normal and signed curvature at parameter t."""
    t = np.asarray(t, dtype=float)
    sp = curve.speed(t)
    if np.any(sp <= _REGULARITY_TOL):
        raise DegenerateCurveError("non-regular point: |gamma'(t)| below tolerance")
    return curve.point(t), curve.tangent(t), curve.normal(t), curve.curvature(t)


def max_tube_halfwidth(curve):
    return curve.max_tube_halfwidth()


# -- tube neighborhood ----------------------------------------------------------------


@dataclass(frozen=True)
class TubePoint:
    """Tube coordinates of a point: nearest-boundary parameter and signed offset.

    s < 0 inside the domain, s > 0 outside.
    """

    t_foot: float
    s: float


class TubeNeighborhood:
    """Two-sided collar of half-width delta around the boundary curve."""

    def __init__(self, curve, delta):
        delta = float(delta)
        if delta <= 0:
            raise ValueError("delta must be positive")
        if curve.max_abs_curvature * delta >= 1.0:
            raise DegenerateCurveError(
                "tube half-width violates the curvature bound delta < 1/max|kappa|"
            )
        if delta > curve.max_tube_halfwidth():
            raise DegenerateCurveError(
                "tube half-width exceeds the injectivity radius of the normal map"
            )
        self.curve = curve
        self.delta = delta

    def locate_many(self, x):
        """Tube coordinates (t, s) for an array of points; raises if any leaves the tube."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        t, s, gap = self.curve.nearest_point_many(x)
        if np.any(np.abs(s) >= self.delta):
            raise OutOfTubeError("point outside the tube neighborhood")
        if np.any(gap > 1e-8 * max(self.curve.diameter, 1.0)):
            raise FootPointError("inconsistent foot point inside the tube")
        return t, s

    def locate(self, x):
        t, s = self.locate_many(np.asarray(x, dtype=float)[None, :])
        return TubePoint(float(t[0]), float(s[0]))

    def reconstruct(self, tp):
        t = np.atleast_1d(tp.t_foot)
        return (self.curve.point(t) + tp.s * self.curve.normal(t))[0]


def signed_distance(tube, x):
    """Tube coordinates of x; d(x) = |s| and the foot point is gamma(t_foot)."""
    return tube.locate(np.asarray(x, dtype=float))


def laplacian_of_distance(tube, x):
    """Delta d at an interior tube point: -kappa/(1 - kappa d) in the plane."""
    tp = tube.locate(np.asarray(x, dtype=float))
    if tp.s > 0:
        raise OutOfTubeError("laplacian_of_distance expects an interior point")
    d = -tp.s
    kappa = float(tube.curve.curvature(np.atleast_1d(tp.t_foot))[0])
    denom = 1.0 - kappa * d
    if abs(denom) < 1e-12:
        raise CurvatureSingularityError("1 - kappa*d below tolerance")
    return -kappa / denom


def reflect_many(tube, x):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    t, s = tube.locate_many(x)
    return tube.curve.point(t) - s[:, None] * tube.curve.normal(t)


def reflect(tube, x):
    """Reflection map y + t nu(y) -> y - t nu(y); an involution fixing the boundary."""
    return reflect_many(tube, np.asarray(x, dtype=float)[None, :])[0]


def reflection_jacobian(tube, x, step=None):
    """Jacobian of the reflection map by central finite differences.

    At boundary points the one-sided interior difference is used implicitly by
    the symmetric stencil since the map extends smoothly across the boundary.
    """
    x = np.asarray(x, dtype=float)
    h = step if step is not None else 1e-5 * tube.delta
    pts = np.array(
        [x + [h, 0], x - [h, 0], x + [0, h], x - [0, h]]
    )
    imgs = reflect_many(tube, pts)
    jac = np.empty((2, 2))
    jac[:, 0] = (imgs[0] - imgs[1]) / (2 * h)
    jac[:, 1] = (imgs[2] - imgs[3]) / (2 * h)
    return jac


def reflection_jacobian_closed(tube, x):
    """Closed-form reflection Jacobian in tube coordinates.

    At offset s the map stretches the tangential direction by
    (1 - kappa s)/(1 + kappa s) and flips the normal one.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    t, s = tube.locate_many(x)
    kappa = tube.curve.curvature(t)
    tg = tube.curve.tangent(t)
    nu = tube.curve.normal(t)
    mu = (1.0 - kappa * s) / (1.0 + kappa * s)
    jac = (
        mu[:, None, None] * tg[:, :, None] * tg[:, None, :]
        - nu[:, :, None] * nu[:, None, :]
    )
    return jac if jac.shape[0] > 1 else jac[0]
