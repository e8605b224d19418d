"""Dirichlet-to-Neumann discretization and Steklov eigenpairs on a closed curve.

The harmonic extension is represented by a single-layer potential u = S[sigma].
The boundary operator uses a split of the log kernel into the periodic
singular part -(1/4pi) log(4 sin^2((t-tau)/2)), integrated exactly on
trigonometric interpolants through a circulant matrix, plus a smooth remainder
handled by the plain trapezoid rule. The kernel is rescaled by the curve
diameter so the single-layer matrix stays away from the unit-capacity
degeneracy.

Near and across the boundary the potential is evaluated through a Taylor
expansion in the normal offset whose coefficients are grid functions of the
boundary parameter, computed recursively from harmonicity in tube coordinates.
This also provides the thin-band harmonic continuation outside the domain.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConditioningError, OutOfDomainError, SolverError
from .geometry import BoundaryCurve

TWO_PI = 2.0 * np.pi

_TAYLOR_TERMS = 20
_MODE_FLOOR = 1e-14
_MAX_UPSAMPLE = 16
_RESOLUTION_FACTOR = 40.0  # target exp(-40) quadrature tail


def _log_circulant(N):
    """Circulant matrix applying f -> -(1/4pi) int log(4 sin^2((t-tau)/2)) f(tau) dtau.

    Exact on trigonometric polynomials of degree < N/2: the operator has Fourier
    symbol 1/(2|m|) for m != 0 and 0 for m = 0.
    """
    m = np.fft.fftfreq(N, 1.0 / N)
    symbol = np.zeros(N)
    nz = m != 0
    symbol[nz] = 1.0 / (2.0 * np.abs(m[nz]))
    col = np.real(np.fft.ifft(symbol))
    idx = (np.arange(N)[:, None] - np.arange(N)[None, :]) % N
    return col[idx]


class DtnDiscretization:
    """Dense Nystrom discretization of the Dirichlet-to-Neumann map."""

    def __init__(self, curve: BoundaryCurve, N: int):
        if N % 2 != 0 or N < 64:
            raise ValueError("node count must be even and at least 64")
        self.curve = curve
        self.N = N
        self.t = np.linspace(0.0, TWO_PI, N, endpoint=False)
        self.points = curve.point(self.t)
        self.speed = curve.speed(self.t)
        self.tangents = curve.tangent(self.t)
        self.normals = curve.normal(self.t)
        self.kappa = curve.curvature(self.t)
        self.weights = (TWO_PI / N) * self.speed
        self.kernel_scale = 2.0 * curve.diameter

        self._build()

    def _build(self):
        N, t = self.N, self.t
        pts = self.points
        R = self.kernel_scale

        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.linalg.norm(diff, axis=-1)
        np.fill_diagonal(dist, 1.0)

        # smooth remainder of the log kernel
        dt = t[:, None] - t[None, :]
        sin_half = np.abs(2.0 * np.sin(0.5 * dt))
        np.fill_diagonal(sin_half, 1.0)
        Ks = -(1.0 / TWO_PI) * np.log(dist / sin_half) + np.log(R) / TWO_PI
        np.fill_diagonal(Ks, -(1.0 / TWO_PI) * np.log(self.speed) + np.log(R) / TWO_PI)

        C = _log_circulant(N)
        self.S = (C + (TWO_PI / N) * Ks) * self.speed[None, :]

        # adjoint double layer: kernel -(1/2pi) (x-y).nu(x)/|x-y|^2, smooth on
        # an analytic curve with diagonal limit -kappa/(4pi)
        dots = np.einsum("ijk,ik->ij", diff, self.normals)
        Kp = -(1.0 / TWO_PI) * dots / dist**2
        np.fill_diagonal(Kp, -self.kappa / (2.0 * TWO_PI))
        self.Kprime = Kp * self.speed[None, :] * (TWO_PI / N)

        cond = np.linalg.cond(self.S)
        if not np.isfinite(cond) or cond > 1e12:
            raise ConditioningError(
                f"single-layer matrix condition number {cond:.3e}; "
                "rescale the domain away from unit logarithmic capacity"
            )
        self._S_lu = scipy.linalg.lu_factor(self.S)
        self.L = (0.5 * np.eye(N) + self.Kprime) @ scipy.linalg.lu_solve(
            self._S_lu, np.eye(N)
        )

    def solve_density(self, f):
        """Single-layer density sigma with S[sigma] = f on the nodes."""
        return scipy.linalg.lu_solve(self._S_lu, f)

    def symmetrized(self):
        """W^(1/2) L W^(-1/2) where W is the diagonal of arclength weights."""
        sqw = np.sqrt(self.weights)
        return self.L * (sqw[:, None] / sqw[None, :])


def build_dtn(curve, N):
    """Dense DtN matrix on N equispaced collocation nodes."""
    return DtnDiscretization(curve, int(N))


# -- eigenpairs --------------------------------------------------------------------


@dataclass
class SteklovEigenpair:
    """One Steklov eigenvalue with trace samples and single-layer density.

    Normalized so that the arclength integral of the squared trace is 1.
    """

    eigenvalue: float
    trace: np.ndarray
    density: np.ndarray
    residual: float
    dtn: DtnDiscretization = field(repr=False)
    index: int = 0
    _cont: dict = field(default_factory=dict, repr=False)

    @property
    def curve(self):
        return self.dtn.curve

    # -- trace as a function of the boundary parameter -------------------------

    def _trace_modes(self):
        if "modes" not in self._cont:
            N = self.dtn.N
            fhat = np.fft.fft(self.trace) / N
            kvec = np.fft.fftfreq(N, 1.0 / N).astype(int)
            keep = np.abs(fhat) > _MODE_FLOOR * max(np.max(np.abs(fhat)), 1e-300)
            # drop the unpaired Nyquist mode: it is below noise for resolved pairs
            keep &= np.abs(kvec) < N // 2
            self._cont["modes"] = (kvec[keep], fhat[keep])
        return self._cont["modes"]

    def trace_at(self, t):
        """Trigonometric interpolation of the boundary trace at parameters t."""
        t = np.asarray(t, dtype=float)
        kvec, fhat = self._trace_modes()
        return np.real(np.exp(1j * np.outer(t, kvec)) @ fhat)

    def trace_spectrum_cutoff(self):
        kvec, _ = self._trace_modes()
        return int(np.max(np.abs(kvec))) if len(kvec) else 0

    # -- normal Taylor continuation ---------------------------------------------

    def _continuation(self):
        """Taylor coefficients (in the signed normal offset) of the extension.

        Coefficient m is stored as a filtered Fourier spectrum over the node
        grid. Recursion from Laplace's equation in tube coordinates where the
        metric factor is speed(t) * (1 + kappa(t) s).
        """
        if "taylor" in self._cont:
            return self._cont["taylor"]
        dtn = self.dtn
        N = dtn.N
        kvec = np.fft.fftfreq(N, 1.0 / N).astype(int)
        ik = 1j * kvec
        lam = self.eigenvalue

        def bandwidth(grid):
            spec = np.abs(np.fft.fft(grid)) / N
            keep = spec > 10 * _MODE_FLOOR * max(np.max(spec), 1e-300)
            keep &= np.abs(kvec) < N // 2
            return int(np.max(np.abs(kvec[keep]))) if np.any(keep) else 0

        k_geo = max(bandwidth(dtn.speed), bandwidth(dtn.speed * dtn.kappa))
        k_trace = self.trace_spectrum_cutoff()

        def filt(grid, level):
            # per-level relative floor plus a progressive bandwidth cap: the
            # exact coefficient at level m is band-limited to the trace
            # bandwidth broadened m times by the geometry spectrum, so
            # anything beyond that is grid noise that repeated t-derivatives
            # would amplify faster than the signal
            spec = np.fft.fft(grid) / N
            mx = np.max(np.abs(spec))
            if mx > 0:
                spec[np.abs(spec) < _MODE_FLOOR * mx] = 0.0
            cap = min(k_trace + (level + 1) * (k_geo + 2) + 8, N // 2 - 1)
            spec[np.abs(kvec) > cap] = 0.0
            return spec

        def ddt(grid):
            return np.fft.ifft(np.fft.fft(grid) * ik)

        a = dtn.speed.astype(complex)
        b = (dtn.speed * dtn.kappa).astype(complex)
        # Taylor coefficients of 1/H in s: e_i = (-b/a)^i / a
        ratio = -b / a
        e = [1.0 / a]
        for _ in range(_TAYLOR_TERMS):
            e.append(e[-1] * ratio)

        f0 = np.fft.ifft(filt(self.trace.astype(complex), 0) * N)
        c = [f0, lam * f0]
        for k in range(_TAYLOR_TERMS - 1):
            acc = np.zeros(N, dtype=complex)
            for j in range(k + 1):
                acc += e[k - j] * ddt(c[j])
            g = -ddt(acc)
            nxt = (g / (k + 1) - b * (k + 1) * c[k + 1]) / (a * (k + 2))
            nxt = np.fft.ifft(filt(nxt, k + 2) * N)
            c.append(nxt)

        specs = [filt(cm, m) for m, cm in enumerate(c)]
        active = np.zeros(N, dtype=bool)
        for spec in specs:
            active |= spec != 0
        kv = kvec[active]
        coeff = np.stack([spec[active] for spec in specs])  # (m, modes)
        self._cont["taylor"] = (kv, coeff)
        return self._cont["taylor"]

    def _taylor_eval(self, t, s):
        """Value and Cartesian gradient of the continuation at tube coords (t, s)."""
        kv, coeff = self._continuation()
        E = np.exp(1j * np.outer(t, kv))  # (P, modes)
        vals_m = np.real(E @ coeff.T)  # (P, m)
        dvals_m = np.real(E @ (coeff * (1j * kv)[None, :]).T)
        M = coeff.shape[0]
        powers = s[:, None] ** np.arange(M)[None, :]
        u = np.sum(vals_m * powers, axis=1)
        mrange = np.arange(1, M)
        dpowers = s[:, None] ** (mrange - 1)[None, :]
        u_s = np.sum(vals_m[:, 1:] * mrange[None, :] * dpowers, axis=1)
        u_t = np.sum(dvals_m * powers, axis=1)

        curve = self.curve
        tg = curve.tangent(t)
        nu = curve.normal(t)
        sp = curve.speed(t)
        kap = curve.curvature(t)
        H = sp * (1.0 + kap * s)
        grad = nu * u_s[:, None] + tg * (u_t / H)[:, None]
        return u, grad

    # -- layer-potential quadrature ----------------------------------------------

    def _source_table(self, factor):
        key = ("src", factor)
        if key not in self._cont:
            dtn = self.dtn
            Nf = dtn.N * factor
            tf = np.linspace(0.0, TWO_PI, Nf, endpoint=False)
            pts = self.curve.point(tf)
            sp = self.curve.speed(tf)
            if factor == 1:
                sig = self.density
            else:
                spec = np.fft.fft(self.density)
                sig = np.fft.ifft(_pad_spectrum(spec, Nf)).real
            self._cont[key] = (pts, sig * sp * (TWO_PI / Nf))
        return self._cont[key]

    def _layer_eval(self, x, factor):
        pts, charge = self._source_table(factor)
        R = self.dtn.kernel_scale
        diff = x[:, None, :] - pts[None, :, :]  # (P, Nf, 2)
        dist2 = np.einsum("pjk,pjk->pj", diff, diff)
        vals = -(1.0 / (2 * TWO_PI)) * (np.log(dist2) - 2 * np.log(R)) @ charge
        grad = -(1.0 / TWO_PI) * np.einsum("pjk,pj,j->pk", diff, 1.0 / dist2, charge)
        return vals, grad

    # -- public evaluation ---------------------------------------------------------

    def extension_bands(self):
        """(interior Taylor switch, exterior band half-width) in length units."""
        lam = max(self.eigenvalue, 1.0)
        delta = self.curve.max_tube_halfwidth()
        band_out = min(0.1 * delta, 0.5 / lam)
        # keep the interior Taylor band narrow: the series gradient loses
        # accuracy near 0.3 delta while the upsampled layer quadrature is
        # already converged there
        s_taylor = min(0.5 / lam, 0.15 * delta)
        return s_taylor, band_out

    def evaluate_many(self, x, chunk=4096):
        """u and grad u at an array of points inside Omega or in the thin
        exterior extension band."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out_v = np.empty(len(x))
        out_g = np.empty((len(x), 2))
        for start in range(0, len(x), chunk):
            sl = slice(start, min(start + chunk, len(x)))
            v, g = self._evaluate_block(x[sl])
            out_v[sl] = v
            out_g[sl] = g
        return out_v, out_g

    def _evaluate_block(self, x):
        curve = self.curve
        t, s, _gap = curve.nearest_point_many(x)
        s_taylor, band_out = self.extension_bands()
        if np.any(s > band_out * (1 + 1e-12)):
            raise OutOfDomainError(
                "point beyond the exterior harmonic-extension band"
            )
        vals = np.empty(len(x))
        grads = np.empty((len(x), 2))
        near = s > -s_taylor  # includes all exterior points
        if np.any(near):
            v, g = self._taylor_eval(t[near], s[near])
            vals[near] = v
            grads[near] = g
        far = ~near
        if np.any(far):
            d = -s[far]
            sp_max = float(np.max(self.dtn.speed))
            need = _RESOLUTION_FACTOR * sp_max / (self.dtn.N * d)
            factors = np.minimum(
                _MAX_UPSAMPLE, 2 ** np.ceil(np.log2(np.maximum(need, 1.0)))
            ).astype(int)
            idx_far = np.where(far)[0]
            for f in np.unique(factors):
                sub = idx_far[factors == f]
                v, g = self._layer_eval(x[sub], int(f))
                vals[sub] = v
                grads[sub] = g
        return vals, grads

    def evaluate(self, x):
        v, g = self.evaluate_many(np.asarray(x, dtype=float)[None, :])
        return float(v[0]), g[0]

    def boundary_neumann(self):
        """Neumann trace at the nodes from the layer-potential jump relation."""
        return (0.5 * self.density + self.dtn.Kprime @ self.density)


def _pad_spectrum(spec, Nf):
    N = len(spec)
    out = np.zeros(Nf, dtype=complex)
    h = N // 2
    out[:h] = spec[:h]
    out[Nf - h:] = spec[N - h:]
    # split the Nyquist mode symmetrically
    out[h] = 0.5 * spec[h]
    out[Nf - h] += 0.5 * spec[h]
    return out * (Nf / N)


def evaluate_extension(pair, x):
    """Value and gradient of the harmonic extension of an eigenpair at x."""
    return pair.evaluate(x)


@dataclass
class SpectrumSlice:
    """Ascending Steklov eigenpairs with their discretization metadata."""

    pairs: list
    dtn: DtnDiscretization

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self):
        return len(self.pairs)

    def __getitem__(self, j):
        return self.pairs[j]

    @property
    def eigenvalues(self):
        return np.array([p.eigenvalue for p in self.pairs])

    def to_json(self):
        return json.dumps(
            {
                "curve": json.loads(self.dtn.curve.to_json()),
                "curve_hash": self.dtn.curve.content_hash(),
                "n_nodes": self.dtn.N,
                "eigenvalues": [p.eigenvalue for p in self.pairs],
                "traces": [p.trace.tolist() for p in self.pairs],
                "densities": [p.density.tolist() for p in self.pairs],
                "residuals": [p.residual for p in self.pairs],
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text, grid_size=1024):
        data = json.loads(text)
        curve = BoundaryCurve(
            data["curve"]["fourier_x"],
            data["curve"]["fourier_y"],
            name=data["curve"].get("name", ""),
            grid_size=grid_size,
        )
        if curve.content_hash() != data["curve_hash"]:
            raise SolverError("curve hash mismatch: stale spectrum cache")
        dtn = build_dtn(curve, data["n_nodes"])
        pairs = [
            SteklovEigenpair(
                eigenvalue=lam,
                trace=np.array(tr),
                density=np.array(de),
                residual=res,
                dtn=dtn,
                index=j,
            )
            for j, (lam, tr, de, res) in enumerate(
                zip(
                    data["eigenvalues"],
                    data["traces"],
                    data["densities"],
                    data["residuals"],
                )
            )
        ]
        return cls(pairs=pairs, dtn=dtn)


def solve_spectrum(dtn, count):
    """First `count` Steklov eigenpairs, ascending, arclength-normalized."""
    count = int(count)
    if count > dtn.N // 4:
        raise ValueError("requested more eigenpairs than the grid resolves (N/4)")
    A = dtn.symmetrized()
    As = 0.5 * (A + A.T)
    try:
        evals, evecs = scipy.linalg.eigh(As)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover
        raise SolverError(f"dense eigensolver failed: {exc}") from exc
    order = np.argsort(evals)
    evals = evals[order][:count]
    evecs = evecs[:, order][:, :count]
    if evals[0] < -1e-6:
        raise SolverError(f"spurious negative eigenvalue {evals[0]:.3e}")
    evals = np.maximum(evals, 0.0)

    sqw = np.sqrt(dtn.weights)
    pairs = []
    for j in range(count):
        f = evecs[:, j] / sqw
        norm = np.sqrt(np.sum(dtn.weights * f**2))
        f = f / norm
        # deterministic sign: largest-magnitude sample positive
        imax = int(np.argmax(np.abs(f)))
        if f[imax] < 0:
            f = -f
        lam = float(evals[j])
        resid = float(np.max(np.abs(dtn.L @ f - lam * f)))
        sigma = dtn.solve_density(f)
        pairs.append(
            SteklovEigenpair(
                eigenvalue=lam,
                trace=f,
                density=sigma,
                residual=resid,
                dtn=dtn,
                index=j,
            )
        )
    return SpectrumSlice(pairs=pairs, dtn=dtn)


# -- interior estimate check ----------------------------------------------------------


@dataclass
class InteriorBoundReport:
    center: np.ndarray
    radius: float
    sup_half: float
    mean_sq_root: float
    constant: float


def interior_sup_bound_check(pair, center, radius, n_radial=48, n_angular=128):
    """Empirical constant in sup_{B(r/2)} |u| <= C (mean of u^2 over B(r))^(1/2)."""
    center = np.asarray(center, dtype=float)
    gap = pair.curve.distance_to_boundary(center[None, :])[0]
    if gap <= radius:
        raise OutOfDomainError("ball not contained in the domain")

    nodes, wts = np.polynomial.legendre.leggauss(n_radial)
    r_nodes = 0.5 * radius * (nodes + 1.0)
    r_wts = 0.5 * radius * wts
    theta = np.linspace(0.0, TWO_PI, n_angular, endpoint=False)
    rr, tt = np.meshgrid(r_nodes, theta, indexing="ij")
    pts = center + np.stack([rr * np.cos(tt), rr * np.sin(tt)], axis=-1).reshape(-1, 2)
    vals, _ = pair.evaluate_many(pts)
    vals = vals.reshape(n_radial, n_angular)
    integral = np.sum((vals**2 * rr).sum(axis=1) * (TWO_PI / n_angular) * r_wts)
    mean_sq = integral / (np.pi * radius**2)

    half = 0.5 * radius
    rr2, tt2 = np.meshgrid(np.linspace(0, half, 32), theta, indexing="ij")
    pts2 = center + np.stack(
        [rr2 * np.cos(tt2), rr2 * np.sin(tt2)], axis=-1
    ).reshape(-1, 2)
    vals2, _ = pair.evaluate_many(pts2)
    sup_half = float(np.max(np.abs(vals2)))
    root = float(np.sqrt(mean_sq))
    return InteriorBoundReport(
        center=center,
        radius=radius,
        sup_half=sup_half,
        mean_sq_root=root,
        constant=sup_half / root if root > 0 else np.inf,
    )
