import numpy as np
import pytest

from steklab import geometry
from steklab.errors import OutOfDomainError, SolverError
from steklab.steklov import (
    SpectrumSlice,
    build_dtn,
    interior_sup_bound_check,
    solve_spectrum,
)

from conftest import disk_mode_coefficients


def disk_exact_eigenvalues(count):
    vals = [0.0]
    k = 1
    while len(vals) < count:
        vals.extend([float(k), float(k)])
        k += 1
    return np.array(vals[:count])


class TestDtn:
    def test_disk_symbol(self, disk_curve):
        # on the unit circle the operator maps cos(kt) -> k cos(kt)
        dtn = build_dtn(disk_curve, 256)
        t = dtn.t
        for k in [1, 3, 10]:
            f = np.cos(k * t)
            assert np.allclose(dtn.L @ f, k * f, atol=1e-10)
        assert np.allclose(dtn.L @ np.ones_like(t), 0.0, atol=1e-10)

    def test_row_sums_annihilate_constants(self, ellipse_curve):
        dtn = build_dtn(ellipse_curve, 256)
        assert np.max(np.abs(dtn.L @ np.ones(256))) < 1e-9

    def test_odd_node_count_rejected(self, disk_curve):
        with pytest.raises(ValueError):
            build_dtn(disk_curve, 257)

    def test_symmetrized_is_symmetric(self, ellipse_curve):
        dtn = build_dtn(ellipse_curve, 256)
        A = dtn.symmetrized()
        assert np.max(np.abs(A - A.T)) < 1e-9


class TestSpectrum:
    def test_disk_eigenvalues(self, disk_spectrum):
        lam = disk_spectrum.eigenvalues
        assert np.max(np.abs(lam - disk_exact_eigenvalues(81))) < 1e-10

    def test_normalization(self, disk_spectrum):
        dtn = disk_spectrum.dtn
        for j in [0, 5, 40]:
            f = disk_spectrum[j].trace
            assert np.sum(dtn.weights * f**2) == pytest.approx(1.0, rel=1e-12)

    def test_residuals_small(self, ellipse_spectrum):
        for pair in ellipse_spectrum:
            assert pair.residual < 1e-8 * max(pair.eigenvalue, 1.0)

    def test_spectral_accuracy_vs_node_count(self, disk_curve):
        # disk kernels are trigonometric polynomials, so every admissible
        # node count is already exact: errors either decrease geometrically
        # or sit below the rounding floor
        errs = []
        for N in [128, 256, 512]:
            lam = solve_spectrum(build_dtn(disk_curve, N), 21).eigenvalues
            errs.append(np.max(np.abs(lam - disk_exact_eigenvalues(21))))
        for e_coarse, e_fine in zip(errs, errs[1:]):
            assert e_fine < 0.5 * e_coarse or e_fine < 1e-10

    def test_ellipse_selfconvergence(self, ellipse_curve, ellipse_spectrum):
        lam_coarse = solve_spectrum(build_dtn(ellipse_curve, 384), 40).eigenvalues
        assert np.max(np.abs(lam_coarse - ellipse_spectrum.eigenvalues[:40])) < 1e-10

    def test_count_capped_by_resolution(self, disk_curve):
        dtn = build_dtn(disk_curve, 128)
        with pytest.raises(ValueError):
            solve_spectrum(dtn, 64)

    def test_scaling_invariance(self):
        # eigenvalues scale like 1/R
        lam1 = solve_spectrum(build_dtn(geometry.disk(1.0), 128), 9).eigenvalues
        lam2 = solve_spectrum(build_dtn(geometry.disk(2.0), 128), 9).eigenvalues
        assert np.allclose(lam2, lam1 / 2.0, atol=1e-10)

    def test_json_roundtrip(self, disk_curve):
        spec = solve_spectrum(build_dtn(disk_curve, 128), 7)
        restored = SpectrumSlice.from_json(spec.to_json())
        assert np.allclose(restored.eigenvalues, spec.eigenvalues, atol=1e-14)
        assert np.allclose(restored[3].trace, spec[3].trace)

    def test_json_hash_mismatch(self, disk_curve, ellipse_curve):
        import json

        spec = solve_spectrum(build_dtn(disk_curve, 128), 3)
        data = json.loads(spec.to_json())
        data["curve"] = json.loads(ellipse_curve.to_json())
        with pytest.raises(SolverError):
            SpectrumSlice.from_json(json.dumps(data))


class TestExtension:
    def test_disk_mode_values_and_gradients(self, disk_spectrum):
        # eigenfunction with lambda = k extends to a |z|^k harmonic
        pair = disk_spectrum[13]  # lambda = 7
        k = 7
        a, b, resid = disk_mode_coefficients(pair, k)
        assert resid < 1e-10
        rng = np.random.default_rng(5)
        r = rng.uniform(0.05, 1.05, 60)
        th = rng.uniform(0, 2 * np.pi, 60)
        pts = np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
        v, g = pair.evaluate_many(pts)
        z = pts[:, 0] + 1j * pts[:, 1]
        exact = a * np.real(z**k) + b * np.imag(z**k)
        dz = k * z ** (k - 1)
        gx = a * np.real(dz) + b * np.imag(dz)
        gy = -a * np.imag(dz) + b * np.real(dz)
        assert np.max(np.abs(v - exact)) < 1e-10
        assert np.max(np.abs(g - np.stack([gx, gy], axis=1))) < 1e-9

    def test_constant_mode(self, disk_spectrum):
        pair = disk_spectrum[0]
        v, g = pair.evaluate_many(np.array([[0.3, -0.1], [0.0, 0.0]]))
        assert np.allclose(v, 1.0 / np.sqrt(2 * np.pi), atol=1e-11)
        assert np.max(np.abs(g)) < 1e-10

    def test_neumann_boundary_condition(self, ellipse_spectrum):
        # du/dnu = lambda u on the boundary, via gradients just inside
        pair = ellipse_spectrum[11]
        curve = pair.curve
        t = np.linspace(0, 2 * np.pi, 24, endpoint=False)
        x = curve.point(t)
        _, g = pair.evaluate_many(x)
        nd = np.einsum("ij,ij->i", g, curve.normal(t))
        f = pair.trace_at(t)
        scale = pair.eigenvalue * np.max(np.abs(f))
        assert np.max(np.abs(nd - pair.eigenvalue * f)) < 1e-8 * scale

    def test_cross_side_continuity(self, ellipse_spectrum):
        # the exterior continuation matches interior values across the
        # boundary to high order along the normal
        pair = ellipse_spectrum[7]
        curve = pair.curve
        t = np.linspace(0, 2 * np.pi, 16, endpoint=False)
        _, band = pair.extension_bands()
        s = 0.5 * band
        vi, _ = pair.evaluate_many(curve.point(t) - s * curve.normal(t))
        vo, _ = pair.evaluate_many(curve.point(t) + s * curve.normal(t))
        vb = pair.trace_at(t)
        # mean of the two sides approximates the trace to O(s^2) in the
        # Taylor series, far tighter than either side alone
        assert np.max(np.abs(vi + vo - 2 * vb)) < 10 * s**2 * np.max(np.abs(vb)) * (
            pair.eigenvalue**2
        )

    def test_outside_band_rejected(self, disk_spectrum):
        pair = disk_spectrum[5]
        with pytest.raises(OutOfDomainError):
            pair.evaluate(np.array([1.5, 0.0]))

    def test_laplace_residual_interior(self, ellipse_spectrum):
        # 5-point FD Laplacian at interior points is near zero
        pair = ellipse_spectrum[9]
        pts = np.array([[0.4, 0.2], [-0.9, -0.3], [1.2, 0.1]])
        h = 1e-3
        stencil = np.array(
            [[0.0, 0.0], [h, 0.0], [-h, 0.0], [0.0, h], [0.0, -h]]
        )
        for p in pts:
            v, _ = pair.evaluate_many(p[None, :] + stencil)
            lap = (v[1] + v[2] + v[3] + v[4] - 4 * v[0]) / h**2
            assert abs(lap) < 1e-5 * max(abs(v[0]), 1.0)


class TestInteriorBound:
    def test_disk_mode(self, disk_spectrum):
        rep = interior_sup_bound_check(disk_spectrum[3], (0.2, 0.1), 0.5)
        assert np.isfinite(rep.constant) and rep.constant > 0
        # sup over the half ball is bounded by sup over the full ball
        assert rep.sup_half <= rep.constant * rep.mean_sq_root + 1e-12

    def test_ball_must_fit(self, disk_spectrum):
        with pytest.raises(OutOfDomainError):
            interior_sup_bound_check(disk_spectrum[3], (0.8, 0.0), 0.5)
