"""Boundary nodal sets and local mass doubling.

The boundary trace of the j-th disk eigenfunction is a trigonometric of
order k, so it has exactly 2k sign changes. Away from the disk, zero counts
still grow linearly with the eigenvalue. Doubling exponents of the local
boundary mass distinguish extrema (exponent ~ 1) from nodal points
(exponent ~ 3) and stay bounded in terms of the eigenvalue.
"""

import numpy as np

from steklab import geometry, nodal
from steklab.steklov import build_dtn, solve_spectrum

disk = geometry.disk()
spectrum = solve_spectrum(build_dtn(disk, 512), 21)

# -- boundary zeros --------------------------------------------------------------

print("disk boundary zero counts (expect 2k):")
for j in (1, 5, 9, 19):
    pair = spectrum[j]
    rep = nodal.boundary_zeros(pair)
    print(f"  pair {j:2d} (lambda = {pair.eigenvalue:5.2f}): {rep.count} zeros, "
          f"{len(rep.tangential_flags)} tangential flags")

# -- doubling exponents at different centers -------------------------------------

pair = spectrum[9]  # lambda = 5
zeros = nodal.boundary_zeros(pair).zeros
t_extremum = pair.dtn.t[int(np.argmax(np.abs(pair.trace)))]

for label, t0 in (("extremum", t_extremum), ("nodal point", zeros[0])):
    center = disk.point(np.array([t0]))[0]
    rep = nodal.doubling_profile(pair, center, 0.005, 0.02, mode="boundary")
    print(f"\nboundary-mass doubling at a {label}:")
    for r, e in zip(rep.doubling_radii, rep.exponents):
        print(f"  r = {r:.4f}: exponent {e:.4f}")

# -- the special point -----------------------------------------------------------

# an exhaustive net search finds the boundary ball carrying the largest share
# of the squared mass; the recorded constant compares it with the total
rep = nodal.special_point_search(pair, rho=0.3, n_r=24, n_theta=128)
print(f"\nspecial point at rho = 0.3: t = {rep.best_parameter:.4f}, "
      f"ball mass {rep.ball_mass:.3e}, constant {rep.constant:.4f}")

# -- boundary controls solid -----------------------------------------------------

center = disk.point(np.array([0.7]))[0]
bc = nodal.boundary_controls_solid_check(pair, center, 1.0)
print(f"\nboundary-controls-solid at r = 1/lambda: "
      f"lhs {bc.boundary_side:.3e}, rhs {bc.solid_side:.3e}, "
      f"constant {bc.constant:.3e}")
