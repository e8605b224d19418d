"""Zero counts of complex polynomials against the growth bound.

For an analytic function with f(0) = 1, the number of zeros in the half
ball is at most log2 of its sup on the unit ball. Polynomials make this
exactly checkable: the sup comes from a dense circle grid (overestimating
it only loosens the bound) and the zeros from the companion matrix, with a
residual check guarding against ill-conditioned root-finding.
"""

import numpy as np

from steklab.lab import complex_zero_case, run_complex_zero_oracle

# a hand-built case: f(z) = (1 - 4z)(1 - 3z) has both zeros inside |z| < 1/2
case = complex_zero_case(np.polynomial.polynomial.polymul([1, -4], [1, -3]))
print(f"(1-4z)(1-3z): {case.zero_count} zeros in B(0, 1/2), "
      f"bound N = {case.bound:.4f}, satisfied: {case.satisfied}")

# large coefficients force many interior zeros and a large sup in tandem
steep = complex_zero_case([1.0, 0.0, 0.0, 0.0, -10000.0])
print(f"1 - 10^4 z^4: {steep.zero_count} zeros, bound {steep.bound:.4f}")

# the seeded battery: 200 random polynomials of degree <= 12
report = run_complex_zero_oracle(count=200, max_degree=12, seed=42)
bounds = np.array([c.bound for c in report.cases])
counts = np.array([c.zero_count for c in report.cases])
print(f"\nbattery: {len(report.cases)} cases, {report.redraws} redraws, "
      f"{len(report.violations)} violations")
print(f"  zero counts: up to {counts.max()}, bounds up to {bounds.max():.2f}")
print(f"  tightest margin: {np.min(bounds - counts):.4f}")
