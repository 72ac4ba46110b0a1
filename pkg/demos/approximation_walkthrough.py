"""Approximating a controlled path by ones generated from piecewise-linear data."""
from fractions import Fraction

import numpy as np

from roughbundle.approximation import (
    approximate, convergence_study, dyadic_dissection, gamma, implied_control, smooth_approximation,
)
from roughbundle.controlled import compose, cp_distance, integral_remainder_rate, tautological
from roughbundle.drivers import oscillation_path, resample
from roughbundle.polynomials import Poly
from roughbundle.roughpath import GridPath, chen_defect, holder_norm, lift_piecewise_linear

raw = oscillation_path(1025, hurst=0.3, levels=9)
path = GridPath(raw.times, 0.3 * raw.values)
X = lift_piecewise_linear(path, alpha=0.3)
print(f"lift: N={X.N}, {len(X.forests)} forests, Chen defect {chen_defect(X):.1e}, norm {holder_norm(X):.3g}")

# Z = phi(x) as a controlled path, phi(y) = y^4/4 + y^3/3 - y
phi = Poly(1, {(4,): Fraction(1, 4), (3,): Fraction(1, 3), (1,): -1})
Z = compose(phi, [tautological(X, start=float(path.values[0, 0]))])

# the rough integral of Z, and how fast its local germ error decays;
# windows stay short against the domain, longer ones saturate at the path's amplitude
fit = integral_remainder_rate(Z, scales=(4, 8, 16, 32))
print(f"germ defect exponent {fit.slope:.2f} (controlled threshold {(X.N + 1) * X.alpha:.2f})")

# Z is itself Γ_X of some data f
f = implied_control(Z)
print("Γ_X(f) reproduces Z:", np.allclose(gamma(X, f).values, Z.values))

# cheaper data: affine on each interval of a dyadic mesh
for k in (2, 4, 6):
    A = approximate(Z, dyadic_dissection(len(X.times), k))
    print(f"mesh 2^-{k}: beta-distance {cp_distance(Z, A, 0.15):.4g}")

rep = convergence_study(Z, beta=0.15)
for level, theta, err in rep.rows():
    print(f"  level {level}  theta {theta:.4f}  error {err:.4g}")
print(f"slope {rep.fit.slope:.3f}, threshold {rep.threshold:.3f}, passed {rep.passed}")

# move the same data to smoother drivers; the β-norm sees every grid-scale wiggle, hence the budget
drivers = [lift_piecewise_linear(resample(path, m), 0.3) for m in (65, 257, 1025)]
sm = smooth_approximation(Z, drivers, delta=15.0)
print("budget", sm.budget, "mesh level", sm.level)
for m, e, ok in zip((65, 257, 1025), sm.errors, sm.certified):
    print(f"  {m:5d} samples: flat error {e:.4g}, within budget {ok}")
