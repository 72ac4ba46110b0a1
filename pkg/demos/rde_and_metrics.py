"""Solving an RDE and measuring distances on the bundle of controlled paths."""
from fractions import Fraction

import numpy as np

from roughbundle.approximation import SmoothControlData
from roughbundle.bundle import BundlePoint, TubeSpec, flat_distance, integrate_point, truncated_ns_distance, tube_contains
from roughbundle.drivers import oscillation_path
from roughbundle.polynomials import Poly
from roughbundle.rde import PolyVectorField, ito_lyons_stability, local_error_fit, solve_rde
from roughbundle.roughpath import GridPath, lift_piecewise_linear

# dY = Y dX along a smooth driver has the closed form Y_T = Y_0 exp(x_T - x_0)
t = np.linspace(0, 1, 1001)
x = np.sin(3 * t) + t / 2
X = lift_piecewise_linear(GridPath(t, x), 0.3)
sol = solve_rde(X, PolyVectorField.linear(1), [2.0])
print(f"exp check: {sol.Y[-1, 0]:.10f} vs {2 * np.exp(x[-1] - x[0]):.10f}")

# local order of the scheme for a nonlinear field in the plane
q = Fraction
field = PolyVectorField([
    [Poly(2, {(0, 1): q(1, 2), (2, 0): q(-1, 3)}), Poly(2, {(0, 0): 1})],
    [Poly(2, {(1, 0): 1}), Poly(2, {(1, 1): q(1, 4)})],
])
fit = local_error_fit(field, [0.3, -0.2], [1.0, -0.5], np.geomspace(0.01, 0.1, 6))
print(f"one-step error exponent {fit.slope:.2f} (N+1 = 4)")

# rough driver, affine fields, stability of the solution map
base = oscillation_path(257, 0.3, 8, dim=2)
Xr = lift_piecewise_linear(base, 0.3)
affine = PolyVectorField([
    [Poly(2, {(0, 1): q(1, 2), (0, 0): 1}), Poly(2, {(1, 0): q(-1, 2)})],
    [Poly(2, {(1, 0): q(1, 3)}), Poly(2, {(0, 0): 1, (0, 1): q(-1, 4)})],
])
y0 = np.array([0.1, -0.1])
for eps in (1e-1, 1e-2, 1e-3):
    r = ito_lyons_stability(y0, Xr, y0 + eps, Xr, affine)
    print(f"initial shift {eps:g}: ratio {r['ratio']:.3f}")

# bundle points: the lifted solution over two nearby drivers
bump = np.stack([np.sin(5 * base.times), np.cos(3 * base.times)], axis=1)
Xe = lift_piecewise_linear(GridPath(base.times, base.values + 1e-3 * bump), 0.3)
a = BundlePoint(solve_rde(Xr, affine, y0).lifted[0])
b = BundlePoint(solve_rde(Xe, affine, y0).lifted[0])
print(f"flat distance {flat_distance(a, b):.4g}")
print(f"after integration {flat_distance(integrate_point(a), integrate_point(b)):.4g}")

# a tube around the zero section over Xr
tube = TubeSpec(SmoothControlData.zeros_like(Xr), Xr, radius=0.5, epsilon=0.9)
print("inside the tube:", tube_contains(tube, a), tube_contains(tube, b))
print(f"truncated tube distance {truncated_ns_distance([tube], a, b):.4g}  (points outside every tube are not told apart)")
