"""Metrics on the bundle of controlled paths over branched rough paths.

A point of the total space is a controlled path together with the rough
path it is controlled by. Two ways to measure distance are provided: the
flat distance, which adds the base distance to the cross-fiber distance,
and pseudometrics attached to tubes around sections X ↦ Γ_X(f).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .approximation import SmoothControlData, gamma
from .controlled import ControlledPath, cp_distance, cp_norm, rough_integral
from .primitives import PrimitiveBasis
from .roughpath import BranchedRoughPath, rp_distance


@dataclass
class BundlePoint:
    fiber: ControlledPath
    geometric_only: bool = False

    def __post_init__(self):
        if self.geometric_only and not self.base.geometric:
            raise ValueError("geometric mode accepts only lifts of piecewise-linear paths")

    @property
    def base(self) -> BranchedRoughPath:
        return self.fiber.reference


def flat_distance(x: BundlePoint, y: BundlePoint, alpha: float | None = None) -> float:
    """ρ_α(p(x), p(y)) + ⦀x; y⦀_α."""
    return rp_distance(x.base, y.base, alpha).distance + cp_distance(x.fiber, y.fiber, alpha)


def integrate_point(x: BundlePoint, label=None) -> BundlePoint:
    """The integration map, fibrewise: (X, Z) ↦ (X, ∫ Z dX^a)."""
    return BundlePoint(rough_integral(x.fiber, label), x.geometric_only)


@dataclass
class TubeSpec:
    """Tube of radius ``epsilon`` around the section X ↦ Γ_X(control), over a ball in the base."""

    control: SmoothControlData
    center: BranchedRoughPath
    radius: float
    epsilon: float
    basis: PrimitiveBasis | None = None

    def __post_init__(self):
        # both factors of the tube function stay below 1
        if not (0 < self.radius < 1 and 0 < self.epsilon < 1):
            raise ValueError("tube radius and epsilon must lie in (0, 1)")


def _tube_coordinates(spec: TubeSpec, b: BundlePoint, basis=None) -> tuple:
    rho = rp_distance(b.base, spec.center).distance
    section = gamma(b.base, spec.control, basis or spec.basis)
    gap = cp_norm(b.fiber - section)
    return rho, gap


def tube_contains(spec: TubeSpec, b: BundlePoint, basis=None) -> bool:
    """Strict inequalities: ρ(p(b), center) < r and ⦀b − Γ_{p(b)}(f)⦀ < ε."""
    rho, gap = _tube_coordinates(spec, b, basis)
    return rho < spec.radius and gap < spec.epsilon


def tube_function(spec: TubeSpec, b: BundlePoint, basis=None) -> float:
    """(r − ρ)(ε − ⦀b − γ(p(b))⦀) inside the tube, 0 outside."""
    rho, gap = _tube_coordinates(spec, b, basis)
    if rho < spec.radius and gap < spec.epsilon:
        return (spec.radius - rho) * (spec.epsilon - gap)
    return 0.0


def tube_pseudometric(spec: TubeSpec, x: BundlePoint, y: BundlePoint, basis=None) -> float:
    return abs(tube_function(spec, x, basis) - tube_function(spec, y, basis))


def truncated_ns_distance(specs: list, x: BundlePoint, y: BundlePoint, basis=None) -> float:
    """Σ_{m>=1} 2^{-m} min(1, d_m(x, y)) over a finite family of tubes."""
    return float(sum(2.0 ** -(m + 1) * min(1.0, tube_pseudometric(s, x, y, basis))
                     for m, s in enumerate(specs)))


def section_norm_gap(f: SmoothControlData, X: BranchedRoughPath, Xn: BranchedRoughPath, basis=None) -> dict:
    """|⦀Γ_{X_n}(f)⦀ − ⦀Γ_X(f)⦀| against ⦀f⦀ ρ_α(X_n, X)."""
    a = cp_norm(gamma(X, f, basis))
    b = cp_norm(gamma(Xn, f, basis))
    rho = rp_distance(X, Xn).distance
    fn = f.norm()
    return {"gap": abs(a - b), "scale": fn * rho, "ratio": abs(a - b) / (fn * rho) if fn * rho > 0 else float("nan")}
