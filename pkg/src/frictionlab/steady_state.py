"""Golden-rule (Cerenkov) drag on a uniformly moving particle, the terminal
velocity under a constant force, the heuristic deceleration law and the
Bogoliubov dispersion utilities.

For a particle moving with velocity v through the ideal gas the emitted
field modes sit on the resonance k^2/2 = k.v; writing k = p + v this is the
sphere |p| = |v| and the drag reads

    F_drag(v) = 4 pi kappa^2 (2 pi)^-3 (|v|/2) int_{S^2} (|v| w + v) |W_hat(|v| w + v)|^2 dS(w).

The particle feels -F_drag.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .modes import _gauss_legendre, angular_rule
from .potentials import PotentialSpec, fourier_w, w_hat_zero


class NoRootError(ArithmeticError):
    pass


def drag_coefficient(spec: PotentialSpec) -> float:
    """a with F_drag ~ a |v| v for small v: 8 pi^2 kappa^2 (2 pi)^-3 W_hat(0)^2."""
    return 8.0 * np.pi**2 * spec.kappa**2 * (2 * np.pi) ** -3 * w_hat_zero(spec) ** 2


def _axial_rule(n_theta, n_phi, axis):
    x, wx = _gauss_legendre(n_theta)        # on [-1, 1]
    phi = 2 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    axis = axis / np.linalg.norm(axis)
    helper = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(axis, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    s = np.sqrt(1.0 - x**2)
    dirs = (x[:, None, None] * axis
            + (s[:, None] * np.cos(phi)[None, :])[..., None] * e1
            + (s[:, None] * np.sin(phi)[None, :])[..., None] * e2).reshape(-1, 3)
    w = np.outer(wx, np.full(n_phi, 2 * np.pi / n_phi)).ravel()
    return dirs, w


@dataclass(frozen=True)
class CerenkovResult:
    v: np.ndarray
    F_drag: np.ndarray
    small_v_model: np.ndarray

    @property
    def deviation(self) -> float:
        F = np.linalg.norm(self.F_drag)
        if F == 0:
            return 0.0
        return float(np.linalg.norm(self.F_drag - self.small_v_model) / F)

    @property
    def transverse(self) -> float:
        """|component of F_drag orthogonal to v| / |F_drag|."""
        F = np.linalg.norm(self.F_drag)
        if F == 0:
            return 0.0
        u = self.v / np.linalg.norm(self.v)
        return float(np.linalg.norm(self.F_drag - (self.F_drag @ u) * u) / F)


def cerenkov_force(spec: PotentialSpec, v, rule=("axial", 64, 8)) -> CerenkovResult:
    """Sphere integral of the golden-rule drag.

    ``rule`` is ("axial", n_theta, n_phi) for a product rule aligned with v,
    or ("lebedev", order) for a fixed spherical design.
    """
    v = np.asarray(v, dtype=float)
    speed = float(np.linalg.norm(v))
    a = drag_coefficient(spec)
    if speed == 0.0:
        z = np.zeros(3)
        return CerenkovResult(v, z, z)
    if rule[0] == "axial":
        dirs, w = _axial_rule(rule[1], rule[2], v)
    else:
        dirs, w = angular_rule(*rule)
    p = speed * dirs + v
    pn = np.linalg.norm(p, axis=1)
    integrand = p * (fourier_w(spec, pn) ** 2)[:, None]
    F = 4 * np.pi * spec.kappa**2 * (2 * np.pi) ** -3 * 0.5 * speed * (w @ integrand)
    return CerenkovResult(v, F, a * speed * v)


def terminal_velocity(spec: PotentialSpec, F, v_max=None, tol=1e-13, rule=("axial", 64, 8)):
    """Velocity along F at which the drag balances |F| (bisection in |v|)."""
    F = np.asarray(F, dtype=float)
    target = float(np.linalg.norm(F))
    if target == 0.0:
        return np.zeros(3)
    u = F / target
    drag = lambda s: float(np.linalg.norm(cerenkov_force(spec, s * u, rule).F_drag))
    if v_max is None:
        v_max = 1.2 * np.sqrt(target / drag_coefficient(spec)) + 1e-3
        while drag(v_max) < target and v_max < 2.0 / spec.width:
            v_max *= 1.5
    lo, hi = 0.0, float(v_max)
    if drag(hi) < target:
        raise NoRootError(f"no terminal velocity in bracket [0, {hi:.4g}]: drag {drag(hi):.4g} < |F| {target:.4g}")
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if drag(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi) * u


def decel_constant(spec: PotentialSpec) -> float:
    return drag_coefficient(spec) / spec.mass


def decel_profile(u0, spec: PotentialSpec, t):
    """u_t = (C t + 1/u0)^-1 from M u' = -a u^2."""
    if u0 <= 0:
        raise ValueError("u0 must be positive")
    return 1.0 / (decel_constant(spec) * np.asarray(t, dtype=float) + 1.0 / u0)


def drag_curve(spec: PotentialSpec, speeds, rule=("axial", 64, 8)):
    rows = [cerenkov_force(spec, np.array([0.0, 0.0, s]), rule) for s in speeds]
    Fm = np.array([np.linalg.norm(r.F_drag) for r in rows])
    model = np.array([np.linalg.norm(r.small_v_model) for r in rows])
    dev = np.array([r.deviation for r in rows])
    return ["v", "F_drag", "small_v_model", "deviation"], [np.asarray(speeds, float), Fm, model, dev]


# ---------------------------------------------------------------- dispersion

@dataclass(frozen=True)
class DispersionParams:
    lambda0: float = 0.0
    rho0: float = 1.0
    m: float = 1.0
    phi_hat: Callable | float = 0.0

    def __post_init__(self):
        if self.lambda0 < 0 or self.rho0 <= 0 or self.m <= 0:
            raise ValueError("need lambda0 >= 0, rho0 > 0, m > 0")

    def phi(self, k):
        val = self.phi_hat(k) if callable(self.phi_hat) else np.full(np.shape(k), float(self.phi_hat))
        val = np.asarray(val, dtype=float)
        if np.any(val < 0):
            raise ValueError("phi_hat must be of positive type")
        return val


def dispersion(params: DispersionParams, k):
    k = np.abs(np.asarray(k, dtype=float))
    rad = k**2 / (4 * params.m**2) + params.lambda0 * params.rho0 * params.phi(k) / params.m
    if np.any(rad < 0):
        raise ValueError("negative radicand in the dispersion law")
    return k * np.sqrt(rad)


def speed_of_sound(params: DispersionParams) -> float:
    return float(np.sqrt(params.lambda0 * params.rho0 * params.phi(0.0) / params.m))
