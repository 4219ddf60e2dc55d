"""The contraction integrals Omega_1, Omega_2 and the admissible range of delta.

    Omega_1 = 1/((1 - 2d) pi) int_0^1 (r^-1/2 - r^-d) / ((1 + sqrt(1-r)) sqrt(1-r)) dr
    Omega_2 = 1/pi int_0^1 r^(1/2 - d) / ((1 + sqrt(1-r)) sqrt(1-r)) dr

Two independent routes: r = sin^2(theta) with composite Gauss-Legendre
graded toward theta = 0, and r = 1 - u^2 with Gauss-Jacobi weights that
absorb (1 - u)^a.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .modes import _gauss_legendre


class DomainError(ValueError):
    pass


@lru_cache(maxsize=8)
def _graded_rule(n=24, ratio=0.5, panels=56):
    """Composite Gauss-Legendre on [0, pi/2], panels shrinking geometrically at 0."""
    x, w = _gauss_legendre(n)
    edges = np.concatenate([[0.0], (0.5 * np.pi) * ratio ** np.arange(panels, -1, -1)])
    a, b = edges[:-1], edges[1:]
    th = (0.5 * (b - a)[:, None] * (x[None, :] + 1.0) + a[:, None]).ravel()
    wt = (0.5 * (b - a)[:, None] * w[None, :]).ravel()
    return th, wt


def _theta_route(delta, n=24):
    th, wt = _graded_rule(n)
    s, c = np.sin(th), np.cos(th)
    eps = 0.5 - delta
    # (1 - sin^{2 eps}) / (2 eps), exact limit -ln(sin) at eps = 0
    if eps == 0:
        g1 = -np.log(s)
    else:
        g1 = -np.expm1(2.0 * eps * np.log(s)) / (2.0 * eps)
    o1 = (2.0 / np.pi) * np.sum(wt * g1 / (1.0 + c))
    o2 = (2.0 / np.pi) * np.sum(wt * s ** (2.0 - 2.0 * delta) / (1.0 + c))
    return o1, o2


def _jacobi_integral(a, n):
    """int_0^1 2 (1 - u^2)^a / (1 + u) du with weight (1 - u)^a absorbed."""
    x, w = roots_jacobi(n, a, 0.0)
    u = 0.5 * (x + 1.0)
    return 2.0 ** (-a - 1.0) * np.sum(w * 2.0 * (1.0 + u) ** (a - 1.0))


def _jacobi_route(delta, n=80):
    if delta == 0.5:
        raise DomainError("the Jacobi route has no delta = 1/2 limit")
    o1 = (_jacobi_integral(-0.5, n) - _jacobi_integral(-delta, n)) / ((1.0 - 2.0 * delta) * np.pi)
    o2 = _jacobi_integral(0.5 - delta, n) / np.pi
    return o1, o2


@dataclass(frozen=True)
class OmegaValue:
    delta: float
    omega1: float
    omega2: float
    omega: float
    error: float


def omega(delta: float, limit_ok=False) -> OmegaValue:
    """(Omega_1, Omega_2, Omega) at delta in (0, 1/2), with an error estimate.

    ``limit_ok`` admits delta = 1/2 through the logarithmic limit of Omega_1.
    """
    delta = float(delta)
    upper_ok = delta <= 0.5 if limit_ok else delta < 0.5
    if not (delta > 0.0 and upper_ok):
        raise DomainError(f"delta = {delta} outside (0, 1/2)")
    o1, o2 = _theta_route(delta)
    r1, r2 = _theta_route(delta, n=32)
    err = max(abs(o1 - r1), abs(o2 - r2))
    return OmegaValue(delta, o1, o2, o1 + o2, err)


def omega_dual(delta: float):
    """Both routes side by side: ((o1, o2) by theta, (o1, o2) by Jacobi)."""
    return _theta_route(delta), _jacobi_route(delta)


@dataclass(frozen=True)
class OmegaResult:
    delta: np.ndarray
    omega1: np.ndarray
    omega2: np.ndarray
    omega: np.ndarray
    error: np.ndarray
    delta_star: float
    status: str          # "crossing", "all_admissible" or "none_admissible"

    def columns(self):
        return ["delta", "omega1", "omega2", "omega"], [self.delta, self.omega1, self.omega2, self.omega]

    def summary(self):
        return {"delta_star": self.delta_star, "status": self.status,
                "max_error_estimate": float(np.max(self.error))}


def delta_star(tol=1e-8, n_scan=64) -> tuple[float, str]:
    """sup{delta : Omega(delta) < 1} by a coarse scan followed by bisection."""
    grid = (np.arange(n_scan) + 0.5) / n_scan * 0.5
    vals = np.array([omega(d).omega for d in grid])
    ok = vals < 1.0
    if ok.all():
        return 0.5, "all_admissible"
    if not ok.any():
        return 0.0, "none_admissible"
    last = int(np.nonzero(ok)[0][-1])
    if last == n_scan - 1:
        lo, hi = grid[last], 0.5
        if omega(0.5, limit_ok=True).omega < 1.0:
            return 0.5, "all_admissible"
    else:
        lo, hi = grid[last], grid[last + 1]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if omega(mid, limit_ok=True).omega < 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), "crossing"


def omega_table(deltas=None, tol=1e-8) -> OmegaResult:
    if deltas is None:
        deltas = np.linspace(0.01, 0.49, 49)
    deltas = np.asarray(deltas, dtype=float)
    vals = [omega(d) for d in deltas]
    ds, status = delta_star(tol)
    return OmegaResult(deltas, np.array([v.omega1 for v in vals]), np.array([v.omega2 for v in vals]),
                       np.array([v.omega for v in vals]), np.array([v.error for v in vals]), ds, status)
