"""Propagator overlap <W, exp(i Delta t/2) W>, the friction kernel f(t) and
its t^(-3/2) tail."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .modes import radial_measure, radial_nodes_for, radial_rule
from .potentials import PotentialSpec, k_cutoff, w_hat_zero

OVERLAP_TOL = 1e-9
_BLOCK = 256
TAIL_TOL = 2e-2


class QuadratureError(ArithmeticError):
    def __init__(self, message, achieved):
        super().__init__(f"{message} (estimated error {achieved:.3e})")
        self.achieved = achieved


class TailValidationError(ArithmeticError):
    def __init__(self, worst):
        super().__init__(f"tail model not within tolerance at the horizon; relative residual {worst:.3e}")
        self.worst = worst


def kernel_prefactor(spec: PotentialSpec) -> float:
    """Z = 4 kappa^2 / (3 M_0)."""
    return 4.0 * spec.kappa**2 / (3.0 * spec.mass)


def overlap_gaussian_exact(spec: PotentialSpec, t):
    """Closed form for the Gaussian family: A^2 s^6 (pi / (s^2 + i t/2))^(3/2)."""
    t = np.asarray(t, dtype=float)
    s2 = spec.width**2
    return spec.amplitude**2 * s2**3 * (np.pi / (s2 + 0.5j * t)) ** 1.5


def stationary_phase_coefficient(spec: PotentialSpec) -> complex:
    """Leading term of the overlap: coefficient of t^(-3/2).

    (2 pi)^-3 W_hat(0)^2 (2 pi / (i t))^(3/2) = W_hat(0)^2 (2 pi)^(-3/2) e^{-3 i pi/4} t^(-3/2).
    """
    return w_hat_zero(spec) ** 2 * (2 * np.pi) ** -1.5 * np.exp(-0.75j * np.pi)


def _sum_on_rule(spec, t, n, k_max, integrated=False):
    rule = radial_rule(k_max, n)
    mu = radial_measure(spec, rule)
    om = 0.5 * rule.k**2
    out = np.empty(t.size, dtype=complex)
    if not integrated and t.size > 2 * _BLOCK and np.allclose(np.diff(t), t[1] - t[0]):
        # uniform grid: exact exponentials per block times a shared power table
        powers = np.exp(-1j * np.outer((t[1] - t[0]) * np.arange(_BLOCK), om))
        for lo in range(0, t.size, _BLOCK):
            m = min(_BLOCK, t.size - lo)
            seed = np.exp(-1j * t[lo] * om) * mu
            out[lo:lo + m] = powers[:m] @ seed
        return out
    step = max(1, int(2_000_000 // n))
    for lo in range(0, t.size, step):
        tt = t[lo:lo + step]
        ph = np.outer(tt, om)
        if integrated:
            # int_0^tau e^{-i w s} ds = tau * phi(-w tau)
            out[lo:lo + step] = (tt[:, None] * _phi(-ph)) @ mu
        else:
            out[lo:lo + step] = np.exp(-1j * ph) @ mu
    return out


def _phi(z):
    """(e^{iz} - 1) / (iz), stable near z = 0."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-4
    safe = np.where(small, 1.0, z)
    val = np.expm1(1j * safe) / (1j * safe)
    series = 1.0 + 0.5j * z - z**2 / 6.0
    return np.where(small, series, val)


def _evaluate(spec, t, integrated, tol, check_every=1, single_rule=False):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    k_max = k_cutoff(spec)
    if single_rule:
        n_of = np.full(t.size, radial_nodes_for(k_max, float(t.max())))
    else:
        n_of = np.array([radial_nodes_for(k_max, tt) for tt in t])
    out = np.empty(t.size, dtype=complex)
    worst = 0.0
    for n in np.unique(n_of):
        idx = np.nonzero(n_of == n)[0]
        out[idx] = _sum_on_rule(spec, t[idx], n, k_max, integrated)
        chk = idx[::check_every]
        if chk.size:
            ref = _sum_on_rule(spec, t[chk], int(n * 1.25) + 32, k_max, integrated)
            scale = np.maximum(1.0, t[chk]) if integrated else 1.0
            worst = max(worst, float(np.max(np.abs(ref - out[chk]) / scale)))
    if worst > tol:
        raise QuadratureError("overlap quadrature did not converge", worst)
    return out, worst


def overlap(spec: PotentialSpec, t, tol=OVERLAP_TOL):
    """(2 pi)^-3 int |W_hat(k)|^2 exp(-i k^2 t/2) d^3k by radial quadrature.

    The node count grows with t so that the oscillating phase stays resolved;
    the estimate compares against a 25% finer rule.
    """
    out, _ = _evaluate(spec, t, False, tol)
    return complex(out[0]) if np.ndim(t) == 0 else out


def overlap_integral(spec: PotentialSpec, tau, tol=OVERLAP_TOL):
    """int_0^tau <W, exp(i Delta s/2) W> ds, i.e. 2 <W, (i Delta)^-1 (e^{i Delta tau/2} - 1) W>."""
    out, _ = _evaluate(spec, tau, True, tol)
    return complex(out[0]) if np.ndim(tau) == 0 else out


def kernel_integral(spec: PotentialSpec, tau, tol=OVERLAP_TOL):
    """G(tau) = int_0^tau f(s) ds."""
    return kernel_prefactor(spec) * np.real(overlap_integral(spec, tau, tol))


@dataclass(frozen=True)
class KernelTable:
    """f sampled on t_j = j h, with the fixed-exponent tail c_f t^(-3/2)."""

    h: float
    t: np.ndarray
    f: np.ndarray
    Z: float
    c_f: float
    t_switch: float
    tail_residual: float
    quad_error: float
    spec: PotentialSpec | None = None

    @property
    def t_max(self):
        return float(self.t[-1])

    @property
    def n_steps(self):
        return self.t.size - 1


def grid_steps(h, t_max) -> int:
    if h <= 0 or t_max <= 0:
        raise ValueError("h and t_max must be positive")
    n = int(round(t_max / h))
    if abs(n * h - t_max) > 1e-9 * t_max:
        raise ValueError(f"t_max/h = {t_max / h} is not an integer")
    return n


def friction_kernel(spec: PotentialSpec, h: float, t_max: float,
                    tol_tail=TAIL_TOL, validate_tail=True) -> KernelTable:
    """Tabulate f(t) = Z Re<W, e^{i Delta t/2} W> and validate its tail.

    With ``validate_tail=False`` a horizon too short for the tail leaves
    ``t_switch = nan`` instead of raising.
    """
    n = grid_steps(h, t_max)
    t = h * np.arange(n + 1)
    values, qerr = _evaluate(spec, t, False, OVERLAP_TOL, check_every=97, single_rule=True)
    Z = kernel_prefactor(spec)
    f = Z * values.real
    c_f = Z * stationary_phase_coefficient(spec).real
    try:
        t_switch, resid = tail_switch(t, f, c_f, tol_tail)
    except TailValidationError as exc:
        if validate_tail:
            raise
        t_switch, resid = float("nan"), exc.worst
    return KernelTable(h, t, f, Z, c_f, t_switch, resid, qerr, spec)


def tail_switch(t, f, c_f, tol):
    """First grid time after which |f t^{3/2}/c_f - 1| stays below ``tol``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(f * t**1.5 / c_f - 1.0)
    rel[0] = np.inf
    bad = np.nonzero(rel > tol)[0]
    if bad.size and bad[-1] == t.size - 1:
        raise TailValidationError(float(rel[-1]))
    i = 1 if not bad.size else bad[-1] + 1
    return float(t[i]), float(np.max(rel[i:]))


def kernel_tail(table: KernelTable, t):
    return table.c_f * np.asarray(t, dtype=float) ** -1.5


def write_kernel_csv(table: KernelTable, path):
    from .io import write_csv
    tail = np.where(table.t > 0, table.c_f * np.where(table.t > 0, table.t, 1.0) ** -1.5, np.nan)
    write_csv(path, ["t", "f", "tail_model_value"], [table.t, table.f, tail])
