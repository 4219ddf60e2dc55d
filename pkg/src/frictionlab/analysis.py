"""Power-law fits, tail coefficients and observed convergence orders."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MIN_SAMPLES = 20


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class FitResult:
    exponent: float
    coefficient: float
    window: tuple
    rms: float
    drift: float
    sub_exponents: tuple = field(default=())
    n_samples: int = 0

    def to_dict(self):
        return {"exponent": self.exponent, "coefficient": self.coefficient,
                "window": list(self.window), "rms": self.rms, "drift": self.drift,
                "sub_exponents": list(self.sub_exponents), "n_samples": self.n_samples}


def _select(t, y, window):
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    ta, tb = (float(t[0]), float(t[-1])) if window is None else map(float, window)
    if not ta < tb:
        raise FitError(f"empty window [{ta}, {tb}]")
    eps = 1e-12 * max(abs(tb), 1.0)
    m = (t >= ta - eps) & (t <= tb + eps)
    if m.sum() < MIN_SAMPLES:
        raise FitError(f"window [{ta}, {tb}] holds {int(m.sum())} samples, need {MIN_SAMPLES}")
    ts, ys = t[m], y[m]
    if np.any(ts <= 0):
        raise FitError("window must lie in t > 0")
    if np.any(~np.isfinite(ys)) or np.any(ys <= 0):
        raise FitError("series must be positive on the fit window")
    return ts, ys, (ta, tb)


def _loglog(ts, ys):
    x, z = np.log(ts), np.log(ys)
    # equal weight per unit of log t
    w = np.gradient(x) if x.size > 1 else np.ones(1)
    A = np.stack([x, np.ones_like(x)], axis=1)
    sw = np.sqrt(w)
    (p, c), *_ = np.linalg.lstsq(A * sw[:, None], z * sw, rcond=None)
    r = z - (p * x + c)
    rms = float(np.sqrt(np.sum(w * r * r) / np.sum(w)))
    return float(p), float(c), rms


def fit_power_law(t, y, window=None) -> FitResult:
    """Least-squares line through (ln t, ln y) on ``window``.

    Drift is the spread of exponents fitted separately on the three
    log-equal thirds of the window.
    """
    ts, ys, win = _select(t, y, window)
    p, c, rms = _loglog(ts, ys)
    edges = np.exp(np.linspace(np.log(ts[0]), np.log(ts[-1]), 4))
    subs = []
    for a, b in zip(edges[:-1], edges[1:]):
        m = (ts >= a) & (ts <= b)
        if m.sum() >= 3:
            subs.append(_loglog(ts[m], ys[m])[0])
    drift = float(max(subs) - min(subs)) if len(subs) > 1 else float("nan")
    return FitResult(p, float(np.exp(c)), win, rms, drift, tuple(subs), int(ts.size))


def tail_coefficient(t, y, p, window=None) -> float:
    """Median of y / t^p over the window."""
    ts, ys, _ = _select(t, y, window)
    return float(np.median(ys / ts**p))


def final_decade(t):
    t_end = float(np.asarray(t)[-1])
    return (t_end / 10.0, t_end)


def delta_from_exponent(exponent):
    """delta_fit = -exponent - 1/2 when positive, else 0 with a flag."""
    d = -exponent - 0.5
    return (d, True) if d > 0 else (0.0, False)


@dataclass(frozen=True)
class ConvergenceReport:
    order: float
    converged: bool
    differences: tuple

    def __str__(self):
        return "converged" if self.converged else f"order {self.order:.3f}"


def convergence_order(y_h, y_h2, y_h4, floor=1e-14) -> ConvergenceReport:
    """Observed order log2(|y_h - y_h2| / |y_h2 - y_h4|).

    Array inputs are compared in the max norm on common nodes.
    """
    a, b, c = (np.asarray(v, dtype=float) for v in (y_h, y_h2, y_h4))
    d1 = float(np.max(np.abs(a - b)))
    d2 = float(np.max(np.abs(b - c)))
    if d1 < floor or d2 < floor:
        return ConvergenceReport(float("nan"), True, (d1, d2))
    return ConvergenceReport(float(np.log2(d1 / d2)), False, (d1, d2))
