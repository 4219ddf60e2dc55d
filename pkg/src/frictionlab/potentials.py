"""Interaction potentials W and their Fourier transforms.

Fourier convention used throughout the package::

    W_hat(k) = int exp(-i k.x) W(x) d^3x,
    <f, g>   = (2 pi)^-3 int conj(f_hat) g_hat d^3k.

Natural units with atom mass m = 1.
"""
from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

FAMILIES = ("gaussian", "exponential_radial")

# radial Gauss-Legendre rule for transforms without a closed form, in units of
# the width; W decays like exp(-r/width) so 70 widths is far below roundoff
_R_EXTENT = 70.0
_N_RADIAL = 4000
_xr, _wr = np.polynomial.legendre.leggauss(_N_RADIAL)
_R_NODES = 0.5 * _R_EXTENT * (_xr + 1.0)
_R_WEIGHTS = 0.5 * _R_EXTENT * _wr


class PotentialError(ValueError):
    pass


@dataclass(frozen=True)
class PotentialSpec:
    """Physical scenario: profile W, coupling kappa = sqrt(rho_0), mass M_0.

    The raw constructor does not validate; use :func:`build_potential`.
    """

    family: str
    amplitude: float
    width: float
    kappa: float
    mass: float

    def radial(self, r):
        """W as a function of |x|."""
        r = np.asarray(r, dtype=float)
        if self.family == "gaussian":
            return self.amplitude * np.exp(-0.5 * (r / self.width) ** 2)
        if self.family == "exponential_radial":
            return self.amplitude / np.cosh(r / self.width)
        raise PotentialError(f"unknown family {self.family!r}")

    def to_dict(self):
        d = asdict(self)
        return {"family": d["family"], "amplitude": d["amplitude"],
                "width": d["width"], "kappa": d["kappa"], "mass": d["mass"]}


@dataclass(frozen=True)
class TabulatedPotential:
    """Radial profile given by samples; used for assumption checks only."""

    r: np.ndarray
    values: np.ndarray

    def radial(self, r):
        from scipy.interpolate import CubicSpline
        r = np.asarray(r, dtype=float)
        inside = CubicSpline(self.r, self.values)(np.clip(r, self.r[0], self.r[-1]))
        return np.where(r <= self.r[-1], inside, 0.0)


def build_potential(family, amplitude, width, kappa, mass) -> PotentialSpec:
    if family not in FAMILIES:
        raise PotentialError(f"family must be one of {FAMILIES}, got {family!r}")
    for name, value in (("amplitude", amplitude), ("width", width),
                        ("kappa", kappa), ("mass", mass)):
        if not np.isfinite(value) or value <= 0:
            raise PotentialError(f"{name} must be positive")
    return PotentialSpec(family, float(amplitude), float(width), float(kappa),
                         float(mass))


def potential_from_dict(d) -> PotentialSpec:
    try:
        return build_potential(d.get("family", "gaussian"), d["amplitude"],
                               d["width"], d["kappa"], d["mass"])
    except KeyError as exc:
        raise PotentialError(f"potential field missing: {exc.args[0]}") from None


def radial_transform(profile, k):
    """3D Fourier transform of a radial profile by Gauss-Legendre quadrature.

    ``W_hat(k) = 4 pi int_0^inf r^2 W(r) sin(kr)/(kr) dr``.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    scale = getattr(profile, "width", None)
    if scale is None:
        r, w = _table_rule(profile)
    else:
        r, w = scale * _R_NODES, scale * _R_WEIGHTS
    g = 4.0 * np.pi * r**2 * profile.radial(r) * w
    out = np.empty_like(k)
    for lo in range(0, k.size, 512):
        kk = k[lo:lo + 512]
        out[lo:lo + 512] = np.sinc(np.outer(kk, r) / np.pi) @ g
    return out


def _table_rule(profile):
    x, w = np.polynomial.legendre.leggauss(2000)
    rmax = float(profile.r[-1])
    return 0.5 * rmax * (x + 1.0), 0.5 * rmax * w


def fourier_w(spec: PotentialSpec, k):
    """W_hat(|k|) under the package convention; scalar in, scalar out."""
    karr = np.asarray(k, dtype=float)
    if np.any(karr < 0):
        raise PotentialError("k must be non-negative")
    if spec.family == "gaussian":
        s = spec.width
        out = spec.amplitude * (2 * np.pi * s * s) ** 1.5 * np.exp(-0.5 * (s * karr) ** 2)
    else:
        out = radial_transform(spec, karr.ravel()).reshape(karr.shape)
    return float(out) if out.ndim == 0 else out


def sech_transform_exact(spec: PotentialSpec, k):
    """Closed form of the exponential_radial transform (test oracle).

    For W = A sech(r/s): W_hat(k) = pi^4 A s^3 sech(q) tanh(q)/(2q) with
    q = pi k s / 2, and W_hat(0) = pi^4 A s^3 / 2.
    """
    k = np.asarray(k, dtype=float)
    s = spec.width
    q = 0.5 * np.pi * k * s
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(q > 1e-8, np.tanh(q) / np.where(q > 0, q, 1.0), 1.0 - q**2 / 3)
    return 0.5 * np.pi**4 * spec.amplitude * s**3 * ratio / np.cosh(q)


def sech_integral_series(spec: PotentialSpec, terms=200000):
    """int W d^3x for W = A sech(r/s) from the alternating series
    int_0^inf r^2 sech r dr = 4 sum_n (-1)^n / (2n+1)^3."""
    n = np.arange(terms)
    series = 4.0 * np.sum((-1.0) ** n / (2 * n + 1.0) ** 3)
    return 4 * np.pi * spec.amplitude * spec.width**3 * series


def w_hat_zero(spec) -> float:
    return float(np.atleast_1d(fourier_w(spec, 0.0))[0]) if isinstance(spec, PotentialSpec) \
        else float(radial_transform(spec, [0.0])[0])


def k_cutoff(spec: PotentialSpec, rel=1e-12) -> float:
    """Smallest k with |W_hat(k)|^2 below ``rel`` times its peak value."""
    if spec.family == "gaussian":
        return float(np.sqrt(-np.log(rel)) / spec.width)
    w0 = w_hat_zero(spec) ** 2
    lo, hi = 0.0, 1.0 / spec.width
    while fourier_w(spec, hi) ** 2 > rel * w0:
        hi *= 2.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if fourier_w(spec, mid) ** 2 > rel * w0:
            lo = mid
        else:
            hi = mid
    return hi


@dataclass
class AssumptionReport:
    smooth: bool
    exponential_decay: bool
    spherical: bool
    nonzero_mean: bool
    w_hat_zero: float

    @property
    def all_ok(self):
        return self.smooth and self.exponential_decay and self.spherical and self.nonzero_mean


def check_assumptions(spec) -> AssumptionReport:
    """Report on smoothness, exponential decay, spherical symmetry and
    W_hat(0) != 0 for a spec or a tabulated profile."""
    w0 = w_hat_zero(spec)
    if isinstance(spec, PotentialSpec):
        smooth = spec.family in FAMILIES
        decay = smooth and spec.width > 0
        scale = abs(spec.amplitude) * spec.width**3
    else:
        v = np.asarray(spec.values, dtype=float)
        r = np.asarray(spec.r, dtype=float)
        d2 = np.diff(v, 2) / np.diff(r)[:-1] ** 2
        smooth = bool(np.all(np.isfinite(d2)))
        tail = np.abs(v[-len(v) // 4:])
        decay = bool(tail.max() <= 1e-8 * max(np.abs(v).max(), 1e-300))
        scale = float(np.trapezoid(4 * np.pi * r**2 * np.abs(v), r))
    # tabulated data carry interpolation error, hence the looser threshold
    tol = 1e-10 if isinstance(spec, PotentialSpec) else 1e-6
    nonzero = abs(w0) > tol * max(scale, 1e-300)
    return AssumptionReport(smooth, decay, True, bool(nonzero), w0)
