"""Resolvent kernel K, the reduced momentum equation with memory, and the
identities that tie them to the direct simulation.

All memory integrals use the trapezoid rule on the uniform grid t_j = j h.
The history sums sum_j f_{n-j} y_j are accumulated either directly (O(N^2),
the reference path) or blockwise with FFT convolutions for long horizons.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .field_sim import InitialField, TrajectoryRecord, _line_integral
from .kernels import KernelTable, grid_steps, kernel_prefactor, overlap, tail_switch
from .modes import ModeQuadrature, RadialRule, radial_measure
from .potentials import PotentialSpec, w_hat_zero

FFT_THRESHOLD = 10_000


class VolterraInstability(ArithmeticError):
    pass


class ModeResolutionError(ArithmeticError):
    pass


class GridMismatchError(ValueError):
    pass


class DomainError(ValueError):
    pass


# ------------------------------------------------------------ history sums

class HistorySum:
    """Running sums H_m = sum_{j<m} w_j f_{m-j} y_j with w_0 = 1/2, w_j = 1.

    Values are pushed in order; ``query(m)`` needs y_0..y_{m-1}.  With
    ``fft=True`` every completed block of ``block`` values is convolved with f
    once and added to an accumulator for all later indices.
    """

    def __init__(self, f, dim=None, block=512, fft=True):
        self.f = np.asarray(f, dtype=float)
        self.N = self.f.size - 1
        shape = (self.N + 1,) if dim is None else (self.N + 1, dim)
        self.y = np.zeros(shape)
        self.acc = np.zeros(shape)
        self.block = int(block)
        self.fft = bool(fft)
        self.c0 = 0
        self.n = 0
        self._fcol = self.f if dim is None else self.f[:, None]

    def push(self, value):
        self.y[self.n] = value
        self.n += 1
        if self.fft and self.n - self.c0 == self.block and self.n <= self.N:
            self._flush()

    def _flush(self):
        lo, hi = self.c0, self.n
        yb = self.y[lo:hi].copy()
        if lo == 0:
            yb[0] *= 0.5
        L = self.N + 1 - lo
        conv = fftconvolve(self._fcol[:L], yb, axes=0)[:L]
        self.acc[hi:] += conv[hi - lo:L]
        self.c0 = hi

    def query(self, m):
        if m != self.n:
            raise RuntimeError("history sum queried out of order")
        c0 = self.c0
        d = self.f[m - c0:0:-1] @ self.y[c0:m] if m > c0 else 0.0 * self.y[0]
        if c0 == 0 and m > 0:
            d = d - 0.5 * self.f[m] * self.y[0]
        return self.acc[m] + d


def trapezoid_convolution(f, y, h):
    """(f * y)(t_m) = int_0^{t_m} f(t_m - s) y(s) ds by the trapezoid rule, all m.

    Direct O(N^2) evaluation; used as the reference for solver identities."""
    f = np.asarray(f, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    for m in range(1, y.shape[0]):
        s = f[m::-1] @ y[: m + 1]
        out[m] = h * (s - 0.5 * (f[m] * y[0] + f[0] * y[m]))
    return out


# ------------------------------------------------------------ rule kernels

def rule_kernel(spec: PotentialSpec, radial: RadialRule, t):
    """f(t) and G(t) = int_0^t f exactly for the discrete radial measure."""
    t = np.asarray(t, dtype=float)
    mu = radial_measure(spec, radial)
    om = 0.5 * radial.k**2
    Z = kernel_prefactor(spec)
    f = np.empty(t.shape)
    G = np.empty(t.shape)
    flat = t.ravel()
    step = max(1, 2_000_000 // om.size)
    fo, Go = f.reshape(-1), G.reshape(-1)
    for lo in range(0, flat.size, step):
        ph = np.outer(flat[lo:lo + step], om)
        fo[lo:lo + step] = Z * (np.cos(ph) @ mu)
        Go[lo:lo + step] = Z * (np.sin(ph) @ (mu / om))
    return f, G


def kernel_table_from_rule(spec: PotentialSpec, radial: RadialRule, h, t_max) -> KernelTable:
    """KernelTable whose f is the discrete-rule kernel (for matched runs)."""
    n = grid_steps(h, t_max)
    t = h * np.arange(n + 1)
    f, _ = rule_kernel(spec, radial, t)
    Z = kernel_prefactor(spec)
    c_f = -0.25 * np.pi**-1.5 * Z * w_hat_zero(spec) ** 2
    try:
        ts, res = tail_switch(t, f, c_f, 2e-2)
    except ArithmeticError:
        ts, res = float("nan"), float("nan")
    return KernelTable(h, t, f, Z, c_f, ts, res, float("nan"), spec)


def check_rule_resolution(spec, quad: ModeQuadrature, t_max, tol=1e-6, n_check=41):
    """Compare the rule kernel with the adaptive overlap on [0, t_max]."""
    t = np.linspace(0.0, t_max, n_check)
    f, _ = rule_kernel(spec, quad.radial, t)
    ref = kernel_prefactor(spec) * np.real(overlap(spec, t))
    err = float(np.max(np.abs(f - ref)) / abs(ref[0]))
    if err > tol:
        raise ModeResolutionError(
            f"mode quadrature under-resolved: kernel error {err:.2e} > {tol:.0e}; add radial nodes")
    return err


# --------------------------------------------------------------- resolvent

def tauberian_coefficient(spec: PotentialSpec) -> float:
    """c with K_t ~ c t^(-1/2): 2 sqrt(pi) / (Z W_hat(0)^2)."""
    return 2.0 * np.sqrt(np.pi) / (kernel_prefactor(spec) * w_hat_zero(spec) ** 2)


@dataclass(frozen=True)
class KTable:
    h: float
    t: np.ndarray
    K: np.ndarray
    Kdot: np.ndarray
    c_K: float
    C_K: float
    kernel: KernelTable = field(repr=False, default=None)

    @property
    def T_renorm(self) -> float:
        """Smallest grid time after which K stays at or below 1/2."""
        above = np.nonzero(self.K > 0.5)[0]
        if above.size and above[-1] == self.K.size - 1:
            return float("inf")
        return float(self.t[above[-1] + 1]) if above.size else 0.0

    def columns(self):
        return ["t", "K", "Kdot"], [self.t, self.K, self.Kdot]


def fit_asymptote(t, K):
    """Least squares K ~ c t^(-1/2) + C t^(-1) over the final decade."""
    m = t >= t[-1] / 10.0
    A = np.stack([t[m] ** -0.5, 1.0 / t[m]], axis=1)
    (c, C), *_ = np.linalg.lstsq(A, K[m], rcond=None)
    return float(c), float(C)


def solve_K(kernel: KernelTable, method="auto", block=512, limit=10.0) -> KTable:
    """Implicit trapezoid integration of K' = -(f*K), K(0) = 1.

    The pair (K, z = K') is advanced with the trapezoid rule on both the ODE
    and the convolution, so z_m equals minus the trapezoid convolution at t_m.
    """
    if method not in ("auto", "direct", "fft"):
        raise ValueError(f"unknown method {method!r}")
    f, h = kernel.f, kernel.h
    N = f.size - 1
    use_fft = method == "fft" or (method == "auto" and N > FFT_THRESHOLD)
    K = np.zeros(N + 1)
    z = np.zeros(N + 1)
    K[0] = 1.0
    hist = HistorySum(f, block=block, fft=use_fft)
    hist.push(K[0])
    denom = 1.0 + 0.25 * h * h * f[0]
    for m in range(1, N + 1):
        S = -h * hist.query(m)
        if m == 1:
            # starting value from the Taylor series; f is even so f''(0) ~ 2(f_1 - f_0)/h^2
            f2 = 2.0 * (f[1] - f[0]) / (h * h)
            K[1] = 1.0 - 0.5 * f[0] * h * h + (f[0] ** 2 - f2) * h**4 / 24.0
        else:
            K[m] = (K[m - 1] + 0.5 * h * (z[m - 1] + S)) / denom
        z[m] = S - 0.5 * h * f[0] * K[m]
        if not abs(K[m]) <= limit:
            raise VolterraInstability(
                f"|K| exceeded {limit} at t={m * h:.4g}; use a smaller h")
        hist.push(K[m])
    c, C = fit_asymptote(kernel.t, K)
    return KTable(h, kernel.t, K, z, c, C, kernel)


def kdot_identity_residual(kt: KTable) -> float:
    """max_j |Kdot_j + (f*K)(t_j)| with an independent direct convolution."""
    conv = trapezoid_convolution(kt.kernel.f, kt.K, kt.h)
    return float(np.max(np.abs(kt.Kdot + conv)))


def settled_start(t, y):
    """Start of the window where y has stopped changing sign: twice the last
    sign change, and never before the final decade."""
    s = np.sign(y)
    flips = np.nonzero(s[1:] * s[:-1] <= 0)[0]
    last = t[flips[-1] + 1] if flips.size else t[1]
    return float(max(2.0 * last, t[-1] / 10.0))


def verify_kdot_decay(kt: KTable, window=None):
    """Power-law fit of |Kdot| on ``window`` (default: settled final window)."""
    from .analysis import fit_power_law
    if window is None:
        window = (settled_start(kt.t, kt.Kdot), float(kt.t[-1]))
    return fit_power_law(kt.t, np.abs(kt.Kdot), window)


# --------------------------------------------------------- reduced solver

@dataclass
class ReducedSolution:
    h: float
    t: np.ndarray
    P: np.ndarray
    X: np.ndarray
    L1: np.ndarray
    L2: np.ndarray
    N: np.ndarray
    f: np.ndarray
    G: np.ndarray
    I: np.ndarray
    mass: float
    linear_only: bool = False
    B0: np.ndarray | None = None
    warnings: list = field(default_factory=list)

    @property
    def rhs(self):
        return self.L1 + self.L2 + self.N

    def columns(self, finalform=None):
        nrm = lambda a: np.linalg.norm(a, axis=1)
        ff = np.full(self.t.size, np.nan) if finalform is None else finalform
        return (["t", "P_x", "P_y", "P_z", "P_abs", "L1_abs", "L2_abs", "N_abs",
                 "finalform_residual"],
                [self.t, *self.P.T, nrm(self.P), nrm(self.L1), nrm(self.L2), nrm(self.N), ff])


def _product_trapezoid_weights(om, h):
    """w0, w1 with int_0^h e^{-i om (h-s)} g(s) ds ~ w0 g(0) + w1 g(h) for linear g."""
    a = -1j * om * h
    small = np.abs(a) < 1e-3
    safe = np.where(small, 1.0, a)
    E1 = np.where(small, 1 + a / 2 + a**2 / 6 + a**3 / 24, np.expm1(safe) / safe)
    E2 = np.where(small, 0.5 + a / 3 + a**2 / 8 + a**3 / 30,
                  (np.exp(safe) * (safe - 1.0) + 1.0) / safe**2)
    return h * E2, h * (E1 - E2)


class _ModeTerms:
    """Per-mode state for N = B0 + N_a + N_b.

    B0 = 2 kappa Re sum c (-ik) W e^{ik.X} U_t beta0
    N_a = (4 kappa^2/M) Re sum c (-ik) W^2 k^-2 U_t int (ik.P)(e^{ik.(X_s - X_0)} - 1) ds
    N_b = -(4 kappa^2/M) Re sum c (-ik) W^2 k^-2 (e^{ik.X} A1 - A2)
    with A1 = int U_{t-s} (ik.P_s) e^{-ik.X_s} ds and A2 = int U_{t-s} (ik.P_s) ds.
    Re((-ik) v) = k Im(v), so every term reduces to one real product with k.
    """

    def __init__(self, spec, quad, beta0, X0, h):
        self.k = quad.kvec
        om = quad.omega
        self.U = np.exp(-1j * om * h)
        self.w0, self.w1 = _product_trapezoid_weights(om, h)
        self.Ca = 4.0 * spec.kappa**2 / spec.mass * quad.weight * quad.w_hat**2 / quad.kn**2
        self.cb = 2.0 * spec.kappa * quad.weight * quad.w_hat
        self.conj_phase0 = np.exp(-1j * (quad.kvec @ X0))
        self.Ub0 = beta0.modes(spec, quad, X0)
        self.Ut = np.ones(quad.size, complex)
        self.h = h
        n = quad.size
        self.A1 = np.zeros(n, complex)
        self.A2 = np.zeros(n, complex)
        self.Aa = np.zeros(n, complex)
        self.g = None

    def _sources(self, P, phase):
        kp = 1j * (self.k @ P)
        return kp * np.conj(phase), kp, kp * (phase * self.conj_phase0 - 1.0)

    def start(self, P, X):
        phase = np.exp(1j * (self.k @ X))
        self.g = self._sources(P, phase)
        st = (self.A1, self.A2, self.Aa, self.Ub0, self.Ut, self.g, phase)
        return st, self._total(st)

    def trial(self, P, X):
        phase = np.exp(1j * (self.k @ X))
        g = self._sources(P, phase)
        A1 = self.U * self.A1 + self.w0 * self.g[0] + self.w1 * g[0]
        A2 = self.U * self.A2 + self.w0 * self.g[1] + self.w1 * g[1]
        Aa = self.Aa + 0.5 * self.h * (self.g[2] + g[2])
        st = (A1, A2, Aa, self.U * self.Ub0, self.U * self.Ut, g, phase)
        return st, self._total(st)

    def _total(self, st):
        A1, A2, Aa, Ub0, Ut, _, phase = st
        v = self.cb * phase * Ub0 + self.Ca * (Ut * Aa - phase * A1 + A2)
        return v.imag @ self.k

    def b0(self, st):
        return (self.cb * st[6] * st[3]).imag @ self.k

    def commit(self, st):
        self.A1, self.A2, self.Aa, self.Ub0, self.Ut, self.g, _ = st


def solve_reduced_P(spec: PotentialSpec, beta0: InitialField, X0, P0, h, t_max,
                    quad: ModeQuadrature, linear_only=False, check_resolution=True,
                    resolution_tol=1e-6, iterations=6, fft=None) -> ReducedSolution:
    """Time-step P' = L1 + L2 + N with a trapezoid predictor-corrector.

    L1 = -int f(t-s) P_s ds and L2 = f(t) int_0^t P use the kernel of the mode
    rule; the nonlinear terms are carried by per-mode running accumulators.
    """
    n_steps = grid_steps(h, t_max)
    if not isinstance(beta0, InitialField):
        raise ValueError(f"unsupported beta_0 descriptor {beta0!r}")
    X0 = np.asarray(X0, dtype=float).copy()
    P0 = np.asarray(P0, dtype=float).copy()
    if not np.all(np.isfinite(P0)) or P0.shape != (3,):
        raise ValueError("P0 must be a finite 3-vector")
    if beta0.kind == "stationary" and beta0.theta != 0:
        raise ValueError("beta_0 must have finite weighted norm for the reduced equation")
    if check_resolution and not linear_only:
        check_rule_resolution(spec, quad, t_max, resolution_tol)
    t = h * np.arange(n_steps + 1)
    f, G = rule_kernel(spec, quad.radial, t)
    M = spec.mass
    shape = (n_steps + 1, 3)
    P, I, L1, L2, Nn, B0 = (np.zeros(shape) for _ in range(6))
    use_fft = (n_steps > FFT_THRESHOLD) if fft is None else fft
    hist = HistorySum(f, dim=3, fft=use_fft)
    modes = None if linear_only else _ModeTerms(spec, quad, beta0, X0, h)
    zero = np.zeros(3)

    P[0] = P0
    hist.push(P0)
    if modes is not None:
        st, Nn[0] = modes.start(P0, X0)
        B0[0] = modes.b0(st)
    R = Nn[0].copy()
    for m in range(1, n_steps + 1):
        H = -h * hist.query(m)
        Pm = P[m - 1] + h * R
        for it in range(iterations):
            Im = I[m - 1] + 0.5 * h * (P[m - 1] + Pm)
            l1 = H - 0.5 * h * f[0] * Pm
            l2 = f[m] * Im
            if modes is not None:
                st, nn = modes.trial(Pm, X0 + Im / M)
            else:
                nn = zero
            Rm = l1 + l2 + nn
            new = P[m - 1] + 0.5 * h * (R + Rm)
            change = np.max(np.abs(new - Pm))
            Pm = new
            if change <= 1e-14 * max(np.max(np.abs(new)), 1e-300):
                break
        if modes is not None:
            modes.commit(st)
            B0[m] = modes.b0(st)
        P[m], I[m], L1[m], L2[m], Nn[m] = Pm, Im, l1, l2, nn
        R = Rm
        if not np.all(np.isfinite(Pm)):
            raise VolterraInstability("non-finite momentum; use a smaller h")
        hist.push(Pm)
    X = X0 + I / M
    return ReducedSolution(h, t, P, X, L1, L2, Nn, f, G, I, M, linear_only, B0)


def duhamel_residual(sol: ReducedSolution, kt: KTable) -> float:
    """sup |P - (K P_0 + K*(L2 + N))| / sup |P| (resolvent form of the equation)."""
    if abs(kt.h - sol.h) > 1e-15 or kt.t.size < sol.t.size:
        raise GridMismatchError("K table and solution grids differ")
    n = sol.t.size
    K = kt.K[:n]
    forcing = sol.L2 + sol.N
    conv = trapezoid_convolution(K, forcing, sol.h)
    pred = K[:, None] * sol.P[0] + conv
    scale = max(np.max(np.abs(sol.P)), 1e-300)
    return float(np.max(np.abs(pred - sol.P)) / scale)


def integral_f_identity(kernel: KernelTable, spec: PotentialSpec | None = None):
    """Return (trapezoid int_0^T f, closed form via the resolvent of Delta).

    int_0^T f = Z 2 Re<W, (i Delta)^-1 (e^{i Delta T/2} - 1) W> because the
    constant term Re<W, (i Delta)^-1 W> vanishes."""
    from .kernels import kernel_integral
    spec = spec or kernel.spec
    trap = float(np.trapezoid(kernel.f, kernel.t))
    return trap, float(kernel_integral(spec, kernel.t_max))


# ------------------------------------------------------ split identity

@dataclass
class SplitTerms:
    t: np.ndarray
    L1: np.ndarray
    L2: np.ndarray
    B0: np.ndarray
    Na: np.ndarray
    Nb: np.ndarray

    @property
    def N(self):
        return self.B0 + self.Na + self.Nb

    @property
    def total(self):
        return self.L1 + self.L2 + self.N


def decompose_path(record: TrajectoryRecord, spec: PotentialSpec, quad: ModeQuadrature,
                   beta0: InitialField, z_scale=1.0) -> SplitTerms:
    """L1, L2 and N evaluated on a recorded (piecewise linear) path.

    The path must be recorded at every step.  ``z_scale`` multiplies the
    prefactor of the two linear terms (sensitivity probe).
    """
    if record.every != 1:
        raise GridMismatchError("decomposition needs a trajectory recorded at every step")
    h, M = record.h, spec.mass
    n = record.t.size
    X, Ph = record.X, record.P_half
    X0 = X[0]
    t = record.t
    f, G = rule_kernel(spec, quad.radial, t - t[0])
    om, k = quad.omega, quad.kvec
    U = np.exp(-1j * om * h)
    minus_ik = -1j * k
    Ca = 4.0 * spec.kappa**2 / M * quad.weight * quad.w_hat**2 / quad.kn**2
    cb = 2.0 * spec.kappa * quad.weight * quad.w_hat
    b0 = beta0.modes(spec, quad, X0)
    a2_unit = _line_integral(om, h, np.ones_like(U), U)

    dX = X - X0
    L2 = f[:, None] * M * dX
    dG = np.diff(G)
    L1 = np.zeros((n, 3))
    if n > 1:
        L1[1:] = -fftconvolve(dG[:, None], Ph, axes=0)[: n - 1]
    B0 = np.zeros((n, 3))
    Na = np.zeros((n, 3))
    Nb = np.zeros((n, 3))
    A1 = np.zeros(quad.size, complex)
    A2 = np.zeros(quad.size, complex)
    phase = np.exp(1j * (k @ X[0]))
    for j in range(n):
        Ut = np.exp(-1j * om * (t[j] - t[0]))
        B0[j] = np.real((cb * phase * Ut * b0) @ minus_ik)
        kd = k @ dX[j]
        Na[j] = 4.0 * spec.kappa**2 * np.real(
            (quad.weight * quad.w_hat**2 / quad.kn**2 * Ut * (np.expm1(1j * kd) - 1j * kd)) @ minus_ik)
        Nb[j] = -np.real((Ca * (phase * A1 - A2)) @ minus_ik)
        if j == n - 1:
            break
        kp = 1j * (k @ Ph[j])
        phase_next = np.exp(1j * (k @ X[j + 1]))
        v = Ph[j] / M
        A1 = U * A1 + kp * _line_integral(om - k @ v, h, np.conj(phase_next), np.conj(phase) * U)
        A2 = U * A2 + kp * a2_unit
        phase = phase_next
    return SplitTerms(t, z_scale * L1, z_scale * L2, B0, Na, Nb)


@dataclass(frozen=True)
class SplitReport:
    max_relative: float
    max_absolute: float
    residual: np.ndarray


def eval_split_identity(terms: SplitTerms, direct: TrajectoryRecord) -> SplitReport:
    """Compare the direct field force with L1 + L2 + N node by node.

    The relative residual is max_j |F_j - S_j| / max_j |F_j|."""
    if terms.t.shape != direct.t.shape or np.max(np.abs(terms.t - direct.t)) > 1e-12:
        raise GridMismatchError("decomposition and trajectory grids differ")
    res = np.linalg.norm(direct.force - terms.total, axis=1)
    scale = float(np.max(np.linalg.norm(direct.force, axis=1)))
    absmax = float(np.max(res))
    rel = 0.0 if absmax == 0.0 else absmax / scale
    return SplitReport(rel, absmax, res)


# -------------------------------------------------- renormalized identity

@dataclass(frozen=True)
class FinalFormReport:
    t: np.ndarray
    residual: np.ndarray
    lhs: np.ndarray
    terms: np.ndarray
    T: float

    @property
    def max_residual(self):
        return float(np.max(self.residual)) if self.residual.size else 0.0


def eval_finalform_residual(sol: ReducedSolution, kt: KTable, t_from=None) -> FinalFormReport:
    """|P_t (1 - K_t) - (T1 + T2 + T3 + T4)| for grid times t >= T.

    T1 = K_t int P_s (G(t-s) - G(t)) ds
    T2 = -int (K_{t-s} - K_t) f(s) int_s^t P du ds
    T3 = -Kdot_t int_0^t P
    T4 = int (K_{t-s} - K_t) N(s) ds
    """
    if abs(kt.h - sol.h) > 1e-15 or kt.t.size < sol.t.size:
        raise GridMismatchError("K table and solution grids differ")
    n_all = sol.t.size
    K, Kd = kt.K[:n_all], kt.Kdot[:n_all]
    T = kt.T_renorm
    if t_from is None:
        t_from = T
    i0 = int(np.searchsorted(sol.t, t_from - 1e-12))
    if np.any(K[i0:] >= 1.0):
        raise DomainError("requested times include K_t >= 1")
    h, P, I, f, G, N = sol.h, sol.P, sol.I, sol.f, sol.G, sol.N
    idx = np.arange(i0, n_all)
    res = np.zeros(idx.size)
    lhs = np.zeros((idx.size, 3))
    terms = np.zeros((idx.size, 4, 3))

    def trap(w, y):
        s = w @ y
        return h * (s - 0.5 * (w[0] * y[0] + w[-1] * y[-1]))

    for r, n in enumerate(idx):
        if n == 0:
            lhs[r] = P[0] * (1 - K[0])
            res[r] = np.linalg.norm(lhs[r] - 0.0)
            continue
        Krev = K[n::-1] - K[n]
        t1 = K[n] * trap(G[n::-1] - G[n], P[: n + 1])
        t2 = -trap(Krev * f[: n + 1], I[n] - I[: n + 1])
        t3 = -Kd[n] * I[n]
        t4 = trap(Krev, N[: n + 1])
        terms[r] = (t1, t2, t3, t4)
        lhs[r] = P[n] * (1.0 - K[n])
        res[r] = np.linalg.norm(lhs[r] - (t1 + t2 + t3 + t4))
    return FinalFormReport(sol.t[idx], res, lhs, terms, T)


# ---------------------------------------------------------- Banach norm

@dataclass(frozen=True)
class BanachNormParams:
    delta: float
    T: float

    def __post_init__(self):
        if not 0.0 < self.delta < 0.5:
            raise ValueError("delta must lie strictly inside (0, 1/2)")
        if not self.T > 0:
            raise ValueError("T must be positive")


def banach_norm(t, P, params: BanachNormParams) -> float:
    """sup_{t >= T} t^(1/2 + delta) |P_t|."""
    t = np.asarray(t, dtype=float)
    P = np.asarray(P, dtype=float)
    mag = np.abs(P) if P.ndim == 1 else np.linalg.norm(P, axis=1)
    m = t >= params.T
    if not np.any(m):
        raise ValueError("empty Banach-norm window")
    return float(np.max(t[m] ** (0.5 + params.delta) * mag[m]))


@dataclass(frozen=True)
class BanachReport:
    norm: float
    norm_half_horizon: float
    growth: float
    member: bool


def banach_membership(t, P, params: BanachNormParams, tol=0.05) -> BanachReport:
    """Horizon-doubling test: the norm on [T, T_max] vs on [T, T_max/2]."""
    t = np.asarray(t, dtype=float)
    full = banach_norm(t, P, params)
    half = t <= 0.5 * t[-1]
    part = banach_norm(t[half], np.asarray(P)[half], params)
    growth = full / part - 1.0
    return BanachReport(full, part, growth, growth <= tol)
