"""Direct simulation of the particle coupled to the free field.

The field is held as Fourier amplitudes on a :class:`ModeQuadrature`.  A step
is kick / (drift + field) / kick: during the middle substep the particle moves
on a straight line and every mode is advanced by the exact Duhamel integral
along that line, so the only discretisation error is in the kicks.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .modes import ModeQuadrature, mode_quadrature
from .potentials import PotentialSpec


class FieldConfigError(ValueError):
    pass


# ---------------------------------------------------------------- external

@dataclass(frozen=True)
class ExternalPotential:
    kind: str = "none"
    force: tuple = (0.0, 0.0, 0.0)
    center: tuple = (0.0, 0.0, 0.0)
    stiffness: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "constant_force", "harmonic"):
            raise FieldConfigError(f"unknown external potential {self.kind!r}")
        if self.stiffness < 0:
            raise FieldConfigError("stiffness must be non-negative")

    def force_at(self, X):
        if self.kind == "constant_force":
            return np.asarray(self.force, dtype=float)
        if self.kind == "harmonic":
            return -self.stiffness * (X - np.asarray(self.center, dtype=float))
        return np.zeros(3)

    def energy_at(self, X):
        if self.kind == "constant_force":
            return -float(np.dot(self.force, X))
        if self.kind == "harmonic":
            d = X - np.asarray(self.center, dtype=float)
            return 0.5 * self.stiffness * float(d @ d)
        return 0.0

    @classmethod
    def from_dict(cls, d):
        if d is None:
            return cls()
        d = dict(d)
        kind = d.pop("kind", "none")
        if "force" in d:
            d["force"] = tuple(float(x) for x in d["force"])
        if "center" in d:
            d["center"] = tuple(float(x) for x in d["center"])
        return cls(kind=kind, **d)


# ----------------------------------------------------------- initial field

@dataclass(frozen=True)
class InitialField:
    """Closed-form beta_0.

    kinds: ``zero``; ``gaussian`` packet a0 exp(-|x - x0|^2 / (2 s0^2));
    ``stationary`` theta * (-2 kappa (-Delta)^-1 W^{X_0}).
    """

    kind: str = "zero"
    amplitude: float = 0.0
    width: float = 1.0
    center: tuple = (0.0, 0.0, 0.0)
    theta: float = 1.0

    def __post_init__(self):
        if self.kind not in ("zero", "gaussian", "stationary"):
            raise FieldConfigError(f"unsupported beta_0 descriptor {self.kind!r}")
        if self.kind == "gaussian" and self.width <= 0:
            raise FieldConfigError("packet width must be positive")
        if self.kind == "stationary" and not 0.0 <= self.theta <= 1.0:
            raise FieldConfigError("theta must lie in [0, 1]")

    @classmethod
    def from_dict(cls, d):
        if d is None:
            return cls()
        d = dict(d)
        if "center" in d:
            d["center"] = tuple(float(x) for x in d["center"])
        return cls(**d)

    def modes(self, spec: PotentialSpec, quad: ModeQuadrature, X0):
        if self.kind == "zero":
            return np.zeros(quad.size, dtype=complex)
        if self.kind == "gaussian":
            s = self.width
            c = np.asarray(self.center, dtype=float)
            return (self.amplitude * (2 * np.pi * s * s) ** 1.5
                    * np.exp(-0.5 * (s * quad.kn) ** 2) * np.exp(-1j * (quad.kvec @ c)))
        return (-2.0 * self.theta * spec.kappa * quad.w_hat
                * np.exp(-1j * (quad.kvec @ np.asarray(X0, dtype=float))) / quad.kn**2)

    def weighted_norm(self, X0=(0.0, 0.0, 0.0)):
        """||<x - X_0>^3 beta_0||_2; infinite for the stationary profile."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "stationary":
            return 0.0 if self.theta == 0 else float("inf")
        # |beta_0|^2 is a Gaussian of variance s0^2/2 per axis and the weight a
        # degree-6 polynomial, so 4-point Gauss-Hermite per axis is exact
        s = self.width
        g, gw = np.polynomial.hermite.hermgauss(4)
        y = g * s
        c = np.asarray(self.center, dtype=float) - np.asarray(X0, dtype=float)
        Y = np.stack(np.meshgrid(y, y, y, indexing="ij"), axis=-1).reshape(-1, 3) + c
        Wt = np.einsum("i,j,k->ijk", gw, gw, gw).ravel() / np.pi**1.5
        moment = float(np.sum(Wt * (1.0 + np.sum(Y * Y, axis=1)) ** 3))
        return float(abs(self.amplitude) * np.sqrt((np.pi * s * s) ** 1.5 * moment))


# -------------------------------------------------------------------- state

@dataclass
class SimState:
    t: float
    X: np.ndarray
    P: np.ndarray
    beta: np.ndarray
    quad: ModeQuadrature
    spec: PotentialSpec
    external: ExternalPotential = field(default_factory=ExternalPotential)
    warnings: list = field(default_factory=list)

    def copy(self):
        return replace(self, X=self.X.copy(), P=self.P.copy(), beta=self.beta.copy(),
                       warnings=list(self.warnings))


def init_state(spec, beta0: InitialField, X0, P0, quad: ModeQuadrature,
               external: ExternalPotential | None = None, epsilon=None) -> SimState:
    X0 = np.asarray(X0, dtype=float).copy()
    P0 = np.asarray(P0, dtype=float).copy()
    if X0.shape != (3,) or P0.shape != (3,) or not np.all(np.isfinite(P0)):
        raise FieldConfigError("X0 and P0 must be finite 3-vectors")
    if not isinstance(beta0, InitialField):
        raise FieldConfigError(f"unsupported beta_0 descriptor {beta0!r}")
    warnings = []
    if epsilon is not None:
        norm = beta0.weighted_norm(X0)
        if norm > epsilon:
            warnings.append(f"weighted norm {norm:.3e} of beta_0 exceeds epsilon {epsilon:.3e}")
    return SimState(0.0, X0, P0, beta0.modes(spec, quad, X0), quad, spec,
                    external or ExternalPotential(), warnings)


def _pairing(state, phase_x):
    """(2 pi)^-3 sum w conj(-i k W_hat e^{-i k.X}) beta as a complex 3-vector."""
    q = state.quad
    amp = q.weight * q.w_hat * phase_x * state.beta
    return -1j * (amp @ q.kvec)


def force(state: SimState, phase_x=None) -> np.ndarray:
    """2 kappa int (grad W^X) Re beta, from the mode sum (field part only)."""
    if phase_x is None:
        phase_x = np.exp(1j * (state.quad.kvec @ state.X))
    return 2.0 * state.spec.kappa * np.real(_pairing(state, phase_x))


def energy(state: SimState) -> float:
    q = state.quad
    phase_x = np.exp(1j * (q.kvec @ state.X))
    kinetic = float(state.P @ state.P) / (2.0 * state.spec.mass)
    field_e = float(np.sum(q.weight * q.omega * np.abs(state.beta) ** 2))
    coupling = 2.0 * state.spec.kappa * float(np.real(np.sum(q.weight * q.w_hat * phase_x * state.beta)))
    return kinetic + state.external.energy_at(state.X) + field_e + coupling


def step(state: SimState, h: float, _cache=None) -> SimState:
    """One kick / drift+field / kick step of length h (returns a new state)."""
    if h <= 0:
        raise ValueError("h must be positive")
    new = state.copy()
    _advance(new, h)
    return new


def _advance(state: SimState, h: float, F_now=None, phase_x=None):
    """In-place step; returns (force_after, phase_after, P_half)."""
    q, spec = state.quad, state.spec
    if phase_x is None:
        phase_x = np.exp(1j * (q.kvec @ state.X))
    if F_now is None:
        F_now = force(state, phase_x)
    P_half = state.P + 0.5 * h * (F_now + state.external.force_at(state.X))
    v = P_half / spec.mass
    om, U = _propagator(q, h)
    X_new = state.X + h * v
    phase_new = np.exp(1j * (q.kvec @ X_new))
    # int_0^h U_{h-s} e^{-i k.(X + v s)} ds, written through the end-point phases
    src = _line_integral(om - q.kvec @ v, h, np.conj(phase_new), np.conj(phase_x) * U)
    state.beta = U * state.beta - 1j * spec.kappa * q.w_hat * src
    state.X = X_new
    phase_x = phase_new
    F_new = force(state, phase_x)
    state.P = P_half + 0.5 * h * (F_new + state.external.force_at(state.X))
    state.t = state.t + h
    if not np.all(np.isfinite(state.P)):
        raise FloatingPointError("non-finite momentum; reduce h")
    return F_new, phase_x, P_half


def _propagator(q, h, _memo={}):
    key = (id(q), h)
    hit = _memo.get(key)
    if hit is None or hit[0] is not q:
        if len(_memo) > 8:
            _memo.clear()
        om = q.omega
        hit = (q, om, np.exp(-1j * om * h))
        _memo[key] = hit
    return hit[1], hit[2]


def _line_integral(z, h, end, start, cut=1e-3):
    """(end - start) / (i z) where end = start e^{i z h}; series for small z h."""
    out = (end - start) / (1j * np.where(z == 0, 1.0, z))
    small = np.abs(z * h) < cut
    if np.any(small):
        zh = z[small] * h
        out[small] = start[small] * h * (1.0 + 0.5j * zh - zh**2 / 6.0 - 1j * zh**3 / 24.0)
    return out


def antipodal_index(quad: ModeQuadrature) -> np.ndarray:
    """Index map j -> j' with k_j' = -k_j (mode sets are centrally symmetric)."""
    dirs = quad.kvec[: quad.n_angular] / quad.radial.k[0]
    d = np.abs(dirs[:, None, :] + dirs[None, :, :]).sum(axis=2)
    partner = np.argmin(d, axis=1)
    if np.max(d[np.arange(len(partner)), partner]) > 1e-10:
        raise FieldConfigError("angular rule is not centrally symmetric")
    base = np.arange(quad.radial.k.size)[:, None] * quad.n_angular
    return (base + partner[None, :]).ravel()


def time_reverse(state: SimState) -> SimState:
    """P -> -P, beta(x) -> conj(beta(x)), i.e. beta_hat(k) -> conj(beta_hat(-k))."""
    new = state.copy()
    new.P = -new.P
    new.beta = np.conj(state.beta[antipodal_index(state.quad)])
    return new


def default_sample_offsets(width):
    e = np.eye(3)
    return np.concatenate([np.zeros((1, 3)), width * e, -width * e])


def residual_beta(state: SimState, points) -> float:
    """max_x |beta(x) - 2 kappa (Delta^-1 W^{X})(x)| over the sample points."""
    q = state.quad
    target = -2.0 * state.spec.kappa * q.w_hat * np.exp(-1j * (q.kvec @ state.X)) / q.kn**2
    diff = q.weight * (state.beta - target)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    vals = np.exp(1j * (pts @ q.kvec.T)) @ diff
    return float(np.max(np.abs(vals)))


# --------------------------------------------------------------- simulation

@dataclass
class TrajectoryRecord:
    t: np.ndarray
    X: np.ndarray
    P: np.ndarray
    energy: np.ndarray
    residual_beta: np.ndarray
    force: np.ndarray
    P_half: np.ndarray
    h: float
    every: int
    warnings: list = field(default_factory=list)

    @property
    def speed(self):
        return np.linalg.norm(self.P, axis=1)

    def columns(self):
        return (["t", "X_x", "X_y", "X_z", "P_x", "P_y", "P_z", "P_abs", "E",
                 "residual_beta", "F_x", "F_y", "F_z"],
                [self.t, *self.X.T, *self.P.T, self.speed, self.energy,
                 self.residual_beta, *self.force.T])


def simulate(spec, beta0, X0, P0, quad, h, t_max, external=None, record_every=1,
             residual_every=None, sample_offsets=None, epsilon=None,
             state=None) -> TrajectoryRecord:
    """Run init + steps, sampling every ``record_every`` steps.

    ``force`` in the record is the field force only; ``P_half`` holds the
    half-kick momentum of every step (needed for path decompositions).
    """
    from .kernels import grid_steps
    n = grid_steps(h, t_max)
    if state is None:
        state = init_state(spec, beta0, X0, P0, quad, external, epsilon)
    else:
        state = state.copy()
    t0 = state.t
    offsets = default_sample_offsets(spec.width) if sample_offsets is None else np.asarray(sample_offsets)
    residual_every = residual_every or 10 * record_every
    n_rec = n // record_every + 1
    rec = dict(t=np.empty(n_rec), X=np.empty((n_rec, 3)), P=np.empty((n_rec, 3)),
               energy=np.empty(n_rec), residual_beta=np.full(n_rec, np.nan),
               force=np.empty((n_rec, 3)))
    P_half = np.empty((n, 3))
    phase_x = np.exp(1j * (quad.kvec @ state.X))
    F = force(state, phase_x)

    def put(i, with_residual):
        rec["t"][i] = state.t
        rec["X"][i] = state.X
        rec["P"][i] = state.P
        rec["energy"][i] = energy(state)
        rec["force"][i] = F
        if with_residual:
            rec["residual_beta"][i] = residual_beta(state, state.X + offsets)

    put(0, True)
    for j in range(1, n + 1):
        F, phase_x, P_half[j - 1] = _advance(state, h, F, phase_x)
        state.t = t0 + j * h
        if j % record_every == 0:
            i = j // record_every
            put(i, (j % residual_every) == 0)
    out = TrajectoryRecord(rec["t"], rec["X"], rec["P"], rec["energy"], rec["residual_beta"],
                           rec["force"], P_half, h, record_every, list(state.warnings))
    out.final_state = state
    return out


def plateau(t, y, window_fraction=0.2, tol=0.02):
    """Plateau test on window means: the mean of y over the final
    ``window_fraction`` of the run against the mean over the window before it.

    Returns (value, relative_change, detected)."""
    t = np.asarray(t)
    y = np.asarray(y)
    span = window_fraction * (t[-1] - t[0])
    last = t >= t[-1] - span
    prev = (t >= t[-1] - 2 * span) & ~last
    value = float(np.mean(y[last]))
    change = float(abs(value - np.mean(y[prev])) / max(abs(value), 1e-300))
    return value, change, change <= tol
