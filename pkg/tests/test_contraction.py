import numpy as np
import pytest

from frictionlab import contraction as c

# 30-digit reference values from mpmath quadrature of the r-form integrals
MPMATH = {
    0.05: (0.20443107874378706, 0.36918595985882228),
    0.15: (0.22565228624896641, 0.38180664535137346),
    0.30: (0.26833288722877713, 0.40382483153453669),
}
OMEGA1_LIMIT = 0.36338022763241859


@pytest.mark.parametrize("delta", sorted(MPMATH))
def test_values_against_mpmath(delta):
    v = c.omega(delta)
    assert v.omega1 == pytest.approx(MPMATH[delta][0], abs=1e-13)
    assert v.omega2 == pytest.approx(MPMATH[delta][1], abs=1e-13)
    assert abs(v.omega - (v.omega1 + v.omega2)) <= 1e-12
    assert v.error <= 1e-10


@pytest.mark.parametrize("delta", [0.05, 0.15, 0.3])
def test_dual_quadrature(delta):
    (a1, a2), (b1, b2) = c.omega_dual(delta)
    assert abs(a1 - b1) <= 1e-10 and abs(a2 - b2) <= 1e-10


def test_log_limit_continuous():
    lim = c.omega(0.5, limit_ok=True).omega1
    assert lim == pytest.approx(OMEGA1_LIMIT, abs=1e-13)
    near = [c.omega(0.5 - e).omega1 for e in (1e-2, 1e-4, 1e-6)]
    assert np.all(np.diff(np.abs(np.array(near) - lim)) < 0)
    assert abs(near[-1] - lim) < 1e-6


def test_domain():
    for d in (0.0, 0.5, -0.1, 0.7):
        with pytest.raises(c.DomainError):
            c.omega(d)


def test_delta_star_and_bracket():
    ds, status = c.delta_star()
    assert ds > 0
    assert c.omega(ds / 2).omega < 1
    if ds < 0.5:
        assert status == "crossing"
        assert c.omega((ds + 0.5) / 2).omega >= 1
    else:
        # Omega stays below 1 on the whole interval, including the log limit
        assert status == "all_admissible"
        assert c.omega(0.5, limit_ok=True).omega < 1


def test_deterministic():
    assert c.delta_star() == c.delta_star()
    a, b = c.omega_table(), c.omega_table()
    for x, y in zip(a.columns()[1], b.columns()[1]):
        assert x.tobytes() == y.tobytes()


def test_positive_and_refinement():
    res = c.omega_table()
    assert np.all(res.omega1 > 0) and np.all(res.omega2 > 0) and np.all(np.isfinite(res.omega))
    coarse = np.array([c._theta_route(d, n=8) for d in (0.1, 0.4)])
    mid = np.array([c._theta_route(d, n=12) for d in (0.1, 0.4)])
    ref = np.array([c._theta_route(d, n=32) for d in (0.1, 0.4)])
    assert np.max(np.abs(mid - ref)) < np.max(np.abs(coarse - ref)) / 2
