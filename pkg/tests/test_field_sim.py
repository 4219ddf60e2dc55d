import numpy as np
import pytest

from frictionlab import field_sim as fs
from frictionlab.analysis import convergence_order
from frictionlab.modes import mode_quadrature
from frictionlab.potentials import PotentialSpec


@pytest.fixture(scope="module")
def quad(ref_spec):
    return mode_quadrature(ref_spec, n_radial=96, angular=("lebedev", 11))


PACKET = fs.InitialField("gaussian", amplitude=0.1, width=1.0, center=(0.5, 0.0, 0.0))


def test_zero_field_init(ref_spec, quad):
    st = fs.init_state(ref_spec, fs.InitialField(), (0, 0, 0), (0, 0, 0), quad)
    assert np.all(st.beta == 0)
    assert fs.energy(st) == 0.0


def test_unsupported_descriptor(ref_spec, quad):
    with pytest.raises(fs.FieldConfigError):
        fs.InitialField("plane_wave")
    with pytest.raises(fs.FieldConfigError):
        fs.init_state(ref_spec, {"kind": "zero"}, (0, 0, 0), (0, 0, 0), quad)
    with pytest.raises(fs.FieldConfigError):
        fs.InitialField("stationary", theta=1.5)


def test_stationary_profile_is_fixed_point(ref_spec, quad):
    X0 = np.array([0.2, -0.1, 0.3])
    st = fs.init_state(ref_spec, fs.InitialField("stationary", theta=1.0), X0, (0, 0, 0), quad)
    np.testing.assert_allclose(st.beta, -2 * ref_spec.kappa * quad.w_hat
                               * np.exp(-1j * quad.kvec @ X0) / quad.kn**2, rtol=1e-15)
    nxt = fs.step(st, 0.01)
    assert np.max(np.abs(nxt.beta - st.beta)) <= 1e-12 * np.max(np.abs(st.beta))
    assert np.max(np.abs(nxt.X - X0)) <= 1e-12 and np.max(np.abs(nxt.P)) <= 1e-12
    assert fs.residual_beta(st, X0 + fs.default_sample_offsets(1.0)) < 1e-12


def test_free_flight_when_decoupled(quad):
    spec = PotentialSpec("gaussian", 1.0, 1.0, 0.0, 2.0)
    rec = fs.simulate(spec, fs.InitialField(), (1, 2, 3), (0.2, -0.4, 0.6), quad, 0.05, 5.0)
    np.testing.assert_allclose(rec.X, np.array([1, 2, 3]) + np.outer(rec.t, [0.1, -0.2, 0.3]), atol=1e-13)
    np.testing.assert_array_equal(rec.P, np.tile([0.2, -0.4, 0.6], (rec.t.size, 1)))


def test_decoupled_energies_separately_conserved(quad):
    spec = PotentialSpec("gaussian", 1.0, 1.0, 0.0, 1.0)
    rec = fs.simulate(spec, PACKET, (0, 0, 0), (0.1, 0, 0), quad, 0.05, 5.0)
    st = rec.final_state
    field_e = float(np.sum(quad.weight * quad.omega * np.abs(st.beta) ** 2))
    st0 = fs.init_state(spec, PACKET, (0, 0, 0), (0.1, 0, 0), quad)
    assert field_e == pytest.approx(float(np.sum(quad.weight * quad.omega * np.abs(st0.beta) ** 2)), rel=1e-13)
    np.testing.assert_allclose(rec.energy, 0.005 + field_e, rtol=1e-12)


def test_symmetric_field_exerts_no_force(ref_spec, quad):
    X = np.array([0.3, 0.1, -0.2])
    packet = fs.InitialField("gaussian", amplitude=0.5, width=0.8, center=tuple(X))
    st = fs.init_state(ref_spec, packet, X, (0, 0, 0), quad)
    assert np.max(np.abs(fs.force(st))) < 1e-14


def test_offset_profile_force_is_axial(ref_spec, quad):
    st = fs.init_state(ref_spec, fs.InitialField("stationary"), (0.3, -0.2, 0.1), (0, 0, 0), quad)
    st.X = np.zeros(3)
    F = fs.force(st)
    axis = np.array([0.3, -0.2, 0.1]) / np.linalg.norm([0.3, -0.2, 0.1])
    transverse = F - (F @ axis) * axis
    assert np.linalg.norm(transverse) <= 1e-10 * np.linalg.norm(F)
    assert F @ axis > 0          # pulled toward the centre of the dressing


def test_force_against_real_space_grid(ref_spec, quad):
    X = np.array([0.4, -0.3, 0.2])
    st = fs.init_state(ref_spec, PACKET, X, (0, 0, 0), quad)
    F = fs.force(st)
    x = np.linspace(-9, 9, 121)
    dx = x[1] - x[0]
    G = np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1)
    d = G - X
    W = np.exp(-0.5 * np.sum(d * d, axis=-1))
    beta = 0.1 * np.exp(-0.5 * np.sum((G - np.array(PACKET.center)) ** 2, axis=-1))
    gradW = -d * W[..., None]
    F_grid = 2 * ref_spec.kappa * np.tensordot(beta, gradW, axes=([0, 1, 2], [0, 1, 2])) * dx**3
    assert np.linalg.norm(F - F_grid) <= 1e-6 * np.linalg.norm(F_grid)


def test_force_converged_in_radial_nodes(ref_spec):
    F = []
    for n in (96, 192):
        q = mode_quadrature(ref_spec, n_radial=n, angular=("lebedev", 11))
        F.append(fs.force(fs.init_state(ref_spec, PACKET, (0.2, 0, 0), (0, 0, 0), q)))
    assert np.max(np.abs(F[0] - F[1])) <= 1e-8


def test_energy_second_order(ref_spec, quad):
    drift, finals = [], []
    for h in (0.02, 0.01, 0.005):
        rec = fs.simulate(ref_spec, PACKET, (0, 0, 0), (0, 0, 0.1), quad, h, 4.0, record_every=int(round(0.2 / h)))
        drift.append(np.max(np.abs(rec.energy - rec.energy[0])))
        finals.append(rec.P[-1])
    assert drift[0] / drift[1] == pytest.approx(4, rel=0.15)
    assert 1.7 <= convergence_order(*finals).order <= 2.3


def test_time_reversal(ref_spec, quad):
    st0 = fs.init_state(ref_spec, PACKET, (0, 0, 0), (0, 0.05, 0.1), quad)
    fwd = fs.simulate(ref_spec, None, None, None, quad, 0.01, 2.0, state=st0)
    back = fs.simulate(ref_spec, None, None, None, quad, 0.01, 2.0, state=fs.time_reverse(fwd.final_state))
    end = fs.time_reverse(back.final_state)
    assert np.max(np.abs(end.X - st0.X)) < 1e-8
    assert np.max(np.abs(end.P - st0.P)) < 1e-8
    assert np.max(np.abs(end.beta - st0.beta)) < 1e-8


def test_weighted_norm_oracle():
    from scipy.integrate import quad as q1
    b = fs.InitialField("gaussian", amplitude=0.3, width=0.7)
    r2 = q1(lambda r: (1 + r * r) ** 3 * 0.09 * np.exp(-r * r / 0.49) * 4 * np.pi * r * r, 0, 30)[0]
    assert b.weighted_norm() == pytest.approx(np.sqrt(r2), rel=1e-12)
    assert fs.InitialField("stationary").weighted_norm() == np.inf


def test_weighted_norm_warning(ref_spec, quad):
    ok = fs.InitialField("gaussian", amplitude=1e-4, width=1.0)
    st = fs.init_state(ref_spec, ok, (0, 0, 0), (0, 0, 0), quad, epsilon=1e-2)
    assert st.warnings == []
    big = fs.InitialField("gaussian", amplitude=1.0, width=1.0)
    st = fs.init_state(ref_spec, big, (0, 0, 0), (0, 0, 0), quad, epsilon=1e-2)
    assert len(st.warnings) == 1 and "exceeds" in st.warnings[0]


def test_residual_decreases_from_bare_field(ref_spec, quad):
    rec = fs.simulate(ref_spec, fs.InitialField(), (0, 0, 0), (0, 0, 0), quad, 0.05, 10.0,
                      record_every=10, residual_every=10)
    r = rec.residual_beta
    pts = fs.default_sample_offsets(1.0)
    level = np.abs(np.exp(1j * pts @ quad.kvec.T) @ (quad.weight * 2 * quad.w_hat / quad.kn**2))
    assert r[0] == pytest.approx(np.max(level), rel=1e-12)
    assert np.all(np.diff(r) < 0)
    # low modes carry weight 1/k^2, so the approach is dispersive, close to t^-1/2
    half = rec.t >= 5.0
    slope = np.polyfit(np.log(rec.t[half]), np.log(r[half]), 1)[0]
    assert -0.7 < slope < -0.3


def test_harmonic_confinement(weak_spec):
    q = mode_quadrature(weak_spec, t_max=60.0, angular=("lebedev", 11))
    ext = fs.ExternalPotential("harmonic", center=(0, 0, 0), stiffness=1.0)
    rec = fs.simulate(weak_spec, fs.InitialField("stationary"), (0, 0, 0), (0, 0, 0.05), q, 0.02, 60.0,
                      external=ext, record_every=5)
    assert np.max(np.linalg.norm(rec.X, axis=1)) < 0.1
    n = rec.t.size // 5
    assert np.max(rec.speed[-n:]) < np.max(rec.speed[:n])


def test_plateau_detection():
    t = np.linspace(0, 100, 5001)
    y = 1 - np.exp(-t / 5) + 0.05 * np.sin(7 * t)
    value, change, ok = fs.plateau(t, y)
    assert ok and value == pytest.approx(1.0, abs=0.01)
    assert not fs.plateau(t, t)[2]


def test_trajectory_csv(tmp_path, ref_spec, quad):
    from frictionlab.io import read_csv, write_csv
    rec = fs.simulate(ref_spec, PACKET, (0, 0, 0), (0, 0, 0.1), quad, 0.05, 1.0)
    write_csv(tmp_path / "tr.csv", *rec.columns())
    d = read_csv(tmp_path / "tr.csv")
    assert np.all(np.diff(d["t"]) > 0)
    np.testing.assert_array_equal(d["P_z"], rec.P[:, 2])
