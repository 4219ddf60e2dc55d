import numpy as np
import pytest

from frictionlab.kernels import (QuadratureError, TailValidationError, friction_kernel, grid_steps,
                                 kernel_integral, kernel_prefactor, kernel_tail, overlap,
                                 overlap_gaussian_exact, overlap_integral,
                                 stationary_phase_coefficient, write_kernel_csv)
from frictionlab.io import read_csv
from frictionlab.potentials import build_potential


def test_prefactor_and_f0(ref_spec):
    assert kernel_prefactor(ref_spec) == pytest.approx(4 / 3)
    assert kernel_prefactor(ref_spec) * overlap(ref_spec, 0.0).real == pytest.approx(
        4 / 3 * np.pi**1.5, rel=1e-10)


def test_overlap_matches_gaussian_closed_form(ref_spec):
    t = np.array([0.0, 0.5, 3.0, 20.0, 150.0, 500.0])
    np.testing.assert_allclose(overlap(ref_spec, t), overlap_gaussian_exact(ref_spec, t),
                               atol=1e-10, rtol=0)


def test_overlap_integral_closed_form(ref_spec):
    tau = np.array([0.5, 5.0, 80.0])
    # A^2 s^6 pi^(3/2) 4i [(s^2 + i tau/2)^(-1/2) - s^-1]
    exact = np.pi**1.5 * 4j * ((1 + 0.5j * tau) ** -0.5 - 1.0)
    np.testing.assert_allclose(overlap_integral(ref_spec, tau), exact, atol=1e-9)


def test_stationary_phase_coefficient_reference(ref_spec):
    c = kernel_prefactor(ref_spec) * stationary_phase_coefficient(ref_spec).real
    assert c == pytest.approx(-8 / 3 * np.pi**1.5, rel=1e-12)


def test_reference_table(ref_kernel, ref_spec):
    exact = ref_kernel.Z * overlap_gaussian_exact(ref_spec, ref_kernel.t).real
    assert np.max(np.abs(ref_kernel.f - exact)) < 1e-9
    assert ref_kernel.f[0] == pytest.approx(7.4244, abs=1e-4)
    assert 100 < ref_kernel.t_switch < 200
    assert ref_kernel.tail_residual <= 0.02
    assert ref_kernel.quad_error < 1e-9


def test_tail_switch_is_tight(ref_kernel):
    t, f = ref_kernel.t, ref_kernel.f
    i = np.searchsorted(t, ref_kernel.t_switch)
    rel = np.abs(f * t**1.5 / ref_kernel.c_f - 1.0)
    assert rel[i - 1] > 0.02 and np.all(rel[i:] <= 0.02)
    np.testing.assert_allclose(kernel_tail(ref_kernel, t[i:]), ref_kernel.c_f * t[i:] ** -1.5)


def test_sech_family_short_horizon(sech_spec):
    with pytest.raises(TailValidationError):
        friction_kernel(sech_spec, 0.05, 20.0)
    table = friction_kernel(sech_spec, 0.05, 20.0, validate_tail=False)
    assert np.isnan(table.t_switch)
    assert table.f[0] > 0


def test_quadrature_failure_reported(ref_spec):
    with pytest.raises(QuadratureError) as info:
        overlap(ref_spec, 10.0, tol=1e-30)
    assert info.value.achieved > 0


def test_grid_steps():
    assert grid_steps(0.01, 500.0) == 50000
    with pytest.raises(ValueError):
        grid_steps(0.03, 1.0)
    with pytest.raises(ValueError):
        grid_steps(-0.1, 1.0)


def test_kernel_integral_limit(ref_spec):
    # G(inf) = Z Re <W, 2 (i Delta)^-1 (-1) W> = 0: the integral of f vanishes
    assert abs(kernel_integral(ref_spec, 2000.0)) < 2.0 * 4 / 3 * np.pi**1.5 * 8 / np.sqrt(2000.0)


def test_csv_export(tmp_path, ref_spec):
    table = friction_kernel(ref_spec, 0.1, 200.0)
    p = write_kernel_csv(table, tmp_path / "k.csv")
    d = read_csv(tmp_path / "k.csv")
    assert list(d) == ["t", "f", "tail_model_value"]
    np.testing.assert_array_equal(d["f"], table.f)
    assert np.isnan(d["tail_model_value"][0])
