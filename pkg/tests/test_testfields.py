"""Manufactured distributions: exact values, decay, closed-form moments."""

import numpy as np
import pytest

from densegas.quadrature import QuadratureSpec, integrate_r3
from densegas.testfields import (
    DistributionSpec,
    UnsupportedClosedFormError,
    analytic_moments,
    eval_distribution,
)


def gaussian(T=1.0, u0=(0, 0, 0), A=1.0, L=1.0, x0=(0, 0, 0)):
    return DistributionSpec(
        family="gaussian_maxwellian", center=x0, width=L, amplitude=A,
        bulk=u0, temperature=T,
    )


def perturbed(eps, T=1.0, e=(1.0, 0, 0)):
    return DistributionSpec(
        family="perturbed_maxwellian", center=[0, 0, 0], width=1.0,
        amplitude=1.0, bulk=[0, 0, 0], temperature=T, direction=e, strength=eps,
    )


def test_peak_value_of_unit_maxwellian():
    f = gaussian()
    val = eval_distribution(f, [0.0, 0, 0], [0.0, 0, 0])
    assert abs(val - (2 * np.pi) ** -1.5) < 1e-15
    assert abs(val - 0.0634936359) < 1e-9


def test_far_field_underflows_to_zero():
    f = gaussian()
    assert eval_distribution(f, [60.0, 0, 0], [0.0, 0, 0]) == 0.0
    assert eval_distribution(f, [0.0, 0, 0], [60.0, 0, 0]) == 0.0


def test_zero_strength_perturbation_matches_gaussian():
    f0 = gaussian()
    f1 = perturbed(0.0)
    rng = np.random.default_rng(0)
    x = rng.normal(size=(10, 3))
    v = rng.normal(size=(10, 3))
    assert np.array_equal(eval_distribution(f0, x, v), eval_distribution(f1, x, v))


def test_nonnegative_everywhere():
    rng = np.random.default_rng(99)
    x = rng.uniform(-8, 8, size=(100_000, 3))
    v = rng.uniform(-8, 8, size=(100_000, 3))
    for f in (gaussian(), perturbed(0.3), perturbed(0.49), gaussian(T=0.5, u0=(1, 0, 0))):
        assert np.min(eval_distribution(f, x, v)) >= 0.0


def test_strength_bound_enforced():
    with pytest.raises(ValueError):
        perturbed(0.5)


class TestAnalyticMoments:
    def test_center_values(self):
        f = gaussian(T=2.0, u0=(0.3, -0.1, 0.0))
        m = analytic_moments(f, [0.0, 0, 0])
        assert m.rho == 1.0
        assert np.allclose(m.u, [0.3, -0.1, 0.0])
        assert np.allclose(m.P, 2.0 * np.eye(3))
        assert np.allclose(m.q, 0.0)

    def test_density_at_one_width(self):
        f = gaussian(A=2.0, L=1.5)
        m = analytic_moments(f, [1.5, 0, 0])
        assert abs(m.rho - 2.0 * np.exp(-0.5)) < 1e-14

    def test_temperature_identity(self):
        f = gaussian(T=3.7, A=0.4)
        m = analytic_moments(f, [0.3, 0.2, -0.5])
        assert abs(np.trace(m.P) / (3 * m.rho) - 3.7) < 1e-12

    def test_perturbed_family_unsupported(self):
        with pytest.raises(UnsupportedClosedFormError):
            analytic_moments(perturbed(0.2), [0.0, 0, 0])


def test_velocity_quadrature_reproduces_analytic_moments():
    f = gaussian(T=1.3, u0=(0.5, 0, -0.2), A=0.8)
    spec = QuadratureSpec(r3_points_per_axis=16)
    x = np.array([0.4, 0.0, 0.1])
    m = analytic_moments(f, x)

    rho = integrate_r3(lambda v: eval_distribution(f, x, v), f.bulk,
                       np.sqrt(1.3), spec)
    assert abs(rho.value - m.rho) <= rho.error_estimate
