"""Collision operator evaluations: equilibrium, limits, consistency."""

import numpy as np
import pytest

from densegas.collision import CollisionModel, eval_boltzmann, eval_enskog, eval_povzner
from densegas.kernels import ChiSpec, PovznerKernelSpec, kernel_eval
from densegas.geometry import collide
from densegas.quadrature import QuadratureSpec
from densegas.testfields import DistributionSpec

SPEC = QuadratureSpec(r3_points_per_axis=10, sphere_rule_order=6, segment_points=8)


def uniform_maxwellian(T=1.0):
    # L = 1e6 realizes the spatially uniform limit
    return DistributionSpec(
        family="gaussian_maxwellian", center=[0, 0, 0], width=1e6,
        amplitude=1.0, bulk=[0, 0, 0], temperature=T,
    )


def gaussian(T=1.0, L=1.0, A=1.0):
    return DistributionSpec(
        family="gaussian_maxwellian", center=[0, 0, 0], width=L, amplitude=A,
        bulk=[0, 0, 0], temperature=T,
    )


def perturbed(eps=0.3):
    return DistributionSpec(
        family="perturbed_maxwellian", center=[0, 0, 0], width=1.0, amplitude=1.0,
        bulk=[0, 0, 0], temperature=1.0, direction=[1.0, 0, 0], strength=eps,
    )


def enskog_model(sigma=0.5, chi=1.0):
    return CollisionModel(kind="enskog", sigma=sigma,
                          chi=ChiSpec("constant", value=chi))


def povzner_model(R=1.0, s0=4.0):
    kernel = PovznerKernelSpec(kind="smooth_bump", range_r=R, speed_scale=s0)
    return CollisionModel(kind="povzner", kernel=kernel)


class TestEquilibriumAnnihilation:
    def test_boltzmann(self):
        m = uniform_maxwellian()
        res = eval_boltzmann(m, m, [0.2, 0, 0], [0.7, -0.1, 0.3], SPEC)
        assert abs(res.value) <= res.error_estimate

    def test_enskog_uniform_constant_chi(self):
        m = uniform_maxwellian()
        res = eval_enskog(enskog_model(), m, m, [0.2, 0, 0], [0.7, -0.1, 0.3], SPEC)
        assert abs(res.value) <= res.error_estimate

    def test_povzner_uniform(self):
        m = uniform_maxwellian()
        res = eval_povzner(povzner_model(), m, m, [0.2, 0, 0], [0.7, -0.1, 0.3], SPEC)
        assert abs(res.value) <= res.error_estimate

    def test_povzner_local_maxwellian(self):
        # positions do not change in a collision, so any x-modulated
        # Maxwellian annihilates the Povzner integrand pointwise
        f = gaussian(L=1.0)
        res = eval_povzner(povzner_model(), f, f, [0.3, 0, 0], [0.5, 0.2, 0], SPEC)
        assert abs(res.value) <= res.error_estimate


def test_far_tail_is_negligible():
    f = gaussian()
    x = np.zeros(3)
    center = eval_enskog(enskog_model(), f, f, x, [1.0, 0, 0], SPEC)
    scale = center.details if hasattr(center, "details") else None
    tail = eval_enskog(enskog_model(), f, f, x, [8.0, 0, 0], SPEC)
    assert abs(tail.value) < 1e-10 * max(abs(center.value), 1e-10)


def test_enskog_small_sigma_approaches_boltzmann():
    # Eq-level comparison after removing the sigma^2 cross-section factor
    f = perturbed()
    x = np.zeros(3)
    v = np.array([1.0, 0.0, 0.0])
    sigma = 1e-3
    res_e = eval_enskog(enskog_model(sigma=sigma), f, f, x, v, SPEC)
    res_b = eval_boltzmann(f, f, x, v, SPEC)
    scale = abs(res_b.value) + res_b.error_estimate
    combined = res_e.error_estimate / sigma**2 + res_b.error_estimate
    assert abs(res_e.value / sigma**2 - res_b.value) <= combined + 10 * sigma * scale


@pytest.mark.parametrize("alpha", [0.0, 2.0])
def test_bilinearity_in_first_argument(alpha):
    f = gaussian()
    fa = gaussian(A=alpha)
    x = np.zeros(3)
    v = np.array([0.8, 0.3, 0.0])
    base = eval_enskog(enskog_model(), f, f, x, v, SPEC)
    scaled = eval_enskog(enskog_model(), fa, f, x, v, SPEC)
    assert abs(scaled.value - alpha * base.value) <= (
        scaled.error_estimate + alpha * base.error_estimate + 1e-15
    )


def test_povzner_gain_only_region_is_nonnegative():
    # f(x, .) below underflow at x far from the support, kernel range small:
    # the loss term vanishes and only the nonnegative gain remains
    f = gaussian(L=1.0)
    m = povzner_model(R=0.5, s0=4.0)
    x = np.array([40.0, 0.0, 0.0])
    res = eval_povzner(m, f, f, x, [0.5, 0, 0], SPEC)
    assert res.value >= 0.0


def test_povzner_double_resolution_consistency():
    f = gaussian()
    m = povzner_model()
    x = np.zeros(3)
    v = np.array([0.4, -0.2, 0.1])
    coarse = eval_povzner(m, perturbed(), perturbed(), x, v, SPEC)
    fine_spec = QuadratureSpec(r3_points_per_axis=16, sphere_rule_order=8,
                               segment_points=10)
    fine = eval_povzner(m, perturbed(), perturbed(), x, v, fine_spec)
    assert abs(coarse.value - fine.value) <= (
        coarse.error_estimate + fine.error_estimate
    )


def test_enskog_double_resolution_consistency():
    f = gaussian()
    m = enskog_model()
    x = np.array([0.1, 0.0, 0.2])
    v = np.array([0.8, 0.3, 0.0])
    coarse = eval_enskog(m, f, f, x, v, SPEC)
    fine = eval_enskog(
        m, f, f, x, v,
        QuadratureSpec(r3_points_per_axis=16, sphere_rule_order=8, segment_points=10),
    )
    assert abs(coarse.value - fine.value) <= (
        coarse.error_estimate + fine.error_estimate
    )


def test_symmetrized_kernel_changes_nothing():
    # both shipped kernels already satisfy time reversal, so replacing J by
    # its symmetrization (J(xi,v) + J(-xi,-v))/2 is a no-op
    rng = np.random.default_rng(123)
    xi = rng.uniform(-1.5, 1.5, size=(100, 3))
    vrel = rng.normal(scale=2.0, size=(100, 3))
    for spec in (
        PovznerKernelSpec(kind="fornasier", delta=1.0, theta_speed=3.0),
        PovznerKernelSpec(kind="smooth_bump", range_r=1.0, speed_scale=4.0),
    ):
        j = kernel_eval(spec, xi, vrel)
        sym = 0.5 * (j + kernel_eval(spec, -xi, -vrel))
        assert np.max(np.abs(sym - j)) <= 1e-13 * max(float(np.max(j)), 1e-30)
