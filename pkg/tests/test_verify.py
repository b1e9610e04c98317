"""Verification harness: smoke coverage of every check kind."""

import numpy as np
import pytest

from densegas.collision import CollisionModel
from densegas.kernels import ChiSpec, PovznerKernelSpec
from densegas.quadrature import QuadratureSpec
from densegas.testfields import DistributionSpec
from densegas.verify import (
    TestFunctionSpec,
    check_divergence,
    check_global_conservation,
    check_weakform,
    entropy_production_povzner,
    phi_eval,
    phi_gradients,
)

SPEC = QuadratureSpec(
    r3_points_per_axis=10, sphere_rule_order=5, segment_points=8,
    qmc_samples=32768, qmc_seed=3,
)


def gaussian(A=1.0, L=1.0):
    return DistributionSpec(
        family="gaussian_maxwellian", center=[0, 0, 0], width=L, amplitude=A,
        bulk=[0, 0, 0], temperature=1.0,
    )


def perturbed(eps=0.3):
    return DistributionSpec(
        family="perturbed_maxwellian", center=[0, 0, 0], width=1.0, amplitude=1.0,
        bulk=[0, 0, 0], temperature=1.0, direction=[1.0, 0, 0], strength=eps,
    )


ENSKOG = CollisionModel(kind="enskog", sigma=0.5, chi=ChiSpec("constant", value=1.0))
POVZNER = CollisionModel(
    kind="povzner",
    kernel=PovznerKernelSpec(kind="smooth_bump", range_r=1.0, speed_scale=4.0),
)
PHI = TestFunctionSpec(kind="gaussian_poly", x_width=1.5, v_width=1.5,
                       lin_v=[0.3, 0.0, 0.0])


class TestPhi:
    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(2)
        for spec in (
            PHI,
            TestFunctionSpec(kind="compact_bump", x_width=2.0, v_width=2.5),
        ):
            x = rng.uniform(-1, 1, size=(20, 3))
            v = rng.uniform(-1, 1, size=(20, 3))
            gx, gv = phi_gradients(spec, x, v)
            h = 1e-6
            for i in range(3):
                e = np.zeros(3)
                e[i] = h
                fd_x = (phi_eval(spec, x + e, v) - phi_eval(spec, x - e, v)) / (2 * h)
                fd_v = (phi_eval(spec, x, v + e) - phi_eval(spec, x, v - e)) / (2 * h)
                assert np.max(np.abs(fd_x - gx[:, i])) < 1e-8
                assert np.max(np.abs(fd_v - gv[:, i])) < 1e-8

    def test_bump_vanishes_outside_support(self):
        spec = TestFunctionSpec(kind="compact_bump", x_width=1.0, v_width=1.0)
        assert phi_eval(spec, [2.0, 0, 0], [0.0, 0, 0]) == 0.0
        gx, gv = phi_gradients(spec, [2.0, 0, 0], [0.0, 0, 0])
        assert np.array_equal(gx, np.zeros(3)) and np.array_equal(gv, np.zeros(3))


class TestDivergence:
    def test_zero_distribution_zero_residual(self):
        r = check_divergence(ENSKOG, gaussian(A=0.0), "mass", [0.0, 0, 0],
                             [0.5, 0, 0], SPEC)
        assert r.passed and r.residual == 0.0

    def test_equilibrium_both_sides_vanish(self):
        uniform = gaussian(L=1e6)
        r = check_divergence(ENSKOG, uniform, "mass", [0.0, 0, 0], [0.5, 0, 0], SPEC)
        assert r.passed
        assert abs(r.lhs) <= r.tolerance and abs(r.rhs) <= r.tolerance

    def test_enskog_mass_identity(self):
        r = check_divergence(ENSKOG, gaussian(), "mass", [0.1, 0.0, 0.2],
                             [0.8, 0.3, 0.0], SPEC, h=0.02 * 2.1)
        assert r.passed
        assert abs(r.residual) < 0.05 * max(abs(r.lhs), 1e-10)

    def test_povzner_momentum_identity(self):
        r = check_divergence(POVZNER, perturbed(), "momentum1", [0.1, 0.0, 0.2],
                             [0.8, 0.3, 0.0], SPEC, h=0.02 * 2.1)
        assert r.passed
        assert abs(r.residual) < 0.05 * max(abs(r.lhs), 1e-10)


class TestWeakform:
    def test_constant_phi_is_trivial_for_mass(self):
        # grad phi = 0 makes the pairing side vanish; the single-gain side
        # is the global mass defect, zero at the integrand level
        const_phi = TestFunctionSpec(
            kind="gaussian_poly", x_width=1e6, v_width=1e6, const=1.0
        )
        r = check_weakform(ENSKOG, gaussian(), "mass", const_phi, SPEC)
        assert r.passed
        assert abs(r.lhs) <= r.tolerance + 1e-12
        assert abs(r.rhs) <= r.tolerance + 1e-12

    @pytest.mark.parametrize("moment", ["mass", "momentum1", "energy"])
    def test_enskog_weakform(self, moment):
        r = check_weakform(ENSKOG, gaussian(), moment, PHI, SPEC)
        assert r.passed

    @pytest.mark.parametrize("moment", ["momentum2", "energy"])
    def test_povzner_weakform(self, moment):
        r = check_weakform(POVZNER, perturbed(), moment, PHI, SPEC)
        assert r.passed


class TestConservation:
    def test_enskog_gaussian(self):
        r = check_global_conservation(ENSKOG, gaussian(), SPEC)
        assert r.passed
        assert r.details["components"][0] == 0.0  # mass integrand is identically 0

    def test_povzner_perturbed(self):
        r = check_global_conservation(POVZNER, perturbed(), SPEC)
        assert r.passed


class TestEntropy:
    def test_maxwellian_zero(self):
        # any local Maxwellian annihilates the log ratio pointwise here
        r = entropy_production_povzner(POVZNER, gaussian(L=1.0), SPEC)
        assert r.passed
        assert abs(r.lhs) <= max(r.tolerance, 1e-15)
        assert r.details["pointwise_bound_violation"] == 0.0

    def test_perturbed_strictly_negative(self):
        spec = QuadratureSpec(qmc_samples=1048576, qmc_seed=3)
        r = entropy_production_povzner(POVZNER, perturbed(0.3), spec)
        assert r.passed
        stderr = r.error_estimates["stderr"]
        assert r.lhs < -5.0 * stderr

    def test_floor_validation(self):
        with pytest.raises(ValueError):
            entropy_production_povzner(POVZNER, gaussian(), SPEC, floor=0.0)
