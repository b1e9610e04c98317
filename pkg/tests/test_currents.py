"""Current fields: zeros, algebra, scaling, and cross-checks."""

import numpy as np
import pytest

from densegas.collision import CollisionModel
from densegas.currents import (
    WeightSpec,
    energy_current_x,
    landau_integrand_enskog,
    landau_integrand_povzner,
    mass_current,
    momentum_current_v,
    momentum_current_x,
    raw_field,
    weight_values,
)
from densegas.geometry import collide
from densegas.kernels import ChiSpec, PovznerKernelSpec
from densegas.quadrature import QuadratureSpec, sphere_rule, pairwise_sum
from densegas.testfields import DistributionSpec

SPEC = QuadratureSpec(r3_points_per_axis=8, sphere_rule_order=4, segment_points=6)


def gaussian(A=1.0, x0=(0, 0, 0)):
    return DistributionSpec(
        family="gaussian_maxwellian", center=x0, width=1.0, amplitude=A,
        bulk=[0, 0, 0], temperature=1.0,
    )


def enskog_model(sigma=0.5, chi=1.0):
    return CollisionModel(kind="enskog", sigma=sigma,
                          chi=ChiSpec("constant", value=chi))


def povzner_model():
    kernel = PovznerKernelSpec(kind="smooth_bump", range_r=1.0, speed_scale=4.0)
    return CollisionModel(kind="povzner", kernel=kernel)


X = np.array([0.1, 0.0, 0.2])
V = np.array([0.8, 0.3, 0.0])
ONE = WeightSpec("one")


class TestZeroInputs:
    @pytest.mark.parametrize("which", ["J0", "J1", "J4", "I1", "I4"])
    @pytest.mark.parametrize("model", [enskog_model(), povzner_model()])
    def test_zero_distribution_gives_zero_field(self, which, model):
        val, mag, _ = raw_field(model, gaussian(A=0.0), which, X, V, SPEC)
        assert np.array_equal(val, np.zeros(3))
        assert np.array_equal(mag, np.zeros(3))

    def test_zero_chi_kills_enskog_currents(self):
        model = enskog_model(chi=0.0)
        for which in ("J0", "J2", "I3", "J4"):
            val, _, _ = raw_field(model, gaussian(), which, X, V, SPEC)
            assert np.array_equal(val, np.zeros(3))

    def test_landau_integrand_zero_f(self):
        out = landau_integrand_enskog(
            ONE, ONE, gaussian(A=0.0), gaussian(), ChiSpec("constant", value=1.0),
            0.5, X, [0.0, 0, 1.0], V, SPEC,
        )
        assert np.array_equal(out, np.zeros(3))

    def test_landau_integrand_support_separation(self):
        # second argument supported far from x + sigma n
        g_far = gaussian(x0=(80.0, 0.0, 0.0))
        out = landau_integrand_enskog(
            ONE, ONE, gaussian(), g_far, ChiSpec("constant", value=1.0),
            0.5, X, [0.0, 0, 1.0], V, SPEC,
        )
        assert np.max(np.abs(out)) < 1e-300


def test_mass_current_matches_sphere_sum_of_landau_integrand():
    """The fused pass equals the sphere rule applied to the public integrand."""
    model = enskog_model()
    f = gaussian()
    nodes, weights = sphere_rule(SPEC.sphere_rule_order)
    total = np.zeros(3)
    for n, wn in zip(nodes, weights):
        total += wn * landau_integrand_enskog(
            ONE, ONE, f, f, model.chi, model.sigma, X, n, V, SPEC
        )
    fused, _, _ = raw_field(model, f, "J0", X, V, SPEC)
    assert np.allclose(total, fused, rtol=1e-12, atol=1e-15)


def test_povzner_landau_integrand_consistency():
    """y-ball integration of the public Povzner integrand reproduces J0."""
    from densegas.quadrature import gauss_legendre

    model = povzner_model()
    f = gaussian()
    R = model.kernel.range_r
    rr, wr = gauss_legendre(SPEC.segment_points, 1e-6 * R, R)
    nodes, weights = sphere_rule(SPEC.sphere_rule_order)
    total = np.zeros(3)
    for n, wn in zip(nodes, weights):
        for r, w_r in zip(rr, wr):
            y = X + r * n
            total += wn * w_r * r * r * landau_integrand_povzner(
                ONE, ONE, f, f, model.kernel, X, y, V, SPEC
            )
    fused, _, _ = raw_field(model, f, "J0", X, V, SPEC)
    assert np.allclose(total, fused, rtol=1e-10, atol=1e-14)


def test_post_collision_speed_identity():
    # |v'|^2 = |v|^2 - <v,n>^2 + <w,n>^2, the algebra behind the energy split
    rng = np.random.default_rng(17)
    v = rng.normal(size=(500, 3))
    w = rng.normal(size=(500, 3))
    n = rng.normal(size=(500, 3))
    n /= np.linalg.norm(n, axis=1)[:, None]
    vp, _ = collide(v, w, n, check=False)
    lhs = np.sum(vp * vp, axis=1)
    rhs = (
        np.sum(v * v, axis=1)
        - np.einsum("ij,ij->i", v, n) ** 2
        + np.einsum("ij,ij->i", w, n) ** 2
    )
    assert np.max(np.abs(lhs - rhs) / (1 + np.abs(rhs))) < 1e-13


@pytest.mark.parametrize("model", [enskog_model(), povzner_model()])
def test_quadratic_amplitude_scaling(model):
    # every current is bilinear in f, so amplitude alpha scales fields by alpha^2
    base, _, _ = raw_field(model, gaussian(), "J1", X, V, SPEC)
    scaled, _, _ = raw_field(model, gaussian(A=2.0), "J1", X, V, SPEC)
    assert np.allclose(scaled, 4.0 * base, rtol=1e-12, atol=1e-18)


def test_dilute_limit_kills_enskog_position_current():
    model = enskog_model(sigma=1e-6)
    res = momentum_current_x(model, gaussian(), 0, X, V, SPEC)
    # the s-interval has length sigma and the integrand carries sigma^2
    assert np.max(np.abs(res.value)) < 1e-12
    res4 = energy_current_x(model, gaussian(), X, V, SPEC)
    assert np.max(np.abs(res4.value)) < 1e-12


def test_weight_values_table():
    u = np.array([[1.0, 2.0, 3.0]])
    n = np.array([0.0, 0.0, 1.0])
    assert weight_values(WeightSpec("one"), u, n)[0] == 1.0
    assert weight_values(WeightSpec("component", 1), u, n)[0] == 2.0
    assert weight_values(WeightSpec("speed_sq"), u, n)[0] == 14.0
    assert weight_values(WeightSpec("dot_n"), u, n)[0] == 3.0
    assert weight_values(WeightSpec("dot_n_component", 2), u, n)[0] == 3.0
    assert weight_values(WeightSpec("dot_n_sq"), u, n)[0] == 9.0


def test_public_field_wrappers_report_tags():
    model = enskog_model()
    f = gaussian()
    assert mass_current(model, f, X, V, SPEC).which == "J0"
    assert momentum_current_v(model, f, 1, X, V, SPEC).which == "J2"
    assert momentum_current_x(model, f, 2, X, V, SPEC).which == "I3"
