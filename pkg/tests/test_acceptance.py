"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines; the whole suite is deterministic (fixed seeds everywhere).
"""

import json
import time
from pathlib import Path

import numpy as np
import pytest
import yaml

from densegas.cli import main as cli_main
from densegas.collision import (
    CollisionModel,
    eval_boltzmann,
    eval_enskog,
    eval_povzner,
)
from densegas.geometry import collide
from densegas.kernels import ChiSpec, PovznerKernelSpec, validate_kernel
from densegas.moments import collision_corrections, compute_moments
from densegas.quadrature import QuadratureSpec
from densegas.testfields import DistributionSpec, analytic_moments
from densegas.verify import (
    TestFunctionSpec,
    check_divergence,
    check_global_conservation,
    check_weakform,
    entropy_production_povzner,
)

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def report(criterion, passed, extra=""):
    tag = "PASS" if passed else "FAIL"
    print(f"[criterion {criterion}] {tag} {extra}")
    assert passed


def gaussian(L=1.0, T=1.0, A=1.0, u0=(0.0, 0.0, 0.0)):
    return DistributionSpec(
        family="gaussian_maxwellian", center=[0, 0, 0], width=L, amplitude=A,
        bulk=u0, temperature=T,
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

POINTS = [
    ([0.0, 0.0, 0.0], [0.8, 0.3, 0.0]),
    ([0.3, 0.0, 0.0], [-0.5, 0.6, 0.1]),
    ([0.0, -0.4, 0.2], [1.2, 0.0, 0.0]),
    ([0.5, 0.1, -0.3], [0.0, -0.9, 0.4]),
    ([0.2, 0.2, 0.2], [0.3, 0.3, -0.6]),
    ([-0.3, 0.1, 0.0], [0.7, -0.2, 0.5]),
    ([0.1, 0.0, 0.4], [-0.8, 0.0, -0.3]),
    ([0.0, 0.5, 0.0], [0.4, 1.0, 0.2]),
    ([-0.2, -0.2, 0.3], [1.0, 0.5, 0.0]),
    ([0.4, 0.0, -0.1], [-0.3, -0.4, 0.8]),
]
MOMENT_LIST = ["mass", "momentum1", "momentum2", "momentum3", "energy"]


def test_criterion_1_collision_transform_suite():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20260809)
    n_samples = 10**4
    v = rng.uniform(-10, 10, size=(n_samples, 3))
    w = rng.uniform(-10, 10, size=(n_samples, 3))
    n = rng.normal(size=(n_samples, 3))
    n /= np.linalg.norm(n, axis=1)[:, None]
    scale = 1.0 + np.linalg.norm(v, axis=1) + np.linalg.norm(w, axis=1)

    vp, wp = collide(v, w, n, check=False)
    v2, w2 = collide(vp, wp, n, check=False)
    involution = max(
        np.max(np.abs(v2 - v) / scale[:, None]),
        np.max(np.abs(w2 - w) / scale[:, None]),
    )
    wp_s, vp_s = collide(w, v, n, check=False)
    symmetry = max(
        np.max(np.abs(vp - vp_s) / scale[:, None]),
        np.max(np.abs(wp - wp_s) / scale[:, None]),
    )
    vp_m, wp_m = collide(v, w, -n, check=False)
    evenness = max(
        np.max(np.abs(vp - vp_m) / scale[:, None]),
        np.max(np.abs(wp - wp_m) / scale[:, None]),
    )
    momentum = np.max(np.abs(vp + wp - v - w) / scale[:, None])
    e_pre = np.sum(v * v + w * w, axis=1)
    e_post = np.sum(vp * vp + wp * wp, axis=1)
    energy = np.max(np.abs(e_post - e_pre) / e_pre)
    d_pre = np.einsum("ij,ij->i", v - w, n)
    d_post = np.einsum("ij,ij->i", vp - wp, n)
    reversal = np.max(np.abs(d_post + d_pre) / (1.0 + np.abs(d_pre)))

    worst_det = 0.0
    for _ in range(25):
        a = rng.uniform(-5, 5, 3)
        b = rng.uniform(-5, 5, 3)
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        h = 1e-5 * (1 + np.linalg.norm(a) + np.linalg.norm(b))
        state = np.concatenate([a, b])
        jac = np.empty((6, 6))
        for i in range(6):
            e = np.zeros(6)
            e[i] = h
            up = np.concatenate(collide((state + e)[:3], (state + e)[3:], axis))
            dn = np.concatenate(collide((state - e)[:3], (state - e)[3:], axis))
            jac[:, i] = (up - dn) / (2 * h)
        worst_det = max(worst_det, abs(np.linalg.det(jac) + 1.0))

    elapsed = time.perf_counter() - t0
    ok = (
        max(involution, symmetry, evenness, momentum, energy, reversal) < 1e-13
        and worst_det < 1e-8
        and elapsed < 5.0
    )
    report(1, ok, f"max_rel={max(involution, symmetry, evenness, momentum, energy, reversal):.2e} "
                  f"|det+1|={worst_det:.2e} {elapsed:.1f}s")


def test_criterion_2_kernel_assumptions():
    t0 = time.perf_counter()
    heaviside = PovznerKernelSpec(kind="fornasier", delta=1.0, theta_speed=2.0)
    smooth = PovznerKernelSpec(kind="smooth_bump", range_r=1.0, speed_scale=4.0)
    rh = validate_kernel(heaviside, 20000, seed=5)
    rs = validate_kernel(smooth, 20000, seed=5)
    scale_h = max(rh.details["kernel_scale"], 1e-30)
    scale_s = max(rs.details["kernel_scale"], 1e-30)
    ok = (
        rh.passed
        and rs.passed
        # Heaviside kernel: discontinuous factors exactly invariant, the
        # continuous grazing factor to floating-point resolution
        and rh.details["violation_time_reversal"] == 0.0
        and rh.details["violation_short_range"] == 0.0
        and rh.details["support_indicator_flips"] == 0
        and rh.details["violation_collision_invariance"] <= 1e-13 * scale_h
        and rs.details["violation_time_reversal"] <= 1e-13 * scale_s
        and rs.details["violation_collision_invariance"] <= 1e-13 * scale_s
        and rs.details["violation_short_range"] == 0.0
    )
    elapsed = time.perf_counter() - t0
    report(2, ok and elapsed < 5.0, f"{elapsed:.1f}s")


def test_criterion_3_equilibrium_annihilation():
    t0 = time.perf_counter()
    uniform = gaussian(L=1e6)
    spec = QuadratureSpec(r3_points_per_axis=10, sphere_rule_order=5, segment_points=8)
    rng = np.random.default_rng(33)
    worst = 0.0
    for _ in range(20):
        x = rng.uniform(-0.5, 0.5, 3)
        v = rng.uniform(-1.5, 1.5, 3)
        rb = eval_boltzmann(uniform, uniform, x, v, spec)
        re = eval_enskog(ENSKOG, uniform, uniform, x, v, spec)
        rp = eval_povzner(POVZNER, uniform, uniform, x, v, spec)
        for r in (rb, re, rp):
            assert abs(r.value) <= r.error_estimate
            worst = max(worst, abs(r.value) / max(r.error_estimate, 1e-300))
    elapsed = time.perf_counter() - t0
    report(3, elapsed < 120.0, f"worst |value|/estimate={worst:.2e} {elapsed:.1f}s")


def _strong_form(criterion, model, dist, spec, budget):
    t0 = time.perf_counter()
    failures = []
    for moment in MOMENT_LIST:
        for x, v in POINTS:
            h = 0.02 * (1.0 + float(np.linalg.norm(v)))
            r = check_divergence(model, dist, moment, x, v, spec, h=h)
            if not r.passed:
                failures.append((moment, x, v, r.residual, r.tolerance))
    # refinement study at a point without coordinate symmetries: h halved,
    # axis points doubled
    orders = {}
    x, v = POINTS[3]
    fine = QuadratureSpec(
        r3_points_per_axis=2 * spec.r3_points_per_axis,
        r3_truncation_radius_sigmas=spec.r3_truncation_radius_sigmas,
        sphere_rule_order=spec.sphere_rule_order,
        segment_points=spec.segment_points,
    )
    for moment in MOMENT_LIST:
        h = 0.02 * (1.0 + float(np.linalg.norm(v)))
        r0 = check_divergence(model, dist, moment, x, v, spec, h=h)
        r1 = check_divergence(model, dist, moment, x, v, fine, h=h / 2)
        order = np.log2(
            max(abs(r0.residual), 1e-300) / max(abs(r1.residual), 1e-300)
        )
        if abs(r1.residual) <= 0.05 * r1.tolerance:
            order = max(order, 1.0)  # refined residual already at its floor
        orders[moment] = order
    elapsed = time.perf_counter() - t0
    ok = not failures and all(o >= 1.0 for o in orders.values()) and elapsed < budget
    detail = (
        f"failures={failures or 'none'} orders="
        + ",".join(f"{m}:{o:.1f}" for m, o in orders.items())
        + f" {elapsed:.0f}s"
    )
    report(criterion, ok, detail)


def test_criterion_4_enskog_strong_form():
    spec = QuadratureSpec(r3_points_per_axis=12, sphere_rule_order=6, segment_points=8)
    _strong_form(4, ENSKOG, gaussian(), spec, budget=1800.0)


def test_criterion_5_povzner_strong_form():
    # an x-modulated Maxwellian annihilates the Povzner integrand pointwise,
    # so the non-degenerate protocol runs on the perturbed family
    spec = QuadratureSpec(r3_points_per_axis=8, sphere_rule_order=4, segment_points=6)
    _strong_form(5, POVZNER, perturbed(), spec, budget=1800.0)


def test_criterion_6_weak_form_duals():
    t0 = time.perf_counter()
    phis = [
        TestFunctionSpec(kind="gaussian_poly", x_width=1.5, v_width=1.5,
                         lin_v=[0.3, 0, 0], lin_x=[0.0, 0.2, 0.0]),
        TestFunctionSpec(kind="compact_bump", x_width=3.0, v_width=3.5),
    ]
    runs = 0
    exceed = []
    for model, dist in ((ENSKOG, gaussian()), (POVZNER, perturbed())):
        for moment in MOMENT_LIST:
            for pi, phi in enumerate(phis):
                for seed in (1, 2, 3, 4):
                    spec = QuadratureSpec(
                        r3_points_per_axis=10, sphere_rule_order=5,
                        segment_points=8, qmc_samples=262144, qmc_seed=seed,
                    )
                    r = check_weakform(model, dist, moment, phi, spec)
                    runs += 1
                    if not r.passed:
                        exceed.append(
                            (model.kind, moment, pi, seed,
                             abs(r.residual) / max(r.tolerance / 3, 1e-300))
                        )
    elapsed = time.perf_counter() - t0
    ok = runs == 80 and len(exceed) <= 1 and elapsed < 3600.0
    report(6, ok, f"{runs} runs, exceedances={exceed or 'none'} {elapsed:.0f}s")


def test_criterion_7_global_conservation():
    t0 = time.perf_counter()
    enskog_asym = CollisionModel(
        kind="enskog", sigma=0.5,
        chi=ChiSpec("enskog_asymptotic", sigma=0.5, density_of=gaussian()),
    )
    povzner_forn = CollisionModel(
        kind="povzner",
        kernel=PovznerKernelSpec(kind="fornasier", delta=1.0, theta_speed=4.0),
    )
    spec = QuadratureSpec(qmc_samples=262144, qmc_seed=7)
    worst = 0.0
    for model in (enskog_asym, povzner_forn):
        for dist in (gaussian(), perturbed()):
            r = check_global_conservation(model, dist, spec, abs_tolerance=1e-3)
            assert r.passed, (model.kind, dist.family, r.details)
            worst = max(worst, max(r.details["normalized"]))
    elapsed = time.perf_counter() - t0
    report(7, elapsed < 1200.0, f"worst normalized residual={worst:.2e} {elapsed:.0f}s")


def test_criterion_8_entropy_sign():
    t0 = time.perf_counter()
    spec = QuadratureSpec(qmc_samples=1048576, qmc_seed=7)
    # positions do not change in a collision, so the spatial factors of any
    # Maxwellian cancel exactly and the log ratio vanishes pointwise; a
    # finite width keeps the sampling volume (and the roundoff it would
    # amplify) bounded, unlike an L -> infinity surrogate
    r_uniform = entropy_production_povzner(POVZNER, gaussian(L=1.0), spec)
    r_pert = entropy_production_povzner(POVZNER, perturbed(0.3), spec)
    stderr = r_pert.error_estimates["stderr"]
    ok = (
        r_uniform.passed
        and abs(r_uniform.lhs) <= max(r_uniform.tolerance, 1e-15)
        and r_uniform.details["pointwise_bound_violation"] == 0.0
        and r_pert.details["pointwise_bound_violation"] == 0.0
        and r_pert.lhs < -5.0 * stderr
    )
    elapsed = time.perf_counter() - t0
    report(
        8, ok and elapsed < 600.0,
        f"D_uniform={r_uniform.lhs:+.2e} D_perturbed={r_pert.lhs:+.2e}"
        f" ({abs(r_pert.lhs) / stderr:.1f} sigma) {elapsed:.0f}s",
    )


def test_criterion_9_moments_and_dilute_corrections():
    t0 = time.perf_counter()
    f = gaussian(T=1.3, u0=(0.5, 0.0, -0.2), A=0.8)
    spec = QuadratureSpec(r3_points_per_axis=14)
    axis = np.linspace(-1.0, 1.0, 5)
    worst = 0.0
    for gx in axis:
        for gy in axis:
            for gz in axis:
                x = np.array([gx, gy, gz])
                m = compute_moments(f, x, spec)
                ref = analytic_moments(f, x)
                assert abs(m.rho - ref.rho) <= m.errors["rho"] + 1e-14
                if m.rho > 0:
                    assert np.max(np.abs(m.u - ref.u)) <= m.errors["u"] + 1e-12
                assert np.max(np.abs(m.P - ref.P)) <= m.errors["P"] + 1e-14
                assert np.max(np.abs(m.q - ref.q)) <= m.errors["q"] + 1e-14
                worst = max(worst, abs(m.rho - ref.rho))
    dilute = CollisionModel(
        kind="enskog", sigma=1e-6, chi=ChiSpec("constant", value=1.0)
    )
    corr = collision_corrections(
        dilute, gaussian(),
        [0.0, 0, 0],
        QuadratureSpec(r3_points_per_axis=6, sphere_rule_order=4, segment_points=6),
    )
    entries = max(float(np.max(np.abs(corr.stress))), float(np.max(np.abs(corr.energy))))
    elapsed = time.perf_counter() - t0
    ok = entries < 1e-12 and elapsed < 600.0
    report(9, ok, f"worst rho dev={worst:.1e} dilute entries={entries:.1e} {elapsed:.0f}s")


def test_criterion_10_reproducibility(tmp_path):
    t0 = time.perf_counter()

    def strip(path):
        out = []
        for line in Path(path).read_text().splitlines():
            obj = json.loads(line)
            obj.pop("wall_time", None)
            if "summary" in obj:
                obj["summary"].pop("wall_time", None)
            out.append(json.dumps(obj, sort_keys=True))
        return "\n".join(out)

    with open(CONFIGS / "enskog_smoke.yaml") as fh:
        raw = yaml.safe_load(fh)
    config = tmp_path / "smoke.yaml"
    config.write_text(yaml.safe_dump(raw))
    texts = []
    for workers in (1, 2, 8):
        out = tmp_path / f"report_{workers}.jsonl"
        status = cli_main(
            ["verify", str(config), "--out", str(out), "--parallel", str(workers)]
        )
        assert status == 0
        texts.append(strip(out))
    elapsed = time.perf_counter() - t0
    ok = texts[0] == texts[1] == texts[2]
    report(10, ok, f"3 worker counts byte-identical modulo wall_time {elapsed:.0f}s")
