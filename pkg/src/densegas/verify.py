"""Identity verification: strong form, weak form, conservation, entropy sign.

Four checks cover the conservative-form claims:

* check_divergence: pointwise residual of weight*C[f,f] against the
  central-difference phase-space divergence of the currents;
* check_weakform: the same identity paired with a smooth test function,
  with both sides evaluated as independent quasi-Monte-Carlo integrals
  (the single-gain form on the left, the current pairings on the right);
* check_global_conservation: the five collision invariants integrated
  over all of phase space;
* entropy_production_povzner: sign of the entropy production functional,
  plus the pointwise a ln(b/a) <= b - a bound at every sample.

The QMC integrands are written over the unit cube with truncated-normal
importance maps on the position/velocity blocks (clipped at the
truncation radius) and exact ball maps for the kernel-supported blocks;
without the maps the integrand concentration makes the empirical standard
errors uselessly large at desk-scale sample counts.

Tolerances are explicit: c1 * (measured quadrature differences between the
working and a once-reduced rule) + c2 * (Richardson estimate of the finite
difference error) for the strong form, and 3 combined standard errors for
the QMC checks.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.stats import qmc as _scipy_qmc

from .collision import BOLTZMANN, ENSKOG, POVZNER, CollisionModel, raw_collision
from .currents import raw_field
from .geometry import as_vec3
from .kernels import chi_eval, kernel_eval
from .quadrature import (
    QMC_REPLICATES,
    QuadratureSpec,
    _next_pow2,
    gauss_legendre,
    pairwise_sum,
)
from .reporting import VerificationReport
from .testfields import DistributionSpec, eval_distribution

MOMENTS = ("mass", "momentum1", "momentum2", "momentum3", "energy")


# ---------------------------------------------------------------------------
# Test functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TestFunctionSpec:
    """Smooth test function phi(x, v) with analytic gradients.

    gaussian_poly: (const + <lin_x, x-xc> + <lin_v, v-vc>) * Gaussian;
    compact_bump: product of C-infinity bumps in |x-xc| and |v-vc|.
    """

    __test__ = False  # keep pytest from collecting this as a test class

    kind: str = "gaussian_poly"
    x_center: np.ndarray = None
    v_center: np.ndarray = None
    x_width: float = 1.0
    v_width: float = 1.0
    const: float = 1.0
    lin_x: np.ndarray = None
    lin_v: np.ndarray = None

    def __post_init__(self):
        if self.kind not in ("gaussian_poly", "compact_bump"):
            raise ValueError(f"unknown test function kind {self.kind!r}")
        for name, default in (
            ("x_center", 0.0), ("v_center", 0.0), ("lin_x", 0.0), ("lin_v", 0.0)
        ):
            val = getattr(self, name)
            arr = np.full(3, default) if val is None else as_vec3(val).copy()
            object.__setattr__(self, name, arr)
        if self.x_width <= 0 or self.v_width <= 0:
            raise ValueError("widths must be > 0")


def phi_eval(spec: TestFunctionSpec, x, v):
    x = as_vec3(x)
    v = as_vec3(v)
    dx = x - spec.x_center
    dv = v - spec.v_center
    if spec.kind == "gaussian_poly":
        p = (
            spec.const
            + np.sum(spec.lin_x * dx, axis=-1)
            + np.sum(spec.lin_v * dv, axis=-1)
        )
        g = np.exp(
            -0.5 * np.sum(dx * dx, axis=-1) / spec.x_width**2
            - 0.5 * np.sum(dv * dv, axis=-1) / spec.v_width**2
        )
        return p * g
    return _bump_nd(dx, spec.x_width) * _bump_nd(dv, spec.v_width)


def phi_gradients(spec: TestFunctionSpec, x, v):
    """(grad_x phi, grad_v phi), both shaped like the broadcast inputs."""
    x = as_vec3(x)
    v = as_vec3(v)
    dx = x - spec.x_center
    dv = v - spec.v_center
    if spec.kind == "gaussian_poly":
        p = (
            spec.const
            + np.sum(spec.lin_x * dx, axis=-1)
            + np.sum(spec.lin_v * dv, axis=-1)
        )
        g = np.exp(
            -0.5 * np.sum(dx * dx, axis=-1) / spec.x_width**2
            - 0.5 * np.sum(dv * dv, axis=-1) / spec.v_width**2
        )
        gx = g[..., None] * (spec.lin_x - (p / spec.x_width**2)[..., None] * dx)
        gv = g[..., None] * (spec.lin_v - (p / spec.v_width**2)[..., None] * dv)
        return gx, gv
    bx = _bump_nd(dx, spec.x_width)
    bv = _bump_nd(dv, spec.v_width)
    gx = (bv * _bump_grad_factor(dx, spec.x_width) * bx)[..., None] * dx
    gv = (bx * _bump_grad_factor(dv, spec.v_width) * bv)[..., None] * dv
    return gx, gv


def _bump_nd(d, width):
    r2 = np.sum(d * d, axis=-1) / width**2
    out = np.zeros(r2.shape)
    inside = r2 < 1.0
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        out[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    return out


def _bump_grad_factor(d, width):
    """exp(-1/(1-r^2)) differentiates to bump * (-2 d_i / w^2) / (1-r^2)^2."""
    r2 = np.sum(d * d, axis=-1) / width**2
    out = np.zeros(r2.shape)
    inside = r2 < 1.0
    out[inside] = -2.0 / (width**2 * (1.0 - r2[inside]) ** 2)
    return out


# ---------------------------------------------------------------------------
# Strong form
# ---------------------------------------------------------------------------


def _moment_weight(moment: str, v):
    v = as_vec3(v)
    if moment == "mass":
        return np.ones(v.shape[:-1])
    if moment.startswith("momentum"):
        return v[..., int(moment[-1]) - 1]
    if moment == "energy":
        return np.sum(v * v, axis=-1)
    raise ValueError(f"unknown moment {moment!r}")


def _moment_fields(moment: str):
    if moment == "mass":
        return "J0", None
    if moment.startswith("momentum"):
        k = moment[-1]
        return f"J{k}", f"I{k}"
    return "J4", "I4"


def _fd_divergence(model, f, tag, x, v, h, spec, wrt):
    """Central-difference divergence of a current field, step h, in x or v."""
    x = as_vec3(x)
    v = as_vec3(v)
    div = 0.0
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        if wrt == "v":
            up, _, _ = raw_field(model, f, tag, x, v + e, spec)
            dn, _, _ = raw_field(model, f, tag, x, v - e, spec)
        else:
            up, _, _ = raw_field(model, f, tag, x + e, v, spec)
            dn, _, _ = raw_field(model, f, tag, x - e, v, spec)
        div += (up[i] - dn[i]) / (2.0 * h)
    return div


def check_divergence(
    model: CollisionModel,
    f: DistributionSpec,
    moment: str,
    x,
    v,
    spec: QuadratureSpec,
    h: float | None = None,
    c1: float = 2.0,
    c2: float = 2.0,
    name: str | None = None,
) -> VerificationReport:
    """Strong-form residual weight(v) * C[f,f] - div_v J - div_x I at one point.

    The tolerance combines a measured quadrature sensitivity (difference
    against a once-reduced rule, weight c1) with a Richardson estimate of
    the finite-difference truncation (|D_2h - D_h| / 3, weight c2).
    """
    t0 = time.perf_counter()
    x = as_vec3(x)
    v = as_vec3(v)
    if h is None:
        h = 1e-2 * (1.0 + float(np.linalg.norm(v)))
    hx = h
    jtag, itag = _moment_fields(moment)
    red = spec.reduced()

    lhs_val, lhs_mag, _ = raw_collision(model, f, f, x, v, spec)
    lhs_red, _, _ = raw_collision(model, f, f, x, v, red)
    wgt = float(_moment_weight(moment, v))
    lhs = wgt * lhs_val

    div_h = _fd_divergence(model, f, jtag, x, v, h, spec, "v")
    div_2h = _fd_divergence(model, f, jtag, x, v, 2 * h, spec, "v")
    div_red = _fd_divergence(model, f, jtag, x, v, h, red, "v")
    if itag is not None:
        div_h += _fd_divergence(model, f, itag, x, v, hx, spec, "x")
        div_2h += _fd_divergence(model, f, itag, x, v, 2 * hx, spec, "x")
        div_red += _fd_divergence(model, f, itag, x, v, hx, red, "x")

    residual = lhs - div_h
    quad_term = abs(wgt) * abs(lhs_val - lhs_red) + abs(div_h - div_red)
    fd_term = abs(div_2h - div_h) / 3.0
    floor = 1e-13 * (abs(wgt) * lhs_mag + 1.0e-30)
    tolerance = c1 * quad_term + c2 * fd_term + floor
    passed = abs(residual) <= tolerance
    return VerificationReport(
        check=name or f"divergence[{model.kind}:{moment}]",
        kind="divergence",
        passed=bool(passed),
        lhs=float(lhs),
        rhs=float(div_h),
        residual=float(residual),
        tolerance=float(tolerance),
        error_estimates={
            "quadrature": float(quad_term),
            "fd_richardson": float(fd_term),
        },
        details={
            "x": x.tolist(),
            "v": v.tolist(),
            "h": float(h),
            "c1": c1,
            "c2": c2,
        },
        model=model.kind,
        moment=moment,
        quadrature=spec.to_dict(),
        wall_time=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Importance-mapped QMC over the unit cube
# ---------------------------------------------------------------------------


def _qmc_unit(fn, dim, spec, idx):
    """Replicated scrambled-Sobol mean of fn over [0,1]^dim.

    Returns (mean, stderr, nodes) with per-component errors for vector fn.
    """
    seed = spec.qmc_seed + 104729 * (idx + 1)
    per_rep = _next_pow2(max(4, -(-spec.qmc_samples // QMC_REPLICATES)))
    reps = []
    for rep in range(QMC_REPLICATES):
        rng = np.random.default_rng([seed, rep])
        sob = _scipy_qmc.Sobol(dim, scramble=True, seed=rng)
        u = sob.random(per_rep)
        u = np.clip(u, 1e-15, 1.0 - 1e-15)
        vals = np.asarray(fn(u), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise_from = np.argwhere(~np.isfinite(np.atleast_2d(vals.T)))[0]
            from .quadrature import NodeFailureError

            raise NodeFailureError(
                f"weak-form integrand returned non-finite value (replicate {rep},"
                f" flat index {raise_from.tolist()})"
            )
        reps.append(pairwise_sum(vals) / per_rep)
    reps = np.asarray(reps)
    mean = pairwise_sum(reps) / QMC_REPLICATES
    stderr = np.std(reps, axis=0, ddof=1) / np.sqrt(QMC_REPLICATES)
    return mean, stderr, QMC_REPLICATES * per_rep


def _truncnorm_block(u, center, sigma, clip):
    """Map (N,3) unit samples to a truncated-normal block; returns (pts, weight).

    The weight is the reciprocal sampling density, so integrand * weight
    averaged over the cube estimates the integral over the clipped block.
    """
    span = ndtr(clip) - ndtr(-clip)
    xi = ndtri(ndtr(-clip) + u * span)
    pts = center + sigma * xi
    logw = 0.5 * np.sum(xi * xi, axis=-1)
    w = (np.sqrt(2.0 * np.pi) * sigma * span) ** 3 * np.exp(logw)
    return pts, w


def _sphere_block(u):
    """Map (N,2) unit samples to sphere directions; weight 4 pi."""
    z = 1.0 - 2.0 * u[..., 0]
    az = 2.0 * np.pi * u[..., 1]
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    n = np.stack([r * np.cos(az), r * np.sin(az), z], axis=-1)
    return n, 4.0 * np.pi


def _ball_block(u, radius):
    """Map (N,3) unit samples to offsets in a ball; weight (4/3) pi r^3."""
    n, _ = _sphere_block(u[..., :2])
    rad = radius * np.cbrt(np.maximum(u[..., 2], 1e-18))
    return rad[..., None] * n, (4.0 / 3.0) * np.pi * radius**3


@dataclass(frozen=True)
class _WeakMaps:
    """Importance maps shared by the weak-form integrands of one check.

    Every distribution-function argument in every integrand is sampled
    directly at its natural Gaussian scale (translated and rotated velocity
    pairs included, via the unit-Jacobian inverse substitutions), so the
    integrand-to-density ratio stays O(1) and the empirical standard errors
    are meaningful at desk-scale sample counts.
    """

    f: DistributionSpec
    x_sigma: float
    v_sigma: float
    clip_x: float
    clip_v: float

    def x(self, u):
        return _truncnorm_block(u, self.f.center, self.x_sigma, self.clip_x)

    def v(self, u):
        return _truncnorm_block(u, self.f.bulk, self.v_sigma, self.clip_v)


def _weak_maps(model, f, phi, spec) -> _WeakMaps:
    trunc = spec.r3_truncation_radius_sigmas
    st = np.sqrt(f.temperature)
    # two spatial Gaussians multiply to scale L/sqrt(2); 0.8 L covers that
    x_sigma = 0.8 * f.width
    v_sigma = 1.05 * st
    return _WeakMaps(
        f=f,
        x_sigma=x_sigma,
        v_sigma=v_sigma,
        clip_x=trunc / 0.8,
        clip_v=trunc / 1.05,
    )


def _line_weight(moment, vs, ws, n):
    """Fused a-b+c weight at translated velocities (1 for mass)."""
    if moment == "mass":
        return np.ones(np.broadcast_shapes(vs.shape[:-1], ws.shape[:-1]))
    if moment.startswith("momentum"):
        k = int(moment[-1]) - 1
        dv = np.sum(vs * n, axis=-1)
        dw = np.sum(ws * n, axis=-1)
        return vs[..., k] - dv * n[..., k] + dw * n[..., k]
    dv = np.sum(vs * n, axis=-1)
    dw = np.sum(ws * n, axis=-1)
    return np.sum(vs * vs, axis=-1) - dv * dv + dw * dw


# ---------------------------------------------------------------------------
# Weak form
# ---------------------------------------------------------------------------


def _weak_lhs(model, f, moment, phi, maps):
    """(fn over unit cube, dim) for the single-gain form of (w*C, phi)."""
    if model.kind == ENSKOG:
        sigma, chi = model.sigma, model.chi

        def fn(u):
            x, wx = maps.x(u[:, 0:3])
            v, wv = maps.v(u[:, 3:6])
            w, ww = maps.v(u[:, 6:9])
            n, wn = _sphere_block(u[:, 9:11])
            d = np.sum((v - w) * n, axis=-1)
            vp = v - n * d[..., None]
            kern = (
                sigma**2
                * np.maximum(d, 0.0)
                * chi_eval(chi, x + 0.5 * sigma * n)
                * eval_distribution(f, x, v)
                * eval_distribution(f, x + sigma * n, w)
            )
            jump = _moment_weight(moment, vp) * phi_eval(phi, x, vp)
            jump -= _moment_weight(moment, v) * phi_eval(phi, x, v)
            return kern * jump * wx * wv * ww * wn

        return fn, 11

    kernel = model.kernel

    def fn(u):
        x, wx = maps.x(u[:, 0:3])
        v, wv = maps.v(u[:, 3:6])
        off, wo = _ball_block(u[:, 6:9], kernel.speed_range)
        w = v + off
        yoff, wy = _ball_block(u[:, 9:12], kernel.range_r)
        y = x + yoff
        dist = np.linalg.norm(yoff, axis=-1)
        n = yoff / np.maximum(dist, 1e-30)[..., None]
        d = np.sum((v - w) * n, axis=-1)
        vp = v - n * d[..., None]
        kern = (
            kernel_eval(kernel, -yoff, v - w)
            * eval_distribution(f, x, v)
            * eval_distribution(f, y, w)
        )
        jump = _moment_weight(moment, vp) * phi_eval(phi, x, vp)
        jump -= _moment_weight(moment, v) * phi_eval(phi, x, v)
        return kern * jump * wx * wv * wo * wy

    return fn, 12


def _weak_rhs(model, f, moment, phi, maps, spec):
    """List of (fn, dim) unit-cube integrands for the current pairings.

    Each pairing samples the velocities at which the distribution factors
    are evaluated (the translated pair for the line terms, the rotated pair
    for the rotation terms) and derives the pairing point (x, v) through
    the unit-Jacobian inverse substitution at every inner node.
    """
    tq, wt = gauss_legendre(spec.segment_points, 0.0, 1.0)
    th, wth = gauss_legendre(spec.segment_points, 0.0, 0.5 * np.pi)
    cth, sth = np.cos(th), np.sin(th)

    if model.kind == ENSKOG:
        sigma, chi = model.sigma, model.chi
        sq, wsq = gauss_legendre(spec.segment_points, 0.0, sigma)

        def line(u):
            x, wx = maps.x(u[:, 0:3])
            a, wa = maps.v(u[:, 3:6])      # translated pair (v+sn, w+sn)
            b, wb = maps.v(u[:, 6:9])
            n, wn = _sphere_block(u[:, 9:11])
            d = np.sum((a - b) * n, axis=-1)
            dp2 = np.maximum(d, 0.0) * d
            chi_n = chi_eval(chi, x + 0.5 * sigma * n)
            heavy = (
                _line_weight(moment, a, b, n)
                * eval_distribution(f, x, a)
                * eval_distribution(f, x + sigma * n, b)
            )
            v_t = a[:, None, :] - (tq[None, :] * d[:, None])[..., None] * n[:, None, :]
            _, gv = phi_gradients(phi, x[:, None, :], v_t)
            inner = np.sum(n[:, None, :] * gv, axis=-1) @ wt
            return -(sigma**2) * dp2 * chi_n * heavy * inner * wx * wa * wb * wn

        parts = [(line, 11)]
        if moment == "mass":
            return parts

        def rotation(u):
            x, wx = maps.x(u[:, 0:3])
            a, wa = maps.v(u[:, 3:6])      # rotated pair (v_-t, w_-t)
            b, wb = maps.v(u[:, 6:9])
            n, wn = _sphere_block(u[:, 9:11])
            d = np.sum((a - b) * n, axis=-1)
            dp2 = np.maximum(d, 0.0) ** 2
            chi_n = chi_eval(chi, x - 0.5 * sigma * n)
            if moment.startswith("momentum"):
                fac = n[:, int(moment[-1]) - 1]
            else:
                fac = np.sum((a + b) * n, axis=-1)
            heavy = (
                dp2
                * fac
                * eval_distribution(f, x - sigma * n, a)
                * eval_distribution(f, x, b)
            )
            v_th = a[:, None, :] * cth[None, :, None] + b[:, None, :] * sth[None, :, None]
            w_th = -a[:, None, :] * sth[None, :, None] + b[:, None, :] * cth[None, :, None]
            _, gv = phi_gradients(phi, x[:, None, :], v_th)
            inner = np.sum(w_th * gv, axis=-1) @ wth
            return 0.5 * sigma**2 * chi_n * heavy * inner * wx * wa * wb * wn

        def xcurrent(u):
            x, wx = maps.x(u[:, 0:3])
            v, wv = maps.v(u[:, 3:6])
            w, ww = maps.v(u[:, 6:9])
            n, wn = _sphere_block(u[:, 9:11])
            d = np.sum((v - w) * n, axis=-1)
            dp2 = np.maximum(d, 0.0) ** 2
            gx, _ = phi_gradients(phi, x, v)
            gnx = np.sum(n * gx, axis=-1)
            xs = x[:, None, :] - sq[None, :, None] * n[:, None, :]
            xw = x[:, None, :] + (sigma - sq)[None, :, None] * n[:, None, :]
            chi_s = chi_eval(
                chi, x[:, None, :] + (0.5 * sigma - sq)[None, :, None] * n[:, None, :]
            )
            core = (
                chi_s
                * eval_distribution(f, xs, v[:, None, :])
                * eval_distribution(f, xw, w[:, None, :])
            )
            if moment.startswith("momentum"):
                fac = n[:, None, int(moment[-1]) - 1]
            else:
                fac = np.sum((v + w) * n, axis=-1)[:, None]
            inner = (core * fac) @ wsq
            # the position current carries the corrected (negative) sign, so
            # the pairing -(I, grad_x phi) enters with +1/2
            return 0.5 * sigma**2 * dp2 * inner * gnx * wx * wv * ww * wn

        parts.append((rotation, 11))
        parts.append((xcurrent, 11))
        return parts

    kernel = model.kernel
    R = kernel.range_r
    sr = kernel.speed_range

    def line(u):
        x, wx = maps.x(u[:, 0:3])
        a, wa = maps.v(u[:, 3:6])          # translated pair; b - a = w - v
        off, wo = _ball_block(u[:, 6:9], sr)
        b = a + off
        yoff, wy = _ball_block(u[:, 9:12], R)
        y = x + yoff
        dist = np.linalg.norm(yoff, axis=-1)
        n = yoff / np.maximum(dist, 1e-30)[..., None]
        d = np.sum((a - b) * n, axis=-1)
        jval = kernel_eval(kernel, -yoff, a - b)
        heavy = (
            _line_weight(moment, a, b, n)
            * eval_distribution(f, x, a)
            * eval_distribution(f, y, b)
        )
        v_t = a[:, None, :] - (tq[None, :] * d[:, None])[..., None] * n[:, None, :]
        _, gv = phi_gradients(phi, x[:, None, :], v_t)
        inner = np.sum(n[:, None, :] * gv, axis=-1) @ wt
        return -jval * d * heavy * inner * wx * wa * wo * wy

    parts = [(line, 12)]
    if moment == "mass":
        return parts

    def rotation(u, which):
        x, wx = maps.x(u[:, 0:3])
        a, wa = maps.v(u[:, 3:6])          # rotated pair; b - a inside kernel ball
        off, wo = _ball_block(u[:, 6:9], sr)
        b = a + off
        yoff, wy = _ball_block(u[:, 9:12], R)
        dist = np.linalg.norm(yoff, axis=-1)
        nhat = yoff / np.maximum(dist, 1e-30)[..., None]
        rel = a - b
        scal = np.sum(rel * nhat, axis=-1)
        if moment.startswith("momentum"):
            fac = scal * nhat[:, int(moment[-1]) - 1]
        else:
            fac = scal * np.sum((a + b) * nhat, axis=-1)
        jv = kernel_eval(kernel, yoff, rel)
        heavy = jv * fac
        cps = (cth + sth)[None, :, None]
        x_rot = (x[:, None, :] + sth[None, :, None] * yoff[:, None, :]) / cps
        y_rot = (x[:, None, :] - cth[None, :, None] * yoff[:, None, :]) / cps
        f_pair = eval_distribution(f, x_rot, a[:, None, :]) * eval_distribution(
            f, y_rot, b[:, None, :]
        )
        v_th = a[:, None, :] * cth[None, :, None] + b[:, None, :] * sth[None, :, None]
        if which == "v":
            w_th = -a[:, None, :] * sth[None, :, None] + b[:, None, :] * cth[None, :, None]
            _, gv = phi_gradients(phi, x[:, None, :], v_th)
            pair = np.sum(w_th * gv, axis=-1)
        else:
            y_vec = (
                x[:, None, :] * (cth - sth)[None, :, None] - yoff[:, None, :]
            ) / cps
            gx, _ = phi_gradients(phi, x[:, None, :], v_th)
            pair = np.sum(y_vec * gx, axis=-1)
        # dy = dxi / cps^3: the separation re-parametrization jacobian
        inner = (f_pair * pair / cps[..., 0] ** 3) @ wth
        return 0.5 * heavy * inner * wx * wa * wo * wy

    parts.append((lambda u: rotation(u, "v"), 12))
    parts.append((lambda u: rotation(u, "x"), 12))
    return parts


def check_weakform(
    model: CollisionModel,
    f: DistributionSpec,
    moment: str,
    phi: TestFunctionSpec,
    spec: QuadratureSpec,
    name: str | None = None,
) -> VerificationReport:
    """Weak-form identity: (weight*C[f,f], phi) against the current pairings.

    Both sides are scrambled-Sobol integrals over independent variable
    flattenings; pass criterion is agreement within 3 combined standard
    errors.
    """
    t0 = time.perf_counter()
    if model.kind == BOLTZMANN:
        raise ValueError("weak-form currents are defined for enskog and povzner")
    maps = _weak_maps(model, f, phi, spec)
    lhs_fn, lhs_dim = _weak_lhs(model, f, moment, phi, maps)
    rhs_parts = _weak_rhs(model, f, moment, phi, maps, spec)

    lhs, lhs_err, nodes = _qmc_unit(lhs_fn, lhs_dim, spec, 0)
    var = float(lhs_err) ** 2
    rhs_total = 0.0
    rhs_errs = []
    for i, (fn, dim) in enumerate(rhs_parts):
        val, err, nd = _qmc_unit(fn, dim, spec, i + 1)
        rhs_total += float(val)
        rhs_errs.append(float(err))
        var += float(err) ** 2
        nodes += nd
    stderr = float(np.sqrt(var))
    residual = float(lhs - rhs_total)
    tolerance = 3.0 * stderr
    return VerificationReport(
        check=name or f"weakform[{model.kind}:{moment}]",
        kind="weakform",
        passed=bool(abs(residual) <= tolerance),
        lhs=float(lhs),
        rhs=float(rhs_total),
        residual=residual,
        tolerance=tolerance,
        error_estimates={
            "lhs_stderr": float(lhs_err),
            "rhs_stderr": rhs_errs,
            "combined_stderr": stderr,
        },
        details={"phi": phi.kind, "qmc_seed": spec.qmc_seed, "nodes": nodes},
        model=model.kind,
        moment=moment,
        quadrature=spec.to_dict(),
        wall_time=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Global conservation and entropy
# ---------------------------------------------------------------------------


def _invariant_jumps(kern, v, vp):
    """Columns: kernel * [psi(v')-psi(v)] for the five invariants, plus a
    magnitude channel |kernel| * (2 + |v|^2 + |v'|^2)."""
    out = np.empty(v.shape[:-1] + (6,))
    out[..., 0] = 0.0
    out[..., 1:4] = kern[..., None] * (vp - v)
    e = np.sum(vp * vp, axis=-1) - np.sum(v * v, axis=-1)
    out[..., 4] = kern * e
    out[..., 5] = np.abs(kern) * (
        2.0 + np.sum(v * v, axis=-1) + np.sum(vp * vp, axis=-1)
    )
    return out


def check_global_conservation(
    model: CollisionModel,
    f: DistributionSpec,
    spec: QuadratureSpec,
    name: str | None = None,
    abs_tolerance: float = 1e-3,
) -> VerificationReport:
    """All five collision invariants integrated over phase space.

    Uses the single-gain weak form with psi in {1, v, |v|^2}; the mass
    component vanishes identically at the integrand level.  Residuals are
    normalized by the |kernel| (2 + |v|^2 + |v'|^2) mass and must stay
    below abs_tolerance + 3 standard errors.
    """
    t0 = time.perf_counter()
    maps = _weak_maps(model, f, None, spec)

    if model.kind == ENSKOG:
        sigma, chi = model.sigma, model.chi

        def fn(u):
            x, wx = maps.x(u[:, 0:3])
            v, wv = maps.v(u[:, 3:6])
            w, ww = maps.v(u[:, 6:9])
            n, wn = _sphere_block(u[:, 9:11])
            d = np.sum((v - w) * n, axis=-1)
            vp = v - n * d[..., None]
            kern = (
                sigma**2
                * np.maximum(d, 0.0)
                * chi_eval(chi, x + 0.5 * sigma * n)
                * eval_distribution(f, x, v)
                * eval_distribution(f, x + sigma * n, w)
                * wx * wv * ww * wn
            )
            return _invariant_jumps(kern, v, vp)

        dim = 11
    else:
        kernel = model.kernel

        def fn(u):
            x, wx = maps.x(u[:, 0:3])
            v, wv = maps.v(u[:, 3:6])
            off, wo = _ball_block(u[:, 6:9], kernel.speed_range)
            w = v + off
            yoff, wy = _ball_block(u[:, 9:12], kernel.range_r)
            dist = np.linalg.norm(yoff, axis=-1)
            n = yoff / np.maximum(dist, 1e-30)[..., None]
            d = np.sum((v - w) * n, axis=-1)
            vp = v - n * d[..., None]
            kern = (
                kernel_eval(kernel, -yoff, v - w)
                * eval_distribution(f, x, v)
                * eval_distribution(f, x + yoff, w)
                * wx * wv * wo * wy
            )
            return _invariant_jumps(kern, v, vp)

        dim = 12

    mean, stderr, nodes = _qmc_unit(fn, dim, spec, 0)
    values = mean[:5]
    norm = max(float(mean[5]), 1e-300)
    residuals = np.abs(values) / norm
    tols = abs_tolerance + 3.0 * stderr[:5] / norm
    margins = residuals - tols
    passed = bool(np.all(margins <= 0.0))
    worst = int(np.argmax(margins))
    return VerificationReport(
        check=name or f"global_conservation[{model.kind}]",
        kind="global_conservation",
        passed=passed,
        lhs=float(values[worst]),
        rhs=0.0,
        residual=float(residuals[worst]),
        tolerance=float(tols[worst]),
        error_estimates={"stderr": stderr[:5].tolist(), "normalization": norm},
        details={
            "components": values.tolist(),
            "normalized": residuals.tolist(),
            "tolerances": tols.tolist(),
            "component_names": ["mass", "momentum1", "momentum2", "momentum3", "energy"],
            "nodes": nodes,
        },
        model=model.kind,
        moment="all",
        quadrature=spec.to_dict(),
        wall_time=time.perf_counter() - t0,
    )


def entropy_production_povzner(
    model: CollisionModel,
    f: DistributionSpec,
    spec: QuadratureSpec,
    floor: float = 1e-30,
    name: str | None = None,
) -> VerificationReport:
    """Entropy production D = 1/2 int f f* J ln(gain/loss); asserts D <= 0.

    Densities are clamped below at `floor`; samples where any factor falls
    under the floor contribute zero.  The pointwise bound
    a ln(b/a) <= b - a is checked at every sample (up to a roundoff slack)
    and its worst violation reported.
    """
    if model.kind != POVZNER:
        raise ValueError("entropy production is implemented for the povzner model")
    if floor <= 0:
        raise ValueError("floor must be > 0")
    t0 = time.perf_counter()
    maps = _weak_maps(model, f, None, spec)
    kernel = model.kernel
    worst = {"violation": 0.0, "clamped": 0}

    def fn(u):
        x, wx = maps.x(u[:, 0:3])
        v, wv = maps.v(u[:, 3:6])
        off, wo = _ball_block(u[:, 6:9], kernel.speed_range)
        w = v + off
        yoff, wy = _ball_block(u[:, 9:12], kernel.range_r)
        y = x + yoff
        dist = np.linalg.norm(yoff, axis=-1)
        n = yoff / np.maximum(dist, 1e-30)[..., None]
        d = np.sum((v - w) * n, axis=-1)
        vp = v - n * d[..., None]
        wp = w + n * d[..., None]
        jval = kernel_eval(kernel, -yoff, v - w)
        f1 = eval_distribution(f, x, v)
        f2 = eval_distribution(f, y, w)
        g1 = eval_distribution(f, x, vp)
        g2 = eval_distribution(f, y, wp)
        ok = (f1 >= floor) & (f2 >= floor) & (g1 >= floor) & (g2 >= floor)
        worst["clamped"] += int(np.sum(~ok))
        a = np.where(ok, f1 * f2, 1.0)
        b = np.where(ok, g1 * g2, 1.0)
        log_ratio = np.log(b / a)
        gain_term = a * log_ratio
        slack = 64.0 * np.finfo(float).eps * (a + b + np.abs(gain_term))
        viol = np.max(np.where(ok, gain_term - (b - a) - slack, 0.0), initial=0.0)
        worst["violation"] = max(worst["violation"], float(viol))
        weight = wx * wv * wo * wy
        production = 0.5 * jval * np.where(ok, gain_term, 0.0) * weight
        magnitude = 0.5 * np.abs(jval) * np.where(ok, a + b, 0.0) * weight
        return np.stack([production, magnitude], axis=-1)

    mean, err, nodes = _qmc_unit(fn, 12, spec, 0)
    d_value = float(mean[0])
    stderr = float(err[0])
    # roundoff floor: the log ratio of a pointwise-equilibrium input is
    # ulp-level noise times the |J| f f mass, never exactly zero
    tol = 3.0 * stderr + 1e-13 * float(mean[1])
    passed = d_value <= tol and worst["violation"] <= 0.0
    return VerificationReport(
        check=name or "entropy_production[povzner]",
        kind="entropy",
        passed=bool(passed),
        lhs=d_value,
        rhs=0.0,
        residual=d_value,
        tolerance=tol,
        error_estimates={"stderr": stderr},
        details={
            "pointwise_bound_violation": worst["violation"],
            "clamped_samples": worst["clamped"],
            "floor": floor,
            "nodes": nodes,
        },
        model=model.kind,
        moment="entropy",
        quadrature=spec.to_dict(),
        wall_time=time.perf_counter() - t0,
    )
