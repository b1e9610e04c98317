"""Pointwise evaluation of the Boltzmann, Enskog and Povzner collision integrals.

All three integrals share the elastic pre-to-post transform; they differ in
where the colliding partners sit and how collisions are weighted:

* Boltzmann: same position, hard-sphere kernel <v-w, n>_+;
* Enskog: centers separated by sigma*n, rates modulated by chi, kernel
  sigma^2 <v-w, n>_+ (the sigma^2 cross-section factor is kept inside the
  integrand);
* Povzner: partner anywhere in the ball |y-x| <= R, weighted by the kernel
  J(x-y, v-w).

Gain and loss are evaluated inside one integrand to exploit cancellation;
a Maxwellian annihilates the integrand pointwise, so equilibrium results
are zero to roundoff.  Each evaluation returns an IntegralResult whose
error estimate combines embedded grid-refinement differences with
truncation and roundoff floors computed from the |gain|+|loss| magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import as_vec3, orthonormal_frame
from .kernels import ChiSpec, PovznerKernelSpec, chi_eval, kernel_eval
from .quadrature import (
    EPS,
    IntegralResult,
    QuadratureSpec,
    gauss_legendre,
    hemisphere_rule,
    panel_gauss,
    pairwise_sum,
    sphere_rule,
)
from .testfields import DistributionSpec, eval_distribution

BOLTZMANN = "boltzmann"
ENSKOG = "enskog"
POVZNER = "povzner"

POVZNER_RADIAL_FLOOR = 1e-6  # excluded inner radius, as a fraction of R


@dataclass(frozen=True, eq=False)
class CollisionModel:
    """Tagged choice of collision integral."""

    kind: str = BOLTZMANN
    sigma: float = 0.0
    chi: ChiSpec | None = None
    kernel: PovznerKernelSpec | None = None

    def __post_init__(self):
        if self.kind == ENSKOG:
            if self.sigma <= 0:
                raise ValueError("enskog needs sigma > 0")
            if self.chi is None:
                object.__setattr__(self, "chi", ChiSpec("constant", value=1.0))
        elif self.kind == POVZNER:
            if self.kernel is None:
                raise ValueError("povzner needs a kernel")
        elif self.kind != BOLTZMANN:
            raise ValueError(f"unknown collision model {self.kind!r}")


def embedded_eval(core, spec: QuadratureSpec, fields) -> IntegralResult:
    """Run `core(spec)` plus one halved-resolution pass per field.

    core returns (value, magnitude, nodes); the estimate is the sum of
    |full - halved| differences (linear propagation across layers) plus
    truncation and roundoff floors from the magnitude channel.
    """
    value, mag, nodes = core(spec)
    est = 0.0
    for f in fields:
        v2, _, n2 = core(spec.halved(f))
        est += float(np.max(np.abs(np.asarray(value) - np.asarray(v2))))
        nodes += n2
    mag = float(np.max(mag)) if np.ndim(mag) else float(mag)
    trunc = spec.r3_truncation_radius_sigmas
    est += (np.exp(-0.5 * trunc * trunc) + 64.0 * EPS) * mag
    return IntegralResult(value=value, error_estimate=est, nodes_used=nodes)


def _hemisphere_batch(order: int, axes: np.ndarray):
    """Hemisphere rule nodes for a batch of unit axes: (B, M, 3) nodes."""
    t, wt = gauss_legendre(order, 0.0, 1.0)
    m = 2 * order
    phi = (np.arange(m) + 0.5) * (2.0 * np.pi / m)
    tt = np.repeat(t, m)
    pp = np.tile(phi, order)
    r = np.sqrt(np.maximum(0.0, 1.0 - tt**2))
    e1, e2 = orthonormal_frame(axes)
    nodes = (
        tt[None, :, None] * axes[:, None, :]
        + (r * np.cos(pp))[None, :, None] * e1[:, None, :]
        + (r * np.sin(pp))[None, :, None] * e2[:, None, :]
    )
    weights = np.repeat(wt, m) * (2.0 * np.pi / m)
    return nodes, weights, tt


def _enskog_like_core(f, g, x, v, spec, sigma, chi, prefactor):
    """Shared Boltzmann/Enskog core: outer w-cubature, inner aligned hemisphere.

    Returns (value, magnitude, nodes).  sigma = 0 and chi = None gives the
    Boltzmann operator.
    """
    x = as_vec3(x)
    v = as_vec3(v)
    u0 = g.bulk
    scale = np.sqrt(g.temperature)
    trunc = spec.r3_truncation_radius_sigmas
    n_ax = spec.r3_points_per_axis
    xg, wg = gauss_legendre(n_ax, -scale * trunc, scale * trunc)
    W = np.stack(np.meshgrid(xg, xg, xg, indexing="ij"), axis=-1).reshape(-1, 3) + u0
    WW = (wg[:, None, None] * wg[None, :, None] * wg[None, None, :]).reshape(-1)

    total = 0.0
    magnitude = 0.0
    nodes = 0
    order = spec.sphere_rule_order
    for lo in range(0, len(W), 256):
        w = W[lo : lo + 256]
        ws = WW[lo : lo + 256]
        rel = v - w
        speed = np.linalg.norm(rel, axis=-1)
        ok = speed > 1e-14
        if not np.any(ok):
            continue
        w, ws, rel, speed = w[ok], ws[ok], rel[ok], speed[ok]
        axes = rel / speed[:, None]
        n, wn, tt = _hemisphere_batch(order, axes)          # (B,M,3),(M,),(M,)
        delta = speed[:, None] * tt[None, :]                # <v-w, n>
        vp = v - n * delta[..., None]
        wp = w[:, None, :] + n * delta[..., None]
        if sigma > 0.0:
            x_m = x - sigma * n
            x_p = x + sigma * n
            chi_m = chi_eval(chi, x - 0.5 * sigma * n)
            chi_p = chi_eval(chi, x + 0.5 * sigma * n)
        else:
            x_m = x_p = np.broadcast_to(x, n.shape)
            chi_m = chi_p = 1.0
        gain = chi_m * eval_distribution(f, x, vp) * eval_distribution(g, x_m, wp)
        loss = (
            chi_p
            * eval_distribution(f, x, v)
            * eval_distribution(g, x_p, w[:, None, :])
        )
        kern = prefactor * delta
        contrib = pairwise_sum((ws[:, None] * wn[None, :] * kern * (gain - loss)).ravel())
        magmass = pairwise_sum(
            (ws[:, None] * wn[None, :] * kern * (np.abs(gain) + np.abs(loss))).ravel()
        )
        total += contrib
        magnitude += magmass
        nodes += w.shape[0] * n.shape[1]
    return total, magnitude, nodes


def eval_boltzmann(
    f: DistributionSpec, g: DistributionSpec, x, v, spec: QuadratureSpec
) -> IntegralResult:
    """Hard-sphere Boltzmann collision integral B[f, g](x, v)."""

    def core(s):
        return _enskog_like_core(f, g, x, v, s, 0.0, None, 1.0)

    return embedded_eval(core, spec, ("r3_points_per_axis", "sphere_rule_order"))


def eval_enskog(
    model: CollisionModel, f: DistributionSpec, g: DistributionSpec, x, v,
    spec: QuadratureSpec,
) -> IntegralResult:
    """Standard Enskog collision integral E[f, g](x, v) for the given model."""
    if model.kind != ENSKOG:
        raise ValueError("model is not enskog")

    def core(s):
        return _enskog_like_core(
            f, g, x, v, s, model.sigma, model.chi, model.sigma**2
        )

    return embedded_eval(core, spec, ("r3_points_per_axis", "sphere_rule_order"))


def _povzner_core(f, g, x, v, spec, kernel):
    """Povzner core: spherical y-shell about x, aligned split w-grid per direction."""
    x = as_vec3(x)
    v = as_vec3(v)
    R = kernel.range_r
    sr = kernel.speed_range
    nr = spec.segment_points
    rr, wr = gauss_legendre(nr, POVZNER_RADIAL_FLOOR * R, R)
    nodes_n, w_n = sphere_rule(spec.sphere_rule_order)
    n_ax = spec.r3_points_per_axis

    a_nodes, a_w = panel_gauss(n_ax, [(-sr, 0.0), (0.0, sr)])
    b_nodes, b_w = gauss_legendre(n_ax, -sr, sr)

    total = 0.0
    magnitude = 0.0
    nodes = 0
    f_loss = float(eval_distribution(f, x, v))
    for n, wn in zip(nodes_n, w_n):
        e1, e2 = orthonormal_frame(n)
        A = a_nodes[:, None, None]
        B1 = b_nodes[None, :, None]
        B2 = b_nodes[None, None, :]
        WW = (a_w[:, None, None] * b_w[None, :, None] * b_w[None, None, :]).ravel()
        w_pts = (v + A[..., None] * n + B1[..., None] * e1 + B2[..., None] * e2).reshape(-1, 3)
        rel = v - w_pts
        delta = -np.broadcast_to(A, (len(a_nodes), len(b_nodes), len(b_nodes))).ravel()
        vp = v - n * delta[:, None]
        wp = w_pts + n * delta[:, None]
        jval = kernel_eval(kernel, -rr[:, None, None] * n, rel[None, :, :])  # (Nr, Nw)
        y = x + rr[:, None] * n                                              # (Nr, 3)
        gain = eval_distribution(f, x, vp)[None, :] * eval_distribution(
            g, y[:, None, :], wp[None, :, :]
        )
        loss = f_loss * eval_distribution(g, y[:, None, :], w_pts[None, :, :])
        meas = (wr * rr**2)[:, None] * WW[None, :] * jval
        total += wn * pairwise_sum((meas * (gain - loss)).ravel())
        magnitude += wn * pairwise_sum((np.abs(meas) * (np.abs(gain) + np.abs(loss))).ravel())
        nodes += jval.size
    return total, magnitude, nodes


def eval_povzner(
    model: CollisionModel, f: DistributionSpec, g: DistributionSpec, x, v,
    spec: QuadratureSpec,
) -> IntegralResult:
    """Povzner collision integral P[f, g](x, v) for the given model."""
    if model.kind != POVZNER:
        raise ValueError("model is not povzner")

    def core(s):
        return _povzner_core(f, g, x, v, s, model.kernel)

    return embedded_eval(
        core, spec, ("r3_points_per_axis", "sphere_rule_order", "segment_points")
    )


def eval_collision(
    model: CollisionModel, f: DistributionSpec, g: DistributionSpec, x, v,
    spec: QuadratureSpec,
) -> IntegralResult:
    """Dispatch C[f, g](x, v) on the model tag."""
    if model.kind == BOLTZMANN:
        return eval_boltzmann(f, g, x, v, spec)
    if model.kind == ENSKOG:
        return eval_enskog(model, f, g, x, v, spec)
    return eval_povzner(model, f, g, x, v, spec)


def raw_collision(
    model: CollisionModel, f: DistributionSpec, g: DistributionSpec, x, v,
    spec: QuadratureSpec,
):
    """Single-pass C[f, g](x, v) without embedded error passes.

    Returns (value, magnitude, nodes); verification checks run their own
    refinement probes instead of per-call embeddings.
    """
    if model.kind == BOLTZMANN:
        return _enskog_like_core(f, g, x, v, spec, 0.0, None, 1.0)
    if model.kind == ENSKOG:
        return _enskog_like_core(
            f, g, x, v, spec, model.sigma, model.chi, model.sigma**2
        )
    return _povzner_core(f, g, x, v, spec, model.kernel)
