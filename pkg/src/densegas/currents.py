"""Current fields whose phase-space divergences reproduce the collision integrals.

For Enskog and Povzner the weighted collision integral obeys

    C[f,f]           = div_v J0,
    C[f,f] v_k       = div_v J_k + div_x I_k,
    C[f,f] |v|^2     = div_v J4 + div_x I4,

with currents built from a line-integral (Landau) representation of the
velocity jump plus a joint rotation of the pair.  The implementable
definitions here are the proof-final weak formulations, i.e. the forms the
changes of variables actually produce:

* every Enskog integrand carries the kernel sigma^2 <v-w, n>_+ (the
  theorem-statement shorthand drops both factors);
* weights act at the translated velocities v+sn, w+sn;
* the rotation terms evaluate all kernel and direction factors at the
  rotated arguments (the unrotated shorthand relies on an identity that
  fails pointwise), and for Povzner the partner-position integral is
  re-parametrized by the rotated separation xi, whose kernel support is
  exactly |xi| <= R.

Velocity integrals run in direction-aligned frames with the axis panel
split where <v-w, n> changes sign, keeping every panel integrand smooth;
the axis panel extends 2*trunc standard deviations below the sign change
because the s-translation drags mass that far.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .collision import ENSKOG, POVZNER, CollisionModel, embedded_eval
from .geometry import as_vec3, orthonormal_frame
from .kernels import ChiSpec, PovznerKernelSpec, chi_eval, kernel_eval
from .quadrature import (
    IntegralResult,
    QuadratureSpec,
    gauss_legendre,
    panel_gauss,
    pairwise_sum,
    sphere_rule,
)
from .testfields import DistributionSpec, eval_distribution

POVZNER_RADIAL_FLOOR = 1e-6

WEIGHT_KINDS = ("one", "component", "speed_sq", "dot_n", "dot_n_component", "dot_n_sq")


@dataclass(frozen=True)
class WeightSpec:
    """Scalar weight applied to one argument of a bilinear current.

    kind: one -> 1, component -> u_k, speed_sq -> |u|^2, dot_n -> <u,n>,
    dot_n_component -> <u,n> n_k, dot_n_sq -> <u,n>^2.
    """

    kind: str = "one"
    axis: int = 0

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind in ("component", "dot_n_component") and self.axis not in (0, 1, 2):
            raise ValueError("axis must be 0, 1 or 2")


def weight_values(spec: WeightSpec, u: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Evaluate the weight at velocities u (..., 3) for direction(s) n."""
    if spec.kind == "one":
        return np.ones(u.shape[:-1])
    if spec.kind == "component":
        return u[..., spec.axis]
    if spec.kind == "speed_sq":
        return np.sum(u * u, axis=-1)
    dot = np.sum(u * n, axis=-1)
    if spec.kind == "dot_n":
        return dot
    if spec.kind == "dot_n_component":
        return dot * n[..., spec.axis]
    return dot * dot


@dataclass
class CurrentField:
    """One current evaluation: a 3-vector with an error estimate."""

    value: np.ndarray
    error_estimate: float
    which: str
    model: str
    nodes_used: int = 0


def _fused_weight(mode, vs, ws, n):
    """Combined a-b+c weight of the velocity-current terms.

    mass: 1; momentum k: vs_k - <vs,n> n_k + <ws,n> n_k;
    energy: |vs|^2 - <vs,n>^2 + <ws,n>^2 (the post-collision speed identity).
    """
    kind, axis = mode
    if kind == "mass":
        return np.ones(np.broadcast_shapes(vs.shape[:-1], ws.shape[:-1]))
    if kind == "momentum":
        dv = np.sum(vs * n, axis=-1)
        dw = np.sum(ws * n, axis=-1)
        return vs[..., axis] - dv * n[axis] + dw * n[axis]
    dv = np.sum(vs * n, axis=-1)
    dw = np.sum(ws * n, axis=-1)
    return np.sum(vs * vs, axis=-1) - dv * dv + dw * dw


# ---------------------------------------------------------------------------
# Enskog passes
# ---------------------------------------------------------------------------


def _enskog_v_pass(model, f, x, v, spec, mode):
    """Terms of J built from the translated line integral (a - b + c fused)."""
    x = as_vec3(x)
    v = as_vec3(v)
    sigma, chi = model.sigma, model.chi
    u0, T = f.bulk, f.temperature
    trunc = spec.r3_truncation_radius_sigmas
    rb = trunc * np.sqrt(T)
    ext = 2.0 * trunc * np.sqrt(T)
    na, nb, nt = spec.r3_points_per_axis, spec.r3_points_per_axis, spec.segment_points
    nodes_n, w_n = sphere_rule(spec.sphere_rule_order)
    tq, wt = gauss_legendre(nt, 0.0, 1.0)
    b_nodes, b_w = gauss_legendre(nb, -rb, rb)

    total = np.zeros(3)
    mag = np.zeros(3)
    nodes = 0
    for n, wn in zip(nodes_n, w_n):
        abar = float(np.dot(v - u0, n))
        # split the long translation-extended axis panel at +-rb so every
        # sub-panel resolves the Gaussian features at full node density
        breaks = [abar - ext] + [b for b in (-rb, rb) if abar - ext < b < abar]
        breaks.append(abar)
        a_nodes, a_w = panel_gauss(na, list(zip(breaks[:-1], breaks[1:])))
        e1, e2 = orthonormal_frame(n)
        A = a_nodes[:, None, None, None]
        B1 = b_nodes[None, :, None, None]
        B2 = b_nodes[None, None, :, None]
        Tt = tq[None, None, None, :]
        WW = (
            a_w[:, None, None, None]
            * b_w[None, :, None, None]
            * b_w[None, None, :, None]
            * wt[None, None, None, :]
        )
        delta = abar - A                       # (Na,1,1,1), > 0 on the panel
        s = Tt * delta                         # (Na,1,1,Nt)
        w_pts = u0 + A[..., None] * n + B1[..., None] * e1 + B2[..., None] * e2
        vs = v + s[..., None] * n              # (Na,1,1,Nt,3)
        ws = w_pts + s[..., None] * n          # (Na,Nb,Nb,Nt,3)
        fv = eval_distribution(f, x, vs)
        fw = eval_distribution(f, x + sigma * n, ws)
        wgt = _fused_weight(mode, vs, ws, n)
        chi_n = float(chi_eval(chi, x + 0.5 * sigma * n))
        core = WW * delta * delta * fv * fw * wgt
        amount = sigma**2 * chi_n * wn * pairwise_sum(core.ravel())
        total += amount * n
        mag += np.abs(sigma**2 * chi_n * wn) * pairwise_sum(np.abs(core).ravel()) * np.abs(n)
        nodes += core.size
    return total, mag, nodes


def _enskog_theta_pass(model, f, x, v, spec, mode):
    """Rotation term of the Enskog velocity currents (vector through w)."""
    x = as_vec3(x)
    v = as_vec3(v)
    sigma, chi = model.sigma, model.chi
    u0, T = f.bulk, f.temperature
    trunc = spec.r3_truncation_radius_sigmas
    rw = trunc * np.sqrt(T) + np.sqrt(2.0) * np.linalg.norm(u0)
    na, nb, nth = spec.r3_points_per_axis, spec.r3_points_per_axis, spec.segment_points
    nodes_n, w_n = sphere_rule(spec.sphere_rule_order)
    th, wth = gauss_legendre(nth, 0.0, 0.5 * np.pi)
    b_nodes, b_w = gauss_legendre(nb, -rw, rw)
    kind, axis = mode

    t01, w01 = gauss_legendre(na, 0.0, 1.0)      # reference nodes for [-rw, hi]
    cth, sth = np.cos(th), np.sin(th)
    total = np.zeros(3)
    mag = np.zeros(3)
    nodes = 0
    for n, wn in zip(nodes_n, w_n):
        e1, e2 = orthonormal_frame(n)
        chi_n = float(chi_eval(chi, x - 0.5 * sigma * n))
        vdotn = float(np.dot(v, n))
        u0dotn = float(np.dot(u0, n))
        a_star = (cth - sth) / (cth + sth) * vdotn - u0dotn
        hi = np.minimum(a_star, rw)
        live = hi > -rw
        if not np.any(live):
            continue
        span = hi - (-rw)                         # (Nth,)
        A = (-rw + span[:, None] * t01)[:, :, None, None]        # (Nth,Na,1,1)
        AW = (span[:, None] * w01)[:, :, None, None]
        B1 = b_nodes[None, None, :, None]
        B2 = b_nodes[None, None, None, :]
        WW = AW * b_w[None, None, :, None] * b_w[None, None, None, :]
        WW = WW * (wth * live)[:, None, None, None]
        w_pts = u0 + A[..., None] * n + B1[..., None] * e1 + B2[..., None] * e2
        c4 = cth[:, None, None, None]
        s4 = sth[:, None, None, None]
        v_rot = v * c4[..., None] - w_pts * s4[..., None]
        w_rot = v * s4[..., None] + w_pts * c4[..., None]
        d_rot = np.sum((v_rot - w_rot) * n, axis=-1)
        core = (
            eval_distribution(f, x - sigma * n, v_rot)
            * eval_distribution(f, x, w_rot)
            * np.maximum(d_rot, 0.0) ** 2
        )
        if kind == "momentum":
            core = core * n[axis]
        else:
            core = core * np.sum((v_rot + w_rot) * n, axis=-1)
        coeff = -0.5 * sigma**2 * chi_n * wn
        weighted = (WW * core)[..., None] * w_pts
        total += coeff * pairwise_sum(weighted.reshape(-1, 3))
        mag += np.abs(coeff) * pairwise_sum(np.abs(weighted).reshape(-1, 3))
        nodes += core.size
    return total, mag, nodes


def _enskog_x_pass(model, f, x, v, spec, mode):
    """Position currents I_l / I4: translation along n over s in [0, sigma]."""
    x = as_vec3(x)
    v = as_vec3(v)
    sigma, chi = model.sigma, model.chi
    u0, T = f.bulk, f.temperature
    trunc = spec.r3_truncation_radius_sigmas
    rw = trunc * np.sqrt(T)
    na, nb, ns = spec.r3_points_per_axis, spec.r3_points_per_axis, spec.segment_points
    nodes_n, w_n = sphere_rule(spec.sphere_rule_order)
    sn, wsn = gauss_legendre(ns, 0.0, sigma)
    b_nodes, b_w = gauss_legendre(nb, -rw, rw)
    kind, axis = mode

    dim = 12 if kind == "tensor" else 3
    total = np.zeros(dim)
    mag = np.zeros(dim)
    nodes = 0
    for n, wn in zip(nodes_n, w_n):
        abar = float(np.dot(v - u0, n))
        hi = min(abar, rw)
        if hi <= -rw:
            continue
        e1, e2 = orthonormal_frame(n)
        a_nodes, a_w = gauss_legendre(na, -rw, hi)
        A = a_nodes[None, :, None, None]
        B1 = b_nodes[None, None, :, None]
        B2 = b_nodes[None, None, None, :]
        WW = (
            wsn[:, None, None, None]
            * a_w[None, :, None, None]
            * b_w[None, None, :, None]
            * b_w[None, None, None, :]
        )
        delta = abar - A                       # (1,Na,1,1), > 0 on the panel
        w_pts = u0 + A[..., None] * n + B1[..., None] * e1 + B2[..., None] * e2
        chi_s = chi_eval(chi, x + (0.5 * sigma - sn)[:, None] * n)[:, None, None, None]
        f_v = eval_distribution(f, x - sn[:, None] * n, v)[:, None, None, None]
        f_w = eval_distribution(
            f, (x + (sigma - sn)[:, None] * n)[:, None, None, None, :], w_pts
        )
        core = chi_s * f_v * f_w * delta * delta
        # Sign fixed empirically so the strong-form residual vanishes: the
        # position-translation identity behind this term carries a minus
        # (phi(x,v) - phi(x+sn,v) integrates -<n, grad_x phi> along the path).
        coeff = -0.5 * sigma**2 * wn
        if kind == "tensor":
            base = pairwise_sum((WW * core).ravel())
            en = pairwise_sum((WW * core * np.sum((v + w_pts) * n, axis=-1)).ravel())
            out = np.concatenate([base * np.outer(n, n).ravel(), en * n])
            total = total + coeff * out
            mag = mag + np.abs(coeff * out)
            nodes += core.size
            continue
        if kind == "momentum":
            core = core * n[axis]
        else:
            core = core * np.sum((v + w_pts) * n, axis=-1)
        amount = coeff * pairwise_sum((WW * core).ravel())
        total += amount * n
        mag += np.abs(coeff) * pairwise_sum(np.abs(WW * core).ravel()) * np.abs(n)
        nodes += core.size
    return total, mag, nodes


# ---------------------------------------------------------------------------
# Povzner passes
# ---------------------------------------------------------------------------


def _povzner_v_pass(model, f, x, v, spec, mode):
    """Line-integral terms of the Povzner velocity currents (a - b + c fused)."""
    x = as_vec3(x)
    v = as_vec3(v)
    kernel = model.kernel
    R = kernel.range_r
    sr = kernel.speed_range
    nr, nt = spec.segment_points, spec.segment_points
    na = nb = spec.r3_points_per_axis
    rr, wr = gauss_legendre(nr, POVZNER_RADIAL_FLOOR * R, R)
    nodes_n, w_n = sphere_rule(spec.sphere_rule_order)
    tq, wt = gauss_legendre(nt, 0.0, 1.0)
    a_nodes, a_w = panel_gauss(na, [(-sr, 0.0), (0.0, sr)])
    b_nodes, b_w = gauss_legendre(nb, -sr, sr)

    total = np.zeros(3)
    mag = np.zeros(3)
    nodes = 0
    for n, wn in zip(nodes_n, w_n):
        e1, e2 = orthonormal_frame(n)
        A = a_nodes[:, None, None]
        B1 = b_nodes[None, :, None]
        B2 = b_nodes[None, None, :]
        WW = (a_w[:, None, None] * b_w[None, :, None] * b_w[None, None, :]).ravel()
        w_pts = (v + A[..., None] * n + B1[..., None] * e1 + B2[..., None] * e2).reshape(-1, 3)
        delta = -np.broadcast_to(A, (len(a_nodes), len(b_nodes), len(b_nodes))).ravel()
        rel = v - w_pts
        s = tq[None, :] * delta[:, None]                      # (Nw, Nt)
        vs = v + s[..., None] * n
        ws = w_pts[:, None, :] + s[..., None] * n
        wgt = _fused_weight(mode, vs, ws, n)
        f_vs = eval_distribution(f, x, vs)
        jval = kernel_eval(
            kernel, -rr[:, None, None, None] * n, rel[None, :, None, :]
        )  # (Nr, Nw, 1)
        y = x + rr[:, None] * n
        f_ws = eval_distribution(f, y[:, None, None, :], ws[None, ...])
        core = (
            jval
            * delta[None, :, None]
            * f_vs[None, ...]
            * f_ws
            * wgt[None, ...]
            * WW[None, :, None]
            * wt[None, None, :]
            * (wr * rr**2)[:, None, None]
        )
        amount = wn * pairwise_sum(core.ravel())
        total += amount * n
        mag += np.abs(wn) * pairwise_sum(np.abs(core).ravel()) * np.abs(n)
        nodes += core.size
    return total, mag, nodes


def _povzner_theta_pass(model, f, x, v, spec, mode, which):
    """Rotation term of the Povzner currents.

    The partner position is re-parametrized by xi = x_rot - y_rot, giving
    exact kernel support |xi| <= R and positions
    x_rot = (x + xi sin t)/(cos t + sin t), y_rot = (x - xi cos t)/(...).
    which = "jtheta" returns the velocity-current part (vector through w),
    "ix" the position current (vector through y).
    """
    x = as_vec3(x)
    v = as_vec3(v)
    kernel = model.kernel
    R = kernel.range_r
    sr = kernel.speed_range
    nr, nth = spec.segment_points, spec.segment_points
    na = nb = spec.r3_points_per_axis
    rr, wr = gauss_legendre(nr, POVZNER_RADIAL_FLOOR * R, R)
    nodes_n, w_n = sphere_rule(spec.sphere_rule_order)
    th, wth = gauss_legendre(nth, 0.0, 0.5 * np.pi)
    kind, axis = mode

    a_unit, aw_unit = panel_gauss(na, [(-1.0, 0.0), (0.0, 1.0)])
    b_unit, bw_unit = gauss_legendre(nb, -1.0, 1.0)
    cth, sth = np.cos(th), np.sin(th)
    cps = cth + sth                                   # (Nth,)
    half = sr / cps
    dim = 12 if kind == "tensor" else 3
    total = np.zeros(dim)
    mag = np.zeros(dim)
    nodes = 0
    for n, wn in zip(nodes_n, w_n):
        e1, e2 = orthonormal_frame(n)
        A = (half[:, None] * a_unit)[:, :, None, None]            # (Nth,Na,1,1)
        B1 = (half[:, None] * b_unit)[:, None, :, None]
        B2 = (half[:, None] * b_unit)[:, None, None, :]
        WW = (
            (half[:, None] * aw_unit)[:, :, None, None]
            * (half[:, None] * bw_unit)[:, None, :, None]
            * (half[:, None] * bw_unit)[:, None, None, :]
            * wth[:, None, None, None]
        )
        c4 = cth[:, None, None, None]
        s4 = sth[:, None, None, None]
        m_c = v * ((cth - sth) / cps)[:, None]                    # (Nth,3)
        w_pts = (
            m_c[:, None, None, None, :]
            + A[..., None] * n
            + B1[..., None] * e1
            + B2[..., None] * e2
        )                                                         # (Nth,Na,Nb,Nb,3)
        v_rot = v * c4[..., None] - w_pts * s4[..., None]
        w_rot = v * s4[..., None] + w_pts * c4[..., None]
        rel_rot = v_rot - w_rot
        scal = np.sum(rel_rot * n, axis=-1)
        if kind == "momentum":
            fac = scal * n[axis]
        elif kind == "energy":
            fac = scal * np.sum((v_rot + w_rot) * n, axis=-1)
        else:
            fac = scal  # tensor mode applies direction factors at assembly
        xi = rr[:, None] * n                                      # (Nr,3)
        jval = kernel_eval(
            kernel, xi[:, None, None, None, None, :], rel_rot[None, ...]
        )                                                         # (Nr,Nth,Na,Nb,Nb)
        x_rot = (x + sth[:, None] * xi[:, None, :]) / cps[None, :, None]   # (Nr,Nth,3)
        y_rot = (x - cth[:, None] * xi[:, None, :]) / cps[None, :, None]
        f1 = eval_distribution(f, x_rot[..., None, None, None, :], v_rot[None, ...])
        f2 = eval_distribution(f, y_rot[..., None, None, None, :], w_rot[None, ...])
        base = jval * f1 * f2 * (fac * WW / cps[:, None, None, None] ** 3)[None, ...]
        base = base * (wr * rr**2)[:, None, None, None, None]
        coeff = -0.5 * wn
        if kind == "tensor":
            y_vec = (x * (cth - sth)[:, None] - xi[:, None, :]) / cps[None, :, None]
            vecs = np.broadcast_to(
                y_vec[:, :, None, None, None, :], base.shape + (3,)
            )
            vec_s = pairwise_sum((base[..., None] * vecs).reshape(-1, 3))
            esum = np.sum((v_rot + w_rot) * n, axis=-1)
            vec_e = pairwise_sum(
                ((base * esum[None, ...])[..., None] * vecs).reshape(-1, 3)
            )
            out = np.concatenate([np.outer(n, vec_s).ravel(), vec_e])
            total = total + coeff * out
            mag = mag + np.abs(coeff * out)
            nodes += base.size
            continue
        if which == "jtheta":
            vecs = w_pts[None, ...]
        else:
            y_vec = (x * (cth - sth)[:, None] - xi[:, None, :]) / cps[None, :, None]
            vecs = np.broadcast_to(
                y_vec[:, :, None, None, None, :], base.shape + (3,)
            )
        weighted = base[..., None] * vecs
        total += coeff * pairwise_sum(weighted.reshape(-1, 3))
        mag += np.abs(coeff) * pairwise_sum(np.abs(weighted).reshape(-1, 3))
        nodes += base.size
    return total, mag, nodes


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

_V_FIELDS = ("r3_points_per_axis", "sphere_rule_order", "segment_points")

FIELD_TAGS = ("J0", "J1", "J2", "J3", "J4", "I1", "I2", "I3", "I4")


def raw_field(model: CollisionModel, f: DistributionSpec, which: str, x, v,
              spec: QuadratureSpec):
    """Single-pass evaluation of one current field: (value, magnitude, nodes).

    which names the field: J0 (mass), J1..J3 / I1..I3 (momentum), J4 / I4
    (energy).  No embedded error passes; verification drives its own
    refinement probes on top of this.
    """
    _require(model)
    if which not in FIELD_TAGS:
        raise ValueError(f"unknown field {which!r}")
    if which == "J0":
        mode = ("mass", 0)
    elif which in ("J4", "I4"):
        mode = ("energy", 0)
    else:
        mode = ("momentum", int(which[1]) - 1)
    is_j = which.startswith("J")
    if model.kind == ENSKOG:
        if is_j:
            out = _enskog_v_pass(model, f, x, v, spec, mode)
            if which != "J0":
                rot = _enskog_theta_pass(model, f, x, v, spec, mode)
                out = tuple(a + b for a, b in zip(out, rot))
        else:
            out = _enskog_x_pass(model, f, x, v, spec, mode)
    else:
        if is_j:
            out = _povzner_v_pass(model, f, x, v, spec, mode)
            if which != "J0":
                rot = _povzner_theta_pass(model, f, x, v, spec, mode, "jtheta")
                out = tuple(a + b for a, b in zip(out, rot))
        else:
            out = _povzner_theta_pass(model, f, x, v, spec, mode, "ix")
    return out


def raw_correction_tensor(model: CollisionModel, f: DistributionSpec, x, v,
                          spec: QuadratureSpec):
    """All twelve position-current components in one pass.

    Returns (values, magnitude, nodes) with values[:9] the stress block
    (row l, column i = component i of I_l) and values[9:] the energy
    current I4.  Used by the moment-correction integrals, which would
    otherwise pay four separate passes per velocity node.
    """
    _require(model)
    mode = ("tensor", 0)
    if model.kind == ENSKOG:
        return _enskog_x_pass(model, f, x, v, spec, mode)
    return _povzner_theta_pass(model, f, x, v, spec, mode, "ix")


def _embedded_field(model, f, which, x, v, spec) -> CurrentField:
    res = embedded_eval(
        lambda s: raw_field(model, f, which, x, v, s), spec, _V_FIELDS
    )
    return CurrentField(
        value=np.asarray(res.value, dtype=float),
        error_estimate=res.error_estimate,
        which=which,
        model=model.kind,
        nodes_used=res.nodes_used,
    )


def _require(model: CollisionModel):
    if model.kind not in (ENSKOG, POVZNER):
        raise ValueError("currents are defined for the enskog and povzner models")


def landau_integrand_enskog(
    weight_a: WeightSpec, weight_b: WeightSpec, f: DistributionSpec,
    g: DistributionSpec, chi: ChiSpec, sigma: float, x, n, v,
    spec: QuadratureSpec,
) -> np.ndarray:
    """Line-integral current density at a fixed direction n (a 3-vector).

    Integrates, over the half-space <v-w, n> > 0 and the translation
    parameter s in [0, <v-w, n>],

        sigma^2 chi(x + sigma n/2) <v-w,n> a(v+sn) f(x, v+sn)
                                            b(w+sn) g(x + sigma n, w+sn),

    times the vector n; weights act at the translated velocities.
    """
    x = as_vec3(x)
    v = as_vec3(v)
    n = as_vec3(n)
    u0, T = g.bulk, g.temperature
    trunc = spec.r3_truncation_radius_sigmas
    rb = trunc * np.sqrt(T)
    ext = 2.0 * trunc * np.sqrt(max(T, f.temperature))
    na = nb = spec.r3_points_per_axis
    nt = spec.segment_points
    abar = float(np.dot(v - u0, n))
    breaks = [abar - ext] + [b for b in (-rb, rb) if abar - ext < b < abar]
    breaks.append(abar)
    a_nodes, a_w = panel_gauss(na, list(zip(breaks[:-1], breaks[1:])))
    b_nodes, b_w = gauss_legendre(nb, -rb, rb)
    tq, wt = gauss_legendre(nt, 0.0, 1.0)
    e1, e2 = orthonormal_frame(n)
    A = a_nodes[:, None, None, None]
    B1 = b_nodes[None, :, None, None]
    B2 = b_nodes[None, None, :, None]
    Tt = tq[None, None, None, :]
    WW = (
        a_w[:, None, None, None]
        * b_w[None, :, None, None]
        * b_w[None, None, :, None]
        * wt[None, None, None, :]
    )
    delta = abar - A
    s = Tt * delta
    ws = (u0 + (A * np.ones_like(Tt))[..., None] * n
          + (B1 * np.ones_like(Tt))[..., None] * e1
          + (B2 * np.ones_like(Tt))[..., None] * e2) + s[..., None] * n
    vs = v + s[..., None] * n
    wa = weight_values(weight_a, vs, n)
    wb = weight_values(weight_b, ws, n)
    chi_n = float(chi_eval(chi, x + 0.5 * sigma * n))
    core = WW * delta * delta * wa * wb
    core = core * eval_distribution(f, x, vs) * eval_distribution(g, x + sigma * n, ws)
    return sigma**2 * chi_n * pairwise_sum(core.ravel()) * n


def landau_integrand_povzner(
    weight_a: WeightSpec, weight_b: WeightSpec, f: DistributionSpec,
    g: DistributionSpec, kernel: PovznerKernelSpec, x, y, v,
    spec: QuadratureSpec,
) -> np.ndarray:
    """Povzner current density at a fixed partner position y (a 3-vector).

    The s-integral is oriented (no positive-part restriction); the kernel
    J(x-y, v-w) supplies all weighting.
    """
    x = as_vec3(x)
    y = as_vec3(y)
    v = as_vec3(v)
    dxy = y - x
    dist = float(np.linalg.norm(dxy))
    if dist < 1e-12:
        return np.zeros(3)
    n = dxy / dist
    sr = kernel.speed_range
    na = nb = spec.r3_points_per_axis
    nt = spec.segment_points
    a_nodes, a_w = panel_gauss(na, [(-sr, 0.0), (0.0, sr)])
    b_nodes, b_w = gauss_legendre(nb, -sr, sr)
    tq, wt = gauss_legendre(nt, 0.0, 1.0)
    e1, e2 = orthonormal_frame(n)
    A = a_nodes[:, None, None]
    B1 = b_nodes[None, :, None]
    B2 = b_nodes[None, None, :]
    WW = (a_w[:, None, None] * b_w[None, :, None] * b_w[None, None, :]).ravel()
    w_pts = (v + A[..., None] * n + B1[..., None] * e1 + B2[..., None] * e2).reshape(-1, 3)
    delta = -np.broadcast_to(A, (len(a_nodes), len(b_nodes), len(b_nodes))).ravel()
    jval = kernel_eval(kernel, x - y, v - w_pts)
    s = tq[None, :] * delta[:, None]
    vs = v + s[..., None] * n
    ws = w_pts[:, None, :] + s[..., None] * n
    wa = weight_values(weight_a, vs, n)
    wb = weight_values(weight_b, ws, n)
    core = (
        (jval * delta * WW)[:, None]
        * wt[None, :]
        * wa
        * wb
        * eval_distribution(f, x, vs)
        * eval_distribution(g, y, ws)
    )
    return pairwise_sum(core.ravel()) * n


def mass_current(
    model: CollisionModel, f: DistributionSpec, x, v, spec: QuadratureSpec
) -> CurrentField:
    """J0: the current whose velocity divergence is C[f, f]."""
    return _embedded_field(model, f, "J0", x, v, spec)


def momentum_current_v(
    model: CollisionModel, f: DistributionSpec, k: int, x, v, spec: QuadratureSpec
) -> CurrentField:
    """J_k: velocity current of the momentum component k (0-based axis)."""
    if k not in (0, 1, 2):
        raise ValueError("k must be 0, 1 or 2")
    return _embedded_field(model, f, f"J{k + 1}", x, v, spec)


def momentum_current_x(
    model: CollisionModel, f: DistributionSpec, l: int, x, v, spec: QuadratureSpec
) -> CurrentField:
    """I_l: position current of the momentum component l (0-based axis)."""
    if l not in (0, 1, 2):
        raise ValueError("l must be 0, 1 or 2")
    return _embedded_field(model, f, f"I{l + 1}", x, v, spec)


def energy_current_v(
    model: CollisionModel, f: DistributionSpec, x, v, spec: QuadratureSpec
) -> CurrentField:
    """J4: velocity current of the kinetic energy weight |v|^2."""
    return _embedded_field(model, f, "J4", x, v, spec)


def energy_current_x(
    model: CollisionModel, f: DistributionSpec, x, v, spec: QuadratureSpec
) -> CurrentField:
    """I4: position current of the kinetic energy weight |v|^2."""
    return _embedded_field(model, f, "I4", x, v, spec)
