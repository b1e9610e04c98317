"""Deterministic numerical integration with error estimates.

Four engines cover every integral in the library:

* integrate_r3: tensor Gauss-Legendre over a truncated cube (dw, dy);
* integrate_sphere: product rule on the unit sphere, optionally an
  axis-aligned positive hemisphere for kernels with a <.,n>_+ kink;
* integrate_segment: oriented 1-D Gauss-Legendre (ds, dtheta);
* qmc_integrate: scrambled Sobol for the high-dimensional weak-form
  pairings, with an empirical standard error over independent scramblings.

Error estimates for the grid rules are embedded differences |I_N - I_{N/2}|
plus two floors: a Gaussian-tail truncation floor exp(-trunc^2/2)*|I|_abs
and a roundoff floor ~64 eps |I|_abs.  Without the floors, "result within
error_estimate" claims break once the embedded difference converges below
the domain-truncation bias.

Determinism: node orderings are fixed and all reductions run through a
fixed pairwise tree, so results are bit-identical for identical inputs
regardless of worker scheduling above this layer.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.stats import qmc as _scipy_qmc

from .geometry import as_vec3, orthonormal_frame

EPS = np.finfo(float).eps
QMC_REPLICATES = 16


class NodeFailureError(RuntimeError):
    """An integrand returned a non-finite value; the message names the node."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Resolution knobs for every nested integral layer."""

    r3_points_per_axis: int = 12
    r3_truncation_radius_sigmas: float = 6.0
    sphere_rule_order: int = 6
    segment_points: int = 8
    qmc_samples: int = 32768
    qmc_seed: int = 0

    def __post_init__(self):
        if self.r3_points_per_axis < 4:
            raise ValueError("r3_points_per_axis must be >= 4")
        if self.r3_truncation_radius_sigmas < 4:
            raise ValueError("truncation radius must be >= 4 sigmas")
        if self.sphere_rule_order < 2 or self.segment_points < 2:
            raise ValueError("sphere_rule_order and segment_points must be >= 2")
        if self.qmc_samples < QMC_REPLICATES:
            raise ValueError("qmc_samples must be >= 16")

    def halved(self, field: str) -> "QuadratureSpec":
        floors = {"r3_points_per_axis": 4, "sphere_rule_order": 2, "segment_points": 2}
        val = getattr(self, field)
        return replace(self, **{field: max(floors.get(field, 2), val // 2)})

    def reduced(self) -> "QuadratureSpec":
        """One refinement step down on every grid axis (sharp error probes)."""
        return replace(
            self,
            r3_points_per_axis=max(4, self.r3_points_per_axis - 2),
            sphere_rule_order=max(2, self.sphere_rule_order - 1),
            segment_points=max(2, self.segment_points - 2),
        )

    def refined(self, factor: int = 2) -> "QuadratureSpec":
        return replace(
            self,
            r3_points_per_axis=self.r3_points_per_axis * factor,
            sphere_rule_order=self.sphere_rule_order * factor,
            segment_points=self.segment_points * factor,
        )

    def to_dict(self) -> dict:
        return {
            "r3_points_per_axis": self.r3_points_per_axis,
            "r3_truncation_radius_sigmas": self.r3_truncation_radius_sigmas,
            "sphere_rule_order": self.sphere_rule_order,
            "segment_points": self.segment_points,
            "qmc_samples": self.qmc_samples,
            "qmc_seed": self.qmc_seed,
        }


@dataclass
class IntegralResult:
    value: float | np.ndarray
    error_estimate: float
    nodes_used: int


def pairwise_sum(values, axis: int = 0):
    """Sum along an axis with a fixed pairwise tree (reproducible, low error)."""
    a = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    n = a.shape[0]
    if n == 0:
        return np.zeros(a.shape[1:])
    while n > 1:
        m = n // 2
        head = a[:m] + a[m : 2 * m]
        a = np.concatenate([head, a[2 * m :]], axis=0) if n % 2 else head
        n = a.shape[0]
    return a[0]


@lru_cache(maxsize=256)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0):
    """Gauss-Legendre nodes/weights on [a, b]; oriented (a > b flips sign)."""
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * x, half * w


def sphere_rule(order: int):
    """Product rule on the full unit sphere.

    Gauss-Legendre with `order` nodes in cos(polar) times 2*order uniform
    azimuthal nodes; exact for spherical polynomials of degree <= 2*order-1.
    Returns (nodes (M,3), weights (M,)) with sum(weights) = 4 pi.
    """
    z, wz = gauss_legendre(order, -1.0, 1.0)
    m = 2 * order
    phi = (np.arange(m) + 0.5) * (2.0 * np.pi / m)
    wphi = 2.0 * np.pi / m
    zz = np.repeat(z, m)
    pp = np.tile(phi, order)
    r = np.sqrt(np.maximum(0.0, 1.0 - zz**2))
    nodes = np.stack([r * np.cos(pp), r * np.sin(pp), zz], axis=-1)
    weights = np.repeat(wz, m) * wphi
    return nodes, weights


def hemisphere_rule(order: int, axis):
    """Rule on the positive hemisphere {<n, axis> > 0} about a unit axis.

    cos(polar) runs over (0, 1] so integrands with an equatorial kink stay
    smooth on the integration domain.  Returns (nodes (M,3), weights (M,),
    cospolar (M,)).
    """
    axis = as_vec3(axis)
    t, wt = gauss_legendre(order, 0.0, 1.0)
    m = 2 * order
    phi = (np.arange(m) + 0.5) * (2.0 * np.pi / m)
    wphi = 2.0 * np.pi / m
    tt = np.repeat(t, m)
    pp = np.tile(phi, order)
    r = np.sqrt(np.maximum(0.0, 1.0 - tt**2))
    e1, e2 = orthonormal_frame(axis)
    nodes = (
        tt[:, None] * axis
        + (r * np.cos(pp))[:, None] * e1
        + (r * np.sin(pp))[:, None] * e2
    )
    weights = np.repeat(wt, m) * wphi
    return nodes, weights, tt


def panel_gauss(n: int, panels):
    """Concatenated Gauss-Legendre nodes/weights over a list of (a, b) panels."""
    xs, ws = [], []
    for a, b in panels:
        if b == a:
            continue
        x, w = gauss_legendre(n, a, b)
        xs.append(x)
        ws.append(w)
    if not xs:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(xs), np.concatenate(ws)


def _check_finite(values, nodes, what: str):
    bad = ~np.isfinite(values)
    if np.any(bad):
        idx = int(np.argwhere(bad.reshape(bad.shape[0], -1).any(axis=1))[0, 0])
        raise NodeFailureError(
            f"{what}: integrand returned non-finite value at node {nodes[idx]!r}"
        )


def _abs_floor(weighted_abs, trunc: float | None):
    """Truncation + roundoff floor from the absolute weighted node mass."""
    mass = float(np.max(weighted_abs)) if np.ndim(weighted_abs) else float(weighted_abs)
    floor = 64.0 * EPS * mass
    if trunc is not None:
        floor += np.exp(-0.5 * trunc * trunc) * mass
    return floor


def _grid_eval(fn, nodes, weights, what: str):
    vals = np.asarray(fn(nodes), dtype=float)
    _check_finite(vals, nodes, what)
    w = weights if vals.ndim == 1 else weights[:, None]
    total = pairwise_sum(w * vals)
    absmass = pairwise_sum(np.abs(w * vals))
    return total, absmass


def _result(full, half, absmass, trunc, nodes_used) -> IntegralResult:
    diff = np.max(np.abs(np.asarray(full) - np.asarray(half)))
    est = float(diff) + _abs_floor(absmass, trunc)
    value = float(full) if np.ndim(full) == 0 else full
    return IntegralResult(value=value, error_estimate=est, nodes_used=nodes_used)


def _r3_nodes(center, scale, trunc, n):
    x, w = gauss_legendre(n, -scale * trunc, scale * trunc)
    X = np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1).reshape(-1, 3)
    W = (w[:, None, None] * w[None, :, None] * w[None, None, :]).reshape(-1)
    return as_vec3(center) + X, W


def integrate_r3(fn, center, scale: float, spec: QuadratureSpec) -> IntegralResult:
    """Integral of fn over R^3, truncated to the cube center +- scale*trunc.

    fn maps an (M, 3) array of points to (M,) or (M, k) values.  The
    estimate is the embedded |I_N - I_{N/2}| difference plus truncation
    and roundoff floors.
    """
    n = spec.r3_points_per_axis
    trunc = spec.r3_truncation_radius_sigmas
    nodes, weights = _r3_nodes(center, scale, trunc, n)
    full, absmass = _grid_eval(fn, nodes, weights, "integrate_r3")
    nodes2, weights2 = _r3_nodes(center, scale, trunc, max(4, n // 2))
    half, _ = _grid_eval(fn, nodes2, weights2, "integrate_r3")
    return _result(full, half, absmass, trunc, len(nodes) + len(nodes2))


def integrate_sphere(
    fn, spec: QuadratureSpec, axis=None, hemisphere: bool = False
) -> IntegralResult:
    """Integral of fn over the unit sphere (or a positive hemisphere).

    With hemisphere=True the rule covers {<n, axis> > 0} only; callers use
    it for integrands supported there (the <v-w, n>_+ family), restoring
    spectral accuracy lost to the equatorial kink.
    """
    k = spec.sphere_rule_order

    def run(order):
        if hemisphere:
            nodes, weights, _ = hemisphere_rule(order, axis)
        else:
            nodes, weights = sphere_rule(order)
        total, absmass = _grid_eval(fn, nodes, weights, "integrate_sphere")
        return total, absmass, len(nodes)

    full, absmass, n1 = run(k)
    half, _, n2 = run(max(2, k // 2))
    return _result(full, half, absmass, None, n1 + n2)


def integrate_segment(fn, a: float, b: float, spec: QuadratureSpec) -> IntegralResult:
    """Oriented 1-D integral from a to b (sign flips when a > b)."""
    n = spec.segment_points

    def run(m):
        x, w = gauss_legendre(m, a, b)
        vals = np.asarray(fn(x), dtype=float)
        _check_finite(vals, x, "integrate_segment")
        ww = w if vals.ndim == 1 else w[:, None]
        return pairwise_sum(ww * vals), pairwise_sum(np.abs(ww * vals)), m

    full, absmass, n1 = run(n)
    half, _, n2 = run(max(2, n // 2))
    return _result(full, half, absmass, None, n1 + n2)


def _next_pow2(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p


def qmc_integrate(fn, lower, upper, spec: QuadratureSpec) -> IntegralResult:
    """Scrambled-Sobol integral of fn over an axis-aligned box in R^d.

    Runs QMC_REPLICATES independent scramblings seeded from qmc_seed; the
    value is the replicate mean and the error estimate the empirical
    standard error across replicates.  d <= 12 by contract (higher
    dimensions carry the 1-D parameters of nested integrands instead).
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    d = len(lower)
    if d > 12:
        raise ValueError("qmc_integrate supports at most 12 dimensions")
    volume = float(np.prod(upper - lower))
    per_rep = _next_pow2(max(4, -(-spec.qmc_samples // QMC_REPLICATES)))
    estimates = []
    for rep in range(QMC_REPLICATES):
        rng = np.random.default_rng([spec.qmc_seed, rep])
        sob = _scipy_qmc.Sobol(d, scramble=True, seed=rng)
        u = sob.random(per_rep)
        pts = lower + u * (upper - lower)
        vals = np.asarray(fn(pts), dtype=float)
        _check_finite(vals, pts, "qmc_integrate")
        estimates.append(volume * pairwise_sum(vals) / per_rep)
    estimates = np.asarray(estimates)
    value = pairwise_sum(estimates) / QMC_REPLICATES
    stderr = np.std(estimates, axis=0, ddof=1) / np.sqrt(QMC_REPLICATES)
    est = float(np.max(stderr))
    value = float(value) if np.ndim(value) == 0 else value
    return IntegralResult(
        value=value, error_estimate=est, nodes_used=QMC_REPLICATES * per_rep
    )
