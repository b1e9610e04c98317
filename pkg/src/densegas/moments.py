"""Macroscopic fields and the collisional stress/heat corrections.

The velocity moments rho, u, P, q are the usual density, bulk velocity,
stress tensor and heat flux.  The collision corrections are the
v-integrated position currents: the 3x3 tensor whose rows are
int I_l(x, v) dv and the vector int I4(x, v) dv.  They shift the stress
and energy flux in the dense-gas macroscopic balances and vanish in the
dilute (sigma -> 0) limit; for the Boltzmann model they are identically
zero, since its conservative form has no position current.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .collision import BOLTZMANN, CollisionModel
from .currents import raw_correction_tensor
from .geometry import as_vec3
from .quadrature import QuadratureSpec, gauss_legendre, integrate_r3, pairwise_sum
from .testfields import DistributionSpec, eval_distribution

RHO_FLOOR = 1e-14


@dataclass
class MomentFields:
    """rho, u, P, q at one position, with per-group error estimates.

    When rho falls below 1e-14 the indicator convention applies: u, P, q
    are all zero.
    """

    rho: float
    u: np.ndarray
    P: np.ndarray
    q: np.ndarray
    errors: dict = field(default_factory=dict)

    @property
    def trace_temperature(self) -> float:
        if self.rho <= 0.0:
            return 0.0
        return float(np.trace(self.P) / (3.0 * self.rho))


@dataclass
class CollisionCorrections:
    """v-integrated position currents: stress rows and the energy vector."""

    stress: np.ndarray               # (3, 3); row l = int I_l dv
    energy: np.ndarray               # (3,);  int I4 dv
    stress_error: float
    energy_error: float
    nodes_used: int = 0


def compute_moments(
    f: DistributionSpec, x, spec: QuadratureSpec
) -> MomentFields:
    """Numerical rho, u, P, q at x; u first, then centered second moments."""
    x = as_vec3(x)
    scale = np.sqrt(f.temperature)

    def raw(v):
        val = eval_distribution(f, x, v)
        return np.concatenate([val[:, None], val[:, None] * v], axis=1)

    first = integrate_r3(raw, f.bulk, scale, spec)
    rho = float(first.value[0])
    if rho < RHO_FLOOR:
        return MomentFields(
            rho=0.0, u=np.zeros(3), P=np.zeros((3, 3)), q=np.zeros(3),
            errors={"rho": first.error_estimate},
        )
    u = np.asarray(first.value[1:4]) / rho

    def centered(v):
        val = eval_distribution(f, x, v)
        c = v - u
        cols = [
            c[:, 0] * c[:, 0], c[:, 1] * c[:, 1], c[:, 2] * c[:, 2],
            c[:, 0] * c[:, 1], c[:, 0] * c[:, 2], c[:, 1] * c[:, 2],
        ]
        c2 = np.sum(c * c, axis=-1)
        cols += [0.5 * c[:, 0] * c2, 0.5 * c[:, 1] * c2, 0.5 * c[:, 2] * c2]
        return val[:, None] * np.stack(cols, axis=1)

    second = integrate_r3(centered, f.bulk, scale, spec)
    m = second.value
    P = np.array(
        [[m[0], m[3], m[4]], [m[3], m[1], m[5]], [m[4], m[5], m[2]]]
    )
    q = np.asarray(m[6:9])
    return MomentFields(
        rho=rho,
        u=u,
        P=P,
        q=q,
        errors={
            "rho": first.error_estimate,
            "u": first.error_estimate / rho,
            "P": second.error_estimate,
            "q": second.error_estimate,
        },
    )


def collision_corrections(
    model: CollisionModel, f: DistributionSpec, x, spec: QuadratureSpec
) -> CollisionCorrections:
    """Integrate the position currents over velocity at one position.

    Uses a tensor Gauss-Legendre v-grid (half the spec axis count; the
    corrections are much smoother in v than the inner integrands) with one
    fused twelve-component pass per node.  The error estimate is the outer
    embedded difference against the half-order v-grid plus a probe of the
    inner-rule sensitivity at one representative velocity.
    """
    x = as_vec3(x)
    if model.kind == BOLTZMANN:
        return CollisionCorrections(
            stress=np.zeros((3, 3)), energy=np.zeros(3),
            stress_error=0.0, energy_error=0.0,
        )
    scale = np.sqrt(f.temperature)
    trunc = spec.r3_truncation_radius_sigmas
    n_outer = max(4, spec.r3_points_per_axis // 2)

    def tabulate(n_axis):
        xg, wg = gauss_legendre(n_axis, -scale * trunc, scale * trunc)
        nodes = (
            np.stack(np.meshgrid(xg, xg, xg, indexing="ij"), axis=-1).reshape(-1, 3)
            + f.bulk
        )
        weights = (wg[:, None, None] * wg[None, :, None] * wg[None, None, :]).reshape(-1)
        vals = np.zeros((len(nodes), 12))
        count = 0
        for i, v in enumerate(nodes):
            vals[i], _, nd = raw_correction_tensor(model, f, x, v, spec)
            count += nd
        return pairwise_sum(weights[:, None] * vals), count

    full, nodes = tabulate(n_outer)
    half, n2 = tabulate(max(4, n_outer // 2))
    v0 = f.bulk + 0.1 * scale
    ref, _, _ = raw_correction_tensor(model, f, x, v0, spec)
    red, _, _ = raw_correction_tensor(model, f, x, v0, spec.reduced())
    rel = np.max(np.abs(ref - red)) / max(float(np.max(np.abs(ref))), 1e-300)
    inner_term = rel * float(np.max(np.abs(full)))
    stress = full[:9].reshape(3, 3)
    energy = full[9:]
    err = float(np.max(np.abs(full - half))) + inner_term
    return CollisionCorrections(
        stress=stress,
        energy=energy,
        stress_error=err,
        energy_error=err,
        nodes_used=nodes + n2,
    )
