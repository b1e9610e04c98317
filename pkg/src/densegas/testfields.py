"""Manufactured phase-space distributions with closed-form structure.

Two families ship, both smooth, nonnegative and rapidly decaying:

gaussian_maxwellian
    f(x,v) = A exp(-|x-x0|^2 / (2 L^2)) * (2 pi T)^{-3/2} exp(-|v-u0|^2 / (2 T))

perturbed_maxwellian
    the above multiplied by (1 + eps <e, v-u0>/sqrt(T) * exp(-|v-u0|^2/(4T))).
    The factor r exp(-r^2/4T)/sqrt(T) is bounded by sqrt(2)/sqrt(e) < 0.86,
    so eps < 0.5 keeps f nonnegative.  The perturbation is odd in v-u0,
    which leaves the density unchanged but shifts the bulk velocity and
    produces a nonzero heat flux, giving a guaranteed non-equilibrium input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .geometry import as_vec3

GAUSSIAN = "gaussian_maxwellian"
PERTURBED = "perturbed_maxwellian"


class UnsupportedClosedFormError(ValueError):
    """Raised when analytic moments are requested for a family without them."""


@dataclass(frozen=True, eq=False)
class DistributionSpec:
    """Parameters of a manufactured distribution f(x, v).

    amplitude may be 0 to realize f identically zero (used by trivial
    checks); strength (eps) must stay in [0, 0.5) to preserve positivity.
    """

    family: str = GAUSSIAN
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))   # x0
    width: float = 1.0                                                # L
    amplitude: float = 1.0                                            # A
    bulk: np.ndarray = field(default_factory=lambda: np.zeros(3))     # u0
    temperature: float = 1.0                                          # T
    direction: np.ndarray | None = None                               # e (unit)
    strength: float = 0.0                                             # eps

    def __post_init__(self):
        object.__setattr__(self, "center", as_vec3(self.center).copy())
        object.__setattr__(self, "bulk", as_vec3(self.bulk).copy())
        if self.family not in (GAUSSIAN, PERTURBED):
            raise ValueError(f"unknown family {self.family!r}")
        if self.width <= 0 or self.temperature <= 0 or self.amplitude < 0:
            raise ValueError("width and temperature must be > 0, amplitude >= 0")
        if self.family == PERTURBED:
            if self.direction is None:
                raise ValueError("perturbed family needs a direction")
            e = as_vec3(self.direction)
            object.__setattr__(self, "direction", e / np.linalg.norm(e))
            if not 0.0 <= self.strength < 0.5:
                raise ValueError("strength must lie in [0, 0.5)")


class AnalyticMoments(NamedTuple):
    rho: float
    u: np.ndarray
    P: np.ndarray
    q: np.ndarray


def eval_distribution(spec: DistributionSpec, x, v) -> np.ndarray:
    """f(x, v), vectorized over broadcastable (..., 3) inputs."""
    x = as_vec3(x)
    v = as_vec3(v)
    dx2 = np.sum((x - spec.center) ** 2, axis=-1)
    c = v - spec.bulk
    dv2 = np.sum(c * c, axis=-1)
    T = spec.temperature
    with np.errstate(under="ignore"):
        val = (
            spec.amplitude
            * np.exp(-dx2 / (2.0 * spec.width**2))
            * (2.0 * np.pi * T) ** -1.5
            * np.exp(-dv2 / (2.0 * T))
        )
        if spec.family == PERTURBED:
            g = np.sum(spec.direction * c, axis=-1) / np.sqrt(T)
            val = val * (1.0 + spec.strength * g * np.exp(-dv2 / (4.0 * T)))
    return val


def spatial_density(spec: DistributionSpec, x) -> np.ndarray:
    """rho_f(x) = integral of f over v; exact for both families.

    The perturbation is odd in v-u0, so it does not contribute.
    """
    x = as_vec3(x)
    dx2 = np.sum((x - spec.center) ** 2, axis=-1)
    with np.errstate(under="ignore"):
        return spec.amplitude * np.exp(-dx2 / (2.0 * spec.width**2))


def analytic_moments(spec: DistributionSpec, x) -> AnalyticMoments:
    """Closed-form (rho, u, P, q) at x for the gaussian_maxwellian family.

    rho = A exp(-|x-x0|^2/2L^2), u = u0, P = rho T Id, q = 0.  The
    perturbed family has no closed form here; use numerical moments.
    """
    if spec.family != GAUSSIAN:
        raise UnsupportedClosedFormError(
            f"analytic moments unavailable for family {spec.family!r}"
        )
    rho = float(spatial_density(spec, x))
    return AnalyticMoments(
        rho=rho,
        u=spec.bulk.copy(),
        P=rho * spec.temperature * np.eye(3),
        q=np.zeros(3),
    )
