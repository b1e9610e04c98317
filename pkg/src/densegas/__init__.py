"""Dense-gas collision integrals in conservative form, with verification tools.

Evaluates the Boltzmann, Standard Enskog and Povzner collision integrals on
manufactured distributions, builds the mass/momentum/energy currents whose
phase-space divergences reproduce them, and checks the resulting identities
(strong form, weak form, global conservation, entropy sign) numerically.
"""

from .collision import (
    BOLTZMANN,
    ENSKOG,
    POVZNER,
    CollisionModel,
    eval_boltzmann,
    eval_collision,
    eval_enskog,
    eval_povzner,
)
from .currents import (
    CurrentField,
    WeightSpec,
    energy_current_v,
    energy_current_x,
    landau_integrand_enskog,
    landau_integrand_povzner,
    mass_current,
    momentum_current_v,
    momentum_current_x,
)
from .geometry import InvalidDirectionError, collide, rotate_pair
from .kernels import ChiSpec, PovznerKernelSpec, chi_eval, kernel_eval, validate_kernel
from .quadrature import (
    IntegralResult,
    NodeFailureError,
    QuadratureSpec,
    integrate_r3,
    integrate_segment,
    integrate_sphere,
    qmc_integrate,
)
from .moments import (
    CollisionCorrections,
    MomentFields,
    collision_corrections,
    compute_moments,
)
from .reporting import VerificationReport
from .testfields import (
    DistributionSpec,
    UnsupportedClosedFormError,
    analytic_moments,
    eval_distribution,
)
from .verify import (
    TestFunctionSpec,
    check_divergence,
    check_global_conservation,
    check_weakform,
    entropy_production_povzner,
)

__version__ = "0.1.0"

__all__ = [
    "BOLTZMANN",
    "ENSKOG",
    "POVZNER",
    "ChiSpec",
    "CollisionModel",
    "CurrentField",
    "DistributionSpec",
    "IntegralResult",
    "InvalidDirectionError",
    "NodeFailureError",
    "PovznerKernelSpec",
    "QuadratureSpec",
    "UnsupportedClosedFormError",
    "VerificationReport",
    "WeightSpec",
    "CollisionCorrections",
    "MomentFields",
    "TestFunctionSpec",
    "analytic_moments",
    "check_divergence",
    "check_global_conservation",
    "check_weakform",
    "chi_eval",
    "collide",
    "collision_corrections",
    "compute_moments",
    "energy_current_v",
    "energy_current_x",
    "entropy_production_povzner",
    "eval_boltzmann",
    "eval_collision",
    "eval_distribution",
    "eval_enskog",
    "eval_povzner",
    "integrate_r3",
    "integrate_segment",
    "integrate_sphere",
    "kernel_eval",
    "landau_integrand_enskog",
    "landau_integrand_povzner",
    "mass_current",
    "momentum_current_v",
    "momentum_current_x",
    "qmc_integrate",
    "rotate_pair",
    "validate_kernel",
]
