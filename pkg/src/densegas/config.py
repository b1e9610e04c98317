"""Run configuration: YAML parsing and validation for the CLI.

A config names a collision model, a distribution, quadrature resolutions,
tolerance constants and a list of checks.  Parse errors raise ConfigError
with a message naming the offending key.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import yaml

from .collision import CollisionModel
from .kernels import ChiSpec, PovznerKernelSpec
from .quadrature import QuadratureSpec
from .testfields import DistributionSpec
from .verify import MOMENTS, TestFunctionSpec


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass
class CheckSpec:
    """One check descriptor from the config."""

    name: str
    kind: str                      # divergence | weakform | global_conservation
    #                              # | entropy | kernel_validation
    moment: str | None = None
    x: np.ndarray | None = None
    v: np.ndarray | None = None
    h: float | None = None
    phi: TestFunctionSpec | None = None
    seeds: list = field(default_factory=list)
    floor: float = 1e-30
    n_samples: int = 10000
    abs_tolerance: float = 1e-3


@dataclass
class RunConfig:
    model: CollisionModel
    distribution: DistributionSpec
    quadrature: QuadratureSpec
    checks: list
    output: str = "report.jsonl"
    c1: float = 2.0
    c2: float = 2.0
    grid: dict = field(default_factory=dict)


def _require_keys(mapping, allowed, where):
    if not isinstance(mapping, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(mapping).__name__}")
    for key in mapping:
        if key not in allowed:
            raise ConfigError(f"{where}.{key}: unknown key")


def _get(mapping, key, where, default=None, required=False):
    if required and key not in mapping:
        raise ConfigError(f"{where}.{key}: missing required key")
    return mapping.get(key, default)


def build_distribution(node, where="distribution") -> DistributionSpec:
    _require_keys(
        node,
        {"family", "center", "width", "amplitude", "bulk", "temperature",
         "direction", "strength"},
        where,
    )
    try:
        return DistributionSpec(
            family=_get(node, "family", where, "gaussian_maxwellian"),
            center=np.asarray(_get(node, "center", where, [0.0, 0.0, 0.0]), float),
            width=float(_get(node, "width", where, 1.0)),
            amplitude=float(_get(node, "amplitude", where, 1.0)),
            bulk=np.asarray(_get(node, "bulk", where, [0.0, 0.0, 0.0]), float),
            temperature=float(_get(node, "temperature", where, 1.0)),
            direction=node.get("direction"),
            strength=float(_get(node, "strength", where, 0.0)),
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def build_chi(node, distribution, where="model.chi") -> ChiSpec:
    _require_keys(node, {"type", "value", "sigma"}, where)
    kind = _get(node, "type", where, "constant")
    try:
        if kind == "constant":
            return ChiSpec("constant", value=float(_get(node, "value", where, 1.0)))
        if kind == "enskog_asymptotic":
            return ChiSpec(
                "enskog_asymptotic",
                sigma=float(_get(node, "sigma", where, required=True)),
                density_of=distribution,
            )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}.type: unknown chi type {kind!r}")


def build_kernel(node, where="model.kernel") -> PovznerKernelSpec:
    _require_keys(
        node, {"type", "delta", "theta_speed", "range", "speed_scale"}, where
    )
    kind = _get(node, "type", where, required=True)
    try:
        if kind == "fornasier":
            return PovznerKernelSpec(
                kind="fornasier",
                delta=float(_get(node, "delta", where, 1.0)),
                theta_speed=float(_get(node, "theta_speed", where, 1.0)),
            )
        if kind == "smooth_bump":
            return PovznerKernelSpec(
                kind="smooth_bump",
                range_r=float(_get(node, "range", where, 1.0)),
                speed_scale=float(_get(node, "speed_scale", where, 1.0)),
            )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}.type: unknown kernel type {kind!r}")


def build_model(node, distribution, where="model") -> CollisionModel:
    _require_keys(node, {"type", "sigma", "chi", "kernel"}, where)
    kind = _get(node, "type", where, required=True)
    try:
        if kind == "boltzmann":
            return CollisionModel(kind="boltzmann")
        if kind == "enskog":
            chi_node = _get(node, "chi", where, {"type": "constant", "value": 1.0})
            return CollisionModel(
                kind="enskog",
                sigma=float(_get(node, "sigma", where, required=True)),
                chi=build_chi(chi_node, distribution, f"{where}.chi"),
            )
        if kind == "povzner":
            kernel_node = _get(node, "kernel", where, required=True)
            return CollisionModel(
                kind="povzner",
                kernel=build_kernel(kernel_node, f"{where}.kernel"),
            )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}.type: unknown model type {kind!r}")


def build_quadrature(node, where="quadrature") -> QuadratureSpec:
    _require_keys(
        node,
        {"r3_points_per_axis", "r3_truncation_radius_sigmas", "sphere_rule_order",
         "segment_points", "qmc_samples", "qmc_seed"},
        where,
    )
    try:
        return QuadratureSpec(
            r3_points_per_axis=int(_get(node, "r3_points_per_axis", where, 12)),
            r3_truncation_radius_sigmas=float(
                _get(node, "r3_truncation_radius_sigmas", where, 6.0)
            ),
            sphere_rule_order=int(_get(node, "sphere_rule_order", where, 6)),
            segment_points=int(_get(node, "segment_points", where, 8)),
            qmc_samples=int(_get(node, "qmc_samples", where, 32768)),
            qmc_seed=int(_get(node, "qmc_seed", where, 0)),
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def build_phi(node, where="phi") -> TestFunctionSpec:
    _require_keys(
        node,
        {"type", "x_center", "v_center", "x_width", "v_width", "const",
         "lin_x", "lin_v"},
        where,
    )
    try:
        return TestFunctionSpec(
            kind=_get(node, "type", where, "gaussian_poly"),
            x_center=node.get("x_center"),
            v_center=node.get("v_center"),
            x_width=float(_get(node, "x_width", where, 1.0)),
            v_width=float(_get(node, "v_width", where, 1.0)),
            const=float(_get(node, "const", where, 1.0)),
            lin_x=node.get("lin_x"),
            lin_v=node.get("lin_v"),
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


_CHECK_KINDS = {
    "divergence", "weakform", "global_conservation", "entropy",
    "kernel_validation",
}


def build_check(node, idx) -> CheckSpec:
    where = f"checks[{idx}]"
    _require_keys(
        node,
        {"name", "kind", "moment", "x", "v", "h", "phi", "seeds", "floor",
         "n_samples", "abs_tolerance"},
        where,
    )
    kind = _get(node, "kind", where, required=True)
    if kind not in _CHECK_KINDS:
        raise ConfigError(f"{where}.kind: unknown check kind {kind!r}")
    moment = node.get("moment")
    if kind in ("divergence", "weakform"):
        if moment not in MOMENTS:
            raise ConfigError(
                f"{where}.moment: must be one of {', '.join(MOMENTS)}"
            )
    x = node.get("x")
    v = node.get("v")
    if kind == "divergence":
        if x is None or v is None:
            raise ConfigError(f"{where}: divergence checks need x and v")
    phi = build_phi(node["phi"], f"{where}.phi") if node.get("phi") else None
    if kind == "weakform" and phi is None:
        raise ConfigError(f"{where}.phi: weakform checks need a test function")
    seeds = node.get("seeds", [])
    if not isinstance(seeds, list):
        raise ConfigError(f"{where}.seeds: expected a list")
    return CheckSpec(
        name=str(_get(node, "name", where, required=True)),
        kind=kind,
        moment=moment,
        x=None if x is None else np.asarray(x, float),
        v=None if v is None else np.asarray(v, float),
        h=None if node.get("h") is None else float(node["h"]),
        phi=phi,
        seeds=[int(s) for s in seeds],
        floor=float(_get(node, "floor", where, 1e-30)),
        n_samples=int(_get(node, "n_samples", where, 10000)),
        abs_tolerance=float(_get(node, "abs_tolerance", where, 1e-3)),
    )


def load_config(path) -> RunConfig:
    """Parse and validate a YAML config file."""
    with open(path) as fh:
        try:
            raw = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"config: not valid YAML ({exc})") from exc
    return parse_config(raw)


def parse_config(raw) -> RunConfig:
    _require_keys(
        raw,
        {"model", "distribution", "quadrature", "checks", "output",
         "tolerances", "grid"},
        "config",
    )
    dist = build_distribution(_get(raw, "distribution", "config", {}))
    model = build_model(_get(raw, "model", "config", required=True), dist)
    quad = build_quadrature(_get(raw, "quadrature", "config", {}))
    tol = _get(raw, "tolerances", "config", {}) or {}
    _require_keys(tol, {"c1", "c2"}, "tolerances")
    checks_raw = _get(raw, "checks", "config", required=True)
    if not isinstance(checks_raw, list) or len(checks_raw) == 0:
        raise ConfigError("checks: must be non-empty")
    checks = [build_check(c, i) for i, c in enumerate(checks_raw)]
    names = [c.name for c in checks]
    if len(set(names)) != len(names):
        raise ConfigError("checks: names must be unique")
    grid = _get(raw, "grid", "config", {}) or {}
    _require_keys(grid, {"center", "half_width", "points"}, "grid")
    return RunConfig(
        model=model,
        distribution=dist,
        quadrature=quad,
        checks=checks,
        output=str(_get(raw, "output", "config", "report.jsonl")),
        c1=float(tol.get("c1", 2.0)),
        c2=float(tol.get("c2", 2.0)),
        grid=grid,
    )
