"""Elastic collision transform and the pair rotations used by the currents.

The collision transform exchanges the normal component of the relative
velocity of a pair along a unit direction n:

    v' = v - n <n, v - w>,   w' = w + n <n, v - w>.

It is an involution, symmetric under (v,w) swap, even in n, conserves
momentum and kinetic energy, and reverses <v-w, n>.  The pair rotation

    (a_t, b_t) = (a cos t + b sin t, -a sin t + b cos t)

acts identically on velocity pairs and position pairs and has unit
Jacobian; it is the change of variables behind the theta-terms of the
momentum and energy currents.

All functions are pure and vectorized over leading axes: arguments may be
single 3-vectors or arrays of shape (..., 3).
"""

from __future__ import annotations

import numpy as np

UNIT_NORM_TOL = 1e-9


class InvalidDirectionError(ValueError):
    """Raised when a direction vector is not unit length."""


def as_vec3(x) -> np.ndarray:
    """Coerce to a float array with trailing dimension 3."""
    a = np.asarray(x, dtype=float)
    if a.shape[-1:] != (3,):
        raise ValueError(f"expected trailing dimension 3, got shape {a.shape}")
    return a


def check_unit(n) -> np.ndarray:
    """Validate |n| = 1 within UNIT_NORM_TOL; returns n as an array."""
    n = as_vec3(n)
    norms = np.linalg.norm(n, axis=-1)
    bad = np.abs(norms - 1.0) > UNIT_NORM_TOL
    if np.any(bad):
        worst = float(np.max(np.abs(norms - 1.0)))
        raise InvalidDirectionError(
            f"direction not unit length: max |norm - 1| = {worst:.3e}"
        )
    return n


def collide(v, w, n, check: bool = True):
    """Post-collision pair (v', w') for directions n.

    v' = v - n <n, v-w>,  w' = w + n <n, v-w>.  Broadcasts over leading
    axes.  Raises InvalidDirectionError if any |n| deviates from 1 by more
    than 1e-9 (skipped when check=False for hot loops that build n
    normalized).
    """
    v = as_vec3(v)
    w = as_vec3(w)
    n = check_unit(n) if check else as_vec3(n)
    d = np.sum(n * (v - w), axis=-1, keepdims=True)
    return v - n * d, w + n * d


def rotate_pair(a, b, theta):
    """Joint rotation (a_theta, b_theta) of a vector pair by angle theta.

    Returns (a cos + b sin, -a sin + b cos).  theta may broadcast against
    the leading axes of a and b.
    """
    a = as_vec3(a)
    b = as_vec3(b)
    th = np.asarray(theta, dtype=float)[..., None]
    c, s = np.cos(th), np.sin(th)
    return a * c + b * s, -a * s + b * c


def orthonormal_frame(axis) -> tuple[np.ndarray, np.ndarray]:
    """Two unit vectors completing `axis` to a right-handed frame.

    Deterministic: the reference vector is e_z unless axis is nearly
    parallel to it, then e_x.  Vectorized over leading axes.
    """
    axis = as_vec3(axis)
    ref = np.zeros_like(axis)
    use_x = np.abs(axis[..., 2]) > 0.9
    ref[..., 2] = np.where(use_x, 0.0, 1.0)
    ref[..., 0] = np.where(use_x, 1.0, 0.0)
    e1 = np.cross(axis, ref)
    e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
    e2 = np.cross(axis, e1)
    return e1, e2
