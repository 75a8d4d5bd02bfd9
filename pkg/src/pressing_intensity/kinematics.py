"""Time for a defender to reach a moving target.

The total is reaction time, plus the straight-line run at ``v_max`` from
where the defender drifts to after the reaction time to where the target
will be one second from now, plus a heading penalty that grows with the
angle between the defender's velocity and the direction to that point.

Scalar functions take :class:`PlayerState`/:class:`Vec2`; the ``*_array``
variants broadcast over arrays whose last axis holds (x, y).
"""

from __future__ import annotations

import math

import numpy as np

from .core import ModelParams, PlayerState, Vec2, vec_add, vec_dot, vec_norm, vec_scale, vec_sub


def intercept_time_core(defender: PlayerState, target_pos: Vec2, target_vel: Vec2,
                        params: ModelParams) -> float:
    projected_target = vec_add(target_pos, target_vel)
    drifted = vec_add(defender.position, vec_scale(defender.velocity, params.reaction_time_s))
    return vec_norm(vec_sub(projected_target, drifted)) / params.v_max_mps


def angle_penalty(defender: PlayerState, target_pos: Vec2, target_vel: Vec2,
                  literal: bool = False) -> float:
    u = defender.velocity
    v = vec_add(target_pos, target_vel)
    if not literal:
        v = vec_sub(v, defender.position)
    nu = vec_norm(u)
    nv = vec_norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    cos = vec_dot(u, v) / nu / nv
    beta = math.acos(min(1.0, max(-1.0, cos)))
    return nu * beta / math.pi


def intercept_time(defender: PlayerState, target_pos: Vec2, target_vel: Vec2,
                   params: ModelParams) -> float:
    return (params.reaction_time_s
            + intercept_time_core(defender, target_pos, target_vel, params)
            + angle_penalty(defender, target_pos, target_vel, params.literal_eq3))


def _norm(a: np.ndarray) -> np.ndarray:
    return np.hypot(a[..., 0], a[..., 1])


def angle_penalty_array(def_pos, def_vel, target_pos, target_vel, literal: bool = False):
    def_vel = np.asarray(def_vel, dtype=np.float64)
    v = np.asarray(target_pos, dtype=np.float64) + target_vel
    if not literal:
        v = v - def_pos
    u = np.broadcast_to(def_vel, np.broadcast_shapes(def_vel.shape, v.shape))
    nu = _norm(u)
    nv = _norm(v)
    dot = u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1]
    degenerate = (nu == 0.0) | (nv == 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        cos = dot / nu / nv
    cos = np.clip(np.where(degenerate, 1.0, cos), -1.0, 1.0)
    penalty = nu * np.arccos(cos) / np.pi
    return np.where(degenerate, 0.0, penalty)


def intercept_time_array(def_pos, def_vel, target_pos, target_vel, params: ModelParams):
    """Intercept times for broadcast-compatible defender and target arrays.

    Parameters
    ----------
    def_pos, def_vel : array, shape (..., 2)
        Defender positions and velocities.
    target_pos, target_vel : array, shape (..., 2)
        Target positions and velocities; must broadcast against the
        defender arrays.

    Returns
    -------
    array, broadcast shape without the trailing axis, in seconds.
    """
    def_pos = np.asarray(def_pos, dtype=np.float64)
    def_vel = np.asarray(def_vel, dtype=np.float64)
    target_pos = np.asarray(target_pos, dtype=np.float64)
    target_vel = np.asarray(target_vel, dtype=np.float64)
    gap = (target_pos + target_vel) - (def_pos + def_vel * params.reaction_time_s)
    run = _norm(gap) / params.v_max_mps
    penalty = angle_penalty_array(def_pos, def_vel, target_pos, target_vel, params.literal_eq3)
    return params.reaction_time_s + run + penalty
