"""Interception probabilities and total pressure per frame."""

from __future__ import annotations

import math
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import (
    BALL,
    EmptyTeamError,
    FrameSnapshot,
    ModelParams,
    PressingResult,
    frozen_array,
    other_side,
    sorted_players,
    vec_norm,
    vec_sub,
)
from .kinematics import intercept_time_array

_EXP_LIMIT = 709.0


def _logistic_rate(sigma: float) -> float:
    return math.pi / (math.sqrt(3.0) * sigma)


def intercept_probability(tti: float, params: ModelParams, t_threshold: Optional[float] = None) -> float:
    """Chance of reaching the target within the time threshold.

    ``t_threshold`` overrides ``params.t_threshold_s`` (used for pass lanes).
    """
    threshold = params.t_threshold_s if t_threshold is None else t_threshold
    exponent = -_logistic_rate(params.sigma) * (threshold - tti)
    if exponent > _EXP_LIMIT:
        return 0.0
    return 1.0 / (1.0 + math.exp(exponent))


def intercept_probability_array(tti, params: ModelParams, t_threshold: Optional[float] = None):
    threshold = params.t_threshold_s if t_threshold is None else t_threshold
    exponent = -_logistic_rate(params.sigma) * (threshold - np.asarray(tti, dtype=np.float64))
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(exponent))


def total_pressure(probs: Iterable[float]) -> float:
    """One minus the chance that no defender gets there, assuming independence."""
    miss = 1.0
    for p in probs:
        miss *= 1.0 - p
    return 1.0 - miss


def total_pressure_array(prob_matrix, axis: int = -2):
    return 1.0 - np.prod(1.0 - np.asarray(prob_matrix, dtype=np.float64), axis=axis)


def identify_ball_carrier(frame: FrameSnapshot, attacking_side: str,
                          params: ModelParams) -> Optional[str]:
    """Ball owner on the attacking side, or the attacker nearest the ball.

    An explicit owner annotation wins. An owner on the other team means the
    attacking side has no carrier. Without annotation the nearest attacker is
    returned if within ``possession_radius_m``; ties go to the smaller id.
    """
    attackers = frame.team(attacking_side)
    if frame.ball_owner_id is not None:
        if any(p.player_id == frame.ball_owner_id for p in attackers):
            return frame.ball_owner_id
        if frame.side_of(frame.ball_owner_id) is not None:
            return None
    best_id, best_dist = None, math.inf
    for p in sorted_players(attackers):
        d = vec_norm(vec_sub(p.position, frame.ball.position))
        if d < best_dist:
            best_id, best_dist = p.player_id, d
    if best_id is not None and best_dist <= params.possession_radius_m:
        return best_id
    return None


def apply_active_filter(prob: np.ndarray, def_speed: np.ndarray, params: ModelParams,
                        player_columns: Optional[int] = None) -> np.ndarray:
    """Zero rows of defenders slower than the active pressing threshold.

    ``prob`` has shape (..., defenders, targets) and ``def_speed`` shape
    (..., defenders). When ``player_columns`` is given only the first that
    many columns are zeroed.
    """
    slow = def_speed < params.active_speed_mps
    if player_columns is None:
        return np.where(slow[..., None], 0.0, prob)
    out = prob.copy()
    cols = out[..., :player_columns]
    cols[np.broadcast_to(slow[..., None], cols.shape)] = 0.0
    return out


def _team_flat(players, out: list) -> tuple[str, ...]:
    ordered = sorted(players, key=_by_id)
    for p in ordered:
        out += p.position
        out += p.velocity
    return tuple(p.player_id for p in ordered)


def _by_id(p) -> str:
    return p.player_id


def _check_teams(frame: FrameSnapshot, defending_side: str) -> str:
    attacking_side = other_side(defending_side)
    if not frame.team(defending_side):
        raise EmptyTeamError(f"defending side {defending_side!r} has no players", frame.frame_id)
    if not frame.team(attacking_side):
        raise EmptyTeamError(f"attacking side {attacking_side!r} has no players", frame.frame_id)
    return attacking_side


def pressing_matrices(frames: Sequence[FrameSnapshot], defending_side: str,
                      params: ModelParams) -> list[PressingResult]:
    """Vectorised :func:`pressing_matrix` over many frames.

    Frames are grouped by team sizes and evaluated as stacked arrays; the
    returned list follows the input order.
    """
    meta = []
    groups: dict[tuple[int, int], tuple[list, list, list, list]] = {}
    for frame in frames:
        attacking_side = _check_teams(frame, defending_side)
        dflat: list = []
        aflat: list = []
        d_ids = _team_flat(frame.team(defending_side), dflat)
        a_ids = _team_flat(frame.team(attacking_side), aflat)
        aflat += frame.ball.position
        aflat += frame.ball.velocity
        carrier = identify_ball_carrier(frame, attacking_side, params)
        carrier_col = a_ids.index(carrier) if carrier is not None else -1
        group = groups.setdefault((len(d_ids), len(a_ids)), ([], [], [], []))
        meta.append((d_ids, a_ids + (BALL,), carrier, len(group[0])))
        group[0].append(frame)
        group[1].extend(dflat)
        group[2].extend(aflat)
        group[3].append(carrier_col)

    by_group: dict[tuple[int, int], tuple] = {}
    for (m, n), (gframes, dflat, aflat, carrier_cols) in groups.items():
        f = len(gframes)
        d = np.array(dflat, dtype=np.float64).reshape(f, m, 1, 4)
        a = np.array(aflat, dtype=np.float64).reshape(f, 1, n + 1, 4)
        dvel = d[..., 2:]
        tti = intercept_time_array(d[..., :2], dvel, a[..., :2], a[..., 2:], params)
        prob = intercept_probability_array(tti, params)
        speed = np.hypot(dvel[:, :, 0, 0], dvel[:, :, 0, 1])
        prob = apply_active_filter(prob, speed, params, n if params.strict_filter else None)
        carrier_cols = np.array(carrier_cols)
        rows = np.nonzero(carrier_cols >= 0)[0]
        if rows.size:
            cols = carrier_cols[rows]
            prob[rows, :, cols] = np.maximum(prob[rows, :, cols], prob[rows, :, n])
        total = total_pressure_array(prob)
        by_group[m, n] = (frozen_array(tti), frozen_array(prob), frozen_array(total))

    results = []
    for (d_ids, t_ids, carrier, r), frame in zip(meta, frames):
        tti, prob, total = by_group[len(d_ids), len(t_ids) - 1]
        results.append(PressingResult(
            frame_id=frame.frame_id,
            defending_side=defending_side,
            defender_ids=d_ids,
            target_ids=t_ids,
            tti_matrix=tti[r],
            prob_matrix=prob[r],
            total_pressure=total[r],
            carrier_id=carrier,
            timestamp_s=frame.timestamp_s,
        ))
    return results


def pressing_matrix(frame: FrameSnapshot, defending_side: str, params: ModelParams) -> PressingResult:
    """Pressure from every defender on every attacker and the ball in one frame.

    Defenders slower than ``params.active_speed_mps`` have their probability
    row zeroed (intercept times are kept). If a ball carrier is found, its
    column becomes the elementwise max of its own and the ball column.
    Rows and columns are sorted by player id with the ball last.
    """
    return pressing_matrices([frame], defending_side, params)[0]
