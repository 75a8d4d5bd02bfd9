"""Pressure on passing lanes from the ball carrier to each teammate.

Each defender is measured against its own closest point on every lane, so a
column is a lane rather than a fixed location. The point's velocity is the
endpoint velocities blended by the segment parameter.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    FrameSnapshot,
    ModelParams,
    NoCarrierError,
    PlayerState,
    PressingResult,
    Vec2,
    frozen_array,
    sorted_players,
    vec_add,
    vec_dot,
    vec_scale,
    vec_sub,
)
from .kinematics import intercept_time_array
from .pressure import (
    _check_teams,
    apply_active_filter,
    identify_ball_carrier,
    intercept_probability_array,
    total_pressure_array,
)


@dataclass(frozen=True, slots=True)
class PassLane:
    receiver_id: str
    origin: Vec2
    terminus: Vec2
    origin_vel: Vec2
    terminus_vel: Vec2

    @property
    def degenerate(self) -> bool:
        return self.origin == self.terminus


def closest_point_on_segment(p: Vec2, a: Vec2, b: Vec2) -> tuple[Vec2, float]:
    ab = vec_sub(b, a)
    denom = vec_dot(ab, ab)
    if denom == 0.0:
        return Vec2(*a), 0.0
    t = min(1.0, max(0.0, vec_dot(vec_sub(p, a), ab) / denom))
    return vec_add(a, vec_scale(ab, t)), t


def closest_point_on_segment_array(p, a, b):
    """Broadcast version of :func:`closest_point_on_segment`.

    Returns ``(points, t)`` with ``points`` shaped like the broadcast inputs
    and ``t`` without the trailing coordinate axis.
    """
    p = np.asarray(p, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    ab = np.asarray(b, dtype=np.float64) - a
    denom = ab[..., 0] * ab[..., 0] + ab[..., 1] * ab[..., 1]
    ap = p - a
    num = ap[..., 0] * ab[..., 0] + ap[..., 1] * ab[..., 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.clip(num / denom, 0.0, 1.0)
    t = np.where(denom == 0.0, 0.0, t)
    return a + ab * t[..., None], t


def build_pass_lanes(frame: FrameSnapshot, attacking_side: str, carrier_id: str) -> list[PassLane]:
    attackers = frame.team(attacking_side)
    carrier = next((p for p in attackers if p.player_id == carrier_id), None)
    if carrier is None:
        raise NoCarrierError(f"carrier {carrier_id!r} is not on the {attacking_side} side", frame.frame_id)
    lanes = []
    for mate in sorted_players(attackers):
        if mate.player_id == carrier_id:
            continue
        lane = PassLane(mate.player_id, carrier.position, mate.position, carrier.velocity, mate.velocity)
        if not lane.degenerate:
            lanes.append(lane)
    return lanes


def lane_pressing(defenders: Sequence[PlayerState], lanes: Sequence[PassLane], params: ModelParams,
                  frame_id: int = 0, defending_side: str = "home", carrier_id: Optional[str] = None,
                  timestamp_s: float = 0.0) -> PressingResult:
    """Pressure from ``defenders`` on explicit ``lanes``.

    Degenerate lanes are evaluated as given; callers filter them.
    """
    ordered = sorted_players(defenders)
    m, n = len(ordered), len(lanes)
    dpos = np.array([p.position for p in ordered], dtype=np.float64).reshape(m, 2)
    dvel = np.array([p.velocity for p in ordered], dtype=np.float64).reshape(m, 2)
    origin = np.array([ln.origin for ln in lanes], dtype=np.float64).reshape(n, 2)
    terminus = np.array([ln.terminus for ln in lanes], dtype=np.float64).reshape(n, 2)
    ovel = np.array([ln.origin_vel for ln in lanes], dtype=np.float64).reshape(n, 2)
    tvel = np.array([ln.terminus_vel for ln in lanes], dtype=np.float64).reshape(n, 2)

    point, t = closest_point_on_segment_array(dpos[:, None, :], origin[None], terminus[None])
    t = t[..., None]
    point_vel = (1.0 - t) * ovel[None] + t * tvel[None]
    tti = intercept_time_array(dpos[:, None, :], dvel[:, None, :], point, point_vel, params)
    prob = intercept_probability_array(tti, params, params.passlane_t_threshold_s)
    prob = apply_active_filter(prob, np.hypot(dvel[:, 0], dvel[:, 1]), params)
    return PressingResult(
        frame_id=frame_id,
        defending_side=defending_side,
        defender_ids=tuple(p.player_id for p in ordered),
        target_ids=tuple(ln.receiver_id for ln in lanes),
        tti_matrix=frozen_array(tti.reshape(m, n)),
        prob_matrix=frozen_array(prob.reshape(m, n)),
        total_pressure=frozen_array(total_pressure_array(prob).reshape(n)),
        carrier_id=carrier_id,
        timestamp_s=timestamp_s,
        mode="passlanes",
    )


def lane_target_points(defenders: Sequence[PlayerState], lanes: Sequence[PassLane]):
    """Closest point and segment parameter for every (defender, lane) pair, id-sorted rows."""
    ordered = sorted_players(defenders)
    dpos = np.array([p.position for p in ordered], dtype=np.float64).reshape(len(ordered), 2)
    origin = np.array([ln.origin for ln in lanes], dtype=np.float64).reshape(len(lanes), 2)
    terminus = np.array([ln.terminus for ln in lanes], dtype=np.float64).reshape(len(lanes), 2)
    return closest_point_on_segment_array(dpos[:, None, :], origin[None], terminus[None])


def passlane_pressing_matrix(frame: FrameSnapshot, defending_side: str,
                             params: ModelParams) -> PressingResult:
    """Pressure on the carrier's passing lanes; raises :class:`NoCarrierError` without a carrier."""
    attacking_side = _check_teams(frame, defending_side)
    carrier = identify_ball_carrier(frame, attacking_side, params)
    if carrier is None:
        raise NoCarrierError("no identifiable ball carrier", frame.frame_id)
    lanes = build_pass_lanes(frame, attacking_side, carrier)
    return lane_pressing(frame.team(defending_side), lanes, params, frame.frame_id,
                         defending_side, carrier, frame.timestamp_s)


def no_carrier_result(frame: FrameSnapshot, defending_side: str) -> PressingResult:
    empty = frozen_array(np.zeros((0, 0)))
    return PressingResult(frame.frame_id, defending_side, (), (), empty, empty, frozen_array(np.zeros(0)),
                          timestamp_s=frame.timestamp_s, mode="passlanes", no_carrier=True)


def passlane_pressing_matrices(frames: Sequence[FrameSnapshot], defending_side: str,
                               params: ModelParams) -> list[PressingResult]:
    out = []
    for frame in frames:
        try:
            out.append(passlane_pressing_matrix(frame, defending_side, params))
        except NoCarrierError:
            out.append(no_carrier_result(frame, defending_side))
    return out

