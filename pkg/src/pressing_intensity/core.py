"""Domain types, model parameters and small vector helpers.

Coordinates are pitch-centred, x along the long axis, in meters; velocities
are in meters per second. All arithmetic is float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import NamedTuple, Optional, Sequence

import numpy as np

BALL = "BALL"
SIDES = ("home", "away")


class Vec2(NamedTuple):
    x: float
    y: float


ZERO = Vec2(0.0, 0.0)


def vec_add(a: Vec2, b: Vec2) -> Vec2:
    return Vec2(a[0] + b[0], a[1] + b[1])


def vec_sub(a: Vec2, b: Vec2) -> Vec2:
    return Vec2(a[0] - b[0], a[1] - b[1])


def vec_scale(a: Vec2, k: float) -> Vec2:
    return Vec2(a[0] * k, a[1] * k)


def vec_dot(a: Vec2, b: Vec2) -> float:
    return a[0] * b[0] + a[1] * b[1]


def vec_norm(a: Vec2) -> float:
    return math.hypot(a[0], a[1])


class PlayerState(NamedTuple):
    player_id: str
    position: Vec2
    velocity: Vec2 = ZERO

    @property
    def speed(self) -> float:
        return vec_norm(self.velocity)


class BallState(NamedTuple):
    position: Vec2
    velocity: Vec2 = ZERO


def other_side(side: str) -> str:
    if side not in SIDES:
        raise ValueError(f"side must be 'home' or 'away', got {side!r}")
    return "away" if side == "home" else "home"


@dataclass(frozen=True, slots=True)
class FrameSnapshot:
    frame_id: int
    timestamp_s: float
    home: tuple[PlayerState, ...]
    away: tuple[PlayerState, ...]
    ball: BallState
    ball_owner_id: Optional[str] = None

    def team(self, side: str) -> tuple[PlayerState, ...]:
        if side == "home":
            return self.home
        if side == "away":
            return self.away
        raise ValueError(f"side must be 'home' or 'away', got {side!r}")

    def side_of(self, player_id: str) -> Optional[str]:
        for side in SIDES:
            if any(p.player_id == player_id for p in self.team(side)):
                return side
        return None


@dataclass(frozen=True)
class ModelParams:
    """Model constants.

    ``literal_eq3`` measures the heading penalty against the target's absolute
    projected position instead of the defender-to-target vector; this makes
    the penalty depend on the coordinate origin. ``strict_filter`` limits the
    slow-defender filter to player columns and leaves the ball column alone.
    """

    reaction_time_s: float = 0.7
    v_max_mps: float = 5.0
    sigma: float = 0.45
    t_threshold_s: float = 1.5
    active_speed_mps: float = 2.0
    possession_radius_m: float = 1.5
    passlane_t_threshold_s: float = 1.0
    literal_eq3: bool = False
    strict_filter: bool = False

    def __post_init__(self) -> None:
        for f in fields(self):
            if f.type in ("bool", bool):
                continue
            value = getattr(self, f.name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{f.name} must be a finite positive number, got {value!r}")

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


class PressingError(Exception):
    """A frame cannot be evaluated by the model."""

    def __init__(self, message: str, frame_id: Optional[int] = None):
        self.frame_id = frame_id
        prefix = f"frame {frame_id}: " if frame_id is not None else ""
        super().__init__(prefix + message)


class EmptyTeamError(PressingError):
    pass


class NoCarrierError(PressingError):
    pass


def frozen_array(a) -> np.ndarray:
    """Read-only float64 view (copies only if needed)."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


class PressingResult(NamedTuple):
    """Per-frame defender x target matrices.

    Rows follow ``defender_ids``, columns follow ``target_ids``. In players
    mode the last target is :data:`BALL`; in passlanes mode targets are the
    receivers of each lane from the carrier. Arrays are read-only.
    """

    frame_id: int
    defending_side: str
    defender_ids: tuple[str, ...]
    target_ids: tuple[str, ...]
    tti_matrix: np.ndarray
    prob_matrix: np.ndarray
    total_pressure: np.ndarray
    carrier_id: Optional[str] = None
    timestamp_s: float = 0.0
    mode: str = "players"
    no_carrier: bool = False

    def check(self) -> None:
        """Raise ``ValueError`` if shapes or value ranges are inconsistent."""
        shape = (len(self.defender_ids), len(self.target_ids))
        if self.tti_matrix.shape != shape or self.prob_matrix.shape != shape:
            raise ValueError(f"matrix shape mismatch, expected {shape}")
        if self.total_pressure.shape != (shape[1],):
            raise ValueError("total_pressure length must match target_ids")
        for name in ("tti_matrix", "prob_matrix", "total_pressure"):
            a = getattr(self, name)
            if not np.isfinite(a).all():
                raise ValueError(f"{name} has non-finite values")
        if (self.prob_matrix < 0).any() or (self.prob_matrix > 1).any():
            raise ValueError("probabilities outside [0, 1]")
        if (self.tti_matrix < 0).any():
            raise ValueError("negative intercept time")

    def pressure_on(self, target_id: str) -> float:
        return float(self.total_pressure[self.target_ids.index(target_id)])

    def column(self, target_id: str) -> np.ndarray:
        return self.prob_matrix[:, self.target_ids.index(target_id)]


def sorted_players(players: Sequence[PlayerState]) -> list[PlayerState]:
    return sorted(players, key=lambda p: p.player_id)
