"""Random frame factories shared by the test modules."""

from __future__ import annotations

import math

import numpy as np

from pressing_intensity.core import BallState, FrameSnapshot, PlayerState, Vec2


def random_frame(rng: np.random.Generator, n_home: int = 11, n_away: int = 11, frame_id: int = 0,
                 spread: float = 30.0, max_speed: float = 7.0, owner: str | None = "random",
                 shuffle: bool = True) -> FrameSnapshot:
    def team(prefix, n):
        players = []
        for k in range(n):
            pos = Vec2(*rng.uniform(-spread, spread, 2).tolist())
            speed = rng.uniform(0.0, max_speed)
            ang = rng.uniform(-math.pi, math.pi)
            players.append(PlayerState(f"{prefix}{k:02d}", pos, Vec2(speed * math.cos(ang), speed * math.sin(ang))))
        if shuffle:
            rng.shuffle(players)
        return tuple(players)

    home, away = team("H", n_home), team("A", n_away)
    ball = BallState(Vec2(*rng.uniform(-spread, spread, 2).tolist()), Vec2(*rng.normal(0, 5, 2).tolist()))
    owner_id = None
    if owner == "random":
        pool = [p.player_id for p in home + away]
        if pool and rng.random() < 0.8:
            owner_id = pool[int(rng.integers(len(pool)))]
    elif owner is not None:
        owner_id = owner
    return FrameSnapshot(frame_id, frame_id * 0.04, home, away, ball, owner_id)


def degenerate_frame(rng: np.random.Generator, frame_id: int = 0) -> FrameSnapshot:
    """Frames biased towards co-location, zero and colinear velocities, tiny teams."""
    n_home = int(rng.integers(1, 4))
    n_away = int(rng.integers(1, 4))
    anchors = [Vec2(0.0, 0.0), Vec2(1.0, 0.0), Vec2(-3.0, 0.0), Vec2(5.0, 5.0)]

    def vec(choices_scale):
        kind = rng.integers(5)
        if kind == 0:
            return Vec2(0.0, 0.0)
        if kind == 1:
            return anchors[int(rng.integers(len(anchors)))]
        if kind == 2:
            return Vec2(float(rng.uniform(-choices_scale, choices_scale)), 0.0)
        if kind == 3:
            x = float(rng.uniform(-choices_scale, choices_scale))
            return Vec2(x, x)
        return Vec2(*rng.uniform(-choices_scale, choices_scale, 2).tolist())

    def team(prefix, n):
        return tuple(PlayerState(f"{prefix}{k}", vec(10.0), vec(4.0)) for k in range(n))

    home, away = team("H", n_home), team("A", n_away)
    ball = BallState(vec(10.0), vec(4.0))
    pool = [p.player_id for p in home + away]
    owner = pool[int(rng.integers(len(pool)))] if rng.random() < 0.5 else None
    return FrameSnapshot(frame_id, frame_id * 0.04, home, away, ball, owner)


def transform(frame: FrameSnapshot, angle: float, shift: tuple[float, float], reflect: bool = False) -> FrameSnapshot:
    """Apply a rotation (optionally after a reflection) to positions and velocities, and a shift to positions."""
    c, s = math.cos(angle), math.sin(angle)

    def rot(v):
        x, y = v
        if reflect:
            y = -y
        return Vec2(c * x - s * y, s * x + c * y)

    def pos(v):
        r = rot(v)
        return Vec2(r.x + shift[0], r.y + shift[1])

    def player(p):
        return PlayerState(p.player_id, pos(p.position), rot(p.velocity))

    return FrameSnapshot(frame.frame_id, frame.timestamp_s, tuple(map(player, frame.home)),
                         tuple(map(player, frame.away)),
                         BallState(pos(frame.ball.position), rot(frame.ball.velocity)), frame.ball_owner_id)


def frame_line(frame_id: int, ts: float, home, away, ball=(0.0, 0.0), owner=None, velocities=True) -> str:
    """One JSONL input line from (id, x, y, vx, vy) tuples."""
    import json

    def ent(t):
        d = {"id": t[0], "x": t[1], "y": t[2]}
        if velocities and len(t) > 3:
            d["vx"], d["vy"] = t[3], t[4]
        return d

    obj = {"frame_id": frame_id, "timestamp_s": ts,
           "ball": {"x": ball[0], "y": ball[1], **({"vx": ball[2], "vy": ball[3]} if len(ball) > 2 else {})},
           "home": [ent(t) for t in home], "away": [ent(t) for t in away]}
    if owner is not None:
        obj["ball_owner_id"] = owner
    return json.dumps(obj)
