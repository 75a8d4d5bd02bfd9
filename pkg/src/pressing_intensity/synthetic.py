"""Seeded synthetic matches for benchmarking and tests."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .core import BALL
from .ingestion import RawEntity, RawFrameRecord

_new = tuple.__new__

HALF_LENGTH = 52.5
HALF_WIDTH = 34.0


@dataclass(frozen=True)
class SyntheticMatch:
    timestamps: np.ndarray      # (frames,)
    player_ids: tuple[str, ...]  # home ids first
    n_home: int
    positions: np.ndarray       # (frames, players, 2)
    ball: np.ndarray            # (frames, 2)
    owners: np.ndarray          # (frames,) index into player_ids

    def __len__(self) -> int:
        return len(self.timestamps)

    def checksum(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.timestamps).tobytes())
        h.update(np.ascontiguousarray(self.positions).tobytes())
        h.update(np.ascontiguousarray(self.ball).tobytes())
        h.update(np.ascontiguousarray(self.owners).tobytes())
        h.update(",".join(self.player_ids).encode())
        return h.hexdigest()

    def records(self) -> Iterator[RawFrameRecord]:
        """Position-only records; velocities are left for estimation."""
        ids = self.player_ids
        nh = self.n_home
        for k in range(len(self.timestamps)):
            pos = self.positions[k].tolist()
            ents = [_new(RawEntity, (pid, p[0], p[1], None, None)) for pid, p in zip(ids, pos)]
            bx, by = self.ball[k].tolist()
            yield RawFrameRecord(
                frame_id=k,
                timestamp_s=float(self.timestamps[k]),
                ball=RawEntity(BALL, bx, by),
                home=tuple(ents[:nh]),
                away=tuple(ents[nh:]),
                ball_owner_id=ids[int(self.owners[k])],
                line_no=k + 1,
            )


def synthetic_match(frames: int, seed: int = 0, hz: float = 25.0, per_side: int = 11) -> SyntheticMatch:
    """Random-walk players with smoothly varying velocity and a ball that follows its owner.

    Velocities follow a damped random walk capped at 8 m/s; players bounce off
    the touchlines. Possession changes hands every 2 to 6 seconds.
    """
    rng = np.random.default_rng(seed)
    dt = 1.0 / hz
    n = 2 * per_side
    ids = tuple(f"H{k + 1:02d}" for k in range(per_side)) + tuple(f"A{k + 1:02d}" for k in range(per_side))
    pos = np.empty((frames, n, 2))
    ball = np.empty((frames, 2))
    owners = np.empty(frames, dtype=np.int64)
    p = np.column_stack([rng.uniform(-HALF_LENGTH, HALF_LENGTH, n) * 0.8,
                         rng.uniform(-HALF_WIDTH, HALF_WIDTH, n) * 0.8])
    v = rng.normal(0.0, 1.5, (n, 2))
    noise = rng.normal(0.0, 1.0, (frames, n, 2))
    owner = int(rng.integers(n))
    switch = int(rng.integers(int(2 * hz), int(6 * hz)))
    offset = np.array([0.4, 0.0])
    limit = np.array([HALF_LENGTH, HALF_WIDTH])
    for k in range(frames):
        if k == switch:
            owner = int(rng.integers(n))
            switch = k + int(rng.integers(int(2 * hz), int(6 * hz)))
        v = v - 0.3 * v * dt + 3.0 * np.sqrt(dt) * noise[k]
        speed = np.hypot(v[:, 0], v[:, 1])
        v *= np.minimum(1.0, 8.0 / np.maximum(speed, 1e-12))[:, None]
        p = p + v * dt
        out = np.abs(p) > limit
        v = np.where(out, -v, v)
        p = np.clip(p, -limit, limit)
        pos[k] = p
        ball[k] = p[owner] + offset
        owners[k] = owner
    return SyntheticMatch(np.arange(frames) * dt, ids, per_side, pos, ball, owners)
