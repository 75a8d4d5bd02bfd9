"""Reading tracking frames from JSON Lines, filling in velocities, sanity checks.

Input is one JSON object per line::

    {"frame_id": 0, "timestamp_s": 0.0,
     "ball": {"x": 0.0, "y": 0.0},
     "home": [{"id": "H1", "x": -10.0, "y": 3.0, "vx": 1.0, "vy": 0.0}, ...],
     "away": [...],
     "ball_owner_id": "H1"}

Velocities (``vx``/``vy``) and ``ball_owner_id`` are optional; unknown keys
are ignored.
"""

from __future__ import annotations

import json
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Optional

from .core import BALL, BallState, FrameSnapshot, PlayerState, Vec2

log = logging.getLogger(__name__)

_new = tuple.__new__


class FrameParseError(ValueError):
    def __init__(self, line_no: int, path: str, message: str):
        self.line_no = line_no
        self.path = path
        super().__init__(f"line {line_no}: {path}: {message}" if path else f"line {line_no}: {message}")


class VelocityEstimationError(ValueError):
    pass


class RawEntity(NamedTuple):
    entity_id: str
    x: float
    y: float
    vx: Optional[float] = None
    vy: Optional[float] = None

    @property
    def has_velocity(self) -> bool:
        return self.vx is not None


@dataclass(frozen=True)
class RawFrameRecord:
    frame_id: int
    timestamp_s: float
    ball: RawEntity
    home: tuple[RawEntity, ...]
    away: tuple[RawEntity, ...]
    ball_owner_id: Optional[str] = None
    line_no: int = field(default=0, compare=False)

    def entities(self) -> Iterator[RawEntity]:
        yield from self.home
        yield from self.away
        yield self.ball


@dataclass(frozen=True)
class FrameWarning:
    frame_id: int
    entity_id: str
    kind: str
    value: float
    message: str = ""

    def __str__(self) -> str:
        return f"frame {self.frame_id}: {self.entity_id}: {self.kind} {self.value:g} {self.message}".rstrip()


def _number(obj: dict, key: str, path: str, line_no: int, required: bool = True) -> Optional[float]:
    if key not in obj:
        if required:
            raise FrameParseError(line_no, f"{path}.{key}" if path else key, "missing required field")
        return None
    value = obj[key]
    where = f"{path}.{key}" if path else key
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FrameParseError(line_no, where, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise FrameParseError(line_no, where, f"non-finite value {value!r}")
    return value


def _entity(obj, path: str, line_no: int, entity_id: Optional[str] = None) -> RawEntity:
    if not isinstance(obj, dict):
        raise FrameParseError(line_no, path, "expected an object")
    if entity_id is None:
        entity_id = obj.get("id")
        if not isinstance(entity_id, str) or not entity_id:
            raise FrameParseError(line_no, f"{path}.id", "player id must be a nonempty string")
        if entity_id == BALL:
            raise FrameParseError(line_no, f"{path}.id", f"{BALL!r} is reserved for the ball")
    x = _number(obj, "x", path, line_no)
    y = _number(obj, "y", path, line_no)
    vx = _number(obj, "vx", path, line_no, required=False)
    vy = _number(obj, "vy", path, line_no, required=False)
    if (vx is None) != (vy is None):
        raise FrameParseError(line_no, path, "vx and vy must be given together")
    return RawEntity(entity_id, x, y, vx, vy)


def parse_record(line: str, line_no: int = 1) -> RawFrameRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise FrameParseError(line_no, "", f"malformed JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise FrameParseError(line_no, "", "expected a JSON object")
    frame_id = obj.get("frame_id")
    if isinstance(frame_id, bool) or not isinstance(frame_id, int) or frame_id < 0:
        raise FrameParseError(line_no, "frame_id", f"expected a non-negative integer, got {frame_id!r}")
    timestamp = _number(obj, "timestamp_s", "", line_no)
    if "ball" not in obj:
        raise FrameParseError(line_no, "ball", "missing required field")
    ball = _entity(obj["ball"], "ball", line_no, entity_id=BALL)
    teams = {}
    seen: set[str] = set()
    for side in ("home", "away"):
        players = obj.get(side)
        if not isinstance(players, list):
            raise FrameParseError(line_no, side, "missing required list of players")
        parsed = []
        for k, p in enumerate(players):
            ent = _entity(p, f"{side}[{k}]", line_no)
            if ent.entity_id in seen:
                raise FrameParseError(line_no, f"{side}[{k}].id", f"duplicate player id {ent.entity_id!r}")
            seen.add(ent.entity_id)
            parsed.append(ent)
        teams[side] = tuple(parsed)
    owner = obj.get("ball_owner_id")
    if owner is not None:
        if not isinstance(owner, str) or owner not in seen:
            raise FrameParseError(line_no, "ball_owner_id", f"unknown player {owner!r}")
    return RawFrameRecord(frame_id, timestamp, ball, teams["home"], teams["away"], owner, line_no)


def parse_frames(lines: Iterable[str], strict: bool = True,
                 errors: Optional[list] = None) -> Iterator[RawFrameRecord]:
    """Parse JSON Lines into records, in file order.

    In strict mode the first bad line raises :class:`FrameParseError`.
    Otherwise bad lines are skipped, logged and appended to ``errors`` when a
    list is supplied. Blank lines are ignored.
    """
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            yield parse_record(line, line_no)
        except FrameParseError as exc:
            if strict:
                raise
            log.warning("skipping %s", exc)
            if errors is not None:
                errors.append(exc)


def _entity_dict(ent: RawEntity, with_id: bool = True) -> dict:
    d = {"id": ent.entity_id} if with_id else {}
    d["x"] = ent.x
    d["y"] = ent.y
    if ent.has_velocity:
        d["vx"] = ent.vx
        d["vy"] = ent.vy
    return d


def record_to_dict(rec: RawFrameRecord) -> dict:
    d = {
        "frame_id": rec.frame_id,
        "timestamp_s": rec.timestamp_s,
        "ball": _entity_dict(rec.ball, with_id=False),
        "home": [_entity_dict(e) for e in rec.home],
        "away": [_entity_dict(e) for e in rec.away],
    }
    if rec.ball_owner_id is not None:
        d["ball_owner_id"] = rec.ball_owner_id
    return d


def serialize_record(rec: RawFrameRecord) -> str:
    return json.dumps(record_to_dict(rec), separators=(",", ":"))


def frame_to_record(frame: FrameSnapshot) -> RawFrameRecord:
    def ent(p: PlayerState) -> RawEntity:
        return RawEntity(p.player_id, p.position.x, p.position.y, p.velocity.x, p.velocity.y)

    ball = RawEntity(BALL, frame.ball.position.x, frame.ball.position.y,
                     frame.ball.velocity.x, frame.ball.velocity.y)
    return RawFrameRecord(frame.frame_id, frame.timestamp_s, ball,
                          tuple(ent(p) for p in frame.home), tuple(ent(p) for p in frame.away),
                          frame.ball_owner_id)


def _difference_velocities(rec: RawFrameRecord, pos: dict, before, after) -> dict:
    """Per-entity velocity from neighbouring frames; ``None`` where no neighbour has the entity."""
    out = {}
    if before is not None:
        prev_rec, prev_pos = before
        dt_prev = rec.timestamp_s - prev_rec.timestamp_s
    else:
        prev_pos = {}
    if after is not None:
        next_rec, next_pos = after
        dt_next = next_rec.timestamp_s - rec.timestamp_s
    else:
        next_pos = {}
    if before is not None and after is not None:
        dt_both = next_rec.timestamp_s - prev_rec.timestamp_s
    for eid, here in pos.items():
        prev = prev_pos.get(eid)
        nxt = next_pos.get(eid)
        if prev is not None and nxt is not None:
            out[eid] = ((nxt[0] - prev[0]) / dt_both, (nxt[1] - prev[1]) / dt_both)
        elif nxt is not None:
            out[eid] = ((nxt[0] - here[0]) / dt_next, (nxt[1] - here[1]) / dt_next)
        elif prev is not None:
            out[eid] = ((here[0] - prev[0]) / dt_prev, (here[1] - prev[1]) / dt_prev)
        else:
            out[eid] = None
    return out


def estimate_velocities(records: Iterable[RawFrameRecord], smoothing_window: int = 1,
                        warnings: Optional[list] = None) -> Iterator[FrameSnapshot]:
    """Turn raw records into snapshots, differencing positions where velocity is absent.

    Interior frames use central differences and stream boundaries one-sided
    ones. With ``smoothing_window`` > 1 each estimated velocity is the mean of
    the difference velocities within the centred window. Explicit velocities
    pass through unchanged. An entity with no neighbouring observation gets a
    zero velocity and a warning.

    Works as a stream: only ``smoothing_window + 2`` records are held.
    """
    if not isinstance(smoothing_window, int) or smoothing_window < 1 or smoothing_window % 2 == 0:
        raise ValueError(f"smoothing_window must be an odd integer >= 1, got {smoothing_window!r}")
    half = smoothing_window // 2
    frames: deque = deque()      # (record, positions) for indices base .. base+len-1
    raws: dict[int, dict] = {}   # absolute index -> difference velocities
    base = 0
    count = 0

    def raw(k: int) -> dict:
        vel = raws.get(k)
        if vel is None:
            rec, pos = frames[k - base]
            before = frames[k - base - 1] if k - 1 >= base else None
            after = frames[k - base + 1] if k + 1 < base + len(frames) else None
            vel = raws[k] = _difference_velocities(rec, pos, before, after)
        return vel

    def emit(k: int) -> FrameSnapshot:
        rec = frames[k - base][0]
        if count == 1 and any(not e.has_velocity for e in rec.entities()):
            raise VelocityEstimationError(
                f"frame {rec.frame_id} (line {rec.line_no}): cannot estimate velocities "
                f"from a single-frame stream")
        centre = raw(k)
        window = [raw(j) for j in range(max(k - half, 0), min(k + half + 1, base + len(frames)))]

        def velocity(ent: RawEntity) -> Vec2:
            if ent[3] is not None:
                return _new(Vec2, (ent[3], ent[4]))
            v = centre[ent[0]]
            if v is None:
                msg = "no neighbouring observation; velocity set to 0"
                log.warning("frame %s: %s: %s", rec.frame_id, ent.entity_id, msg)
                if warnings is not None:
                    warnings.append(FrameWarning(rec.frame_id, ent.entity_id, "velocity_gap", 0.0, msg))
                return Vec2(0.0, 0.0)
            if half == 0:
                return _new(Vec2, v)
            vals = [w[ent.entity_id] for w in window if w.get(ent.entity_id) is not None]
            n = len(vals)
            return Vec2(sum(v[0] for v in vals) / n, sum(v[1] for v in vals) / n)

        return FrameSnapshot(
            frame_id=rec.frame_id,
            timestamp_s=rec.timestamp_s,
            home=tuple([_new(PlayerState, (e[0], _new(Vec2, (e[1], e[2])), velocity(e))) for e in rec.home]),
            away=tuple([_new(PlayerState, (e[0], _new(Vec2, (e[1], e[2])), velocity(e))) for e in rec.away]),
            ball=BallState(Vec2(rec.ball.x, rec.ball.y), velocity(rec.ball)),
            ball_owner_id=rec.ball_owner_id,
        )

    last = None
    emitted = 0
    for rec in records:
        if last is not None:
            if rec.timestamp_s <= last.timestamp_s:
                raise VelocityEstimationError(
                    f"frame {rec.frame_id} (line {rec.line_no}): timestamp {rec.timestamp_s} "
                    f"does not increase (previous {last.timestamp_s})")
            if rec.frame_id <= last.frame_id:
                raise VelocityEstimationError(
                    f"frame {rec.frame_id} (line {rec.line_no}): frame_id does not increase "
                    f"(previous {last.frame_id})")
        last = rec
        pos = {e[0]: (e[1], e[2]) for e in rec.home}
        pos.update((e[0], (e[1], e[2])) for e in rec.away)
        pos[BALL] = (rec.ball.x, rec.ball.y)
        frames.append((rec, pos))
        count += 1
        while emitted + half + 1 < count:
            yield emit(emitted)
            emitted += 1
            while base < emitted - half - 1:
                frames.popleft()
                raws.pop(base, None)
                base += 1
    while emitted < count:
        yield emit(emitted)
        emitted += 1


@dataclass(frozen=True)
class ValidationLimits:
    max_speed_mps: float = 12.0
    pitch_halflength_m: float = 60.0
    pitch_halfwidth_m: float = 40.0


def validate_frame(frame: FrameSnapshot, limits: ValidationLimits = ValidationLimits()) -> list[FrameWarning]:
    warnings = []
    entities = [(p.player_id, p.position, p.velocity) for p in frame.home + frame.away]
    entities.append((BALL, frame.ball.position, frame.ball.velocity))
    for eid, pos, vel in entities:
        speed = math.hypot(vel.x, vel.y)
        if eid != BALL and speed > limits.max_speed_mps:
            warnings.append(FrameWarning(frame.frame_id, eid, "speed", speed,
                                         f"exceeds {limits.max_speed_mps:g} m/s"))
        if abs(pos.x) > limits.pitch_halflength_m:
            warnings.append(FrameWarning(frame.frame_id, eid, "bounds_x", pos.x,
                                         f"outside +/-{limits.pitch_halflength_m:g} m"))
        if abs(pos.y) > limits.pitch_halfwidth_m:
            warnings.append(FrameWarning(frame.frame_id, eid, "bounds_y", pos.y,
                                         f"outside +/-{limits.pitch_halfwidth_m:g} m"))
    return warnings
