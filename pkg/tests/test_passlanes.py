import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import random_frame
from pressing_intensity.core import BallState, FrameSnapshot, ModelParams, NoCarrierError, PlayerState, Vec2
from pressing_intensity.passlanes import (
    PassLane,
    build_pass_lanes,
    closest_point_on_segment,
    closest_point_on_segment_array,
    lane_pressing,
    passlane_pressing_matrices,
    passlane_pressing_matrix,
)
from pressing_intensity.pressure import intercept_probability
from pressing_intensity.kinematics import intercept_time

P = ModelParams()
ZERO = Vec2(0.0, 0.0)
coord = st.floats(min_value=-60, max_value=60, allow_nan=False)
points = st.builds(Vec2, coord, coord)


def player(pid, x, y, vx=0.0, vy=0.0):
    return PlayerState(pid, Vec2(x, y), Vec2(vx, vy))


def test_closest_point_examples():
    a, b = Vec2(0.0, 0.0), Vec2(10.0, 0.0)
    assert closest_point_on_segment(Vec2(5.0, 3.0), a, b) == (Vec2(5.0, 0.0), 0.5)
    assert closest_point_on_segment(Vec2(-4.0, 2.0), a, b) == (Vec2(0.0, 0.0), 0.0)
    assert closest_point_on_segment(Vec2(14.0, -2.0), a, b) == (Vec2(10.0, 0.0), 1.0)
    assert closest_point_on_segment(Vec2(1.0, 1.0), a, a) == (a, 0.0)


def dense_min(p, a, b, n=100_001):
    s = np.linspace(0.0, 1.0, n)
    pts = np.array(a) + s[:, None] * (np.array(b) - np.array(a))
    return np.hypot(*(pts - np.array(p)).T).min()


@settings(max_examples=100)
@given(points, points, points)
def test_closest_point_beats_dense_sampling(p, a, b):
    q, t = closest_point_on_segment(p, a, b)
    assert 0.0 <= t <= 1.0
    assert np.hypot(q.x - p.x, q.y - p.y) <= dense_min(p, a, b) + 1e-6


def test_array_matches_scalar(rng):
    p = rng.uniform(-50, 50, (200, 2))
    a = rng.uniform(-50, 50, (200, 2))
    b = rng.uniform(-50, 50, (200, 2))
    b[:10] = a[:10]
    pts, ts = closest_point_on_segment_array(p, a, b)
    for k in range(200):
        q, t = closest_point_on_segment(Vec2(*p[k]), Vec2(*a[k]), Vec2(*b[k]))
        assert ts[k] == t
        assert pts[k] == pytest.approx(q, abs=1e-12)


def lane_frame(owner="A1"):
    away = [player(f"A{k}", float(k), 5.0) for k in range(1, 12)]
    home = [player("H1", 3.0, 0.0, 3.0, 0.0), player("H2", 0.0, 0.0, 0.5, 0.0)]
    return FrameSnapshot(7, 0.28, tuple(home), tuple(away), BallState(Vec2(1.0, 5.0), ZERO), owner)


def test_lane_count_and_order():
    lanes = build_pass_lanes(lane_frame(), "away", "A1")
    assert len(lanes) == 10
    assert [ln.receiver_id for ln in lanes] == sorted(f"A{k}" for k in range(2, 12))


def test_degenerate_lane_dropped():
    f = lane_frame()
    away = list(f.away)
    away[1] = player("A2", 1.0, 5.0)  # on top of the carrier
    g = FrameSnapshot(f.frame_id, f.timestamp_s, f.home, tuple(away), f.ball, f.ball_owner_id)
    lanes = build_pass_lanes(g, "away", "A1")
    assert "A2" not in [ln.receiver_id for ln in lanes]
    assert len(lanes) == 9


def test_missing_carrier_raises():
    with pytest.raises(NoCarrierError):
        build_pass_lanes(lane_frame(), "away", "H1")
    with pytest.raises(NoCarrierError):
        passlane_pressing_matrix(lane_frame(owner="H1"), "home", P)


def test_no_carrier_frames_marked():
    (r,) = passlane_pressing_matrices([lane_frame(owner="H1")], "home", P)
    assert r.no_carrier and r.mode == "passlanes" and r.prob_matrix.shape == (0, 0)


def test_lane_matrix_uses_lane_threshold_and_filter():
    r = passlane_pressing_matrix(lane_frame(), "home", P)
    assert r.mode == "passlanes" and r.carrier_id == "A1"
    assert r.prob_matrix.shape == (2, 10)
    # H2 is below the active speed
    assert np.all(r.prob_matrix[1] == 0.0)
    j = r.target_ids.index("A2")
    h1 = lane_frame().home[0]
    # lane A1 -> A2 runs along y=5 from x=1 to x=2; closest point to H1 is the terminus
    tti = intercept_time(h1, Vec2(2.0, 5.0), ZERO, P)
    assert r.tti_matrix[0, j] == pytest.approx(tti, abs=1e-12)
    assert r.prob_matrix[0, j] == pytest.approx(intercept_probability(tti, P, 1.0), abs=1e-15)


def test_lane_point_velocity_is_interpolated():
    d = player("H1", 5.0, 3.0, 3.0, 0.0)
    lane = PassLane("A2", Vec2(0.0, 0.0), Vec2(10.0, 0.0), Vec2(2.0, 0.0), Vec2(0.0, 2.0))
    r = lane_pressing([d], [lane], P)
    want = intercept_time(d, Vec2(5.0, 0.0), Vec2(1.0, 1.0), P)
    assert r.tti_matrix[0, 0] == pytest.approx(want, abs=1e-12)


def test_consistency_with_player_pressure_on_degenerate_lane():
    # a zero-length lane at the receiver reduces to pressure on that receiver
    d = player("H1", 4.0, 1.0, 2.5, -1.0)
    mate = player("A2", 10.0, -3.0, 1.0, 2.0)
    lane = PassLane("A2", mate.position, mate.position, mate.velocity, mate.velocity)
    r = lane_pressing([d], [lane], ModelParams(passlane_t_threshold_s=1.5))
    tti = intercept_time(d, mate.position, mate.velocity, P)
    assert r.tti_matrix[0, 0] == pytest.approx(tti, abs=1e-12)
    assert r.prob_matrix[0, 0] == pytest.approx(intercept_probability(tti, P), abs=1e-15)


def test_random_frames_are_finite(rng):
    for k in range(100):
        f = random_frame(rng, frame_id=k, owner="random")
        for r in passlane_pressing_matrices([f], "home", P):
            r.check()
