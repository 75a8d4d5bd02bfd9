"""Per-frame pressing intensity from football tracking data."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    BALL,
    BallState,
    EmptyTeamError,
    FrameSnapshot,
    ModelParams,
    NoCarrierError,
    PlayerState,
    PressingError,
    PressingResult,
    Vec2,
    vec_add,
    vec_dot,
    vec_norm,
    vec_scale,
    vec_sub,
)
from .kinematics import angle_penalty, intercept_time, intercept_time_core  # noqa: E402
from .passlanes import (  # noqa: E402
    PassLane,
    build_pass_lanes,
    closest_point_on_segment,
    passlane_pressing_matrix,
)
from .pressure import (  # noqa: E402
    identify_ball_carrier,
    intercept_probability,
    pressing_matrix,
    total_pressure,
)
