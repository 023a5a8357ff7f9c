"""Builtin compute operations for the shipped behavior files.

Computes are plain callables ``fn(view, params) -> outcome``; the engine
merges each compute state's config block into ``params``, so behavior
files tune these without any Python of their own.
"""

from .bus.wire import decode_candidate, encode_pose
from .components import select_candidate


def select_grasp(view, params):
    """Pick one pose from the "candidates" list into "pose".

    Policy and reference come from params (``selection_policy``,
    ``selection_reference``). An empty list is the "no_candidates"
    outcome rather than an error: planners are allowed to come up dry,
    and the behavior decides what that means.
    """
    docs = view["candidates"]
    if not docs:
        return "no_candidates"
    candidates = [decode_candidate(doc) for doc in docs]
    choice = select_candidate(
        candidates,
        policy=params.get("selection_policy", "best_quality"),
        reference=params.get("selection_reference"),
    )
    view["pose"] = encode_pose(choice.pose)
    return "succeeded"


def motion_endpoints(view, params):
    """Write a straight-line sweep's "start" and "goal" joint states.

    Start is the home configuration; the goal offsets every joint by
    ``approach_offset``. The simulated robot has no inverse kinematics,
    so the sweep is a fixed-shape reach that exercises the motion
    pipeline deterministically.
    """
    home = params["home_joints"]
    offset = float(params.get("approach_offset", 0.1))
    view["start"] = {name: float(v) for name, v in home.items()}
    view["goal"] = {name: float(v) + offset for name, v in home.items()}
    return "succeeded"


def route_by(view, params):
    """Return the value under the ``route_key`` userdata key as the outcome.

    Lets one behavior branch on a per-trial label; the state's declared
    outcomes must cover every value the key can take.
    """
    return str(view[params.get("route_key", "task")])


def check_equals(view, params):
    """Compare the number under ``check_key`` against ``expect``.

    Within ``tolerance`` (default exact) is "succeeded", anything else
    "mismatch". Used to verify apparatus readings after commanding them.
    """
    value = float(view[params["check_key"]])
    expect = float(params["expect"])
    tolerance = float(params.get("tolerance", 0.0))
    return "succeeded" if abs(value - expect) <= tolerance else "mismatch"


BUILTIN_COMPUTES = {
    "select_grasp": select_grasp,
    "motion_endpoints": motion_endpoints,
    "route_by": route_by,
    "check_equals": check_equals,
}
