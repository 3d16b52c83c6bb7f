"""Quasi-static sliding rollouts under vibration pulses.

Vibration acts as a binary friction switch: with vibration off the object
sticks to the finger (relative pose frozen); with vibration on it slides,
and each arc step moves it along the limit-surface twist direction scaled
by the balance-selected surface size k. Pulse duration is modeled as a
step count; there is no intrinsic timescale in the quasi-static regime.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from . import _backend
from .contact import ContactPatch, ObjectModel
from .se2 import PoseSE2, TwistSE2, transform_point

DEFAULT_DS = 1e-3
REST_EPS = 1e-5
NEAR_ROTATION_THRESHOLD = 0.5


class ObjectDroppedError(RuntimeError):
    """The pressure center left the object footprint during a slide."""

    def __init__(self, step_index: int):
        super().__init__(f"object dropped at step {step_index}")
        self.step_index = step_index


class MotionClass(enum.Enum):
    TRANSLATIONAL = "translational"
    NEAR_ROTATIONAL = "near_rotational"


@dataclass(frozen=True)
class ContactState:
    """Simulated plant state: finger and object world poses plus the patch.

    While vibration_on is false the relative finger-object pose is
    invariant (sticking contact).
    """

    finger_pose_w: PoseSE2
    object_pose_w: PoseSE2
    patch: ContactPatch
    vibration_on: bool = False


@dataclass(frozen=True)
class PulseSpec:
    """One vibration pulse: arc step size and number of steps."""

    step_ds: float = DEFAULT_DS
    n_steps: int = 1

    def __post_init__(self):
        if self.step_ds <= 0.0:
            raise ValueError(f"step_ds must be positive, got {self.step_ds}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be at least 1, got {self.n_steps}")


@dataclass(frozen=True)
class TrajectoryPoint:
    """Per-step rollout record; twist is None for a sticking (no-op) pulse."""

    step_index: int
    finger_pose: PoseSE2
    object_pose: PoseSE2
    twist: TwistSE2 | None
    motion_class: MotionClass | None
    k: float


@dataclass(frozen=True)
class RolloutResult:
    state: ContactState
    points: list[TrajectoryPoint]
    converged: bool
    n_steps: int


def pressure_center_world(state: ContactState) -> tuple[float, float]:
    """World position of the pressure center (rigid on the finger)."""
    return transform_point(state.finger_pose_w, state.patch.pressure_center_offset)


def com_world(object_pose: PoseSE2, obj: ObjectModel) -> tuple[float, float]:
    """World position of the object's center of mass."""
    return transform_point(object_pose, obj.com_offset)


def lever_x(state: ContactState, obj: ObjectModel) -> float:
    """Horizontal offset x_c of the center of mass from the pressure center."""
    return com_world(state.object_pose_w, obj)[0] - pressure_center_world(state)[0]


def classify_motion(twist: TwistSE2, torque_arm: float, rho: float = NEAR_ROTATION_THRESHOLD) -> MotionClass:
    """Label a unit twist by its dominant character.

    Near-rotational when the rotation rate, weighted by the patch torque
    arm r0*c, exceeds rho times the translation speed.
    """
    lin = math.hypot(twist.vx, twist.vy)
    if abs(twist.omega) * torque_arm > rho * lin:
        return MotionClass.NEAR_ROTATIONAL
    return MotionClass.TRANSLATIONAL


def _run_kernel(state: ContactState, obj: ObjectModel, ds: float, n_max: int,
                stop_eps: float, record: bool):
    f = state.finger_pose_w
    o = state.object_pose_w
    pdx, pdy = state.patch.pressure_center_offset
    cdx, cdy = obj.com_offset
    return _backend.rollout_core(
        o.x, o.y, o.theta,
        f.x, f.y, f.theta,
        pdx, pdy,
        cdx, cdy,
        obj.extents[0] / 2.0, obj.extents[1] / 2.0,
        obj.mass, obj.gravity, state.patch.torque_arm,
        ds, n_max, stop_eps, record,
    )


def _points_from_records(state: ContactState, records, start_index: int = 1) -> list[TrajectoryPoint]:
    arm = state.patch.torque_arm
    points = []
    for j, (ox, oy, oth, uy, uw, k, _xc) in enumerate(records):
        twist = TwistSE2(0.0, uy, uw)
        points.append(TrajectoryPoint(
            step_index=start_index + j,
            finger_pose=state.finger_pose_w,
            object_pose=PoseSE2(ox, oy, oth),
            twist=twist,
            motion_class=classify_motion(twist, arm),
            k=k,
        ))
    return points


def slide_step(state: ContactState, obj: ObjectModel, ds: float = DEFAULT_DS) -> ContactState:
    """Advance one sliding step; requires vibration on. Finger pose is fixed."""
    if not state.vibration_on:
        raise ValueError("slide_step requires vibration_on (sticking contact otherwise)")
    if ds <= 0.0:
        raise ValueError(f"ds must be positive, got {ds}")
    status, n_done, ox, oy, oth, _ = _run_kernel(state, obj, ds, 1, -1.0, False)
    if status == _backend.STATUS_DROPPED:
        raise ObjectDroppedError(n_done)
    return replace(state, object_pose_w=PoseSE2(ox, oy, oth))


def vibration_pulse(state: ContactState, obj: ObjectModel,
                    pulse: PulseSpec) -> tuple[ContactState, list[TrajectoryPoint]]:
    """Apply one pulse and record the per-step trajectory.

    With vibration off the state is returned unchanged with a single
    sticking record (the relative pose is bit-identical by construction).
    """
    if not state.vibration_on:
        point = TrajectoryPoint(0, state.finger_pose_w, state.object_pose_w, None, None, 0.0)
        return state, [point]
    status, n_done, ox, oy, oth, records = _run_kernel(
        state, obj, pulse.step_ds, pulse.n_steps, -1.0, True)
    if status == _backend.STATUS_DROPPED:
        raise ObjectDroppedError(n_done)
    new_state = replace(state, object_pose_w=PoseSE2(ox, oy, oth))
    return new_state, _points_from_records(state, records)


def rollout_to_rest(state: ContactState, obj: ObjectModel, ds: float = DEFAULT_DS,
                    max_steps: int = 200_000, eps_rest: float = REST_EPS,
                    record: bool = True) -> RolloutResult:
    """Slide until the center of mass hangs aligned below the contact.

    Convergence means |x_c| < eps_rest with the center of mass below the
    pressure center; that is the stable branch of the gravity alignment.
    Starting above the contact, alignment errors grow instead and the
    rollout reports non-convergence at max_steps.
    """
    if not state.vibration_on:
        raise ValueError("rollout_to_rest requires vibration_on")
    status, n_done, ox, oy, oth, records = _run_kernel(
        state, obj, ds, max_steps, eps_rest, record)
    if status == _backend.STATUS_DROPPED:
        raise ObjectDroppedError(n_done)
    final = replace(state, object_pose_w=PoseSE2(ox, oy, oth))
    converged = status == _backend.STATUS_REST
    if not converged:
        # the stop test runs before each step, so a rollout that converges
        # exactly on its last step is only visible here
        pc = pressure_center_world(final)
        cx, cy = com_world(final.object_pose_w, obj)
        converged = cy < pc[1] and abs(cx - pc[0]) < eps_rest
    return RolloutResult(final, _points_from_records(state, records), converged, n_done)
