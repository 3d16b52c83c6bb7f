"""In-hand sliding simulator and reconfiguration planner for
vibration-driven parallel-gripper fingertips.

A grasped planar object hangs in the gravity plane; fingertip vibration
switches the contact from sticking to sliding, and the quasi-static slide
follows the normal of an ellipsoidal friction limit surface. On top of
the slide integrator sits a three-stage closed-loop planner (center the
object, translate to the goal, adjust orientation) with PI correction of
the pressure-center estimate, plus a Monte-Carlo evaluation harness and a
scenario-driven CLI.
"""

from ._backend import BACKEND
from .contact import ContactPatch, LimitSurface, ObjectModel
from .integrator import ContactState, MotionClass, PulseSpec
from .se2 import PoseSE2, TwistSE2, Wrench2D

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ContactPatch",
    "ContactState",
    "LimitSurface",
    "MotionClass",
    "ObjectModel",
    "PoseSE2",
    "PulseSpec",
    "TwistSE2",
    "Wrench2D",
    "__version__",
]
