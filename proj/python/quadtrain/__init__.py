"""Quadruped gait-policy workbench: kinematics, gait, simulation, ARS training."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401

VARIANTS = ("imu", "imu_contacts", "imu_force")
