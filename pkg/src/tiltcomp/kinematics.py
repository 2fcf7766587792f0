"""Rigid-body kinematics: body->navigation rotation and lever-arm transfer.

Frame conventions used throughout the package:

- Navigation frame: right-handed, z up, fixed to the ground.
- Body frame: rigidly attached to the prism/IMU assembly; coincides with the
  navigation frame at the level pose.
- Attitude: Z-Y-X Euler angles (yaw about z, then pitch about y, then roll
  about x), so ``R_b2n = Rz(yaw) @ Ry(pitch) @ Rx(roll)``.

A level sensor therefore maps body vectors to identical navigation vectors,
which is consistent with the accelerometer convention in :mod:`tiltcomp.attitude`
(a level accelerometer reads (0, 0, +g)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .attitude import Attitude

__all__ = [
    "LeverArms",
    "rotation_b_to_n",
    "prism_to_poi_body",
    "rotate_lever",
    "poi_position",
]


def _vec3(value, name: str) -> np.ndarray:
    v = np.asarray(value, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be finite, got {v}")
    return v


@dataclass(frozen=True)
class LeverArms:
    """Body-frame offsets from the IMU center to the prism and to the POI.

    Units are meters. The defaults are the rod geometry this toolkit models:
    prism mounted 75.6 mm above the IMU, POI (rod tip) 992.0 mm below it.
    """

    imu_to_prism_b: np.ndarray = field(
        default_factory=lambda: np.array([0.0, 0.0, 0.0756])
    )
    imu_to_poi_b: np.ndarray = field(
        default_factory=lambda: np.array([0.0, 0.0, -0.9920])
    )

    def __post_init__(self):
        object.__setattr__(
            self, "imu_to_prism_b", _vec3(self.imu_to_prism_b, "imu_to_prism_b")
        )
        object.__setattr__(
            self, "imu_to_poi_b", _vec3(self.imu_to_poi_b, "imu_to_poi_b")
        )


def rotation_b_to_n(att: Attitude) -> np.ndarray:
    """Rotation matrix from the body frame to the navigation frame.

    Composition order is exactly ``Rz(yaw) @ Ry(pitch) @ Rx(roll)``; the
    returned 3x3 matrix is orthonormal with determinant +1.
    """
    cr, sr = math.cos(att.roll), math.sin(att.roll)
    cp, sp = math.cos(att.pitch), math.sin(att.pitch)
    cy, sy = math.cos(att.yaw), math.sin(att.yaw)
    return np.array(
        [
            [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
            [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
            [-sp, cp * sr, cp * cr],
        ]
    )


def prism_to_poi_body(arms: LeverArms) -> np.ndarray:
    """Lever arm from the prism center to the POI, in the body frame."""
    return arms.imu_to_poi_b - arms.imu_to_prism_b


def rotate_lever(r_b2n: np.ndarray, lever_b) -> np.ndarray:
    """Express a body-frame lever arm in the navigation frame."""
    return np.asarray(r_b2n, dtype=float) @ np.asarray(lever_b, dtype=float)


def poi_position(prism_nav, att: Attitude, arms: LeverArms) -> np.ndarray:
    """Tilt-compensated POI position in the navigation frame.

    Adds the attitude-rotated prism->POI lever arm to the prism position:
    ``poi = prism + R_b2n(att) @ (imu_to_poi_b - imu_to_prism_b)``.
    """
    prism = _vec3(prism_nav, "prism_nav")
    return prism + rotation_b_to_n(att) @ prism_to_poi_body(arms)
