"""Small 2D geometry helpers shared by the simulator, bots and renderer."""

from __future__ import annotations

import math

import numpy as np


def wrap_deg(angle: float) -> float:
    """Wrap an angle difference into (-180, 180]."""
    a = (angle + 180.0) % 360.0 - 180.0
    return 180.0 if a == -180.0 else a


def norm_yaw(yaw: float) -> float:
    """Normalize an absolute yaw into [0, 360)."""
    return yaw % 360.0


def basis(yaw_deg: float) -> tuple[np.ndarray, np.ndarray]:
    """Forward and right unit vectors for a yaw in degrees.

    World axes: x east, y south (matches grid row order). Yaw 0 faces +x,
    positive yaw (mouse right) turns toward +y, so right of yaw 0 is +y.
    """
    r = math.radians(yaw_deg)
    fwd = np.array([math.cos(r), math.sin(r)])
    right = np.array([-math.sin(r), math.cos(r)])
    return fwd, right


def bearing_deg(src: np.ndarray, dst: np.ndarray) -> float:
    """Absolute yaw from src toward dst, in [0, 360)."""
    d = dst - src
    return math.degrees(math.atan2(d[1], d[0])) % 360.0


def ray_circle(origin: np.ndarray, direction: np.ndarray, center: np.ndarray, radius: float) -> float | None:
    """Distance along a unit-direction ray to a circle, or None if missed."""
    oc = center - origin
    b = float(oc @ direction)
    if b <= 0.0:
        return None
    h2 = float(oc @ oc) - b * b
    r2 = radius * radius
    if h2 > r2:
        return None
    return b - math.sqrt(r2 - h2)
