"""Ego-relative spatial relations between pairs of objects.

The relation of a *target* with respect to a *reference* is found from the
planar displacement ``target - reference`` measured against the ego car's
forward direction, counterclockwise positive, then binned into six sectors.
"""

from __future__ import annotations

import enum
import math
from typing import Sequence, Tuple

# below this planar speed (m/s) the ego heading is used as forward direction
MIN_EGO_SPEED = 0.2
# centers closer than this (m) have no defined relation
COINCIDENT_EPS = 1e-6


class DegeneratePairError(ValueError):
    """Raised when two centers coincide and no direction exists between them."""


class Relation(enum.Enum):
    # declaration order is the canonical serialization order
    FRONT = "front"
    FRONT_LEFT = "front_left"
    FRONT_RIGHT = "front_right"
    BACK_LEFT = "back_left"
    BACK_RIGHT = "back_right"
    BACK = "back"

    @property
    def phrase(self) -> str:
        """Surface form used in question text, e.g. ``front left``."""
        return self.value.replace("_", " ")

    @property
    def index(self) -> int:
        return _ORDER.index(self)

    def opposite(self) -> "Relation":
        return _OPPOSITE[self]

    @classmethod
    def parse(cls, text: str) -> "Relation":
        key = text.strip().lower().replace(" ", "_")
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown relation {text!r}") from None


_ORDER = list(Relation)
_OPPOSITE = {
    Relation.FRONT: Relation.BACK,
    Relation.BACK: Relation.FRONT,
    Relation.FRONT_LEFT: Relation.BACK_RIGHT,
    Relation.BACK_RIGHT: Relation.FRONT_LEFT,
    Relation.FRONT_RIGHT: Relation.BACK_LEFT,
    Relation.BACK_LEFT: Relation.FRONT_RIGHT,
}


def relation_from_index(i: int) -> Relation:
    return _ORDER[i]


def forward_direction(velocity: Sequence[float], heading_yaw: float) -> Tuple[float, float]:
    """Unit planar forward vector of the ego car.

    The planar part of the velocity is used when the car moves faster than
    ``MIN_EGO_SPEED``; a (nearly) stationary car falls back to its heading.
    """
    vx, vy = float(velocity[0]), float(velocity[1])
    speed = math.hypot(vx, vy)
    if speed > MIN_EGO_SPEED:
        return vx / speed, vy / speed
    return math.cos(heading_yaw), math.sin(heading_yaw)


def signed_angle(ref_center, target_center, forward) -> float:
    """Signed angle in degrees from ``forward`` to ``target - ref``.

    Counterclockwise is positive; the result lies in (-180, 180].

    Raises:
        DegeneratePairError: if the two centers coincide.
    """
    dx = float(target_center[0]) - float(ref_center[0])
    dy = float(target_center[1]) - float(ref_center[1])
    if math.hypot(dx, dy) < COINCIDENT_EPS:
        raise DegeneratePairError(
            f"degenerate pair: centers {tuple(ref_center[:2])} and {tuple(target_center[:2])} coincide"
        )
    fx, fy = float(forward[0]), float(forward[1])
    cross = fx * dy - fy * dx
    dot = fx * dx + fy * dy
    theta = math.degrees(math.atan2(cross, dot))
    if theta <= -180.0:
        theta = 180.0
    return theta


def bin_relation(theta: float) -> Relation:
    """Map a signed angle in degrees to one of the six relations.

    Each sector is open at its clockwise edge and closed at its
    counterclockwise edge; everything outside (-150, 150] is ``back``.
    """
    if -30.0 < theta <= 30.0:
        return Relation.FRONT
    if 30.0 < theta <= 90.0:
        return Relation.FRONT_LEFT
    if -90.0 < theta <= -30.0:
        return Relation.FRONT_RIGHT
    if 90.0 < theta <= 150.0:
        return Relation.BACK_LEFT
    if -150.0 < theta <= -90.0:
        return Relation.BACK_RIGHT
    return Relation.BACK


def relation_between(ref, target, ego) -> Relation:
    """Relation R such that ``target`` is to the R of ``ref``.

    ``ref`` and ``target`` are scene objects (anything with a ``box`` holding
    ``x`` and ``y``); ``ego`` supplies the forward direction.
    """
    forward = forward_direction(ego.velocity, ego.heading_yaw)
    return bin_relation(
        signed_angle((ref.box.x, ref.box.y), (target.box.x, target.box.y), forward)
    )
