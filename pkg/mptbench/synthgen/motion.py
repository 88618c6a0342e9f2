"""Jitter-and-rotation motion model"""
from typing import NamedTuple

import numpy as np


class MotionState(NamedTuple):
    """The kinematic state of one sprite

    Parameters
    ----------
    position : (float, float)
        The sprite's center, in pixels
    velocity : (float, float)
        The drift per frame, in pixels
    angle : float
        The rotation, in radians (counter-clockwise)
    angular_velocity : float
        The rotation per frame, in radians
    jitter_amplitude : float
        Each frame, each axis of the position is perturbed by a uniform draw
        from [-jitter_amplitude, jitter_amplitude]
    bounds : (float, float, float, float)
        The (min x, min y, max x, max y) region the center is confined to,
        chosen so that the sprite stays inside the frame at any rotation
    """

    position: tuple[float, float]
    velocity: tuple[float, float]
    angle: float
    angular_velocity: float
    jitter_amplitude: float
    bounds: tuple[float, float, float, float]

    @property
    def speed(self) -> float:
        return float(np.hypot(*self.velocity))


def _reflect(
    coordinate: float, velocity: float, low: float, high: float
) -> tuple[float, float]:
    if coordinate < low:
        coordinate, velocity = 2 * low - coordinate, abs(velocity)
    elif coordinate > high:
        coordinate, velocity = 2 * high - coordinate, -abs(velocity)
    # a big enough jitter can overshoot the far wall too
    return min(max(coordinate, low), high), velocity


def step_motion(state: MotionState, rng: np.random.Generator) -> MotionState:
    """Advance a sprite by one frame

    Parameters
    ----------
    state : MotionState
        The current state
    rng : Generator
        The random stream for the jitter. Two draws are always consumed,
        even when the jitter amplitude is zero.

    Returns
    -------
    MotionState
        The new state. Any velocity component that would carry the center out
        of its bounds is reflected (and the position mirrored back inside).
    """
    jitter_x, jitter_y = rng.uniform(
        -state.jitter_amplitude, state.jitter_amplitude, 2
    )
    x = state.position[0] + state.velocity[0] + jitter_x
    y = state.position[1] + state.velocity[1] + jitter_y

    min_x, min_y, max_x, max_y = state.bounds
    x, velocity_x = _reflect(x, state.velocity[0], min_x, max_x)
    y, velocity_y = _reflect(y, state.velocity[1], min_y, max_y)

    return state._replace(
        position=(float(x), float(y)),
        velocity=(float(velocity_x), float(velocity_y)),
        angle=state.angle + state.angular_velocity,
    )
