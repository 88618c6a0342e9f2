"""Constant-velocity Kalman filtering of boxes in (cx, cy, w, h) space"""
from typing import NamedTuple

import numpy as np

from ..core import BoundingBox
from .tracks import STATE_DIM, Track, box_to_measurement

MEASUREMENT_DIM = 4


class KalmanNoise(NamedTuple):
    """Noise settings of the box filter

    Parameters
    ----------
    dt : float
        The time step, in frames
    initial_var : float
        The initial variance of the position and size components
    initial_velocity_var : float
        The initial variance of the velocity components (large, since a new
        track's velocity is unknown)
    process_var : float
        The process noise of the position and size components. The velocity
        components get ten times this.
    measurement_var : float
        The measurement noise of every component
    """

    dt: float = 1.0
    initial_var: float = 1.0
    initial_velocity_var: float = 100.0
    process_var: float = 1e-2
    measurement_var: float = 1e-1


DEFAULT_NOISE = KalmanNoise()


def transition_matrix(dt: float = 1.0) -> np.ndarray:
    transition = np.eye(STATE_DIM)
    transition[:MEASUREMENT_DIM, MEASUREMENT_DIM:] = dt * np.eye(MEASUREMENT_DIM)
    return transition


def measurement_matrix() -> np.ndarray:
    return np.eye(MEASUREMENT_DIM, STATE_DIM)


def process_covariance(noise: KalmanNoise = DEFAULT_NOISE) -> np.ndarray:
    return np.diag([noise.process_var] * 4 + [noise.process_var * 10.0] * 4)


def initiate(
    box: BoundingBox, noise: KalmanNoise = DEFAULT_NOISE
) -> tuple[np.ndarray, np.ndarray]:
    """Start a filter on a box

    Returns
    -------
    (8,) array
        The state: the box's center and size, motionless
    (8, 8) array
        The initial covariance
    """
    state = np.concatenate((box_to_measurement(box), np.zeros(4)))
    covariance = np.diag(
        [noise.initial_var] * 4 + [noise.initial_velocity_var] * 4
    ).astype(float)
    return state, covariance


def _symmetrize(matrix: np.ndarray) -> np.ndarray:
    return (matrix + matrix.T) / 2


def _clamp_size(state: np.ndarray) -> np.ndarray:
    state = state.copy()
    state[2:4] = np.maximum(state[2:4], 1.0)
    return state


def kalman_predict(track: Track, noise: KalmanNoise = DEFAULT_NOISE) -> Track:
    """Advance a track's filter by one time step

    Parameters
    ----------
    track : Track
        The track
    noise : KalmanNoise, optional
        The noise settings

    Returns
    -------
    Track
        The track with its state and covariance advanced. The predicted box
        is its `box`.
    """
    transition = transition_matrix(noise.dt)
    state = _clamp_size(transition @ track.kstate)
    covariance = _symmetrize(
        transition @ track.covariance @ transition.T + process_covariance(noise)
    )
    return track._replace(kstate=state, covariance=covariance)


def kalman_update(
    track: Track, box: BoundingBox, noise: KalmanNoise = DEFAULT_NOISE
) -> Track:
    """Correct a track's filter with a measured box

    The covariance is updated in Joseph form and symmetrized, so it stays
    symmetric positive semidefinite.

    Parameters
    ----------
    track : Track
        The (predicted) track
    box : BoundingBox
        The associated detection's box
    noise : KalmanNoise, optional
        The noise settings

    Returns
    -------
    Track
        The track with its state and covariance corrected (the rest of the
        track is left alone)
    """
    measurement = measurement_matrix()
    measurement_noise = noise.measurement_var * np.eye(MEASUREMENT_DIM)

    innovation = box_to_measurement(box) - measurement @ track.kstate
    innovation_cov = measurement @ track.covariance @ measurement.T + measurement_noise
    # K = P Hᵀ S⁻¹, with S and P symmetric
    gain = np.linalg.solve(innovation_cov, measurement @ track.covariance).T

    state = _clamp_size(track.kstate + gain @ innovation)
    correction = np.eye(STATE_DIM) - gain @ measurement
    covariance = _symmetrize(
        correction @ track.covariance @ correction.T
        + gain @ measurement_noise @ gain.T
    )
    return track._replace(kstate=state, covariance=covariance)
