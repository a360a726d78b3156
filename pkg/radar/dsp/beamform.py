from dataclasses import dataclass
from typing import Sequence

import numpy as np

from errors import InvalidArgumentError
from logger import lg
from sim.array_model import ArrayConfig, SnapshotMatrix, steering_vector


@dataclass(frozen=True)
class BeamWeights:
    """
    Веса delay-and-sum, направленные на θ_k: хранится conj(a(θ_k)),
    поэтому x = S·weights и усиление для источника с θ_k равно M (без нормировки на 1/M).
    """
    weights: np.ndarray
    look_angle: float

    @property
    def num_elements(self) -> int:
        return self.weights.shape[0]


def weights_for(cfg: ArrayConfig, look_angle: float) -> BeamWeights:
    return BeamWeights(weights=np.conj(steering_vector(cfg, look_angle)), look_angle=look_angle)


def spatial_filter(snapshot: SnapshotMatrix, beam: BeamWeights) -> np.ndarray:
    """x[n] = Σ_m S[n, m]·conj(a(θ_k)[m])."""
    if snapshot.num_elements != beam.num_elements:
        lg.warning(f"Несовпадение размерностей: {snapshot.num_elements} антенн против {beam.num_elements} весов.")
        raise InvalidArgumentError(
            f"Число антенн снимка ({snapshot.num_elements}) не совпадает с длиной весов ({beam.num_elements}).")
    return snapshot.data @ beam.weights


def array_factor(cfg: ArrayConfig, look_angle: float, theta: float) -> complex:
    """Комплексное усиление луча, направленного на look_angle, для плоской волны с направления theta."""
    return complex(steering_vector(cfg, theta) @ weights_for(cfg, look_angle).weights)


def beampattern(cfg: ArrayConfig, look_angle: float, grid: Sequence[float]) -> np.ndarray:
    """Модуль усиления луча на сетке углов; в направлении θ_k равен M."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0:
        raise InvalidArgumentError("Сетка углов для диаграммы направленности пуста.")
    beam = weights_for(cfg, look_angle)
    m = np.arange(cfg.num_elements, dtype=np.float64)
    phases = (2.0 * np.pi / cfg.wavelength) * cfg.spacing * np.outer(np.cos(grid), m)
    gains = np.abs(np.exp(1j * phases) @ beam.weights)
    return np.minimum(gains, float(cfg.num_elements))
