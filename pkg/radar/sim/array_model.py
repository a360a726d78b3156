from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from errors import InvalidArgumentError
from logger import lg

ComplexAmplitude = Union[complex, np.ndarray]


@dataclass(frozen=True)
class ArrayConfig:
    """
    Равномерная линейная приемная решетка.
    Азимут отсчитывается по конвенции cos(θ): θ = π/2 соответствует нормали к решетке.
    """
    num_elements: int
    spacing: float
    wavelength: float

    def __post_init__(self):
        if int(self.num_elements) != self.num_elements or self.num_elements < 1:
            raise InvalidArgumentError(f"Число элементов должно быть целым >= 1, получено {self.num_elements}.")
        if not (np.isfinite(self.spacing) and self.spacing > 0):
            raise InvalidArgumentError(f"Шаг решетки должен быть > 0, получено {self.spacing}.")
        if not (np.isfinite(self.wavelength) and self.wavelength > 0):
            raise InvalidArgumentError(f"Длина волны должна быть > 0, получено {self.wavelength}.")

    @classmethod
    def half_wavelength(cls, num_elements: int, wavelength: float) -> 'ArrayConfig':
        return cls(num_elements=num_elements, spacing=wavelength / 2.0, wavelength=wavelength)


@dataclass
class Scatterer:
    """Точечный отражатель: азимут, комплексная амплитуда (константа или по отсчетам) и дальность."""
    azimuth: float
    amplitude: ComplexAmplitude = 1.0 + 0.0j
    range_m: float = 0.0


@dataclass
class SnapshotMatrix:
    """Сырые данные s(n, m): N отсчетов (быстрое·медленное время) × M антенн."""
    data: np.ndarray
    sample_rate: float = 1.0

    def __post_init__(self):
        self.data = np.asarray(self.data)
        if self.data.ndim != 2:
            raise InvalidArgumentError(f"Ожидается матрица N×M, получена размерность {self.data.shape}.")
        if not np.all(np.isfinite(self.data)):
            raise InvalidArgumentError("Матрица данных содержит нечисловые значения.")

    @property
    def num_samples(self) -> int:
        return self.data.shape[0]

    @property
    def num_elements(self) -> int:
        return self.data.shape[1]


def steering_vector(cfg: ArrayConfig, theta: float) -> np.ndarray:
    """a(θ)[m] = exp(j·(2π/λ)·d·m·cos θ), m = 0..M-1."""
    if not np.isfinite(theta):
        raise InvalidArgumentError(f"Азимут должен быть конечным числом, получено {theta}.")
    m = np.arange(cfg.num_elements, dtype=np.float64)
    phase = (2.0 * np.pi / cfg.wavelength) * cfg.spacing * m * np.cos(theta)
    return np.exp(1j * phase)


def complex_gaussian_noise(shape, noise_variance: float, rng: np.random.Generator) -> np.ndarray:
    """Круговой комплексный гауссов шум с дисперсией noise_variance на элемент."""
    scale = np.sqrt(noise_variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def synthesize_snapshot(cfg: ArrayConfig, scatterers: Sequence[Scatterer], baseband: np.ndarray,
                        noise_variance: float, rng_seed: int, sample_rate: float = 1.0) -> SnapshotMatrix:
    """
    Строка n: Σ_l α_l(n)·b_l(n)·a(θ_l) + v(n).
    baseband — либо общий вектор длины N, либо матрица L×N (по строке на отражатель).
    """
    baseband = np.asarray(baseband, dtype=np.complex128)
    if baseband.ndim == 1:
        num_samples = baseband.shape[0]
    elif baseband.ndim == 2:
        if baseband.shape[0] != len(scatterers):
            raise InvalidArgumentError(
                f"Число строк baseband ({baseband.shape[0]}) не совпадает с числом отражателей ({len(scatterers)}).")
        num_samples = baseband.shape[1]
    else:
        raise InvalidArgumentError(f"baseband должен быть вектором или матрицей, получено {baseband.shape}.")
    if num_samples < 1:
        raise InvalidArgumentError("Число отсчетов N должно быть >= 1.")
    if not (np.isfinite(noise_variance) and noise_variance >= 0):
        raise InvalidArgumentError(f"Дисперсия шума должна быть >= 0, получено {noise_variance}.")

    data = np.zeros((num_samples, cfg.num_elements), dtype=np.complex128)
    for idx, scatterer in enumerate(scatterers):
        signal = baseband if baseband.ndim == 1 else baseband[idx]
        amplitude = np.asarray(scatterer.amplitude, dtype=np.complex128)
        if amplitude.ndim == 1 and amplitude.shape[0] != num_samples:
            raise InvalidArgumentError(
                f"Амплитуда отражателя {idx} имеет длину {amplitude.shape[0]}, ожидалось {num_samples}.")
        data += np.outer(amplitude * signal, steering_vector(cfg, scatterer.azimuth))

    if noise_variance > 0:
        rng = np.random.default_rng(rng_seed)
        data += complex_gaussian_noise(data.shape, noise_variance, rng)

    lg.debug(f"Синтезирован снимок {data.shape} из {len(scatterers)} отражателей, σ²={noise_variance}.")
    return SnapshotMatrix(data=data, sample_rate=sample_rate)
