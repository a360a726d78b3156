from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

import config
from errors import InvalidArgumentError
from logger import lg


@dataclass
class PulseMatrix:
    """Быстрое время × импульсы (P×Q)."""
    data: np.ndarray

    @property
    def fast_time_samples(self) -> int:
        return self.data.shape[0]

    @property
    def pulses(self) -> int:
        return self.data.shape[1]

    def flatten(self) -> np.ndarray:
        return self.data.ravel(order='F')


@dataclass
class RangeMap:
    """Карта дальности r(l, q): строки — бины дальности."""
    data: np.ndarray
    bin_resolution: Optional[float] = None

    @property
    def bin_energy(self) -> np.ndarray:
        return np.sum(np.abs(self.data) ** 2, axis=1)


def reshape_pulses(x: np.ndarray, fast_time_samples: int) -> PulseMatrix:
    """Столбец q содержит x[qP .. qP+P-1]."""
    x = np.asarray(x)
    if x.ndim != 1:
        raise InvalidArgumentError(f"Ожидается вектор, получена размерность {x.shape}.")
    if fast_time_samples < 1 or x.shape[0] % fast_time_samples != 0:
        raise InvalidArgumentError(f"P={fast_time_samples} не делит длину вектора N={x.shape[0]}.")
    return PulseMatrix(data=x.reshape(-1, fast_time_samples).T)


def range_map(pulses: PulseMatrix, bandwidth_hz: Optional[float] = None) -> RangeMap:
    """Столбцовое ненормированное прямое ДПФ длины P."""
    resolution = config.SPEED_OF_LIGHT / (2.0 * bandwidth_hz) if bandwidth_hz else None
    return RangeMap(data=np.fft.fft(pulses.data, axis=0), bin_resolution=resolution)


def collapse_range(rmap: RangeMap, lower: int, upper: int) -> np.ndarray:
    """v[q] = Σ_{l=lower}^{upper} r(l, q)."""
    num_bins = rmap.data.shape[0]
    if not (0 <= lower <= upper < num_bins):
        raise InvalidArgumentError(f"Интервал бинов [{lower}, {upper}] вне 0..{num_bins - 1}.")
    return rmap.data[lower:upper + 1].sum(axis=0)


def select_bins(rmap: RangeMap, energy_fraction: float = config.DEFAULT_ENERGY_FRACTION) -> Tuple[int, int]:
    """
    Кратчайший непрерывный интервал бинов, содержащий не менее energy_fraction полной энергии.
    При равной ширине выбирается интервал с меньшим началом.
    """
    if not (0.0 < energy_fraction <= 1.0):
        raise InvalidArgumentError(f"Доля энергии должна быть в (0, 1], получено {energy_fraction}.")
    energy = rmap.bin_energy
    total = float(energy.sum())
    if total <= 0.0:
        lg.warning("Выбор бинов дальности на нулевой карте.")
        raise InvalidArgumentError("Карта дальности нулевая: невозможно выбрать бины.")
    target = energy_fraction * total * (1.0 - 1e-12)
    cumulative = np.concatenate(([0.0], np.cumsum(energy)))
    num_bins = energy.shape[0]
    for width in range(1, num_bins + 1):
        sums = cumulative[width:] - cumulative[:-width]
        hits = np.flatnonzero(sums >= target)
        if hits.size:
            lower = int(hits[0])
            lg.debug(f"Выбраны бины дальности [{lower}, {lower + width - 1}] (доля {energy_fraction}).")
            return lower, lower + width - 1
    return 0, num_bins - 1
