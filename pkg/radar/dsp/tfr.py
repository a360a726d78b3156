from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.ndimage import map_coordinates
from scipy.signal import get_window

import config
from errors import InvalidArgumentError
from logger import lg


@dataclass(frozen=True)
class StftParams:
    window: np.ndarray
    hop: int

    def __post_init__(self):
        window = np.asarray(self.window, dtype=np.float64)
        object.__setattr__(self, 'window', window)
        if window.ndim != 1 or window.shape[0] < 2:
            raise InvalidArgumentError(f"Окно должно быть вектором длины >= 2, получено {window.shape}.")
        if not np.all(np.isfinite(window)) or not np.any(window):
            raise InvalidArgumentError("Окно должно быть конечным и не тождественно нулевым.")
        if not 1 <= self.hop <= window.shape[0]:
            raise InvalidArgumentError(f"Шаг {self.hop} вне диапазона 1..{window.shape[0]}.")

    @property
    def fft_length(self) -> int:
        return self.window.shape[0]

    @classmethod
    def create(cls, num_samples: int, window: str = config.DEFAULT_WINDOW,
               length: int = config.DEFAULT_WINDOW_LENGTH, hop: Optional[int] = None,
               min_frames: int = config.IMAGE_SIZE) -> 'StftParams':
        """Окно scipy (по умолчанию Ханна, 128) и шаг, дающий не меньше min_frames кадров."""
        if hop is None:
            hop = min(length, max(1, num_samples // min_frames))
        return cls(window=get_window(window, length), hop=hop)


@dataclass
class Spectrogram:
    """Мощность T кадров × H доплеровских бинов; ось частот центрирована (fftshift)."""
    power: np.ndarray
    frame_times: np.ndarray
    frequency_bins: np.ndarray

    def column_of(self, dft_bin: int) -> int:
        """Индекс столбца, соответствующего (знаковому) бину ДПФ."""
        h = self.frequency_bins.shape[0]
        signed = (dft_bin + h // 2) % h - h // 2
        return int(np.flatnonzero(self.frequency_bins == signed)[0])


@dataclass
class SpecImage:
    """Изображение size×size в [0, 1]: строки — доплер (0 — самый отрицательный), столбцы — время."""
    pixels: np.ndarray


def spectrogram(v: np.ndarray, params: StftParams, sample_rate: float = 1.0) -> Spectrogram:
    """
    Кадр в момент n = t·hop — квадрат модуля H-точечного ДПФ взвешенного сегмента v[n-H+1 .. n]
    (в хронологическом порядке, с нулями до начала сигнала).
    """
    v = np.asarray(v, dtype=np.complex128)
    h = params.fft_length
    if v.ndim != 1 or v.shape[0] < h:
        raise InvalidArgumentError(f"Длина сигнала {v.shape} меньше длины окна {h}.")
    padded = np.concatenate((np.zeros(h - 1, dtype=np.complex128), v))
    segments = sliding_window_view(padded, h)[::params.hop]
    spectra = np.fft.fft(segments * params.window, axis=1)
    power = np.fft.fftshift(np.abs(spectra) ** 2, axes=1)
    frame_starts = np.arange(segments.shape[0]) * params.hop
    bins = np.fft.fftshift(np.fft.fftfreq(h, d=1.0 / h)).astype(np.int64)
    return Spectrogram(power=power, frame_times=frame_starts / sample_rate, frequency_bins=bins)


def _resample_bilinear(image: np.ndarray, size: int) -> np.ndarray:
    rows = np.linspace(0.0, image.shape[0] - 1, size)
    cols = np.linspace(0.0, image.shape[1] - 1, size)
    grid_r, grid_c = np.meshgrid(rows, cols, indexing='ij')
    return map_coordinates(image, [grid_r, grid_c], order=1, mode='nearest')


def to_image(spec: Spectrogram, size: int = config.IMAGE_SIZE,
             dynamic_range_db: float = config.DB_DYNAMIC_RANGE) -> SpecImage:
    """Мощность в дБ, обрезка до dynamic_range_db ниже максимума, билинейная передискретизация, нормировка в [0, 1]."""
    if spec.power.size == 0:
        raise InvalidArgumentError("Пустая спектрограмма.")
    db = 10.0 * np.log10(spec.power + config.DB_FLOOR)
    db = np.maximum(db, db.max() - dynamic_range_db)
    resampled = _resample_bilinear(db.T, size)
    low, high = resampled.min(), resampled.max()
    if high - low <= 0.0:
        return SpecImage(pixels=np.zeros((size, size)))
    return SpecImage(pixels=(resampled - low) / (high - low))


def write_pgm(image: SpecImage, path: str):
    """8-битный PGM (P5)."""
    pixels = np.clip(np.round(image.pixels * 255.0), 0, 255).astype(np.uint8)
    header = f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode('ascii')
    with open(path, 'wb') as f:
        f.write(header + pixels.tobytes())
    lg.info(f"Изображение {pixels.shape} сохранено в PGM '{path}'.")


def write_csv(image: SpecImage, path: str):
    np.savetxt(path, image.pixels, fmt='%.9f', delimiter=',')
    lg.info(f"Пиксели изображения сохранены в CSV '{path}'.")
