from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from dsp.beamform import spatial_filter, weights_for
from dsp.range_doppler import collapse_range, range_map, reshape_pulses, select_bins
from dsp.tfr import SpecImage, spectrogram, to_image
from errors import InvalidArgumentError, PreprocessError
from logger import lg
from pipeline.settings import PipelineConfig
from sim.array_model import SnapshotMatrix

PATH_NAMES = ("combined", "theta1", "theta2")


@dataclass
class SampleTriple:
    """Общий спектр (антенна 0, без формирования луча), спектры лучей θ₁ и θ₂ и метка."""
    combined: SpecImage
    theta1: SpecImage
    theta2: SpecImage
    label: int = -1
    range_bins: Tuple[int, int] = (0, 0)

    def stack(self) -> np.ndarray:
        return np.stack([self.combined.pixels, self.theta1.pixels, self.theta2.pixels])


def slow_time_signals(snapshot: SnapshotMatrix, cfg: PipelineConfig) -> Tuple[List[np.ndarray], Tuple[int, int]]:
    """Медленное время для трех путей с общим интервалом бинов, выбранным по общему (одноантенному) пути."""
    radar = cfg.radar
    if snapshot.num_samples != radar.num_samples or snapshot.num_elements != cfg.num_elements:
        raise InvalidArgumentError(
            f"Снимок {snapshot.data.shape} не соответствует конфигурации "
            f"({radar.num_samples}×{cfg.num_elements}).")
    array = cfg.array_config()
    vectors = [snapshot.data[:, 0]] + [spatial_filter(snapshot, weights_for(array, theta))
                                       for theta in cfg.look_angles]
    maps = [range_map(reshape_pulses(x, radar.fast_time_samples), radar.bandwidth_hz) for x in vectors]
    lower, upper = select_bins(maps[0], cfg.energy_fraction)
    return [collapse_range(rmap, lower, upper) for rmap in maps], (lower, upper)


def preprocess(snapshot: SnapshotMatrix, cfg: PipelineConfig, label: int = -1) -> SampleTriple:
    try:
        signals, bins = slow_time_signals(snapshot, cfg)
    except InvalidArgumentError as e:
        lg.warning(f"Предобработка образца с меткой {label} не удалась: {e}")
        raise PreprocessError(f"Образец с меткой {label}: {e}") from e
    params = cfg.stft_params()
    images = [to_image(spectrogram(v, params, sample_rate=cfg.radar.prf), size=cfg.image_size) for v in signals]
    return SampleTriple(combined=images[0], theta1=images[1], theta2=images[2], label=label, range_bins=bins)


def split(labels: Sequence[int], ratio: float, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Стратифицированное разбиение: в обучение попадает floor(ratio·n_c) образцов каждого класса.
    Возвращает отсортированные индексы обучающей и тестовой выборок.
    """
    if not 0.0 < ratio < 1.0:
        raise InvalidArgumentError(f"Доля обучения должна быть в (0, 1), получено {ratio}.")
    labels = np.asarray(labels, dtype=np.int64)
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for cls in np.unique(labels):
        members = rng.permutation(np.flatnonzero(labels == cls))
        n_train = int(np.floor(ratio * members.size + 1e-9))
        train_idx.extend(members[:n_train].tolist())
        test_idx.extend(members[n_train:].tolist())
    if not test_idx:
        raise InvalidArgumentError(f"Доля {ratio} не оставляет образцов для тестовой выборки.")
    return np.array(sorted(train_idx), dtype=np.int64), np.array(sorted(test_idx), dtype=np.int64)
