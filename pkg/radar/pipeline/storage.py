import os
import struct
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from errors import RadarError, StorageError
from logger import lg
from sim.array_model import ArrayConfig, SnapshotMatrix
from sim.scene import CLASS_NAMES, RadarParams
from utils import read_key_values, write_key_values

SAMPLE_MAGIC = b"RDSS"
MANIFEST_NAME = "manifest"
FEATURES_NAME = "features"
FORMAT_VERSION = 1
_HEADER = struct.Struct('<4sII')


def write_sample(path: str, snapshot: SnapshotMatrix):
    """Заголовок RDSS, u32 N, u32 M, затем N·M пар float32 (re, im) построчно, little-endian."""
    n, m = snapshot.data.shape
    payload = np.ascontiguousarray(snapshot.data, dtype='<c8').tobytes()
    with open(path, 'wb') as f:
        f.write(_HEADER.pack(SAMPLE_MAGIC, n, m) + payload)


def read_sample(path: str, sample_rate: float = 1.0) -> SnapshotMatrix:
    try:
        with open(path, 'rb') as f:
            blob = f.read()
    except OSError as e:
        raise StorageError(f"Не удалось прочитать образец '{path}': {e}") from e
    if len(blob) < _HEADER.size:
        raise StorageError(f"Файл образца '{path}' короче заголовка.")
    magic, n, m = _HEADER.unpack_from(blob)
    if magic != SAMPLE_MAGIC:
        raise StorageError(f"'{path}' не является файлом образца (magic={magic!r}).")
    expected = _HEADER.size + n * m * 8
    if len(blob) != expected:
        raise StorageError(f"Размер '{path}' ({len(blob)} байт) не совпадает с заголовком ({expected}).")
    data = np.frombuffer(blob, dtype='<c8', offset=_HEADER.size).reshape(n, m).astype(np.complex128)
    return SnapshotMatrix(data=data, sample_rate=sample_rate)


@dataclass(frozen=True)
class DatasetEntry:
    index: int
    seed: int
    label: int
    pair: int
    path: str


@dataclass
class DatasetManifest:
    radar: RadarParams
    array: ArrayConfig
    entries: List[DatasetEntry]


def write_manifest(directory: str, manifest: DatasetManifest):
    radar, array = manifest.radar, manifest.array
    values = {
        "format_version": FORMAT_VERSION,
        "carrier_hz": repr(radar.carrier_hz),
        "bandwidth_hz": repr(radar.bandwidth_hz),
        "pri_s": repr(radar.pri_s),
        "adc_rate_hz": repr(radar.adc_rate_hz),
        "observation_s": repr(radar.observation_s),
        "fast_time_samples": radar.fast_time_samples,
        "pulses": radar.pulses,
        "num_samples": radar.num_samples,
        "num_elements": array.num_elements,
        "spacing_m": repr(array.spacing),
        "wavelength_m": repr(array.wavelength),
        "num_classes": len(CLASS_NAMES),
    }
    values.update({f"label_{k}": name for k, name in enumerate(CLASS_NAMES)})
    values["sample_count"] = len(manifest.entries)
    values.update({f"sample_{e.index:05d}": f"{e.seed},{e.label},{e.pair},{e.path}" for e in manifest.entries})
    write_key_values(os.path.join(directory, MANIFEST_NAME), values)
    lg.info(f"Манифест набора записан: {len(manifest.entries)} образцов в '{directory}'.")


def read_manifest(directory: str) -> DatasetManifest:
    path = os.path.join(directory, MANIFEST_NAME)
    values = read_key_values(path)
    try:
        if int(values["format_version"]) != FORMAT_VERSION:
            raise StorageError(f"Неподдерживаемая версия манифеста {values['format_version']} в '{path}'.")
        radar = RadarParams(carrier_hz=float(values["carrier_hz"]), bandwidth_hz=float(values["bandwidth_hz"]),
                            pri_s=float(values["pri_s"]), adc_rate_hz=float(values["adc_rate_hz"]),
                            observation_s=float(values["observation_s"]))
        array = ArrayConfig(num_elements=int(values["num_elements"]), spacing=float(values["spacing_m"]),
                            wavelength=float(values["wavelength_m"]))
        entries = []
        for index in range(int(values["sample_count"])):
            seed, label, pair, rel_path = values[f"sample_{index:05d}"].split(",", 3)
            entries.append(DatasetEntry(index=index, seed=int(seed), label=int(label), pair=int(pair),
                                        path=rel_path))
    except StorageError:
        raise
    except (KeyError, ValueError, RadarError) as e:
        raise StorageError(f"Манифест '{path}' поврежден: {e}") from e
    if radar.num_samples != int(values["num_samples"]):
        raise StorageError(f"Манифест '{path}': N={values['num_samples']} не равно P·Q={radar.num_samples}.")
    return DatasetManifest(radar=radar, array=array, entries=entries)


def write_features(directory: str, images: np.ndarray, labels: np.ndarray, pairs: np.ndarray, source: str):
    """Признаки: images.npy (S×3×size×size, float32), labels.npy, pairs.npy и заголовок features."""
    np.save(os.path.join(directory, "images.npy"), images.astype(np.float32))
    np.save(os.path.join(directory, "labels.npy"), labels.astype(np.int64))
    np.save(os.path.join(directory, "pairs.npy"), pairs.astype(np.int64))
    write_key_values(os.path.join(directory, FEATURES_NAME), {
        "format_version": FORMAT_VERSION,
        "count": images.shape[0],
        "image_size": images.shape[-1],
        "source": source,
    })
    lg.info(f"Признаки записаны: {images.shape[0]} троек изображений в '{directory}'.")


def read_features(directory: str) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    header = read_key_values(os.path.join(directory, FEATURES_NAME))
    try:
        images = np.load(os.path.join(directory, "images.npy"))
        labels = np.load(os.path.join(directory, "labels.npy"))
        pairs = np.load(os.path.join(directory, "pairs.npy"))
    except OSError as e:
        raise StorageError(f"Не удалось прочитать признаки из '{directory}': {e}") from e
    if images.shape[0] != int(header.get("count", -1)) or labels.shape[0] != images.shape[0]:
        raise StorageError(f"Признаки в '{directory}' не согласованы с заголовком.")
    return images, labels, pairs
