import struct
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

import config
from errors import InvalidArgumentError, StorageError
from logger import lg
from net.layers import (conv2d_forward, dense_forward, dropout_forward, maxpool2_forward, relu_forward, softmax)

MODEL_MAGIC = b"SGNCNN"
MODEL_VERSION = 1
_DTYPES = {0: np.dtype('<f4'), 1: np.dtype('<f8')}


@dataclass(frozen=True)
class Topology:
    """
    Три ветви (общий спектр, луч θ₁, луч θ₂). В каждом слое ветви параллельные свертки
    small×small и large×large конкатенируются по каналам, затем ReLU и max pooling 2×2.
    Выходы ветвей уплощаются и подаются в общие полносвязные слои с dropout.
    """
    image_size: int = config.IMAGE_SIZE
    conv_channels: Tuple[int, ...] = config.DEFAULT_CONV_CHANNELS
    kernels: Tuple[int, int] = (3, 9)
    dense_units: Tuple[int, ...] = config.DEFAULT_DENSE_UNITS
    dropout: float = config.DEFAULT_DROPOUT
    num_classes: int = config.NUM_CLASSES
    num_branches: int = 3

    def __post_init__(self):
        if self.image_size % (2 ** len(self.conv_channels)) != 0:
            raise InvalidArgumentError(
                f"Размер изображения {self.image_size} не делится на 2^{len(self.conv_channels)}.")
        if any(k % 2 == 0 or k < 1 for k in self.kernels):
            raise InvalidArgumentError(f"Ядра свертки должны быть нечетными, получено {self.kernels}.")
        if not 0.0 <= self.dropout < 1.0:
            raise InvalidArgumentError(f"Доля dropout должна быть в [0, 1), получено {self.dropout}.")
        if min(self.conv_channels) < 1 or min(self.dense_units, default=1) < 1:
            raise InvalidArgumentError("Число каналов и нейронов должно быть положительным.")

    @property
    def branch_features(self) -> int:
        side = self.image_size // (2 ** len(self.conv_channels))
        return side * side * 2 * self.conv_channels[-1]

    def parameter_shapes(self) -> List[Tuple[str, Tuple[int, ...]]]:
        """Порядок параметров совпадает с порядком записи в файл модели."""
        shapes = []
        for b in range(self.num_branches):
            in_ch = 1
            for i, out_ch in enumerate(self.conv_channels):
                for path, k in zip(("small", "large"), self.kernels):
                    shapes.append((f"branch{b}.conv{i}.{path}.weight", (out_ch, in_ch, k, k)))
                    shapes.append((f"branch{b}.conv{i}.{path}.bias", (out_ch,)))
                in_ch = 2 * out_ch
        widths = [self.num_branches * self.branch_features, *self.dense_units, self.num_classes]
        for j in range(len(widths) - 1):
            shapes.append((f"dense{j}.weight", (widths[j], widths[j + 1])))
            shapes.append((f"dense{j}.bias", (widths[j + 1],)))
        return shapes


@dataclass
class ClassifierModel:
    topology: Topology
    params: Dict[str, np.ndarray]
    hyperparameters: Dict[str, str] = field(default_factory=dict)

    @property
    def dtype(self) -> np.dtype:
        return next(iter(self.params.values())).dtype

    @classmethod
    def initialize(cls, topology: Topology, seed: int, dtype=np.float32) -> 'ClassifierModel':
        """He-uniform по fan-in, нулевые смещения."""
        rng = np.random.default_rng(seed)
        params = {}
        for name, shape in topology.parameter_shapes():
            if name.endswith(".bias"):
                params[name] = np.zeros(shape, dtype=dtype)
                continue
            fan_in = int(np.prod(shape[1:])) if len(shape) == 4 else shape[0]
            limit = np.sqrt(6.0 / fan_in)
            params[name] = rng.uniform(-limit, limit, size=shape).astype(dtype)
        lg.info(f"Модель инициализирована: {sum(p.size for p in params.values())} параметров, seed={seed}.")
        return cls(topology=topology, params=params)

    @classmethod
    def zeros(cls, topology: Topology, dtype=np.float32) -> 'ClassifierModel':
        return cls(topology=topology,
                   params={name: np.zeros(shape, dtype=dtype) for name, shape in topology.parameter_shapes()})

    def copy(self) -> 'ClassifierModel':
        return ClassifierModel(topology=self.topology, params={k: v.copy() for k, v in self.params.items()},
                               hyperparameters=dict(self.hyperparameters))


def _check_images(model: ClassifierModel, images: np.ndarray) -> np.ndarray:
    images = np.asarray(images)
    if images.ndim == 3:
        images = images[None]
    topo = model.topology
    expected = (topo.num_branches, topo.image_size, topo.image_size)
    if images.ndim != 4 or images.shape[1:] != expected:
        raise InvalidArgumentError(f"Ожидаются изображения формы (B, {expected}), получено {images.shape}.")
    return images.astype(model.dtype, copy=False)


def forward_pass(model: ClassifierModel, images: np.ndarray, train_mode: bool = False,
                 dropout_seed: int = 0) -> Tuple[np.ndarray, dict]:
    """Логиты (B, K) и кэш для обратного прохода."""
    x = _check_images(model, images)
    topo, p = model.topology, model.params
    rng = np.random.default_rng(dropout_seed)
    cache = {"branches": [], "dense": [], "flat_shapes": []}

    flats = []
    for b in range(topo.num_branches):
        h = x[:, b:b + 1]
        layer_caches = []
        for i in range(len(topo.conv_channels)):
            prefix = f"branch{b}.conv{i}"
            small, small_cache = conv2d_forward(h, p[f"{prefix}.small.weight"], p[f"{prefix}.small.bias"])
            large, large_cache = conv2d_forward(h, p[f"{prefix}.large.weight"], p[f"{prefix}.large.bias"])
            activated, relu_mask = relu_forward(np.concatenate((small, large), axis=1))
            h, pool_cache = maxpool2_forward(activated)
            layer_caches.append((small_cache, large_cache, relu_mask, pool_cache))
        cache["branches"].append(layer_caches)
        cache["flat_shapes"].append(h.shape)
        flats.append(h.reshape(h.shape[0], -1))
    cache["features"] = flats

    h = np.concatenate(flats, axis=1)
    num_dense = len(topo.dense_units) + 1
    for j in range(num_dense):
        h, dense_cache = dense_forward(h, p[f"dense{j}.weight"], p[f"dense{j}.bias"])
        if j == num_dense - 1:
            cache["dense"].append((dense_cache, None, None))
            break
        h, relu_mask = relu_forward(h)
        h, drop_mask = dropout_forward(h, topo.dropout if train_mode else 0.0, rng)
        cache["dense"].append((dense_cache, relu_mask, drop_mask))
    return h, cache


def forward(model: ClassifierModel, images: np.ndarray, train_mode: bool = False,
            dropout_seed: int = 0) -> np.ndarray:
    """Вероятности классов: (K,) для одной тройки изображений, (B, K) для пакета."""
    single = np.asarray(images).ndim == 3
    logits, _ = forward_pass(model, images, train_mode, dropout_seed)
    probs = softmax(logits)
    return probs[0] if single else probs


def save_model(model: ClassifierModel, path: str):
    topo = model.topology
    dtype_code = 1 if model.dtype == np.float64 else 0
    hyper = ";".join(f"{k}={v}" for k, v in sorted(model.hyperparameters.items())).encode('utf-8')
    chunks = [
        struct.pack('<6sH', MODEL_MAGIC, MODEL_VERSION),
        struct.pack('<III', topo.image_size, topo.num_branches, len(topo.conv_channels)),
        struct.pack(f'<{len(topo.conv_channels)}I', *topo.conv_channels),
        struct.pack('<II', *topo.kernels),
        struct.pack('<I', len(topo.dense_units)),
        struct.pack(f'<{len(topo.dense_units)}I', *topo.dense_units),
        struct.pack('<Id', topo.num_classes, topo.dropout),
        struct.pack('<B', dtype_code),
        struct.pack('<I', len(hyper)), hyper,
    ]
    out_dtype = _DTYPES[dtype_code]
    for name, shape in topo.parameter_shapes():
        chunks.append(np.ascontiguousarray(model.params[name], dtype=out_dtype).tobytes())
    with open(path, 'wb') as f:
        f.write(b"".join(chunks))
    lg.info(f"Модель сохранена в '{path}'.")


class _Reader:
    def __init__(self, blob: bytes, path: str):
        self.blob, self.offset, self.path = blob, 0, path

    def take(self, fmt: str) -> tuple:
        size = struct.calcsize(fmt)
        if self.offset + size > len(self.blob):
            raise StorageError(f"Файл модели '{self.path}' обрезан.")
        values = struct.unpack_from(fmt, self.blob, self.offset)
        self.offset += size
        return values

    def raw(self, size: int) -> bytes:
        if self.offset + size > len(self.blob):
            raise StorageError(f"Файл модели '{self.path}' обрезан.")
        chunk = self.blob[self.offset:self.offset + size]
        self.offset += size
        return chunk


def load_model(path: str) -> ClassifierModel:
    try:
        with open(path, 'rb') as f:
            reader = _Reader(f.read(), path)
    except OSError as e:
        raise StorageError(f"Не удалось прочитать модель '{path}': {e}") from e

    magic, version = reader.take('<6sH')
    if magic != MODEL_MAGIC or version != MODEL_VERSION:
        raise StorageError(f"'{path}' не является файлом модели версии {MODEL_VERSION}.")
    image_size, num_branches, num_layers = reader.take('<III')
    conv_channels = reader.take(f'<{num_layers}I')
    kernels = reader.take('<II')
    (num_dense,) = reader.take('<I')
    dense_units = reader.take(f'<{num_dense}I')
    num_classes, dropout = reader.take('<Id')
    (dtype_code,) = reader.take('<B')
    if dtype_code not in _DTYPES:
        raise StorageError(f"Неизвестный код типа {dtype_code} в '{path}'.")
    (hyper_len,) = reader.take('<I')
    hyper_text = reader.raw(hyper_len).decode('utf-8')
    hyperparameters = dict(item.split("=", 1) for item in hyper_text.split(";") if item)

    topology = Topology(image_size=image_size, conv_channels=tuple(conv_channels), kernels=tuple(kernels),
                        dense_units=tuple(dense_units), dropout=dropout, num_classes=num_classes,
                        num_branches=num_branches)
    dtype = _DTYPES[dtype_code]
    params = {}
    for name, shape in topology.parameter_shapes():
        count = int(np.prod(shape))
        params[name] = np.frombuffer(reader.raw(count * dtype.itemsize), dtype=dtype).reshape(shape) \
            .astype(dtype.newbyteorder('='))
    if reader.offset != len(reader.blob):
        raise StorageError(f"Лишние данные в конце файла модели '{path}'.")
    lg.info(f"Модель загружена из '{path}'.")
    return ClassifierModel(topology=topology, params=params, hyperparameters=hyperparameters)
