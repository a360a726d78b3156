from typing import Dict, Tuple

import numpy as np

from errors import InvalidArgumentError
from logger import lg
from net.layers import (conv2d_backward, dense_backward, dropout_backward, maxpool2_backward, relu_backward,
                        softmax_cross_entropy)
from net.model import ClassifierModel, forward_pass


def loss_and_gradients(model: ClassifierModel, images: np.ndarray, labels: np.ndarray, train_mode: bool = True,
                       dropout_seed: int = 0) -> Tuple[float, Dict[str, np.ndarray]]:
    """Средняя кросс-энтропия по пакету и градиенты по всем параметрам модели."""
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if labels.size == 0:
        raise InvalidArgumentError("Пустой пакет.")
    num_classes = model.topology.num_classes
    if labels.min() < 0 or labels.max() >= num_classes:
        lg.warning(f"Метки вне диапазона 0..{num_classes - 1}: {labels.tolist()}.")
        raise InvalidArgumentError(f"Метка вне диапазона 0..{num_classes - 1}.")
    if np.asarray(images).ndim == 3:
        images = np.asarray(images)[None]
    if np.asarray(images).shape[0] != labels.size:
        raise InvalidArgumentError(f"Число изображений ({np.asarray(images).shape[0]}) не равно числу меток.")

    topo, p = model.topology, model.params
    logits, cache = forward_pass(model, images, train_mode, dropout_seed)
    loss, dlogits = softmax_cross_entropy(logits, labels)
    grads: Dict[str, np.ndarray] = {}

    d = dlogits.astype(model.dtype)
    for j in reversed(range(len(cache["dense"]))):
        dense_cache, relu_mask, drop_mask = cache["dense"][j]
        if relu_mask is not None:
            d = relu_backward(dropout_backward(d, drop_mask), relu_mask)
        d, grads[f"dense{j}.weight"], grads[f"dense{j}.bias"] = dense_backward(d, dense_cache)

    offsets = np.cumsum([0] + [int(np.prod(shape[1:])) for shape in cache["flat_shapes"]])
    for b in range(topo.num_branches):
        h = d[:, offsets[b]:offsets[b + 1]].reshape(cache["flat_shapes"][b])
        for i in reversed(range(len(topo.conv_channels))):
            small_cache, large_cache, relu_mask, pool_cache = cache["branches"][b][i]
            h = relu_backward(maxpool2_backward(h, pool_cache), relu_mask)
            split = topo.conv_channels[i]
            prefix = f"branch{b}.conv{i}"
            dx_small, grads[f"{prefix}.small.weight"], grads[f"{prefix}.small.bias"] = \
                conv2d_backward(h[:, :split], small_cache)
            dx_large, grads[f"{prefix}.large.weight"], grads[f"{prefix}.large.bias"] = \
                conv2d_backward(h[:, split:], large_cache)
            h = dx_small + dx_large

    return loss, {name: grads[name].astype(p[name].dtype, copy=False) for name in p}
