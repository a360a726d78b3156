from typing import Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def _windows(x: np.ndarray, kernel: int) -> np.ndarray:
    pad = kernel // 2
    padded = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    return sliding_window_view(padded, (kernel, kernel), axis=(2, 3))


def conv2d_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> Tuple[np.ndarray, tuple]:
    """Свертка 'same' с шагом 1: x (B, C, H, W), weight (O, C, k, k) с нечетным k."""
    windows = _windows(x, weight.shape[-1])
    out = np.einsum('bchwij,ocij->bohw', windows, weight, optimize=True)
    out += bias[None, :, None, None]
    return out, (x, weight)


def conv2d_backward(dout: np.ndarray, cache: tuple) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    x, weight = cache
    kernel = weight.shape[-1]
    dweight = np.einsum('bchwij,bohw->ocij', _windows(x, kernel), dout, optimize=True)
    dbias = dout.sum(axis=(0, 2, 3))
    # полная корреляция с перевернутым ядром
    dx = np.einsum('bohwij,ocij->bchw', _windows(dout, kernel), weight[:, :, ::-1, ::-1], optimize=True)
    return dx, dweight, dbias


def relu_forward(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    return np.maximum(x, 0), x > 0


def relu_backward(dout: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return dout * mask


def maxpool2_forward(x: np.ndarray) -> Tuple[np.ndarray, tuple]:
    """Max pooling 2×2 с шагом 2; градиент маршрутизируется в первый максимум окна."""
    b, c, h, w = x.shape
    blocks = x.reshape(b, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(b, c, h // 2, w // 2, 4)
    idx = blocks.argmax(axis=-1)
    out = np.take_along_axis(blocks, idx[..., None], axis=-1)[..., 0]
    return out, (x.shape, idx)


def maxpool2_backward(dout: np.ndarray, cache: tuple) -> np.ndarray:
    shape, idx = cache
    b, c, h, w = shape
    grad = np.zeros((b, c, h // 2, w // 2, 4), dtype=dout.dtype)
    np.put_along_axis(grad, idx[..., None], dout[..., None], axis=-1)
    return grad.reshape(b, c, h // 2, w // 2, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(shape)


def dense_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> Tuple[np.ndarray, tuple]:
    return x @ weight + bias, (x, weight)


def dense_backward(dout: np.ndarray, cache: tuple) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    x, weight = cache
    return dout @ weight.T, x.T @ dout, dout.sum(axis=0)


def dropout_forward(x: np.ndarray, rate: float, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Инвертированный dropout: маска уже содержит множитель 1/(1-rate)."""
    if rate <= 0.0:
        mask = np.ones_like(x)
    else:
        mask = (rng.random(x.shape) >= rate).astype(x.dtype) / (1.0 - rate)
    return x * mask, mask


def dropout_backward(dout: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return dout * mask


def softmax(logits: np.ndarray) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray) -> Tuple[float, np.ndarray]:
    """Средняя кросс-энтропия и ее градиент по логитам (в float64)."""
    probs = softmax(logits)
    n = labels.shape[0]
    loss = -float(np.mean(np.log(probs[np.arange(n), labels] + 1e-300)))
    dlogits = probs.copy()
    dlogits[np.arange(n), labels] -= 1.0
    return loss, dlogits / n
