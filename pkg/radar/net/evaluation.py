from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from sklearn.metrics import confusion_matrix as sk_confusion_matrix

from errors import InvalidArgumentError
from net.model import ClassifierModel, forward

INFERENCE_CHUNK = 16


def predict(model: ClassifierModel, images: np.ndarray) -> Tuple[int, np.ndarray]:
    """Метка — argmax вероятностей без dropout; при равенстве выбирается меньший индекс."""
    probs = forward(model, images, train_mode=False)
    if probs.ndim != 1:
        raise InvalidArgumentError("predict принимает одну тройку изображений; для пакета используйте predict_batch.")
    return int(np.argmax(probs)), probs


def predict_batch(model: ClassifierModel, images: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    chunks = [forward(model, images[start:start + INFERENCE_CHUNK], train_mode=False)
              for start in range(0, images.shape[0], INFERENCE_CHUNK)]
    probs = np.concatenate(chunks, axis=0)
    return probs.argmax(axis=1), probs


@dataclass
class ConfusionReport:
    """Строки — истинный класс, столбцы — предсказанный; проценты нормированы по строкам."""
    counts: np.ndarray
    percentages: np.ndarray
    accuracy: float
    predictions: List[int]


def confusion_from_predictions(labels: np.ndarray, predicted: np.ndarray, num_classes: int) -> ConfusionReport:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise InvalidArgumentError("Тестовая выборка пуста.")
    counts = sk_confusion_matrix(labels, predicted, labels=list(range(num_classes)))
    row_sums = counts.sum(axis=1, keepdims=True)
    percentages = np.divide(100.0 * counts, row_sums, out=np.zeros(counts.shape), where=row_sums > 0)
    accuracy = float(np.trace(counts) / counts.sum())
    return ConfusionReport(counts=counts, percentages=percentages, accuracy=accuracy,
                           predictions=[int(p) for p in predicted])


def confusion_matrix(model: ClassifierModel, images: np.ndarray, labels: np.ndarray) -> ConfusionReport:
    if len(labels) == 0:
        raise InvalidArgumentError("Тестовая выборка пуста.")
    predicted, _ = predict_batch(model, images)
    return confusion_from_predictions(labels, predicted, model.topology.num_classes)
