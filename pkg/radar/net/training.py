from dataclasses import asdict, dataclass
from typing import Callable, List, Optional

import numpy as np

import config
from errors import InvalidArgumentError, TrainingError
from logger import lg
from net.backprop import loss_and_gradients
from net.evaluation import predict_batch
from net.model import ClassifierModel


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = config.DEFAULT_LEARNING_RATE
    momentum: float = config.DEFAULT_MOMENTUM
    batch_size: int = config.DEFAULT_BATCH_SIZE
    epochs: int = config.DEFAULT_EPOCHS
    seed: int = config.DEFAULT_SEED
    patience: int = config.DEFAULT_PATIENCE
    min_delta: float = config.DEFAULT_MIN_DELTA

    def __post_init__(self):
        if not (np.isfinite(self.learning_rate) and self.learning_rate >= 0):
            raise InvalidArgumentError(f"Скорость обучения должна быть >= 0, получено {self.learning_rate}.")
        if not 0.0 <= self.momentum < 1.0:
            raise InvalidArgumentError(f"Момент должен быть в [0, 1), получено {self.momentum}.")
        if self.batch_size < 1 or self.epochs < 1 or self.patience < 1:
            raise InvalidArgumentError("batch_size, epochs и patience должны быть >= 1.")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    loss: float
    accuracy: float


@dataclass
class TrainResult:
    model: ClassifierModel
    log: List[EpochRecord]


def train(model: ClassifierModel, images: np.ndarray, labels: np.ndarray, cfg: TrainConfig,
          on_epoch: Optional[Callable[[EpochRecord], None]] = None) -> TrainResult:
    """
    SGD с моментом: v ← μv − η∇, w ← w + v. Порядок данных и маски dropout определяются cfg.seed.
    Остановка, если потери не улучшались на min_delta в течение patience эпох.
    """
    labels = np.asarray(labels, dtype=np.int64)
    num_classes = model.topology.num_classes
    missing = sorted(set(range(num_classes)) - set(labels.tolist()))
    if missing:
        lg.warning(f"В обучающей выборке отсутствуют классы {missing}.")
        raise TrainingError(f"В обучающей выборке отсутствуют классы: {missing}.")

    model = model.copy()
    model.hyperparameters = {k: str(v) for k, v in asdict(cfg).items()}
    velocity = {name: np.zeros_like(value) for name, value in model.params.items()}
    rng = np.random.default_rng(cfg.seed)
    num_samples = labels.shape[0]
    log: List[EpochRecord] = []
    best_loss, stale = np.inf, 0

    lg.info(f"Начало обучения: {num_samples} образцов, {cfg.epochs} эпох, lr={cfg.learning_rate}.")
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(num_samples)
        total_loss = 0.0
        for start in range(0, num_samples, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            dropout_seed = int(rng.integers(0, 2 ** 31 - 1))
            loss, grads = loss_and_gradients(model, images[batch], labels[batch], train_mode=True,
                                             dropout_seed=dropout_seed)
            total_loss += loss * batch.size
            for name, value in model.params.items():
                v = velocity[name]
                v *= cfg.momentum
                v -= cfg.learning_rate * grads[name]
                value += v

        predicted, _ = predict_batch(model, images)
        record = EpochRecord(epoch=epoch, loss=total_loss / num_samples,
                             accuracy=float(np.mean(predicted == labels)))
        log.append(record)
        lg.info(f"Эпоха {epoch}: потери {record.loss:.4f}, точность {record.accuracy:.3f}.")
        if on_epoch is not None:
            on_epoch(record)

        if record.loss < best_loss - cfg.min_delta:
            best_loss, stale = record.loss, 0
        else:
            stale += 1
            if stale >= cfg.patience:
                lg.info(f"Ранняя остановка на эпохе {epoch}: потери не улучшаются {stale} эпох.")
                break
    return TrainResult(model=model, log=log)
