import os
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Optional, Tuple

import numpy as np

import config
from dsp.tfr import StftParams
from errors import ConfigError, InvalidArgumentError, RadarError
from logger import lg
from net.model import Topology
from net.training import TrainConfig
from sim.array_model import ArrayConfig
from sim.scene import RadarParams, SceneTemplate
from utils import parse_int_tuple, read_key_values


@dataclass(frozen=True)
class PipelineConfig:
    """Полная конфигурация конвейера; углы хранятся в радианах (в файле — в градусах)."""
    radar: RadarParams = field(default_factory=RadarParams)
    num_elements: int = config.DEFAULT_NUM_ELEMENTS
    spacing_wavelengths: float = config.DEFAULT_SPACING_WAVELENGTHS
    subject_angles: Tuple[float, float] = (np.deg2rad(config.DEFAULT_THETA_1_DEG),
                                           np.deg2rad(config.DEFAULT_THETA_2_DEG))
    look_angles: Tuple[float, float] = (np.deg2rad(config.DEFAULT_THETA_1_DEG),
                                        np.deg2rad(config.DEFAULT_THETA_2_DEG))
    person_range_m: float = config.DEFAULT_PERSON_RANGE_M
    noise_snr_db: float = config.DEFAULT_NOISE_SNR_DB
    noise_variance: Optional[float] = None
    samples_per_class: int = config.DEFAULT_SAMPLES_PER_CLASS
    subject_pairs: int = config.DEFAULT_SUBJECT_PAIRS
    window: str = config.DEFAULT_WINDOW
    window_length: int = config.DEFAULT_WINDOW_LENGTH
    hop: Optional[int] = None
    energy_fraction: float = config.DEFAULT_ENERGY_FRACTION
    topology: Topology = field(default_factory=Topology)
    train: TrainConfig = field(default_factory=TrainConfig)
    split_ratio: float = config.DEFAULT_SPLIT_RATIO
    seed: int = config.DEFAULT_SEED
    workers: int = config.WORKERS
    output_dir: str = config.DEFAULT_OUTPUT_DIR

    def __post_init__(self):
        if not 0.0 < self.split_ratio < 1.0:
            raise ConfigError(f"split_ratio должен быть в (0, 1), получено {self.split_ratio}.")
        if np.isclose(self.look_angles[0], self.look_angles[1]):
            raise ConfigError("Углы наведения лучей θ₁ и θ₂ должны различаться.")
        if not 0.0 < self.energy_fraction <= 1.0:
            raise ConfigError(f"energy_fraction должен быть в (0, 1], получено {self.energy_fraction}.")
        if self.workers < 1:
            raise ConfigError(f"workers должен быть >= 1, получено {self.workers}.")

    @property
    def image_size(self) -> int:
        return self.topology.image_size

    def array_config(self) -> ArrayConfig:
        wavelength = self.radar.wavelength
        return ArrayConfig(num_elements=self.num_elements, spacing=self.spacing_wavelengths * wavelength,
                           wavelength=wavelength)

    def scene_template(self) -> SceneTemplate:
        return SceneTemplate(radar=self.radar, array=self.array_config(), azimuths=self.subject_angles,
                             person_range=self.person_range_m, noise_snr_db=self.noise_snr_db,
                             noise_variance=self.noise_variance, seed=self.seed)

    def stft_params(self) -> StftParams:
        return StftParams.create(self.radar.pulses, window=self.window, length=self.window_length, hop=self.hop,
                                 min_frames=self.image_size)

    def with_separation(self, separation_deg: float) -> 'PipelineConfig':
        """Люди и лучи на 90° ∓ separation_deg; результаты — в подпапке sep_<угол>."""
        angles = (np.deg2rad(90.0 - separation_deg), np.deg2rad(90.0 + separation_deg))
        return replace(self, subject_angles=angles, look_angles=angles,
                       output_dir=os.path.join(self.output_dir, f"sep_{separation_deg:g}"))


def _optional(parser: Callable[[str, str], object]) -> Callable[[str, str], object]:
    def parse(text: str, key: str):
        if text.strip().lower() in ("", "none", "auto"):
            return None
        return parser(text, key)
    return parse


def _number(kind: type) -> Callable[[str, str], object]:
    def parse(text: str, key: str):
        try:
            return kind(text.strip())
        except ValueError as e:
            raise ConfigError(f"Ключ '{key}': не удалось разобрать '{text}' как {kind.__name__}.") from e
    return parse


_PARSERS: Dict[str, Callable[[str, str], object]] = {
    "carrier_hz": _number(float),
    "bandwidth_hz": _number(float),
    "pri_s": _number(float),
    "adc_rate_hz": _number(float),
    "observation_s": _number(float),
    "num_elements": _number(int),
    "spacing_wavelengths": _number(float),
    "theta_1_deg": _number(float),
    "theta_2_deg": _number(float),
    "look_theta_1_deg": _optional(_number(float)),
    "look_theta_2_deg": _optional(_number(float)),
    "person_range_m": _number(float),
    "noise_snr_db": _number(float),
    "noise_variance": _optional(_number(float)),
    "samples_per_class": _number(int),
    "subject_pairs": _number(int),
    "window": lambda text, key: text.strip(),
    "window_length": _number(int),
    "hop": _optional(_number(int)),
    "image_size": _number(int),
    "energy_fraction": _number(float),
    "conv_channels": parse_int_tuple,
    "dense_units": parse_int_tuple,
    "dropout": _number(float),
    "learning_rate": _number(float),
    "momentum": _number(float),
    "batch_size": _number(int),
    "epochs": _number(int),
    "patience": _number(int),
    "min_delta": _number(float),
    "split_ratio": _number(float),
    "seed": _number(int),
    "workers": _number(int),
    "output_dir": lambda text, key: text.strip(),
}

CONFIG_KEYS = tuple(_PARSERS)


def parse_values(raw: Dict[str, str]) -> Dict[str, object]:
    unknown = sorted(set(raw) - set(_PARSERS))
    if unknown:
        raise ConfigError(f"Неизвестные ключи конфигурации: {', '.join(unknown)}.")
    return {key: _PARSERS[key](str(value), key) for key, value in raw.items()}


def build_config(values: Dict[str, object]) -> PipelineConfig:
    def get(key, default):
        value = values.get(key)
        return default if value is None else value

    try:
        radar = RadarParams(carrier_hz=get("carrier_hz", config.DEFAULT_CARRIER_HZ),
                            bandwidth_hz=get("bandwidth_hz", config.DEFAULT_BANDWIDTH_HZ),
                            pri_s=get("pri_s", config.DEFAULT_PRI_S),
                            adc_rate_hz=get("adc_rate_hz", config.DEFAULT_ADC_RATE_HZ),
                            observation_s=get("observation_s", config.DEFAULT_OBSERVATION_S))
        subjects = (np.deg2rad(get("theta_1_deg", config.DEFAULT_THETA_1_DEG)),
                    np.deg2rad(get("theta_2_deg", config.DEFAULT_THETA_2_DEG)))
        looks = (np.deg2rad(values["look_theta_1_deg"]) if values.get("look_theta_1_deg") is not None
                 else subjects[0],
                 np.deg2rad(values["look_theta_2_deg"]) if values.get("look_theta_2_deg") is not None
                 else subjects[1])
        topology = Topology(image_size=get("image_size", config.IMAGE_SIZE),
                            conv_channels=get("conv_channels", config.DEFAULT_CONV_CHANNELS),
                            dense_units=get("dense_units", config.DEFAULT_DENSE_UNITS),
                            dropout=get("dropout", config.DEFAULT_DROPOUT))
        seed = get("seed", config.DEFAULT_SEED)
        train = TrainConfig(learning_rate=get("learning_rate", config.DEFAULT_LEARNING_RATE),
                            momentum=get("momentum", config.DEFAULT_MOMENTUM),
                            batch_size=get("batch_size", config.DEFAULT_BATCH_SIZE),
                            epochs=get("epochs", config.DEFAULT_EPOCHS),
                            seed=seed,
                            patience=get("patience", config.DEFAULT_PATIENCE),
                            min_delta=get("min_delta", config.DEFAULT_MIN_DELTA))
        return PipelineConfig(
            radar=radar,
            num_elements=get("num_elements", config.DEFAULT_NUM_ELEMENTS),
            spacing_wavelengths=get("spacing_wavelengths", config.DEFAULT_SPACING_WAVELENGTHS),
            subject_angles=subjects,
            look_angles=looks,
            person_range_m=get("person_range_m", config.DEFAULT_PERSON_RANGE_M),
            noise_snr_db=get("noise_snr_db", config.DEFAULT_NOISE_SNR_DB),
            noise_variance=values.get("noise_variance"),
            samples_per_class=get("samples_per_class", config.DEFAULT_SAMPLES_PER_CLASS),
            subject_pairs=get("subject_pairs", config.DEFAULT_SUBJECT_PAIRS),
            window=get("window", config.DEFAULT_WINDOW),
            window_length=get("window_length", config.DEFAULT_WINDOW_LENGTH),
            hop=values.get("hop"),
            energy_fraction=get("energy_fraction", config.DEFAULT_ENERGY_FRACTION),
            topology=topology,
            train=train,
            split_ratio=get("split_ratio", config.DEFAULT_SPLIT_RATIO),
            seed=seed,
            workers=get("workers", config.WORKERS),
            output_dir=get("output_dir", config.DEFAULT_OUTPUT_DIR),
        )
    except InvalidArgumentError as e:
        raise ConfigError(f"Некорректная конфигурация: {e}") from e


def load_pipeline_config(path: Optional[str] = None, **overrides) -> PipelineConfig:
    """Читает плоский файл key=value (dotenv) и применяет переопределения поверх значений по умолчанию."""
    raw: Dict[str, str] = {}
    if path:
        try:
            raw = read_key_values(path)
        except RadarError as e:
            raise ConfigError(f"Не удалось прочитать конфигурацию '{path}': {e}") from e
    raw.update({key: str(value) for key, value in overrides.items()})
    cfg = build_config(parse_values(raw))
    lg.info(f"Конфигурация загружена ({path or 'значения по умолчанию'}): N={cfg.radar.num_samples}, "
            f"M={cfg.num_elements}, образцов на класс {cfg.samples_per_class}×{cfg.subject_pairs}.")
    return cfg
