from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

import config
from errors import InvalidArgumentError, SceneError
from logger import lg
from sim.array_model import ArrayConfig, Scatterer, SnapshotMatrix, synthesize_snapshot
from sim.kinematics import SignClass, SignKinematics, kinematics_for
from utils import derive_seed

NUM_SIGNS = len(SignClass)
NUM_CLASSES = NUM_SIGNS * NUM_SIGNS


@dataclass(frozen=True)
class RadarParams:
    """Параметры FMCW-радара; P = ADC·PRI отсчетов в импульсе, Q = T_obs/PRI импульсов."""
    carrier_hz: float = config.DEFAULT_CARRIER_HZ
    bandwidth_hz: float = config.DEFAULT_BANDWIDTH_HZ
    pri_s: float = config.DEFAULT_PRI_S
    adc_rate_hz: float = config.DEFAULT_ADC_RATE_HZ
    observation_s: float = config.DEFAULT_OBSERVATION_S

    def __post_init__(self):
        for name in ("carrier_hz", "bandwidth_hz", "pri_s", "adc_rate_hz", "observation_s"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InvalidArgumentError(f"Параметр радара {name} должен быть > 0, получено {value}.")
        for name, value in (("ADC·PRI", self.adc_rate_hz * self.pri_s),
                            ("T_obs/PRI", self.observation_s / self.pri_s)):
            if abs(value - round(value)) > 1e-6 * max(1.0, value) or round(value) < 1:
                raise InvalidArgumentError(f"{name} должно быть целым положительным, получено {value}.")

    @property
    def fast_time_samples(self) -> int:
        return int(round(self.adc_rate_hz * self.pri_s))

    @property
    def pulses(self) -> int:
        return int(round(self.observation_s / self.pri_s))

    @property
    def num_samples(self) -> int:
        return self.fast_time_samples * self.pulses

    @property
    def wavelength(self) -> float:
        return config.SPEED_OF_LIGHT / self.carrier_hz

    @property
    def prf(self) -> float:
        return 1.0 / self.pri_s

    @property
    def slope(self) -> float:
        return self.bandwidth_hz / self.pri_s

    def beat_frequency(self, range_m: float) -> float:
        return 2.0 * self.slope * range_m / config.SPEED_OF_LIGHT

    def beat_bin(self, range_m: float) -> int:
        return int(round(self.beat_frequency(range_m) * self.fast_time_samples / self.adc_rate_hz))

    def pulse_times(self) -> np.ndarray:
        return np.arange(self.pulses, dtype=np.float64) * self.pri_s

    def default_array(self, num_elements: int = config.DEFAULT_NUM_ELEMENTS) -> ArrayConfig:
        return ArrayConfig.half_wavelength(num_elements, self.wavelength)


@dataclass(frozen=True)
class Person:
    azimuth: float
    sign: SignClass
    kinematics: SignKinematics
    reflectivity: float = 1.0


@dataclass(frozen=True)
class SceneSpec:
    persons: Tuple[Person, ...]
    noise_variance: float = 0.0
    radar: RadarParams = field(default_factory=RadarParams)
    seed: int = 0
    array: Optional[ArrayConfig] = None

    @property
    def array_config(self) -> ArrayConfig:
        return self.array if self.array is not None else self.radar.default_array()

    def validate(self):
        if not 1 <= len(self.persons) <= 2:
            raise SceneError(f"Сцена должна содержать 1 или 2 человека, получено {len(self.persons)}.")
        azimuths = [p.azimuth for p in self.persons]
        for theta in azimuths:
            if not (0.0 <= theta <= np.pi):
                raise SceneError(f"Азимут {theta} вне диапазона [0, π].")
        if len(azimuths) == 2 and np.isclose(azimuths[0], azimuths[1]):
            raise SceneError(f"Азимуты двух людей совпадают ({azimuths[0]}).")
        for idx, person in enumerate(self.persons):
            if not person.kinematics.fits_window(self.radar.observation_s):
                raise SceneError(f"Движение человека {idx} ({person.sign.name}) выходит за окно наблюдения "
                                 f"{self.radar.observation_s} с.")
        if not (np.isfinite(self.noise_variance) and self.noise_variance >= 0):
            raise SceneError(f"Дисперсия шума должна быть >= 0, получено {self.noise_variance}.")


def nominal_signal_power(persons: Sequence[Person]) -> float:
    """Номинальная мощность сигнала на элемент: Σ_людей ρ²·Σ_отражателей A²."""
    return float(sum(person.reflectivity ** 2 * sum(track.amplitude ** 2 for track in person.kinematics.scatterers)
                     for person in persons))


def _check_doppler(person_idx: int, person: Person, radar: RadarParams, times: np.ndarray):
    limit = radar.prf / 2.0
    for track in person.kinematics.scatterers:
        peak = float(np.max(np.abs(track.velocity(times)))) if times.size else 0.0
        doppler = 2.0 * peak / radar.wavelength
        if doppler >= limit:
            lg.warning(f"Алиасинг Доплера: человек {person_idx}, отражатель '{track.name}', {doppler:.1f} Гц.")
            raise SceneError(
                f"Человек {person_idx} ({person.sign.name}), отражатель '{track.name}': доплеровская частота "
                f"{doppler:.1f} Гц превышает PRF/2 = {limit:.1f} Гц.")


def person_baseband(person: Person, radar: RadarParams) -> np.ndarray:
    """
    Дечирпированный сигнал одного человека длины N (без пространственной фазы).
    Частота биений задается базовой дальностью, фаза 4πr(t)/λ обновляется от импульса к импульсу.
    """
    p = np.arange(radar.fast_time_samples, dtype=np.float64)
    times = radar.pulse_times()
    block = np.zeros((radar.fast_time_samples, radar.pulses), dtype=np.complex128)
    for track in person.kinematics.scatterers:
        fast = np.exp(2j * np.pi * radar.beat_frequency(track.base_range) * p / radar.adc_rate_hz)
        ranges = track.base_range + track.displacement(times)
        slow = track.amplitude * np.exp(1j * (track.phase + 4.0 * np.pi * ranges / radar.wavelength))
        block += np.outer(fast, slow)
    # столбец q -> отсчеты qP .. qP+P-1
    return block.ravel(order='F')


def synthesize_scene(spec: SceneSpec) -> SnapshotMatrix:
    spec.validate()
    radar = spec.radar
    times = radar.pulse_times()
    for idx, person in enumerate(spec.persons):
        _check_doppler(idx, person, radar, times)

    scatterers = [Scatterer(azimuth=person.azimuth, amplitude=person.reflectivity) for person in spec.persons]
    baseband = np.stack([person_baseband(person, radar) for person in spec.persons])
    snapshot = synthesize_snapshot(spec.array_config, scatterers, baseband, spec.noise_variance, spec.seed,
                                   sample_rate=radar.adc_rate_hz)
    lg.debug(f"Сцена синтезирована: {len(spec.persons)} чел., N={radar.num_samples}, seed={spec.seed}.")
    return snapshot


CLASS_NAMES: List[str] = [f"{a.value}-{b.value}" for a in SignClass for b in SignClass]


def encode_label(first: SignClass, second: SignClass) -> int:
    """Метка пары: жест человека на θ₁ — старший разряд, жест на θ₂ — младший (B-B … D-D)."""
    return first.index * NUM_SIGNS + second.index


def decode_label(label: int) -> Tuple[SignClass, SignClass]:
    if not 0 <= label < NUM_CLASSES:
        raise InvalidArgumentError(f"Метка {label} вне диапазона 0..{NUM_CLASSES - 1}.")
    return SignClass.from_index(label // NUM_SIGNS), SignClass.from_index(label % NUM_SIGNS)


def class_title(label: int) -> str:
    return f"Class-{label + 1} ({CLASS_NAMES[label]})"


@dataclass(frozen=True)
class SceneTemplate:
    """Общие параметры сцен набора данных; конкретные жесты и зерна задает план образца."""
    radar: RadarParams = field(default_factory=RadarParams)
    array: Optional[ArrayConfig] = None
    azimuths: Tuple[float, float] = (np.deg2rad(config.DEFAULT_THETA_1_DEG), np.deg2rad(config.DEFAULT_THETA_2_DEG))
    person_range: float = config.DEFAULT_PERSON_RANGE_M
    noise_snr_db: float = config.DEFAULT_NOISE_SNR_DB
    noise_variance: Optional[float] = None
    seed: int = config.DEFAULT_SEED


@dataclass(frozen=True)
class SamplePlan:
    index: int
    label: int
    pair: int
    repetition: int
    seed: int


def plan_dataset(samples_per_class: int, template: SceneTemplate, subject_pairs: int = 1) -> List[SamplePlan]:
    if samples_per_class < 1:
        raise InvalidArgumentError(f"samples_per_class должно быть >= 1, получено {samples_per_class}.")
    if subject_pairs < 1:
        raise InvalidArgumentError(f"subject_pairs должно быть >= 1, получено {subject_pairs}.")
    plans = []
    for pair in range(subject_pairs):
        for label in range(NUM_CLASSES):
            for rep in range(samples_per_class):
                plans.append(SamplePlan(index=len(plans), label=label, pair=pair, repetition=rep,
                                        seed=derive_seed(template.seed, pair, label, rep)))
    return plans


def build_scene(template: SceneTemplate, plan: SamplePlan) -> SceneSpec:
    signs = decode_label(plan.label)
    persons = tuple(
        Person(azimuth=template.azimuths[slot], sign=sign,
               kinematics=kinematics_for(sign, derive_seed(plan.seed, slot), template.person_range))
        for slot, sign in enumerate(signs))
    if template.noise_variance is not None:
        noise_variance = template.noise_variance
    else:
        noise_variance = nominal_signal_power(persons) / 10.0 ** (template.noise_snr_db / 10.0)
    return SceneSpec(persons=persons, noise_variance=noise_variance, radar=template.radar,
                     seed=plan.seed, array=template.array)


def iter_dataset(samples_per_class: int, template: SceneTemplate,
                 subject_pairs: int = 1) -> Iterator[Tuple[SamplePlan, SnapshotMatrix]]:
    for plan in plan_dataset(samples_per_class, template, subject_pairs):
        yield plan, synthesize_scene(build_scene(template, plan))


def dataset(samples_per_class: int, template: SceneTemplate,
            subject_pairs: int = 1) -> List[Tuple[SnapshotMatrix, int]]:
    """Весь набор в памяти: 9 классов × samples_per_class × subject_pairs пар (SnapshotMatrix, метка)."""
    samples = [(snapshot, plan.label) for plan, snapshot in iter_dataset(samples_per_class, template, subject_pairs)]
    lg.info(f"Сгенерирован набор в памяти: {len(samples)} образцов.")
    return samples
