from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Tuple, Union

import numpy as np

from errors import InvalidArgumentError
from logger import lg

JITTER = 0.15


class SignClass(Enum):
    BREATHE = "B"
    COME = "C"
    DRINK = "D"

    @property
    def index(self) -> int:
        return list(SignClass).index(self)

    @classmethod
    def from_index(cls, index: int) -> 'SignClass':
        return list(cls)[index]


@dataclass(frozen=True)
class Oscillation:
    """Синусоидальное радиальное смещение (дыхание грудной клетки)."""
    amplitude: float
    frequency: float
    phase: float = 0.0

    def displacement(self, t: np.ndarray) -> np.ndarray:
        return self.amplitude * np.sin(2.0 * np.pi * self.frequency * t + self.phase)

    def velocity(self, t: np.ndarray) -> np.ndarray:
        w = 2.0 * np.pi * self.frequency
        return self.amplitude * w * np.cos(w * t + self.phase)

    @property
    def interval(self) -> Tuple[float, float]:
        return 0.0, np.inf


@dataclass(frozen=True)
class Excursion:
    """
    Подъем-удержание-возврат с косинусными фронтами.
    Смещение начинается и заканчивается в нуле, поэтому чистое перемещение равно нулю.
    """
    amplitude: float
    start: float
    rise: float
    hold: float
    fall: float

    @property
    def interval(self) -> Tuple[float, float]:
        return self.start, self.start + self.rise + self.hold + self.fall

    def _phases(self, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        up = np.clip((t - self.start) / self.rise, 0.0, 1.0)
        down = np.clip((t - self.start - self.rise - self.hold) / self.fall, 0.0, 1.0)
        return up, down

    def displacement(self, t: np.ndarray) -> np.ndarray:
        up, down = self._phases(t)
        return self.amplitude * ((1.0 - np.cos(np.pi * up)) - (1.0 - np.cos(np.pi * down))) / 2.0

    def velocity(self, t: np.ndarray) -> np.ndarray:
        up, down = self._phases(t)
        return self.amplitude * np.pi / 2.0 * (np.sin(np.pi * up) / self.rise - np.sin(np.pi * down) / self.fall)


Motion = Union[Oscillation, Excursion]


@dataclass(frozen=True)
class ScattererTrack:
    """Точечный отражатель конечности: базовая дальность, амплитуда, начальная фаза и профиль движения ρ(t)."""
    name: str
    base_range: float
    amplitude: float
    phase: float = 0.0
    motions: Tuple[Motion, ...] = ()

    def displacement(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        total = np.zeros_like(t)
        for motion in self.motions:
            total = total + motion.displacement(t)
        return total

    def velocity(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        total = np.zeros_like(t)
        for motion in self.motions:
            total = total + motion.velocity(t)
        return total

    @property
    def active_interval(self) -> Tuple[float, float]:
        """Интервал, в котором профиль отличен от нуля (для дыхания — все окно наблюдения)."""
        if not self.motions:
            return 0.0, 0.0
        starts, stops = zip(*(motion.interval for motion in self.motions))
        return min(starts), max(stops)


@dataclass(frozen=True)
class SignKinematics:
    sign: SignClass
    scatterers: Tuple[ScattererTrack, ...]
    parameters: Dict[str, float] = field(default_factory=dict)

    def fits_window(self, observation_s: float) -> bool:
        return all(track.active_interval[1] <= observation_s or np.isinf(track.active_interval[1])
                   for track in self.scatterers)


class _Jitter:
    """Случайные множители 1 ± 15%, записываемые под именем параметра."""

    def __init__(self, seed: int):
        self.rng = np.random.default_rng(seed)
        self.record: Dict[str, float] = {}

    def __call__(self, name: str, value: float) -> float:
        factor = 1.0 + self.rng.uniform(-JITTER, JITTER)
        self.record[name] = value * factor
        return self.record[name]

    def phase(self) -> float:
        return float(self.rng.uniform(0.0, 2.0 * np.pi))


def _torso(j: _Jitter, base_range: float, amplitude: float, breath_depth: float) -> ScattererTrack:
    breathing = Oscillation(amplitude=j("breath_depth", breath_depth),
                            frequency=j("breath_rate", 0.3),
                            phase=j.phase())
    return ScattererTrack(name="torso", base_range=base_range, amplitude=j("torso_amplitude", amplitude),
                          phase=j.phase(), motions=(breathing,))


def _breathe(j: _Jitter, base_range: float) -> Tuple[ScattererTrack, ...]:
    torso = _torso(j, base_range, amplitude=1.0, breath_depth=0.004)
    flourish = Excursion(amplitude=j("flourish_depth", 0.02), start=j("flourish_start", 0.8),
                         rise=j("flourish_rise", 0.9), hold=j("flourish_hold", 0.4), fall=j("flourish_fall", 0.9))
    hands = ScattererTrack(name="hands", base_range=base_range - 0.3, amplitude=j("hand_amplitude", 0.5),
                           phase=j.phase(),
                           motions=(Oscillation(amplitude=0.002, frequency=torso.motions[0].frequency), flourish))
    return torso, hands


def _come(j: _Jitter, base_range: float) -> Tuple[ScattererTrack, ...]:
    torso = _torso(j, base_range, amplitude=0.25, breath_depth=0.002)
    depth = j("sweep_depth", 0.08)
    sweep = j("sweep_half_duration", 0.35)
    first, second = j("first_sweep_start", 0.6), j("second_sweep_start", 2.0)
    tracks = [torso]
    for side, offset, lag in (("right_hand", 0.35, 0.0), ("left_hand", 0.30, 0.05)):
        bursts = tuple(Excursion(amplitude=depth, start=start + lag, rise=sweep, hold=0.0, fall=sweep)
                       for start in (first, second))
        tracks.append(ScattererTrack(name=side, base_range=base_range - offset,
                                     amplitude=j(f"{side}_amplitude", 0.7), phase=j.phase(), motions=bursts))
    return tuple(tracks)


def _drink(j: _Jitter, base_range: float) -> Tuple[ScattererTrack, ...]:
    torso = _torso(j, base_range, amplitude=0.25, breath_depth=0.002)
    arc = Excursion(amplitude=j("lift_height", 0.2), start=j("lift_start", 0.5), rise=j("lift_rise", 0.8),
                    hold=j("lift_hold", 0.9), fall=j("lift_fall", 0.8))
    hand = ScattererTrack(name="hand", base_range=base_range - 0.3, amplitude=j("hand_amplitude", 1.0),
                          phase=j.phase(), motions=(arc,))
    return torso, hand


_TEMPLATES = {
    SignClass.BREATHE: _breathe,
    SignClass.COME: _come,
    SignClass.DRINK: _drink,
}


def kinematics_for(sign: SignClass, person_variation: int, base_range: float = 2.0) -> SignKinematics:
    """
    Шаблон движения жеста с детерминированным разбросом ±15% по скоростям и амплитудам.
    B — медленное дыхание и небольшое движение рук; C — два встречных взмаха двумя руками;
    D — один подъем руки к лицу, удержание и возврат.
    """
    if not isinstance(sign, SignClass):
        raise InvalidArgumentError(f"Неизвестный жест: {sign!r}.")
    if base_range <= 0.5:
        raise InvalidArgumentError(f"Дальность человека должна превышать 0.5 м, получено {base_range}.")
    jitter = _Jitter(person_variation)
    tracks = _TEMPLATES[sign](jitter, base_range)
    lg.debug(f"Кинематика {sign.name} (вариация {person_variation}): {len(tracks)} отражателей.")
    return SignKinematics(sign=sign, scatterers=tracks, parameters=dict(jitter.record))
