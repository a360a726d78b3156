import os
import shutil
from typing import Dict, Iterable, Mapping, Tuple

import numpy as np
from dotenv import dotenv_values

from errors import ConfigError, StorageError
from logger import lg


def prepare_output_directory(path: str, clean: bool = False, subdirs: Iterable[str] = ()) -> str:
    """
    Создает директорию для результатов (и вложенные подпапки).
    При clean=True директория предварительно удаляется целиком.
    """
    try:
        if clean and os.path.exists(path):
            shutil.rmtree(path)
        os.makedirs(path, exist_ok=True)
        for sub in subdirs:
            os.makedirs(os.path.join(path, sub), exist_ok=True)
        lg.info(f"Директория '{path}' подготовлена (очистка: {clean}).")
    except OSError as e:
        lg.error(f"Не удалось подготовить директорию '{path}': {e}", exc_info=True)
        raise StorageError(f"Не удалось подготовить директорию '{path}': {e}") from e
    return path


def derive_seed(*keys: int) -> int:
    """Детерминированно выводит 32-битное зерно из набора целых ключей."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


def write_key_values(path: str, values: Mapping[str, object]):
    """Пишет плоский файл key=value в порядке ключей словаря."""
    lines = [f"{key}={value}" for key, value in values.items()]
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write("\n".join(lines) + "\n")


def read_key_values(path: str) -> Dict[str, str]:
    if not os.path.isfile(path):
        raise StorageError(f"Файл '{path}' не найден.")
    raw = dotenv_values(path)
    return {key: value for key, value in raw.items() if value is not None}


def parse_int_tuple(text: str, key: str = "") -> Tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.replace(" ", "").split(",") if part)
    except ValueError as e:
        raise ConfigError(f"Ключ '{key}': ожидается список целых через запятую, получено '{text}'.") from e
    if not values:
        raise ConfigError(f"Ключ '{key}': пустой список.")
    return values


def parse_float_tuple(text: str, key: str = "") -> Tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.replace(" ", "").split(",") if part)
    except ValueError as e:
        raise ConfigError(f"Ключ '{key}': ожидается список чисел через запятую, получено '{text}'.") from e
    if not values:
        raise ConfigError(f"Ключ '{key}': пустой список.")
    return values
