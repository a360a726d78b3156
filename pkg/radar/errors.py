class RadarError(Exception):
    """Базовая ошибка конвейера распознавания жестов."""


class InvalidArgumentError(RadarError, ValueError):
    """Аргумент нарушает предусловие операции."""


class ConfigError(RadarError):
    """Неизвестный ключ, нечитаемое значение или противоречивая конфигурация."""


class SceneError(RadarError):
    """Сцена нарушает инварианты (число людей, углы, алиасинг Доплера)."""


class StorageError(RadarError):
    """Поврежденный или несовместимый файл набора данных, признаков или модели."""


class PreprocessError(RadarError):
    """Ошибка предобработки конкретного образца."""


class TrainingError(RadarError):
    """Невозможно обучить или оценить модель на переданных данных."""
