import os

from dotenv import load_dotenv

load_dotenv()

LOG_FORMAT = '[%(asctime)s] [%(levelname)s] [%(name)s] [%(funcName)s] %(message)s'
LOG_DATEFMT = '%Y-%m-%d %H:%M:%S'
LOG_LEVEL = os.getenv("RADAR_LOG_LEVEL", "INFO").upper()
LOG_FILE = os.getenv("RADAR_LOG_FILE", "radar.log")

SPEED_OF_LIGHT = 299_792_458.0

DEFAULT_CARRIER_HZ = 77e9
DEFAULT_BANDWIDTH_HZ = 4e9
DEFAULT_PRI_S = 1e-3
DEFAULT_ADC_RATE_HZ = 512e3
DEFAULT_OBSERVATION_S = 4.0

DEFAULT_NUM_ELEMENTS = 4
DEFAULT_SPACING_WAVELENGTHS = 0.5

# Углы в градусах, конвенция cos(θ): 90° = нормаль к решетке.
DEFAULT_THETA_1_DEG = 60.0
DEFAULT_THETA_2_DEG = 120.0
DEFAULT_PERSON_RANGE_M = 2.0
DEFAULT_NOISE_SNR_DB = 10.0

DEFAULT_SAMPLES_PER_CLASS = 20
DEFAULT_SUBJECT_PAIRS = 2

DEFAULT_WINDOW = "hann"
DEFAULT_WINDOW_LENGTH = 128
IMAGE_SIZE = 128
DB_FLOOR = 1e-12
DB_DYNAMIC_RANGE = 60.0
DEFAULT_ENERGY_FRACTION = 0.9

DEFAULT_CONV_CHANNELS = (8, 16, 16)
DEFAULT_DENSE_UNITS = (256, 64)
DEFAULT_DROPOUT = 0.5
NUM_CLASSES = 9

DEFAULT_LEARNING_RATE = 1e-3
DEFAULT_MOMENTUM = 0.9
DEFAULT_BATCH_SIZE = 16
DEFAULT_EPOCHS = 40
DEFAULT_PATIENCE = 5
DEFAULT_MIN_DELTA = 1e-4

DEFAULT_SPLIT_RATIO = 0.8
DEFAULT_SEED = 2021
DEFAULT_OUTPUT_DIR = "runs/default"

WORKERS = int(os.getenv("RADAR_WORKERS", str(min(8, os.cpu_count() or 1))))
