import os
import sys
import tempfile

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..', 'radar')))
os.environ.setdefault("RADAR_LOG_FILE", os.path.join(tempfile.gettempdir(), "radar_tests.log"))
os.environ.setdefault("RADAR_LOG_LEVEL", "WARNING")

import numpy as np
import pytest

from net.model import Topology
from net.training import TrainConfig
from pipeline.settings import PipelineConfig
from sim.scene import RadarParams

# P=64 отсчетов на импульс, Q=4000 импульсов; 2 м попадают в бин ~13.
SMALL_RADAR = dict(carrier_hz=77e9, bandwidth_hz=1e9, pri_s=1e-3, adc_rate_hz=64e3, observation_s=4.0)

SMALL_CONFIG_TEXT = """\
carrier_hz=77e9
bandwidth_hz=1e9
pri_s=1e-3
adc_rate_hz=64e3
observation_s=4.0
samples_per_class=2
subject_pairs=1
window_length=64
image_size=16
conv_channels=2,2
dense_units=8
dropout=0.0
learning_rate=0.01
batch_size=4
epochs=2
seed=7
workers=2
"""


@pytest.fixture
def small_radar() -> RadarParams:
    return RadarParams(**SMALL_RADAR)


@pytest.fixture
def tiny_topology() -> Topology:
    return Topology(image_size=16, conv_channels=(2, 2), dense_units=(8,), dropout=0.0)


@pytest.fixture
def small_config(small_radar, tiny_topology, tmp_path) -> PipelineConfig:
    return PipelineConfig(radar=small_radar, samples_per_class=2, subject_pairs=1, window_length=64,
                          topology=tiny_topology,
                          train=TrainConfig(learning_rate=0.01, batch_size=4, epochs=2, seed=7),
                          seed=7, workers=2, output_dir=str(tmp_path / "run"))


@pytest.fixture
def small_config_file(tmp_path) -> str:
    path = tmp_path / "small.cfg"
    path.write_text(SMALL_CONFIG_TEXT + f"output_dir={tmp_path / 'cli_run'}\n", encoding='utf-8')
    return str(path)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="запускать медленные тесты")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: полный эксперимент, запускается только с --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="нужен флаг --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
