import os
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
import trio

from errors import TrainingError
from logger import lg
from net.evaluation import ConfusionReport, confusion_matrix
from net.model import ClassifierModel, load_model, save_model
from net.training import EpochRecord, TrainResult, train
from pipeline.preprocess import preprocess, split
from pipeline.report import write_report, write_training_log
from pipeline.settings import PipelineConfig
from pipeline.storage import (DatasetEntry, DatasetManifest, read_features, read_manifest, read_sample,
                              write_features, write_manifest, write_sample)
from sim.scene import SamplePlan, build_scene, plan_dataset, synthesize_scene
from utils import derive_seed, prepare_output_directory

T = TypeVar('T')
Tick = Optional[Callable[[], None]]


async def run_indexed(jobs: Sequence[Callable[[], T]], workers: int, on_done: Tick = None) -> List[T]:
    """
    Выполняет задачи в пуле потоков trio; результат i всегда лежит на позиции i.
    При ошибке оставшиеся задачи отменяются, наружу выходит ошибка с наименьшим индексом.
    """
    results: List[Optional[T]] = [None] * len(jobs)
    errors: Dict[int, Exception] = {}
    limiter = trio.CapacityLimiter(workers)

    async with trio.open_nursery() as nursery:
        async def worker(index: int, job: Callable[[], T]):
            try:
                results[index] = await trio.to_thread.run_sync(job, limiter=limiter)
            except Exception as e:
                errors[index] = e
                nursery.cancel_scope.cancel()
                return
            if on_done is not None:
                on_done()

        for index, job in enumerate(jobs):
            nursery.start_soon(worker, index, job)
    if errors:
        raise errors[min(errors)]
    return results  # type: ignore


async def generate_dataset(cfg: PipelineConfig, out_dir: str, on_done: Tick = None) -> DatasetManifest:
    prepare_output_directory(out_dir, clean=True, subdirs=("samples",))
    template = cfg.scene_template()
    plans = plan_dataset(cfg.samples_per_class, template, cfg.subject_pairs)
    lg.info(f"Генерация набора: {len(plans)} образцов в '{out_dir}', потоков {cfg.workers}.")

    def make_job(plan: SamplePlan) -> Callable[[], DatasetEntry]:
        def job() -> DatasetEntry:
            rel_path = f"samples/sample_{plan.index:05d}.bin"
            write_sample(os.path.join(out_dir, rel_path), synthesize_scene(build_scene(template, plan)))
            return DatasetEntry(index=plan.index, seed=plan.seed, label=plan.label, pair=plan.pair, path=rel_path)
        return job

    entries = await run_indexed([make_job(plan) for plan in plans], cfg.workers, on_done)
    manifest = DatasetManifest(radar=cfg.radar, array=cfg.array_config(), entries=entries)
    write_manifest(out_dir, manifest)
    return manifest


def config_for_manifest(cfg: PipelineConfig, manifest: DatasetManifest) -> PipelineConfig:
    """Геометрия радара и решетки берется из манифеста набора данных."""
    array = manifest.array
    return replace(cfg, radar=manifest.radar, num_elements=array.num_elements,
                   spacing_wavelengths=array.spacing / array.wavelength)


async def preprocess_dataset(cfg: PipelineConfig, dataset_dir: str, out_dir: str,
                             on_done: Tick = None) -> Tuple[np.ndarray, np.ndarray]:
    manifest = read_manifest(dataset_dir)
    cfg = config_for_manifest(cfg, manifest)
    prepare_output_directory(out_dir, clean=True)
    lg.info(f"Предобработка {len(manifest.entries)} образцов из '{dataset_dir}'.")

    def make_job(entry: DatasetEntry) -> Callable[[], np.ndarray]:
        def job() -> np.ndarray:
            snapshot = read_sample(os.path.join(dataset_dir, entry.path), sample_rate=cfg.radar.adc_rate_hz)
            return preprocess(snapshot, cfg, entry.label).stack().astype(np.float32)
        return job

    stacks = await run_indexed([make_job(entry) for entry in manifest.entries], cfg.workers, on_done)
    images = np.stack(stacks)
    labels = np.array([entry.label for entry in manifest.entries], dtype=np.int64)
    pairs = np.array([entry.pair for entry in manifest.entries], dtype=np.int64)
    write_features(out_dir, images, labels, pairs, source=os.path.basename(os.path.normpath(dataset_dir)))
    return images, labels


def _load_split(cfg: PipelineConfig, features_dir: str):
    images, labels, _ = read_features(features_dir)
    if images.shape[-1] != cfg.image_size:
        raise TrainingError(f"Размер изображений признаков {images.shape[-1]} не равен image_size={cfg.image_size}.")
    train_idx, test_idx = split(labels, cfg.split_ratio, cfg.seed)
    return images, labels, train_idx, test_idx


def train_features(cfg: PipelineConfig, features_dir: str, model_path: str, log_path: str,
                   on_epoch: Optional[Callable[[EpochRecord], None]] = None) -> TrainResult:
    images, labels, train_idx, _ = _load_split(cfg, features_dir)
    model = ClassifierModel.initialize(cfg.topology, seed=derive_seed(cfg.seed, 1))
    result = train(model, images[train_idx], labels[train_idx], cfg.train, on_epoch=on_epoch)
    save_model(result.model, model_path)
    write_training_log(result.log, log_path)
    return result


def evaluate_features(cfg: PipelineConfig, features_dir: str, model_path: str, report_path: str) -> ConfusionReport:
    images, labels, train_idx, test_idx = _load_split(cfg, features_dir)
    model = load_model(model_path)
    if model.topology.image_size != images.shape[-1]:
        raise TrainingError(f"Модель ожидает изображения {model.topology.image_size}, признаки — {images.shape[-1]}.")
    report = confusion_matrix(model, images[test_idx], labels[test_idx])
    write_report(report, report_path, os.path.splitext(report_path)[0] + ".csv",
                 num_test=test_idx.size, num_train=train_idx.size)
    lg.info(f"Оценка завершена: точность {100.0 * report.accuracy:.2f}% на {test_idx.size} образцах.")
    return report


@dataclass
class ExperimentReport:
    report: ConfusionReport
    log: List[EpochRecord]
    output_dir: str

    @property
    def accuracy(self) -> float:
        return self.report.accuracy


async def run_experiment(cfg: PipelineConfig, on_done: Tick = None,
                         on_epoch: Optional[Callable[[EpochRecord], None]] = None) -> ExperimentReport:
    """Генерация → предобработка → разбиение → обучение → матрица ошибок (все артефакты в cfg.output_dir)."""
    out = prepare_output_directory(cfg.output_dir)
    dataset_dir, features_dir = os.path.join(out, "dataset"), os.path.join(out, "features")
    await generate_dataset(cfg, dataset_dir, on_done)
    await preprocess_dataset(cfg, dataset_dir, features_dir, on_done)
    result = train_features(cfg, features_dir, os.path.join(out, "model.bin"),
                            os.path.join(out, "training_log.csv"), on_epoch)
    report = evaluate_features(cfg, features_dir, os.path.join(out, "model.bin"), os.path.join(out, "report.txt"))
    return ExperimentReport(report=report, log=result.log, output_dir=out)


async def run_separation_study(cfg: PipelineConfig, separations: Sequence[float],
                               on_done: Tick = None) -> List[Tuple[float, float]]:
    """Повторяет эксперимент для людей на 90° ∓ s; первая строка — опорная для оценки падения точности."""
    results = []
    for separation in separations:
        lg.info(f"Эксперимент с разнесением ±{separation}°.")
        experiment = await run_experiment(cfg.with_separation(separation), on_done)
        results.append((float(separation), experiment.accuracy))
    prepare_output_directory(cfg.output_dir)
    reference = results[0][1]
    with open(os.path.join(cfg.output_dir, "study.csv"), 'w', encoding='utf-8', newline='\n') as f:
        f.write("separation_deg,accuracy,drop_pp\n")
        for separation, accuracy in results:
            f.write(f"{separation:g},{100.0 * accuracy:.2f},{100.0 * (reference - accuracy):.2f}\n")
    return results
