import argparse
import os
from contextlib import contextmanager
from typing import Awaitable, Callable, Dict, Iterator, List

import numpy as np
from rich import box
from rich.console import Console
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeElapsedColumn
from rich.table import Table

from dsp.beamform import array_factor, beampattern
from dsp.tfr import write_csv, write_pgm
from errors import InvalidArgumentError, StorageError
from logger import lg
from net.training import EpochRecord
from pipeline.experiment import (config_for_manifest, evaluate_features, generate_dataset, preprocess_dataset,
                                 run_experiment, run_separation_study, train_features)
from pipeline.preprocess import PATH_NAMES, preprocess
from pipeline.report import confusion_table, format_percent
from pipeline.settings import PipelineConfig, load_pipeline_config
from pipeline.storage import MANIFEST_NAME, read_manifest, read_sample
from sim.scene import NUM_CLASSES
from utils import parse_float_tuple, prepare_output_directory

console = Console()


class CommandRunner:
    """Выполняет подкоманды CLI: каждая команда — асинхронный обработчик, возвращающий код выхода."""

    def __init__(self):
        self.commands: Dict[str, Callable[[argparse.Namespace], Awaitable[int]]] = {
            "generate": self._cmd_generate,
            "preprocess": self._cmd_preprocess,
            "train": self._cmd_train,
            "evaluate": self._cmd_evaluate,
            "export-spectrogram": self._cmd_export_spectrogram,
            "run-all": self._cmd_run_all,
            "study": self._cmd_study,
            "beampattern": self._cmd_beampattern,
        }

    async def run(self, args: argparse.Namespace) -> int:
        handler = self.commands.get(args.command)
        if handler is None:
            raise InvalidArgumentError(f"Неизвестная команда '{args.command}'.")
        lg.info(f"Выполняется команда '{args.command}'.")
        return await handler(args)

    @staticmethod
    def _config(args: argparse.Namespace) -> PipelineConfig:
        return load_pipeline_config(getattr(args, "config", None))

    @contextmanager
    def _progress(self, description: str, total: int) -> Iterator[Callable[[], None]]:
        with Progress(TextColumn("[bold blue]{task.description}"), BarColumn(), MofNCompleteColumn(),
                      TimeElapsedColumn(), console=console, transient=True) as progress:
            task = progress.add_task(description, total=total)
            yield lambda: progress.advance(task)

    @staticmethod
    def _print_epoch(record: EpochRecord):
        console.print(f"Эпоха {record.epoch:3d}: потери {record.loss:.4f}, "
                      f"точность на обучении {100.0 * record.accuracy:.1f}%")

    async def _cmd_generate(self, args: argparse.Namespace) -> int:
        cfg = self._config(args)
        total = NUM_CLASSES * cfg.samples_per_class * cfg.subject_pairs
        with self._progress("Генерация сцен", total) as tick:
            manifest = await generate_dataset(cfg, args.out, tick)
        console.print(f"[bold green]Набор данных: {len(manifest.entries)} образцов в '{args.out}'.[/bold green]")
        return 0

    async def _cmd_preprocess(self, args: argparse.Namespace) -> int:
        cfg = self._config(args)
        total = len(read_manifest(args.dataset).entries)
        with self._progress("Предобработка", total) as tick:
            images, _ = await preprocess_dataset(cfg, args.dataset, args.out, tick)
        console.print(f"[bold green]Признаки {images.shape} записаны в '{args.out}'.[/bold green]")
        return 0

    async def _cmd_train(self, args: argparse.Namespace) -> int:
        cfg = self._config(args)
        log_path = args.log or os.path.splitext(args.model)[0] + "_training_log.csv"
        result = train_features(cfg, args.features, args.model, log_path, on_epoch=self._print_epoch)
        console.print(f"[bold green]Модель сохранена в '{args.model}' после {len(result.log)} эпох.[/bold green]")
        return 0

    async def _cmd_evaluate(self, args: argparse.Namespace) -> int:
        cfg = self._config(args)
        report = evaluate_features(cfg, args.features, args.model, args.report)
        console.print(confusion_table(report, title="Predicted v. Actual"))
        console.print(f"[bold green]Общая точность: {100.0 * report.accuracy:.2f}%[/bold green]")
        return 0

    async def _cmd_export_spectrogram(self, args: argparse.Namespace) -> int:
        cfg = self._config(args)
        dataset_dir = os.path.dirname(os.path.dirname(os.path.abspath(args.sample)))
        if os.path.exists(os.path.join(dataset_dir, MANIFEST_NAME)):
            cfg = config_for_manifest(cfg, read_manifest(dataset_dir))
            lg.info(f"Параметры радара взяты из манифеста '{dataset_dir}'.")
        snapshot = read_sample(args.sample, sample_rate=cfg.radar.adc_rate_hz)
        triple = preprocess(snapshot, cfg)
        image = getattr(triple, args.path)
        base = args.out[:-4] if args.out.lower().endswith(".pgm") else args.out
        parent = os.path.dirname(base)
        if parent:
            prepare_output_directory(parent)
        write_pgm(image, base + ".pgm")
        write_csv(image, base + ".csv")
        console.print(f"[bold green]Спектрограмма '{args.path}' записана в '{base}.pgm' и '{base}.csv'.[/bold green]")
        return 0

    async def _cmd_run_all(self, args: argparse.Namespace) -> int:
        cfg = self._config(args)
        total = 2 * NUM_CLASSES * cfg.samples_per_class * cfg.subject_pairs
        with self._progress("Генерация и предобработка", total) as tick:
            experiment = await run_experiment(cfg, tick, on_epoch=self._print_epoch)
        console.print(confusion_table(experiment.report, title="Predicted v. Actual"))
        console.print(f"[bold green]Общая точность: {100.0 * experiment.accuracy:.2f}%. "
                      f"Результаты в '{experiment.output_dir}'.[/bold green]")
        return 0

    async def _cmd_study(self, args: argparse.Namespace) -> int:
        cfg = self._config(args)
        separations = parse_float_tuple(args.separations, "separations")
        if not separations:
            raise InvalidArgumentError("Список разнесений пуст.")
        total = 2 * NUM_CLASSES * cfg.samples_per_class * cfg.subject_pairs * len(separations)
        with self._progress("Серия экспериментов", total) as tick:
            results = await run_separation_study(cfg, separations, tick)
        table = Table(title="Точность в зависимости от разнесения", box=box.SIMPLE)
        table.add_column("±угол, °", justify="right")
        table.add_column("Точность", justify="right")
        table.add_column("Падение, п.п.", justify="right")
        for separation, accuracy in results:
            table.add_row(f"{separation:g}", format_percent(100.0 * accuracy),
                          f"{100.0 * (results[0][1] - accuracy):.2f}")
        console.print(table)
        return 0

    async def _cmd_beampattern(self, args: argparse.Namespace) -> int:
        cfg = self._config(args)
        array = cfg.array_config()
        subjects: List[float] = list(cfg.subject_angles)
        table = Table(title=f"Усиление лучей, M={array.num_elements}", box=box.SIMPLE)
        table.add_column("Луч", justify="right")
        for theta in subjects:
            table.add_column(f"на {np.rad2deg(theta):.1f}°", justify="right")
        for look in cfg.look_angles:
            gains = beampattern(array, look, subjects)
            table.add_row(f"{np.rad2deg(look):.1f}°", *(f"{g:.4f}" for g in gains))
        console.print(table)
        leakage = abs(array_factor(array, cfg.look_angles[0], subjects[1]))
        console.print(f"Утечка луча θ₁ на человека θ₂: |AF| = {leakage:.4f} "
                      f"({20.0 * np.log10(max(leakage, 1e-12) / array.num_elements):.1f} дБ).")
        return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Распознавание жестов нескольких людей по сигналу FMCW-радара")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p: argparse.ArgumentParser, required: bool = False) -> argparse.ArgumentParser:
        p.add_argument('--config', type=str, required=required, help="Файл конфигурации key=value")
        return p

    p = with_config(sub.add_parser("generate", help="Сгенерировать набор данных"))
    p.add_argument('--out', type=str, required=True, help="Папка набора данных")

    p = with_config(sub.add_parser("preprocess", help="Построить тройки спектрограмм"))
    p.add_argument('--dataset', type=str, required=True, help="Папка набора данных")
    p.add_argument('--out', type=str, required=True, help="Папка признаков")

    p = with_config(sub.add_parser("train", help="Обучить классификатор"))
    p.add_argument('--features', type=str, required=True, help="Папка признаков")
    p.add_argument('--model', type=str, required=True, help="Файл модели")
    p.add_argument('--log', type=str, default=None, help="CSV журнала обучения")

    p = with_config(sub.add_parser("evaluate", help="Матрица ошибок на тестовой выборке"))
    p.add_argument('--features', type=str, required=True, help="Папка признаков")
    p.add_argument('--model', type=str, required=True, help="Файл модели")
    p.add_argument('--report', type=str, required=True, help="Текстовый отчет (рядом пишется .csv)")

    p = with_config(sub.add_parser("export-spectrogram", help="Сохранить спектрограмму образца"))
    p.add_argument('--sample', type=str, required=True, help="Файл образца")
    p.add_argument('--out', type=str, required=True, help="Путь без расширения или .pgm")
    p.add_argument('--path', type=str, choices=PATH_NAMES, default="combined", help="Путь обработки")

    with_config(sub.add_parser("run-all", help="Полный эксперимент"), required=True)

    p = with_config(sub.add_parser("study", help="Точность при разном разнесении людей"), required=True)
    p.add_argument('--separations', type=str, default="30,15", help="Углы от нормали, через запятую")

    with_config(sub.add_parser("beampattern", help="Усиление лучей в направлениях людей"))
    return parser


def check_paths(args: argparse.Namespace):
    for name in ("dataset", "features", "sample"):
        path = getattr(args, name, None)
        if path is not None and not os.path.exists(path):
            raise StorageError(f"Путь '{path}' (--{name}) не существует.")
