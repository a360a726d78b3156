import csv
import io
from typing import Iterable, Optional

from rich import box
from rich.console import Console
from rich.table import Table

from net.evaluation import ConfusionReport
from net.training import EpochRecord
from sim.scene import class_title

REPORT_WIDTH = 200


def format_percent(value: float) -> str:
    return "0%" if value == 0 else f"{value:.1f}%"


def confusion_table(report: ConfusionReport, title: Optional[str] = None) -> Table:
    """Таблица в раскладке «Predicted v. Actual»: строки — истинный класс, столбцы — предсказанный."""
    num_classes = report.percentages.shape[0]
    table = Table(title=title, box=box.ASCII, show_lines=True)
    table.add_column("Predicted v. Actual", no_wrap=True)
    for k in range(num_classes):
        table.add_column(class_title(k), justify="right")
    for k in range(num_classes):
        table.add_row(class_title(k), *(format_percent(v) for v in report.percentages[k]))
    return table


def render_report(report: ConfusionReport, num_test: int, num_train: int) -> str:
    buffer = io.StringIO()
    console = Console(file=buffer, width=REPORT_WIDTH, color_system=None, force_terminal=False,
                      legacy_windows=False, emoji=False, highlight=False)
    console.print(confusion_table(report, title=f"Confusion matrix, 3 Combined Signs for "
                                                f"{report.percentages.shape[0]} Total Classes"))
    console.print(f"Train samples: {num_train}")
    console.print(f"Test samples: {num_test}")
    console.print(f"Overall accuracy: {100.0 * report.accuracy:.2f}%")
    return buffer.getvalue()


def write_report(report: ConfusionReport, text_path: str, csv_path: str, num_test: int, num_train: int):
    with open(text_path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(render_report(report, num_test=num_test, num_train=num_train))
    num_classes = report.percentages.shape[0]
    with open(csv_path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(["actual"] + [class_title(k) for k in range(num_classes)])
        for k in range(num_classes):
            writer.writerow([class_title(k)] + [f"{v:.1f}" for v in report.percentages[k]])
        writer.writerow(["accuracy", f"{100.0 * report.accuracy:.2f}"])


def write_training_log(records: Iterable[EpochRecord], path: str):
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(["epoch", "loss", "accuracy"])
        for record in records:
            writer.writerow([record.epoch, f"{record.loss:.6f}", f"{record.accuracy:.4f}"])
