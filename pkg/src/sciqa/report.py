"""Report rendering: plain-text results table, delimited export, and
answer-length histogram figures.

Scores are rounded to two decimals here and nowhere else.
"""

import csv
import logging
from pathlib import Path
from typing import List, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluation import EvalReport

log = logging.getLogger(__name__)


def render_table(reports: Sequence[EvalReport]) -> str:
    """One row per (dataset, system) pair with F1/EM columns, two decimals."""
    headers = ("Dataset", "System", "F1", "EM", "N")
    rows: List[tuple] = [headers]
    for report in reports:
        rows.append(
            (
                report.dataset_name,
                report.system_name,
                f"{report.macro_f1_x100:.2f}",
                f"{report.em_x100:.2f}",
                str(report.example_count),
            )
        )
    widths = [max(len(row[col]) for row in rows) for col in range(len(headers))]
    lines = []
    for i, row in enumerate(rows):
        cells = [
            cell.ljust(widths[col]) if col < 2 else cell.rjust(widths[col])
            for col, cell in enumerate(row)
        ]
        lines.append("  ".join(cells).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def write_csv(reports: Sequence[EvalReport], path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["dataset", "system", "f1", "em", "n"])
        for report in reports:
            writer.writerow(
                [
                    report.dataset_name,
                    report.system_name,
                    f"{report.macro_f1_x100:.2f}",
                    f"{report.em_x100:.2f}",
                    report.example_count,
                ]
            )


def plot_length_histograms(report: EvalReport, path) -> None:
    """Side-by-side bars of predicted vs gold answer lengths."""
    lengths = sorted(set(report.pred_lengths) | set(report.gold_lengths))
    if not lengths:
        lengths = [0]
    pred = [report.pred_lengths.get(length, 0) for length in lengths]
    gold = [report.gold_lengths.get(length, 0) for length in lengths]

    fig, ax = plt.subplots(figsize=(8, 4.5))
    width = 0.4
    positions = range(len(lengths))
    ax.bar([p - width / 2 for p in positions], pred, width=width, label="predicted")
    ax.bar([p + width / 2 for p in positions], gold, width=width, label="gold")
    ax.set_xticks(list(positions))
    ax.set_xticklabels([str(length) for length in lengths])
    ax.set_xlabel("answer length (tokens)")
    ax.set_ylabel("count")
    ax.set_title(f"Answer lengths: {report.system_name} on {report.dataset_name}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_report_files(report: EvalReport, out_dir) -> List[Path]:
    """Write report.txt, report.csv, and lengths.png into out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    table_path = out_dir / "report.txt"
    csv_path = out_dir / "report.csv"
    figure_path = out_dir / "lengths.png"
    table_path.write_text(render_table([report]), encoding="utf-8")
    write_csv([report], csv_path)
    plot_length_histograms(report, figure_path)
    return [table_path, csv_path, figure_path]
