"""Row schemas and CSV serialization shared by the experiment drivers.

CSV files are the single source of truth for every experiment: the first
line is a comment carrying the seed and full configuration, the second the
column header. Floats are written with 17 significant digits so reruns with
identical flags reproduce identical bytes.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, fields


def format_value(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    if v is None:
        return ""
    return str(v)


@dataclass(frozen=True)
class TrajectoryRow:
    """One recorded training step of a regression or network run."""

    experiment_id: str
    seed: int
    L: int
    gamma: float
    C: float
    step: int
    train_loss: float
    test_error: float


@dataclass(frozen=True)
class SweepRow:
    """Aggregate kernel value at one (alpha, L) sweep cell."""

    alpha: float
    L: int
    mean_value: float
    std_error: float
    replications: int


@dataclass(frozen=True)
class EigenRow:
    """One spectrum entry; rel_discrepancy only when both sources exist."""

    k: int
    multiplicity: float
    eigenvalue: float
    source: str
    rel_discrepancy: float | None = None


@dataclass(frozen=True)
class WidthGapRow:
    """Width-convergence gaps for one (width, seed) cell."""

    m: int
    seed: int
    init_kernel_gap: float
    prediction_gap: float
    risk_gap: float


def render_csv(rows, config: dict) -> str:
    """Serialize dataclass rows with a config comment line and a header row."""
    if not rows:
        raise ValueError("no rows to serialize")
    buf = io.StringIO()
    meta = " ".join(f"{k}={format_value(v)}" for k, v in config.items())
    buf.write(f"# {meta}\n")
    names = [f.name for f in fields(rows[0])]
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    for row in rows:
        d = asdict(row)
        writer.writerow([format_value(d[name]) for name in names])
    return buf.getvalue()


def sort_trajectory(rows: list[TrajectoryRow]) -> list[TrajectoryRow]:
    """Trajectory CSVs are ordered by (experiment_id, seed, step)."""
    return sorted(rows, key=lambda r: (r.experiment_id, r.seed, r.step))
