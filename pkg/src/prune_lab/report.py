"""Table emission: aggregate results as CSV (human table style) and JSON."""

from __future__ import annotations

import csv
import json
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path


def round2(x: float) -> str:
    """Two decimals, half away from zero."""
    return str(Decimal(repr(x)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def format_mean_std(mean: float, std: float) -> str:
    if mean != mean:  # all runs failed
        return "failed"
    return f"{round2(mean)} ± {round2(std)}"


def format_relative_budget(value: float | None) -> str:
    return f"{round2(value)}x" if value is not None else ">max"


JSON_FIELDS = ("schedule", "sparsity", "alpha", "beta", "mean_acc", "std_acc",
               "n_seeds", "failed_seeds", "budget_epochs", "budget_steps",
               "relative_budget", "reached")


def emit_tables(aggregates: list[dict], out_dir: str | Path, name: str) -> tuple[Path, Path]:
    """Write aggregate cells as {name}.csv and {name}.json in out_dir.

    CSV cells carry "mean ± std" accuracy text (two decimals) and "1.00x" /
    ">max" relative budgets; the JSON keeps full-precision numbers. An empty
    aggregate list yields a header-only CSV.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{name}.csv"
    json_path = out_dir / f"{name}.json"

    is_budget = bool(aggregates) and "relative_budget" in aggregates[0]
    is_sweep = bool(aggregates) and "alpha" in aggregates[0]
    if is_budget:
        columns = ["schedule", "budget_epochs", "budget_steps", "relative_budget"]
    elif is_sweep:
        columns = ["schedule", "alpha", "beta", "sparsity", "accuracy", "n_seeds"]
    else:
        columns = ["schedule", "sparsity", "accuracy", "n_seeds"]

    with open(csv_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for cell in aggregates:
            row = []
            for col in columns:
                if col == "accuracy":
                    row.append(format_mean_std(cell["mean_acc"], cell["std_acc"]))
                elif col == "relative_budget":
                    row.append(format_relative_budget(cell["relative_budget"]))
                elif col in ("budget_epochs", "budget_steps"):
                    row.append(cell[col] if cell[col] is not None else ">max")
                else:
                    row.append(cell[col])
            writer.writerow(row)

    payload = [
        {k: cell[k] for k in JSON_FIELDS if k in cell} for cell in aggregates
    ]
    json_path.write_text(json.dumps(payload, indent=2, allow_nan=True))
    return csv_path, json_path
