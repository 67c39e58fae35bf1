"""CSV and schema loading for the plot scripts.

Plots never recompute physics or statistics: every plotted quantity must
exist as a CSV column, and each column must be declared in the schema file
emitted next to the CSV by the simulator CLI.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np


class MissingColumnError(KeyError):
    """A required column is absent from the CSV or its schema."""

    def __init__(self, column: str, where: str):
        super().__init__(f"column {column!r} missing from {where}")
        self.column = column


class EmptyCsvError(ValueError):
    """The CSV holds a header but no data rows (or nothing at all)."""


class Table:
    """One loaded CSV plus the schema entry that describes it."""

    def __init__(self, path: Path, columns: list[str], data: np.ndarray, schema_names: set[str]):
        self.path = path
        self.columns = columns
        self.data = data
        self.schema_names = schema_names

    def require(self, *names: str) -> list[np.ndarray]:
        out = []
        for name in names:
            if name not in self.schema_names:
                raise MissingColumnError(name, f"schema for {self.path.name}")
            if name not in self.columns:
                raise MissingColumnError(name, str(self.path))
            out.append(self.data[:, self.columns.index(name)])
        return out

    def uav_ids(self) -> list[int]:
        ids = sorted(
            int(m.group(1))
            for c in self.columns
            if (m := re.fullmatch(r"u(\d+)_true_x", c))
        )
        return ids


def load_schema(path: Path) -> dict[str, set[str]]:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    return {
        name: {col["name"] for col in spec["columns"]}
        for name, spec in payload.get("files", {}).items()
    }


def load_table(csv_path: Path, schema_path: Path | None = None) -> Table:
    csv_path = Path(csv_path)
    if schema_path is None:
        schema_path = csv_path.parent / "schema.json"
    schema = load_schema(Path(schema_path))
    if csv_path.name not in schema:
        raise MissingColumnError(csv_path.name, f"schema file {schema_path}")
    text = csv_path.read_text(encoding="utf-8").strip()
    lines = text.splitlines()
    if not lines or not lines[0]:
        raise EmptyCsvError(f"{csv_path}: no header row")
    columns = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        rows.append([_parse_cell(v) for v in line.split(",")])
    if not rows:
        raise EmptyCsvError(f"{csv_path}: no data rows")
    width = len(columns)
    data = np.full((len(rows), width), np.nan)
    for i, row in enumerate(rows):
        for j, value in enumerate(row[:width]):
            if isinstance(value, float):
                data[i, j] = value
    table = Table(csv_path, columns, data, schema[csv_path.name])
    table.raw_rows = [line.split(",") for line in lines[1:]]
    return table


def _parse_cell(raw: str):
    try:
        return float(raw)
    except ValueError:
        return raw
