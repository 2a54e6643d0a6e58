"""Named-column numeric tables with missing cells"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd

from app.core.exceptions import InputError, SchemaError


@dataclass(frozen=True)
class DataTable:
    """Column-oriented table of float64 cells; NaN marks a missing cell"""

    frame: pd.DataFrame

    def __post_init__(self) -> None:
        names = list(self.frame.columns)
        if len(set(names)) != len(names):
            raise SchemaError(f"Column names must be unique, got {names}")
        for name in names:
            if not isinstance(name, str):
                raise SchemaError(f"Column names must be strings, got {name!r}")
            if not pd.api.types.is_numeric_dtype(self.frame[name]):
                raise SchemaError(f"Column '{name}' is not numeric")
        values = self.frame.to_numpy(dtype=np.float64, na_value=np.nan)
        if np.isinf(values).any():
            raise InputError("Table cells must be finite or missing")
        frame = pd.DataFrame(values, columns=names).reset_index(drop=True)
        object.__setattr__(self, "frame", frame)

    @classmethod
    def from_columns(cls, columns: Mapping[str, Sequence[Optional[float]]]) -> "DataTable":
        lengths = {len(values) for values in columns.values()}
        if len(lengths) > 1:
            raise SchemaError("All columns must share one row count")
        data = {
            name: [np.nan if v is None else float(v) for v in values]
            for name, values in columns.items()
        }
        return cls(pd.DataFrame(data, columns=list(columns), dtype=np.float64))

    @property
    def column_names(self) -> List[str]:
        return list(self.frame.columns)

    @property
    def row_count(self) -> int:
        return len(self.frame)

    def column(self, name: str) -> np.ndarray:
        if name not in self.frame.columns:
            raise SchemaError(f"Unknown column '{name}'")
        return self.frame[name].to_numpy(dtype=np.float64)

    def to_numpy(self, columns: Optional[Sequence[str]] = None) -> np.ndarray:
        names = list(columns) if columns is not None else self.column_names
        missing = [n for n in names if n not in self.frame.columns]
        if missing:
            raise SchemaError(f"Unknown columns {missing}")
        return self.frame[names].to_numpy(dtype=np.float64)

    def missing_counts(self) -> Dict[str, int]:
        return {name: int(count) for name, count in self.frame.isna().sum().items()}

    def has_missing(self) -> bool:
        return bool(self.frame.isna().to_numpy().any())

    def equals(self, other: "DataTable") -> bool:
        return self.column_names == other.column_names and self.frame.equals(other.frame)


def read_table_csv(path: Union[str, Path]) -> DataTable:
    """Read a UTF-8 CSV whose first row is the header; empty fields are missing"""
    try:
        frame = pd.read_csv(path, encoding="utf-8", float_precision="round_trip")
    except FileNotFoundError as exc:
        raise InputError(f"Cannot read {path}: file not found") from exc
    except (pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise SchemaError(f"Cannot parse {path}: {exc}") from exc
    except pd.errors.EmptyDataError as exc:
        raise SchemaError(f"{path} has no header row") from exc
    return DataTable(frame)


def write_table_csv(table: DataTable, path: Union[str, Path]) -> None:
    table.frame.to_csv(path, index=False, na_rep="", lineterminator="\n")
