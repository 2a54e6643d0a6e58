"""Data cleaning and z-score normalization"""

from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from app.core.exceptions import DegenerateColumnError, InputError, SchemaError
from app.core.logging import get_logger
from app.data.sequences import SequenceDataset
from app.data.tables import DataTable
from app.schemas.preprocessing import CleanPolicy, CleanReport, ScalerState

logger = get_logger(__name__)

# A column whose spread is this small relative to its magnitude counts as constant
DEGENERATE_TOLERANCE = 1e-12


def zero_spread(spread, magnitude) -> np.ndarray:
    """True where ``spread`` is rounding noise on ``magnitude``.

    Purely relative, so rescaling a column by any positive factor never
    changes the verdict. An exactly constant column has spread 0 and always
    qualifies.
    """
    return np.asarray(spread) <= DEGENERATE_TOLERANCE * np.abs(np.asarray(magnitude))


def _scaled_columns(table: DataTable, exclude: Sequence[str]) -> List[str]:
    unknown = [name for name in exclude if name not in table.column_names]
    if unknown:
        raise SchemaError(f"Excluded columns not in table: {unknown}")
    return [name for name in table.column_names if name not in exclude]


def clean(table: DataTable, policy: Optional[CleanPolicy] = None) -> Tuple[DataTable, CleanReport]:
    """Fill or drop missing cells, then remove exact duplicate rows.

    Missing cells are handled first so that rows made identical by imputation
    are caught by the duplicate pass, which keeps the first occurrence.
    Excluded columns are neither imputed nor used to decide row drops.
    """
    policy = policy or CleanPolicy()
    if table.row_count == 0 or not table.column_names:
        raise InputError("Cannot clean an empty table")
    columns = _scaled_columns(table, policy.exclude)

    frame = table.frame.copy()
    input_rows = len(frame)
    imputed = {name: 0 for name in columns}
    rows_dropped = 0

    if policy.missing == "drop_row":
        keep = ~frame[columns].isna().any(axis=1)
        rows_dropped = int((~keep).sum())
        frame = frame[keep]
    else:
        for name in columns:
            holes = frame[name].isna()
            count = int(holes.sum())
            if count == 0:
                continue
            if policy.missing == "impute_mean":
                if count == len(frame):
                    raise DegenerateColumnError(
                        f"Column '{name}' has no values to impute a mean from"
                    )
                fill = float(frame.loc[~holes, name].mean())
            else:
                fill = policy.fill_value
            frame.loc[holes, name] = fill
            imputed[name] = count

    before = len(frame)
    frame = frame.drop_duplicates(keep="first")
    duplicates = before - len(frame)

    report = CleanReport(
        input_rows=input_rows,
        output_rows=len(frame),
        duplicates_removed=duplicates,
        rows_dropped=rows_dropped,
        missing_imputed=imputed,
    )
    logger.info(
        "Cleaned %d rows: %d duplicates removed, %d dropped, %d cells imputed",
        input_rows,
        duplicates,
        rows_dropped,
        sum(imputed.values()),
    )
    return DataTable(frame.reset_index(drop=True)), report


def fit_zscore(table: DataTable, exclude: Sequence[str] = ()) -> ScalerState:
    """Per-column mean and population (divide by n) standard deviation"""
    columns = _scaled_columns(table, exclude)
    if table.row_count == 0 or not columns:
        raise SchemaError("Cannot fit a scaler on an empty table")
    values = table.to_numpy(columns)
    if np.isnan(values).any():
        raise InputError("Cannot fit a scaler on a table with missing cells; clean it first")

    mean = values.mean(axis=0)
    spread = values.std(axis=0)
    degenerate = zero_spread(spread, mean)
    spread = np.where(degenerate, 0.0, spread)

    state = ScalerState(
        columns=columns,
        mean=[float(m) for m in mean],
        spread=[float(s) for s in spread],
        degenerate=[bool(d) for d in degenerate],
    )
    if state.degenerate_columns:
        logger.warning("Zero-spread columns will map to 0: %s", state.degenerate_columns)
    return state


def _apply(values: np.ndarray, state: ScalerState) -> np.ndarray:
    mean = np.asarray(state.mean)
    spread = np.asarray(state.spread)
    degenerate = np.asarray(state.degenerate, dtype=bool)
    safe = np.where(degenerate, 1.0, spread)
    return np.where(degenerate, 0.0, (values - mean) / safe)


def transform_zscore(
    table: DataTable, state: ScalerState, passthrough: Sequence[str] = ()
) -> DataTable:
    """Map each cell to (value − mean)/spread; degenerate columns become 0"""
    columns = _scaled_columns(table, passthrough)
    if sorted(columns) != sorted(state.columns):
        raise SchemaError(
            f"Scaler was fit on columns {state.columns}, table has {columns}"
        )
    frame = table.frame.copy()
    frame[state.columns] = _apply(table.to_numpy(state.columns), state)
    return DataTable(frame)


def standardize(table: DataTable, exclude: Sequence[str] = ()) -> Tuple[DataTable, ScalerState]:
    """Fit a z-score scaler and apply it to the same table"""
    state = fit_zscore(table, exclude)
    return transform_zscore(table, state, passthrough=exclude), state


def sequence_table(data: SequenceDataset) -> DataTable:
    """Flatten samples and time steps into rows of a feature table"""
    flat = data.features.reshape(-1, data.n_features)
    return DataTable(pd.DataFrame(flat, columns=list(data.feature_names)))


def fit_sequence_scaler(data: SequenceDataset) -> ScalerState:
    """Fit one scaler per feature over every sample and time step"""
    return fit_zscore(sequence_table(data))


def apply_sequence_scaler(data: SequenceDataset, state: ScalerState) -> SequenceDataset:
    if list(data.feature_names) != list(state.columns):
        raise SchemaError(
            f"Scaler was fit on features {state.columns}, data has {list(data.feature_names)}"
        )
    return data.with_features(_apply(data.features, state))
