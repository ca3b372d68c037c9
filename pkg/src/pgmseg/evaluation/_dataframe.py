from __future__ import annotations

from dataclasses import asdict
from typing import Sequence

import pandas as pd
from tqdm import tqdm

from .dataset import EvalRecord


def _flatten(record: EvalRecord) -> dict:
    row = asdict(record)
    config = row.pop("config")
    row.update({f"config_{key}": value for key, value in config.items()})
    return row


def records_to_dataframe(
    records: Sequence[EvalRecord],
    show_progress: bool = False,
    index_column: str | None = "image_id",
) -> pd.DataFrame:
    """
    Convert evaluation records to a Pandas DataFrame.

    Configuration snapshots are expanded to ``config_<field>`` columns.

    Args:
        records: Evaluation records
        show_progress: Show progress bar
        index_column: Set column as index
    Returns:
        Pandas DataFrame
    """
    iterator = iter(records)
    if show_progress:
        iterator = tqdm(iterator, total=len(records), desc="Records")
    df = pd.DataFrame([_flatten(record) for record in iterator])
    if not df.empty:
        df = df.dropna(axis="columns", how="all")  # drop empty columns, e.g. error
        if index_column is not None:
            df = df.set_index(index_column)
    return df
