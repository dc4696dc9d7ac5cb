"""CSV tables with round-trip precision"""

import sys
from typing import IO, Any
import pandas as pd
from utils.consts import CSV_DIGITS


def write_table(rows: list[dict[str, Any]], target: str | IO[str] | None = None):
    """
    Writes rows as a CSV table with a header row.
    Args:
        rows (list[dict]): Records sharing the same keys, in column order.
        target (str | IO | None): Path or text stream; stdout when None.
    Note:
        Reals are printed with 17 significant digits so that reading the file
        back reproduces every float exactly.
    """

    frame = pd.DataFrame.from_records(rows)
    frame.to_csv(
        sys.stdout if target is None else target,
        index=False,
        float_format=f"%.{CSV_DIGITS}g",
        lineterminator="\n",
    )


def read_table(source: str | IO[str]) -> pd.DataFrame:
    return pd.read_csv(source, float_precision="round_trip")
