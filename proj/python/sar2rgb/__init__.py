"""SAR to RGB tile translation toolkit (C++ core)."""

from ._core import (
    Tile,
    heuristic_cloud_mask,
    infer,
    mae,
    nodata_ratio,
    psnr,
    qa60_cloud_mask,
    read_tile,
    run_cli,
    screen_tile,
    split_holdout_indices,
    write_tile,
)

__all__ = [
    "Tile",
    "heuristic_cloud_mask",
    "infer",
    "mae",
    "nodata_ratio",
    "psnr",
    "qa60_cloud_mask",
    "read_tile",
    "run_cli",
    "screen_tile",
    "split_holdout_indices",
    "write_tile",
]
