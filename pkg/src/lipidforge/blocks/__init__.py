"""Head and tail building blocks: filters, dataset files and the toy space."""

from .build import BuildReport, build_dataset
from .dataset import BlockDataset, BuildingBlock, LoadStats, load_dataset, sample_subsets, save_dataset
from .filters import (
    FilterResult,
    HeadFilterConfig,
    TailFilterConfig,
    extract_tails,
    filter_head,
    filter_tail,
    longest_acyclic_carbon_chain,
)
from .toy import pool_dataset, toy_dataset

__all__ = [
    "BlockDataset", "BuildReport", "BuildingBlock", "FilterResult", "HeadFilterConfig", "LoadStats",
    "TailFilterConfig", "build_dataset", "extract_tails", "filter_head", "filter_tail",
    "load_dataset", "longest_acyclic_carbon_chain", "pool_dataset", "sample_subsets", "save_dataset",
    "toy_dataset",
]
