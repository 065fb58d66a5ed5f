from .ldid import FormatError, read_dataset, write_dataset
from .patches import Patch, PatchSet, decompose_patches, stitch_indices
from .trajectory import Dataset, Trajectory, make_irregular, split_dataset

__all__ = [
    "Trajectory",
    "Dataset",
    "split_dataset",
    "make_irregular",
    "Patch",
    "PatchSet",
    "decompose_patches",
    "stitch_indices",
    "read_dataset",
    "write_dataset",
    "FormatError",
]
