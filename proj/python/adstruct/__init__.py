"""Pixelwise texture classification with adaptive multilevel dictionaries."""

from ._adstruct import (
    ClassifierModel,
    ContractViolation,
    DegenerateInput,
    Error,
    FormatError,
    InsufficientData,
    SmoothingParams,
    TrainConfig,
    alpha_expansion,
    argmin_labels,
    classify,
    cost_volume,
    dominant_singular_dir,
    energy,
    error_rate,
    extract_patches,
    load_model,
    max_eigvec,
    mirror_pad,
    overexpose,
    read_image,
    save_model,
    train,
    write_pgm,
)

__all__ = [name for name in dir() if not name.startswith("_")]
