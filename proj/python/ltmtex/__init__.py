"""Local Tchebichef Moment texture descriptors, LBP baselines and a Random Forest harness."""

from ._core import (
    DatasetError,
    EvalReport,
    ForestModel,
    ForestParams,
    ImageError,
    LtmConfig,
    ValueMode,
    __version__,
    all_kernels,
    basis,
    compare,
    cross_validate,
    evaluate_split,
    extract_lbp,
    extract_ltm,
    generate_synthetic,
    kernel,
    lbp_image,
    lehmer_code,
    load_image,
    ltm_image,
    moment_at,
    run_experiment,
    train,
    write_image,
)

__all__ = [
    "DatasetError",
    "EvalReport",
    "ForestModel",
    "ForestParams",
    "ImageError",
    "LtmConfig",
    "ValueMode",
    "__version__",
    "all_kernels",
    "basis",
    "compare",
    "cross_validate",
    "evaluate_split",
    "extract_lbp",
    "extract_ltm",
    "generate_synthetic",
    "kernel",
    "lbp_image",
    "lehmer_code",
    "load_image",
    "ltm_image",
    "moment_at",
    "run_experiment",
    "train",
    "write_image",
]
