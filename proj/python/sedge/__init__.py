"""Category-aware semantic edge detection.

Thin Python surface over the C++ core: network construction and inference,
ground-truth generation, the MF(ODS)/AP benchmark and HSV visualization.
"""

from sedge._core import (  # noqa: F401
    ConfigError,
    DataError,
    Network,
    NumericError,
    binary_edge_loss,
    cityscapes_class_names,
    cityscapes_hue_table,
    compute_beta,
    encode_hsv,
    evaluate,
    gen_synthetic,
    hsv_to_rgb,
    match,
    multilabel_loss,
    read_prediction,
    reweighted_softmax_loss,
    seg_to_eval_boundaries,
    seg_to_multiclass_edges,
    seg_to_training_edges,
    thin,
    tp_fp_overlay,
    uniform_thresholds,
    write_prediction,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Network",
    "NumericError",
    "binary_edge_loss",
    "cityscapes_class_names",
    "cityscapes_hue_table",
    "compute_beta",
    "encode_hsv",
    "evaluate",
    "gen_synthetic",
    "hsv_to_rgb",
    "match",
    "multilabel_loss",
    "read_prediction",
    "reweighted_softmax_loss",
    "seg_to_eval_boundaries",
    "seg_to_multiclass_edges",
    "seg_to_training_edges",
    "thin",
    "tp_fp_overlay",
    "uniform_thresholds",
    "write_prediction",
]
