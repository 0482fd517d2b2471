"""Osteoarthritis severity grading from hand radiographs.

Pipeline: Netpbm image -> grayscale -> background threshold -> 128 quantised
histogram probabilities + 4 first-order texture statistics -> min-max
scaling to [0.1, 0.9] -> 132-5-2 sigmoid network trained by backprop with
momentum -> grade 1..4.
"""

from .errors import OagradeError
from .features import extract_features
from .imagecore import GrayImage, RgbImage, parse_netpbm, rgb_to_gray, threshold
from .neuralnet import MlpConfig, MlpModel
from .pipeline import (
    EvaluationReport,
    ModelBundle,
    PreprocessingRecord,
    evaluate,
    load_bundle,
    load_manifest,
    predict,
    save_bundle,
    train_pipeline,
)

__version__ = "0.1.0"
