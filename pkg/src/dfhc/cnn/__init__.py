from .layers import Conv2D, Dense, Flatten, MaxPool2, ReLU, check_tensor4, cross_entropy, softmax
from .model import CnnModel, build_model, load_model, save_model
from .training import (
    LabeledImages,
    Metrics,
    SplitDataset,
    TrainingReport,
    evaluate,
    split_7_1_2,
    train,
)

__all__ = [
    "CnnModel",
    "Conv2D",
    "Dense",
    "Flatten",
    "LabeledImages",
    "MaxPool2",
    "Metrics",
    "ReLU",
    "SplitDataset",
    "TrainingReport",
    "build_model",
    "check_tensor4",
    "cross_entropy",
    "evaluate",
    "load_model",
    "save_model",
    "softmax",
    "split_7_1_2",
    "train",
]
