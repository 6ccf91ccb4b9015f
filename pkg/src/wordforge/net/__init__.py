from .checkpoint import load_checkpoint, save_checkpoint
from .gradcheck import CheckReport, check_layer, check_network, rel_error
from .layers import Conv2D, Dense, Dropout, Flatten, MaxPool2, Param, ReLU, Reshape, Sigmoid, Softmax
from .losses import loss_charseq, loss_dict, loss_for_head, loss_ngram
from .network import LayerSpec, Network, NetworkSpec, base_spec, plus2_spec, shape_plan, small_spec
from .train import (
    SGD,
    EpochRecord,
    StageEvent,
    TrainConfig,
    TrainLog,
    TrainingDiverged,
    check_batch_size,
    incremental_train,
    required_batch_size,
    sgd_train,
    train_error,
)

__all__ = [
    "CheckReport", "Conv2D", "Dense", "Dropout", "EpochRecord", "Flatten",
    "LayerSpec", "MaxPool2", "Network", "NetworkSpec", "Param", "ReLU",
    "Reshape", "SGD", "Sigmoid", "Softmax", "StageEvent", "TrainConfig",
    "TrainLog", "TrainingDiverged", "base_spec", "check_batch_size",
    "check_layer", "check_network", "incremental_train", "load_checkpoint",
    "loss_charseq", "loss_dict", "loss_for_head", "loss_ngram", "plus2_spec",
    "rel_error", "required_batch_size", "save_checkpoint", "sgd_train",
    "shape_plan", "small_spec", "train_error",
]
