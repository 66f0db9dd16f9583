"""Training and export side of the tropical compression toolkit.

Trains the reference one-hidden-layer ReLU networks, exports their
weights, input activations and labels in the toolkit's JSON/CSV
interchange formats, and trains the small head network that consumes
exported quotient features.  The two packages share no code: this one
only writes and reads the interchange files.
"""
from .data import binary_subset, load_dataset, read_idx, synthetic_digits
from .export import ExportBundle, forward_json, network_to_dict
from .train import HeadConfig, TrainConfig, train_head, train_mnist

__all__ = [
    "ExportBundle",
    "HeadConfig",
    "TrainConfig",
    "binary_subset",
    "forward_json",
    "load_dataset",
    "network_to_dict",
    "read_idx",
    "synthetic_digits",
    "train_head",
    "train_mnist",
]

__version__ = "0.1.0"
