"""Training the reference networks and the feature head.

Both trainings are CPU-sized: Adam on cross-entropy (binary class
pairs use a single logit with the sigmoid loss), batch 128, and a
seed that fixes initialization and batch order, so a rerun with the
same config reproduces the exported files byte for byte.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import torch

from .data import binary_subset, load_dataset
from .export import ExportBundle, network_to_dict, write_bundle


@dataclass(frozen=True)
class TrainConfig:
    """One reference-network training run.

    classes None trains the ten-way softmax net; a pair (i, j) trains
    a single-logit net on those two classes, where a nonnegative score
    means class j.  data_dir None selects the synthetic dataset.
    """

    data_dir: Optional[str] = None
    classes: Optional[tuple[int, int]] = None
    hidden: int = 100
    epochs: int = 6
    batch: int = 128
    lr: float = 1e-3
    seed: int = 0
    train_count: Optional[int] = None
    test_count: Optional[int] = None
    out_dir: str = "."

    def __post_init__(self):
        if self.classes is not None and len(self.classes) != 2:
            raise ValueError("classes must be a pair")
        if self.hidden < 1 or self.epochs < 1 or self.batch < 1:
            raise ValueError("hidden, epochs and batch must be positive")


@dataclass(frozen=True)
class HeadConfig:
    """Head training on exported feature CSVs.

    Feature exports are small (hundreds of rows), so one epoch is only
    a few optimizer steps; the default epoch count reflects that.
    """

    units: int = 100
    epochs: int = 200
    batch: int = 128
    lr: float = 1e-3
    seed: int = 0


def _mlp(inputs: int, hidden: int, outputs: int,
         seed: int) -> torch.nn.Sequential:
    torch.manual_seed(seed)
    return torch.nn.Sequential(
        torch.nn.Linear(inputs, hidden),
        torch.nn.ReLU(),
        torch.nn.Linear(hidden, outputs))


def _fit(model: torch.nn.Sequential, x: np.ndarray, y: np.ndarray,
         binary: bool, epochs: int, batch: int, lr: float,
         seed: int) -> None:
    torch.set_num_threads(1)
    inputs = torch.as_tensor(x, dtype=torch.float32)
    if binary:
        targets = torch.as_tensor(y, dtype=torch.float32)[:, None]
        loss_fn = torch.nn.BCEWithLogitsLoss()
    else:
        targets = torch.as_tensor(y, dtype=torch.long)
        loss_fn = torch.nn.CrossEntropyLoss()
    optim = torch.optim.Adam(model.parameters(), lr=lr)
    for epoch in range(epochs):
        order = np.random.default_rng((seed, epoch)).permutation(len(y))
        for start in range(0, len(order), batch):
            rows = order[start:start + batch]
            optim.zero_grad()
            loss = loss_fn(model(inputs[rows]), targets[rows])
            loss.backward()
            optim.step()


def _error_rate(model: torch.nn.Sequential, x: np.ndarray, y: np.ndarray,
                binary: bool) -> float:
    with torch.no_grad():
        scores = model(torch.as_tensor(x, dtype=torch.float32)).numpy()
    predicted = ((scores[:, 0] >= 0).astype(np.int64) if binary
                 else scores.argmax(axis=1))
    return float((predicted != y).mean())


def train_mnist(config: TrainConfig) -> ExportBundle:
    """Train one reference network and export its bundle."""
    data = load_dataset(config.data_dir, seed=config.seed,
                        train_count=config.train_count,
                        test_count=config.test_count)
    binary = config.classes is not None
    if binary:
        pair = (int(config.classes[0]), int(config.classes[1]))
        data["x_train"], data["y_train"] = binary_subset(
            data["x_train"], data["y_train"], pair)
        data["x_test"], data["y_test"] = binary_subset(
            data["x_test"], data["y_test"], pair)
        if not len(data["y_train"]) or not len(data["y_test"]):
            raise ValueError(f"no rows for classes {pair}")
    model = _mlp(data["x_train"].shape[1], config.hidden,
                 1 if binary else 10, config.seed)
    _fit(model, data["x_train"], data["y_train"], binary,
         config.epochs, config.batch, config.lr, config.seed)
    meta = {
        "classes": list(config.classes) if binary else "all",
        "label_rule": ("nonnegative score means the second class"
                       if binary else "argmax over ten outputs"),
        "hidden": config.hidden, "epochs": config.epochs,
        "batch": config.batch, "lr": config.lr, "seed": config.seed,
        "train_error": _error_rate(model, data["x_train"],
                                   data["y_train"], binary),
        "test_error": _error_rate(model, data["x_test"],
                                  data["y_test"], binary),
    }
    return write_bundle(config.out_dir, network_to_dict(model), model,
                        data, meta)


def train_head(features: np.ndarray, labels: np.ndarray,
               config: HeadConfig = HeadConfig(),
               classes: Optional[int] = None) -> tuple[dict, dict]:
    """Train the small classifier head on exported feature rows.

    Returns the serialized network and its metrics; the architecture
    is feature_dim -> units (ReLU) -> classes.
    """
    features = np.atleast_2d(np.asarray(features, dtype=float))
    labels = np.asarray(labels, dtype=np.int64)
    if len(features) != len(labels):
        raise ValueError("features and labels disagree in length")
    num_classes = int(labels.max()) + 1 if classes is None else int(classes)
    if num_classes < 2:
        raise ValueError("head needs at least two classes")
    # Exported feature columns carry large common offsets, so train on
    # standardized values and fold the standardization into the first
    # layer afterwards; the exported net then reads raw features.
    mean = features.mean(axis=0)
    scale = features.std(axis=0)
    scale[scale < 1e-9] = 1.0
    model = _mlp(features.shape[1], config.units, num_classes, config.seed)
    _fit(model, (features - mean) / scale, labels, False, config.epochs,
         config.batch, config.lr, config.seed)
    with torch.no_grad():
        shift = torch.as_tensor(mean / scale, dtype=torch.float32)
        model[0].bias -= model[0].weight @ shift
        model[0].weight /= torch.as_tensor(scale, dtype=torch.float32)
    net = network_to_dict(model)
    params = sum(len(l["W"]) * len(l["W"][0]) + len(l["b"])
                 for l in net["layers"])
    metrics = {"params": int(params), "classes": num_classes,
               "train_error": _error_rate(model, features, labels, False)}
    return net, metrics
