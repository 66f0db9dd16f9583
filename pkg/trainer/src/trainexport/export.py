"""Writing trained networks and datasets in the interchange formats.

The compression toolkit reads networks as
`{"input_dim": n, "layers": [{"W": [[...]], "b": [...], "activation":
"relu"|"linear"}, ...]}` and samples/labels as headerless CSV.  This
module owns that boundary: serializing a torch model, an independent
numpy forward pass used to certify the serialization, and the bundle
of files one training run produces.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

PROBE_COUNT = 100
FORWARD_TOL = 1e-5


def network_to_dict(model: torch.nn.Sequential) -> dict:
    """Serialize an alternating Linear/ReLU stack ending in a Linear."""
    layers = []
    pending = None
    for module in model:
        if isinstance(module, torch.nn.Linear):
            if pending is not None:
                layers.append(pending)
            pending = {"W": module.weight.detach().numpy().tolist(),
                       "b": module.bias.detach().numpy().tolist(),
                       "activation": "linear"}
        elif isinstance(module, torch.nn.ReLU):
            if pending is None:
                raise ValueError("activation before any linear layer")
            pending["activation"] = "relu"
        else:
            raise ValueError(f"unsupported module {type(module).__name__}")
    if pending is None:
        raise ValueError("no linear layers to export")
    layers.append(pending)
    return {"input_dim": len(layers[0]["W"][0]), "layers": layers}


def forward_json(net: dict, points: np.ndarray) -> np.ndarray:
    """Forward pass of a serialized network, independent of torch."""
    values = np.atleast_2d(np.asarray(points, dtype=float))
    for layer in net["layers"]:
        values = values @ np.asarray(layer["W"], dtype=float).T \
            + np.asarray(layer["b"], dtype=float)
        if layer["activation"] == "relu":
            values = np.maximum(values, 0.0)
    return values


def forward_gap(net: dict, model: torch.nn.Module,
                probes: np.ndarray) -> float:
    """Largest |json forward - torch forward| over the probe rows."""
    with torch.no_grad():
        theirs = model(torch.as_tensor(probes, dtype=torch.float32)).numpy()
    return float(np.max(np.abs(forward_json(net, probes) - theirs)))


@dataclass(frozen=True)
class ExportBundle:
    """File paths and checks of one exported training run."""

    network: Path
    train_samples: Path
    train_labels: Path
    test_samples: Path
    test_labels: Path
    manifest: Path
    train_error: float
    test_error: float
    forward_gap: float


def write_bundle(out_dir, net: dict, model: torch.nn.Module, data: dict,
                 meta: dict) -> ExportBundle:
    """Write the network, both splits and the manifest; verify forward.

    The manifest records the split sizes, the training metadata, and
    the serialization check (json-vs-torch forward agreement on the
    first probe rows of the test split).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {name: out_dir / f"{name.replace('_', '-')}.csv"
             for name in ("train_samples", "train_labels",
                          "test_samples", "test_labels")}
    np.savetxt(paths["train_samples"], data["x_train"], delimiter=",")
    np.savetxt(paths["train_labels"], data["y_train"], fmt="%d")
    np.savetxt(paths["test_samples"], data["x_test"], delimiter=",")
    np.savetxt(paths["test_labels"], data["y_test"], fmt="%d")
    net_path = out_dir / "network.json"
    net_path.write_text(json.dumps(net))

    probes = data["x_test"][:PROBE_COUNT]
    gap = forward_gap(json.loads(net_path.read_text()), model, probes)
    manifest = dict(meta)
    manifest.update({
        "source": data["source"],
        "train_count": int(len(data["y_train"])),
        "test_count": int(len(data["y_test"])),
        "files": {k: str(v) for k, v in paths.items()}
        | {"network": str(net_path)},
        "forward_check": {"probes": int(len(probes)),
                          "max_gap": gap,
                          "within_tol": bool(gap <= FORWARD_TOL)},
    })
    manifest_path = out_dir / "split.json"
    manifest_path.write_text(json.dumps(manifest, indent=2))
    return ExportBundle(network=net_path, manifest=manifest_path,
                        train_error=meta["train_error"],
                        test_error=meta["test_error"],
                        forward_gap=gap, **paths)
