"""The four message-passing architectures and the shared readout head.

All layers act on padded batches (see :mod:`citefp.gnn.batching`) and share
the same skeleton: propagate, transform, ReLU.

* ``gcn``    — ``H' = ReLU(D^-1/2 (A + I) D^-1/2 H W)``
* ``sage``   — ``H' = ReLU([H || mean_{v in N(u)} h_v] W)`` (open neighborhood)
* ``gat``    — one attention head: ``e_uv = LeakyReLU(a1.(W h_u) + a2.(W h_v))``
  over self-looped neighbors, softmax-normalized per node,
  ``H'_u = ReLU(sum_v alpha_uv W h_v)``
* ``gin``    — ``H' = MLP((1 + eps) h_u + sum_{v in N(u)} h_v)`` with eps = 0
  and a two-layer MLP (linear, ReLU, linear)

Graph readout sums the final node states over real nodes and applies a
linear layer to produce one logit per graph; training minimizes binary
cross-entropy on those logits.  Dropout multiplies hidden node states during
training only.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .. import seeding
from ..errors import DataFormatError
from .autograd import Tensor, concat, dropout_mask, masked_softmax
from .batching import GraphTensors

__all__ = ["ARCHITECTURES", "GnnConfig", "GnnModel", "save_model", "load_model"]

ARCHITECTURES = ("gcn", "sage", "gat", "gin")

_LEAKY_SLOPE = 0.2


@dataclass(frozen=True)
class GnnConfig:
    arch: str
    input_dim: int
    hidden_dim: int = 64
    n_layers: int = 2
    learning_rate: float = 1e-3
    dropout: float = 0.0
    weight_decay: float = 0.0
    batch_size: int = 10000
    max_epochs: int = 500
    patience: int = 15
    seed: int = 0

    def __post_init__(self) -> None:
        if self.arch not in ARCHITECTURES:
            raise DataFormatError(f"unknown architecture {self.arch!r} (expected one of {ARCHITECTURES})")
        if self.input_dim < 1:
            raise ValueError("input_dim must be positive")
        if self.hidden_dim < 1:
            raise ValueError("hidden_dim must be positive")
        if not 1 <= self.n_layers <= 4:
            raise ValueError(f"n_layers must lie in [1, 4], got {self.n_layers}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.dropout <= 0.5:
            raise ValueError(f"dropout must lie in [0, 0.5], got {self.dropout}")
        if not 0.0 <= self.weight_decay <= 0.01:
            raise ValueError(f"weight_decay must lie in [0, 0.01], got {self.weight_decay}")
        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 1:
            raise ValueError("batch_size, max_epochs and patience must be positive")


def _glorot(rng: np.random.Generator, rows: int, cols: int) -> Tensor:
    limit = np.sqrt(6.0 / (rows + cols))
    return Tensor(rng.uniform(-limit, limit, size=(rows, cols)), requires_grad=True)


class GnnModel:
    """Parameters plus the forward pass for one architecture."""

    def __init__(self, config: GnnConfig):
        self.config = config
        rng = seeding.generator(config.seed, "init")
        self.layers: list[dict[str, Tensor]] = []
        in_dim = config.input_dim
        for _ in range(config.n_layers):
            out_dim = config.hidden_dim
            if config.arch == "gcn":
                layer = {"W": _glorot(rng, in_dim, out_dim)}
            elif config.arch == "sage":
                layer = {"W": _glorot(rng, 2 * in_dim, out_dim)}
            elif config.arch == "gat":
                layer = {
                    "W": _glorot(rng, in_dim, out_dim),
                    "a_src": _glorot(rng, out_dim, 1),
                    "a_dst": _glorot(rng, out_dim, 1),
                }
            else:  # gin
                layer = {
                    "W1": _glorot(rng, in_dim, out_dim),
                    "b1": Tensor(np.zeros(out_dim), requires_grad=True),
                    "W2": _glorot(rng, out_dim, out_dim),
                    "b2": Tensor(np.zeros(out_dim), requires_grad=True),
                }
            self.layers.append(layer)
            in_dim = out_dim
        self.head = {"w": _glorot(rng, in_dim, 1), "b": Tensor(np.zeros(1), requires_grad=True)}

    def parameters(self) -> list[Tensor]:
        params = []
        for layer in self.layers:
            params.extend(layer.values())
        params.extend(self.head.values())
        return params

    def parameter_names(self) -> list[str]:
        names = []
        for i, layer in enumerate(self.layers):
            names.extend(f"layer{i}.{k}" for k in layer)
        names.extend(f"head.{k}" for k in self.head)
        return names

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    # ---------------------------------------------------------------- forward

    def forward(
        self,
        batch: GraphTensors,
        training: bool = False,
        dropout_rng: np.random.Generator | None = None,
    ) -> Tensor:
        """Logits (one per graph) for a batch."""
        arch = self.config.arch
        op = Tensor(batch.operator(arch))
        H = Tensor(batch.feats)
        for layer in self.layers:
            if arch == "gcn":
                H = (op @ H @ layer["W"]).relu()
            elif arch == "sage":
                H = (concat([H, op @ H], axis=-1) @ layer["W"]).relu()
            elif arch == "gat":
                Wh = H @ layer["W"]
                scores = (Wh @ layer["a_src"] + (Wh @ layer["a_dst"]).transpose_last()).leaky_relu(_LEAKY_SLOPE)
                attn = masked_softmax(scores, batch.operator("gat") > 0)
                H = (attn @ Wh).relu()
            else:  # gin
                agg = op @ H
                H = (agg @ layer["W1"] + layer["b1"]).relu() @ layer["W2"] + layer["b2"]
            if training and self.config.dropout > 0.0:
                if dropout_rng is None:
                    raise ValueError("training with dropout requires a dropout_rng")
                H = H * dropout_mask(H.shape, self.config.dropout, dropout_rng)
        pooled = (H * batch.node_mask[:, :, None]).sum_axis(1)  # (G, hidden)
        logits = pooled @ self.head["w"] + self.head["b"]
        return logits.reshape(batch.n_graphs)

    def get_state(self) -> list[np.ndarray]:
        return [p.data.copy() for p in self.parameters()]

    def set_state(self, state: list[np.ndarray]) -> None:
        params = self.parameters()
        if len(state) != len(params):
            raise DataFormatError(f"state has {len(state)} arrays, model has {len(params)} parameters")
        for p, arr in zip(params, state):
            if arr.shape != p.data.shape:
                raise DataFormatError(f"state shape {arr.shape} does not match parameter shape {p.data.shape}")
            p.data = arr.copy()


# ------------------------------------------------------------------ file I/O


def save_model(model: GnnModel, path: str | Path) -> None:
    """JSON header (config + parameter shapes), then float64 LE parameters."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    params = model.parameters()
    header = {
        "config": {
            "arch": model.config.arch,
            "input_dim": model.config.input_dim,
            "hidden_dim": model.config.hidden_dim,
            "n_layers": model.config.n_layers,
            "learning_rate": model.config.learning_rate,
            "dropout": model.config.dropout,
            "weight_decay": model.config.weight_decay,
            "batch_size": model.config.batch_size,
            "max_epochs": model.config.max_epochs,
            "patience": model.config.patience,
            "seed": model.config.seed,
        },
        "names": model.parameter_names(),
        "shapes": [list(p.data.shape) for p in params],
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        for p in params:
            flat = np.ascontiguousarray(p.data, dtype="<f8").ravel()
            fh.write(struct.pack(f"<{flat.size}d", *flat))


def load_model(path: str | Path) -> GnnModel:
    path = Path(path)
    with open(path, "rb") as fh:
        try:
            header = json.loads(fh.readline())
            config = GnnConfig(**header["config"])
            shapes = [tuple(s) for s in header["shapes"]]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(f"{path.name}: bad model header ({exc})") from None
        blob = fh.read()
    model = GnnModel(config)
    params = model.parameters()
    if shapes != [p.data.shape for p in params]:
        raise DataFormatError(f"{path.name}: parameter shapes do not match the declared config")
    expected = sum(int(np.prod(s)) for s in shapes) * 8
    if len(blob) != expected:
        raise DataFormatError(f"{path.name}: expected {expected} parameter bytes, found {len(blob)}")
    offset = 0
    state = []
    for shape in shapes:
        size = int(np.prod(shape))
        state.append(np.frombuffer(blob, dtype="<f8", count=size, offset=offset).reshape(shape).copy())
        offset += size * 8
    model.set_state(state)
    return model
