"""Fully-connected Q-value network with inverted dropout, backprop and SGD.

Rows of a batch are states; weights are stored (output_dim, input_dim) and
every computation is float64. Parameters change only in ``sgd_update``.
"""

from __future__ import annotations

from dataclasses import dataclass
from os import makedirs
from os.path import abspath, dirname
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .constants import MODEL_MAGIC
from .errors import (
    ArchitectureMismatch,
    BadArchitecture,
    CorruptModelFile,
    DimensionMismatch,
    ShapeMismatch,
    StaleCache,
)

ACTIVATIONS = ("relu", "linear")
TRAIN = "train"
EVAL = "eval"


@dataclass(frozen=True)
class LayerSpec:
    """Shape, activation and dropout of one fully-connected layer."""

    input_dim: int
    output_dim: int
    activation: str = "relu"
    dropout_rate: float = 0.0

    def describe(self) -> str:
        return f"{self.input_dim}x{self.output_dim}:{self.activation}:{self.dropout_rate!r}"


@dataclass
class Layer:
    """Parameters of one layer."""

    weights: np.ndarray
    biases: np.ndarray
    spec: LayerSpec


@dataclass(frozen=True)
class Gradients:
    """Per-layer (d_weights, d_biases), congruent with the owning network."""

    layers: Tuple[Tuple[np.ndarray, np.ndarray], ...]


@dataclass(frozen=True)
class ForwardCache:
    """Intermediate values from ``forward`` needed by ``backward``."""

    inputs: Tuple[np.ndarray, ...]
    pre_activations: Tuple[np.ndarray, ...]
    masks: Tuple[Optional[np.ndarray], ...]
    version: int
    single: bool


class QNetwork:
    """Stack of fully-connected layers mapping a state vector to b + 1 values."""

    def __init__(self, layers: List[Layer]):
        self.layers = layers
        self.version = 0

    @property
    def specs(self) -> Tuple[LayerSpec, ...]:
        return tuple(layer.spec for layer in self.layers)

    @property
    def input_dim(self) -> int:
        return self.layers[0].spec.input_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].spec.output_dim

    def parameters(self) -> List[np.ndarray]:
        """Every parameter array in save order (weights then biases per layer)."""
        out: List[np.ndarray] = []
        for layer in self.layers:
            out.extend((layer.weights, layer.biases))
        return out


def _validate_specs(specs: Sequence[LayerSpec]) -> None:
    if not specs:
        raise BadArchitecture("A network needs at least one layer")
    for i, spec in enumerate(specs):
        if spec.input_dim < 1 or spec.output_dim < 1:
            raise BadArchitecture(f"Layer {i} has a non-positive dimension")
        if spec.activation not in ACTIVATIONS:
            raise BadArchitecture(f"Layer {i} has unknown activation {spec.activation!r}")
        if not 0 <= spec.dropout_rate < 1:
            raise BadArchitecture(f"Layer {i} dropout {spec.dropout_rate} not in [0, 1)")
        if i and specs[i - 1].output_dim != spec.input_dim:
            raise BadArchitecture(
                f"Layer {i} expects {spec.input_dim} inputs, "
                f"previous layer gives {specs[i - 1].output_dim}"
            )
    last = specs[-1]
    if last.activation != "linear" or last.dropout_rate != 0:
        raise BadArchitecture("The output layer must be linear without dropout")


def default_architecture(
    input_dim: int, num_actions: int, hidden: Sequence[int], dropout: float
) -> List[LayerSpec]:
    """ReLU hidden layers with dropout followed by a linear output layer."""
    dims = [input_dim, *hidden]
    specs = [LayerSpec(a, z, "relu", dropout) for a, z in zip(dims, dims[1:])]
    specs.append(LayerSpec(dims[-1], num_actions, "linear", 0.0))
    return specs


def init_network(specs: Sequence[LayerSpec], seed: int) -> QNetwork:
    """Uniform(-1/sqrt(in), 1/sqrt(in)) weights, zero biases, seeded.

    Raises:
        BadArchitecture: if the specs do not chain into a valid network.
    """
    _validate_specs(specs)
    rng = np.random.default_rng(seed)
    layers = []
    for spec in specs:
        bound = 1.0 / np.sqrt(spec.input_dim)
        weights = rng.uniform(-bound, bound, size=(spec.output_dim, spec.input_dim))
        layers.append(Layer(weights, np.zeros(spec.output_dim), spec))
    return QNetwork(layers)


def copy_network(net: QNetwork) -> QNetwork:
    """Deep copy, e.g. for a target network."""
    return QNetwork(
        [Layer(l.weights.copy(), l.biases.copy(), l.spec) for l in net.layers]
    )


def forward(
    net: QNetwork, x: np.ndarray, mode: str = EVAL, mask_seed: Optional[int] = None
) -> Tuple[np.ndarray, ForwardCache]:
    """Compute Q-values for one state (1-D) or a batch of states (rows).

    Train mode samples inverted-dropout masks from ``mask_seed``; eval mode
    uses activations as they are.

    Raises:
        DimensionMismatch: if the input width is wrong.
    """
    if mode not in (TRAIN, EVAL):
        raise ValueError(f"Unknown mode {mode!r}")
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    a = x[None, :] if single else x
    if a.ndim != 2 or a.shape[1] != net.input_dim:
        raise DimensionMismatch(
            f"Input has shape {x.shape}, network expects {net.input_dim} features"
        )

    rng = np.random.default_rng(mask_seed) if mode == TRAIN else None
    inputs, pre, masks = [], [], []
    for layer in net.layers:
        inputs.append(a)
        z = a @ layer.weights.T + layer.biases
        pre.append(z)
        a = np.maximum(z, 0.0) if layer.spec.activation == "relu" else z
        mask = None
        p = layer.spec.dropout_rate
        if rng is not None and p > 0:
            mask = (rng.random(a.shape) >= p) / (1.0 - p)
            a = a * mask
        masks.append(mask)

    cache = ForwardCache(tuple(inputs), tuple(pre), tuple(masks), net.version, single)
    return (a[0] if single else a), cache


def backward(net: QNetwork, cache: ForwardCache, dq: np.ndarray) -> Gradients:
    """Gradients of sum(q * dq) with respect to every parameter.

    Raises:
        StaleCache: if the network changed since ``cache`` was recorded.
    """
    if cache.version != net.version or len(cache.inputs) != len(net.layers):
        raise StaleCache("Forward cache predates the latest parameter update")
    g = np.asarray(dq, dtype=np.float64)
    g = g[None, :] if cache.single else g
    grads = []
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        if cache.masks[i] is not None:
            g = g * cache.masks[i]
        if layer.spec.activation == "relu":
            g = g * (cache.pre_activations[i] > 0)
        grads.append((g.T @ cache.inputs[i], g.sum(axis=0)))
        g = g @ layer.weights
    return Gradients(tuple(reversed(grads)))


def sgd_update(net: QNetwork, grads: Gradients, learning_rate: float) -> None:
    """In-place p <- p - lr * g.

    Raises:
        ShapeMismatch: if ``grads`` does not match the network.
    """
    if len(grads.layers) != len(net.layers):
        raise ShapeMismatch("Gradient layer count differs from the network")
    for layer, (dw, db) in zip(net.layers, grads.layers):
        if dw.shape != layer.weights.shape or db.shape != layer.biases.shape:
            raise ShapeMismatch(
                f"Gradient shapes {dw.shape}/{db.shape} do not match "
                f"{layer.weights.shape}/{layer.biases.shape}"
            )
    for layer, (dw, db) in zip(net.layers, grads.layers):
        layer.weights -= learning_rate * dw
        layer.biases -= learning_rate * db
    net.version += 1


def save_network(net: QNetwork, path: str) -> None:
    """Write magic, one descriptor line, then little-endian float64 parameters."""
    descriptor = " ".join(spec.describe() for spec in net.specs)
    makedirs(dirname(abspath(path)), exist_ok=True)
    with open(path, "wb") as f:
        f.write(MODEL_MAGIC + b"\n")
        f.write(descriptor.encode("ascii") + b"\n")
        for param in net.parameters():
            f.write(np.ascontiguousarray(param, dtype="<f8").tobytes())


def _parse_descriptor(line: str) -> List[LayerSpec]:
    specs = []
    for token in line.split():
        dims, activation, rate = token.split(":")
        input_dim, output_dim = dims.split("x")
        specs.append(LayerSpec(int(input_dim), int(output_dim), activation, float(rate)))
    return specs


def load_network(
    path: str,
    input_dim: Optional[int] = None,
    num_actions: Optional[int] = None,
) -> QNetwork:
    """Read a model written by ``save_network``.

    Raises:
        CorruptModelFile: on bad magic, descriptor or parameter length.
        ArchitectureMismatch: if the model does not fit ``input_dim`` or
            ``num_actions``.
    """
    with open(path, "rb") as f:
        data = f.read()
    head = MODEL_MAGIC + b"\n"
    if not data.startswith(head):
        raise CorruptModelFile(f"{path}: missing model magic")
    end = data.find(b"\n", len(head))
    if end < 0:
        raise CorruptModelFile(f"{path}: missing architecture descriptor")
    try:
        specs = _parse_descriptor(data[len(head) : end].decode("ascii"))
        _validate_specs(specs)
    except (ValueError, UnicodeDecodeError, BadArchitecture) as e:
        raise CorruptModelFile(f"{path}: bad architecture descriptor ({e})") from e

    payload = data[end + 1 :]
    expected = sum(s.output_dim * (s.input_dim + 1) for s in specs)
    if len(payload) != expected * 8:
        raise CorruptModelFile(
            f"{path}: expected {expected * 8} parameter bytes, found {len(payload)}"
        )
    values = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    if not np.all(np.isfinite(values)):
        raise CorruptModelFile(f"{path}: non-finite parameters")

    layers, offset = [], 0
    for spec in specs:
        n_w = spec.output_dim * spec.input_dim
        weights = values[offset : offset + n_w].reshape(spec.output_dim, spec.input_dim)
        offset += n_w
        biases = values[offset : offset + spec.output_dim].copy()
        offset += spec.output_dim
        layers.append(Layer(weights.copy(), biases, spec))
    net = QNetwork(layers)

    if input_dim is not None and net.input_dim != input_dim:
        raise ArchitectureMismatch(
            f"Model expects {net.input_dim} state features, data gives {input_dim}"
        )
    if num_actions is not None and net.output_dim != num_actions:
        raise ArchitectureMismatch(
            f"Model has {net.output_dim} actions, code width needs {num_actions}"
        )
    return net


__all__ = [
    "EVAL",
    "TRAIN",
    "ForwardCache",
    "Gradients",
    "LayerSpec",
    "QNetwork",
    "backward",
    "copy_network",
    "default_architecture",
    "forward",
    "init_network",
    "load_network",
    "save_network",
    "sgd_update",
]
