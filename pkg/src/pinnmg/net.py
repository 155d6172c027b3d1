"""Fully-connected surrogate network ``(x, y) -> u``.

Parameters live in one flat vector. For each layer the weight matrix
``W`` of shape ``(fan_out, fan_in)`` is stored row-major followed by the bias;
for layer-adaptive activations one slope per hidden layer is appended at the
end. Hidden layers apply ``sigma(n * a_l * z)`` where ``n`` is the integer
adaptive factor and ``a_l`` a trainable slope; plain activations use ``z``.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

MAGIC = b"PINN"
FORMAT_VERSION = 1


class Activation(str, Enum):
    TANH = "tanh"
    SIGMOID = "sigmoid"
    SWISH = "swish"
    SINE = "sine"
    RELU = "relu"
    LAAF_TANH = "laaf-tanh"
    LAAF_SIGMOID = "laaf-sigmoid"
    LAAF_SWISH = "laaf-swish"

    @property
    def adaptive(self) -> bool:
        return self.value.startswith("laaf-")

    @property
    def base(self) -> str:
        return self.value.removeprefix("laaf-")

    @property
    def smooth(self) -> bool:
        return self.base != "relu"


# stable ids for the checkpoint format; append only
_ACTIVATION_IDS = {a: i for i, a in enumerate(Activation)}


class ShapeMismatchError(ValueError):
    pass


class CheckpointFormatError(ValueError):
    pass


class UnsupportedVersionError(CheckpointFormatError):
    pass


@dataclass(frozen=True)
class NetworkConfig:
    layer_sizes: tuple[int, ...]
    activation: Activation = Activation.TANH
    laaf_factor: int | None = None
    precision: int = 64

    def __post_init__(self):
        object.__setattr__(self, "layer_sizes", tuple(int(s) for s in self.layer_sizes))
        object.__setattr__(self, "activation", Activation(self.activation))
        sizes = self.layer_sizes
        if len(sizes) < 3:
            raise ValueError("need input, at least one hidden layer and output")
        if sizes[0] != 2 or sizes[-1] != 1:
            raise ValueError(f"layer sizes must start with 2 and end with 1, got {sizes}")
        if any(s < 1 for s in sizes):
            raise ValueError("layer sizes must be positive")
        if self.activation.adaptive != (self.laaf_factor is not None):
            raise ValueError("laaf_factor must be given exactly for adaptive activations")
        if self.laaf_factor is not None and not 1 <= self.laaf_factor <= 255:
            raise ValueError("laaf_factor must be an integer in [1, 255]")
        if self.precision not in (32, 64):
            raise ValueError("precision must be 32 or 64")

    @classmethod
    def mlp(cls, hidden, activation="tanh", laaf_factor=None, precision=64):
        return cls((2, *hidden, 1), Activation(activation), laaf_factor, precision)

    @property
    def dtype(self):
        return np.float32 if self.precision == 32 else np.float64

    @property
    def n_hidden(self) -> int:
        return len(self.layer_sizes) - 2

    @property
    def n_params(self) -> int:
        s = self.layer_sizes
        n = sum(a * b + b for a, b in zip(s[:-1], s[1:]))
        return n + (self.n_hidden if self.activation.adaptive else 0)

    def with_precision(self, precision: int) -> "NetworkConfig":
        return replace(self, precision=precision)

    def describe(self) -> str:
        hidden = "-".join(str(s) for s in self.layer_sizes[1:-1])
        act = self.activation.value
        if self.laaf_factor:
            act = f"{act}{self.laaf_factor}"
        return f"{self.n_hidden}H[{hidden}]/{act}/fp{self.precision}"


def unpack(params: np.ndarray, config: NetworkConfig):
    """Split the flat vector into ``[(W, b), ...]`` views and the slope array."""
    params = np.asarray(params)
    if params.ndim != 1 or params.size != config.n_params:
        raise ShapeMismatchError(
            f"parameter vector of length {params.size} does not match "
            f"{config.describe()} ({config.n_params} entries)")
    layers = []
    pos = 0
    for fan_in, fan_out in zip(config.layer_sizes[:-1], config.layer_sizes[1:]):
        W = params[pos:pos + fan_in * fan_out].reshape(fan_out, fan_in)
        pos += fan_in * fan_out
        b = params[pos:pos + fan_out]
        pos += fan_out
        layers.append((W, b))
    slopes = params[pos:]
    return layers, slopes


def xavier_init(config: NetworkConfig, seed: int) -> np.ndarray:
    """Glorot-normal weights, zero biases, adaptive slopes at ``1/n``.

    Each layer draws from its own child of ``SeedSequence(seed)`` so that
    resizing a later layer leaves earlier draws untouched.
    """
    streams = np.random.SeedSequence(seed).spawn(len(config.layer_sizes) - 1)
    chunks = []
    for stream, fan_in, fan_out in zip(streams, config.layer_sizes[:-1], config.layer_sizes[1:]):
        rng = np.random.default_rng(stream)
        std = np.sqrt(2.0 / (fan_in + fan_out))
        chunks.append(rng.normal(0.0, std, size=fan_in * fan_out))
        chunks.append(np.zeros(fan_out))
    if config.activation.adaptive:
        chunks.append(np.full(config.n_hidden, 1.0 / config.laaf_factor))
    return np.concatenate(chunks).astype(config.dtype)


def _sigmoid(t):
    return 0.5 * (1.0 + np.tanh(0.5 * t))


def base_derivatives(name: str, t, order: int = 2):
    """Value and the first ``order`` derivatives of an unscaled activation."""
    if name == "tanh":
        s = np.tanh(t)
        d1 = 1.0 - s * s
        d2 = -2.0 * s * d1
        out = [s, d1, d2, -2.0 * (d1 * d1 + s * d2)]
    elif name == "sigmoid":
        s = _sigmoid(t)
        d1 = s * (1.0 - s)
        d2 = d1 * (1.0 - 2.0 * s)
        out = [s, d1, d2, d2 * (1.0 - 2.0 * s) - 2.0 * d1 * d1]
    elif name == "swish":
        s = _sigmoid(t)
        d1 = s * (1.0 - s)
        d2 = d1 * (1.0 - 2.0 * s)
        d3 = d2 * (1.0 - 2.0 * s) - 2.0 * d1 * d1
        out = [t * s, s + t * d1, 2.0 * d1 + t * d2, 3.0 * d2 + t * d3]
    elif name == "sine":
        sn, cs = np.sin(t), np.cos(t)
        out = [sn, cs, -sn, -cs]
    elif name == "relu":
        z = np.zeros_like(t)
        out = [np.maximum(t, 0), (t > 0).astype(np.result_type(t, np.float32)), z, z]
    else:
        raise ValueError(f"unknown activation {name!r}")
    return out[:order + 1]


def activation_eval(kind, z, slope=None, factor=None):
    """Return ``(sigma, sigma', sigma'')`` of the (possibly scaled) activation at ``z``.

    For adaptive kinds the derivatives are of ``sigma(factor * slope * z)``
    with respect to ``z``. relu reports a zero second derivative everywhere.
    """
    kind = Activation(kind)
    if kind.adaptive:
        if slope is None or factor is None:
            raise ValueError(f"{kind.value} needs both slope and factor")
        scale = factor * slope
    else:
        if slope is not None:
            raise ValueError(f"{kind.value} takes no slope")
        scale = 1.0
    s, d1, d2 = base_derivatives(kind.base, scale * np.asarray(z, dtype=float))
    return s, scale * d1, scale * scale * d2


def forward(params: np.ndarray, config: NetworkConfig, points) -> np.ndarray:
    """Evaluate the network at ``points`` of shape ``(n, 2)`` in config precision."""
    layers, slopes = unpack(params, config)
    dtype = config.dtype
    h = np.atleast_2d(np.asarray(points, dtype=dtype))
    if h.shape[1] != 2:
        raise ShapeMismatchError("points must have shape (n, 2)")
    name = config.activation.base
    for l, (W, b) in enumerate(layers):
        z = h @ W.T.astype(dtype, copy=False) + b.astype(dtype, copy=False)
        if l == len(layers) - 1:
            return z[:, 0]
        if config.activation.adaptive:
            z = dtype(config.laaf_factor) * slopes[l].astype(dtype) * z
        h = base_derivatives(name, z, order=0)[0].astype(dtype, copy=False)


def save_checkpoint(config: NetworkConfig, params: np.ndarray, provenance: str, path) -> None:
    """Write ``config`` and ``params`` (narrowed to float32) to ``path``."""
    unpack(params, config)
    prov = provenance.encode("utf-8")
    sizes = config.layer_sizes
    head = MAGIC + struct.pack("<II", FORMAT_VERSION, len(sizes))
    head += struct.pack(f"<{len(sizes)}I", *sizes)
    head += struct.pack("<BB", _ACTIVATION_IDS[config.activation], config.laaf_factor or 0)
    head += struct.pack("<I", len(prov)) + prov
    head += struct.pack("<Q", params.size)
    body = np.asarray(params, dtype="<f4").tobytes()
    path = Path(path)
    try:
        path.write_bytes(head + body)
    except OSError as exc:
        raise OSError(f"cannot write checkpoint {path}: {exc}") from exc


def load_checkpoint(path, precision: int = 32):
    """Read a checkpoint; returns ``(config, params, provenance)``.

    ``precision`` selects the arithmetic of the returned config; float32 values
    widen exactly to float64.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    data = path.read_bytes()

    def take(fmt, pos):
        size = struct.calcsize(fmt)
        if pos + size > len(data):
            raise CheckpointFormatError(f"{path}: truncated checkpoint")
        return struct.unpack_from(fmt, data, pos), pos + size

    if data[:4] != MAGIC:
        raise CheckpointFormatError(f"{path}: bad magic bytes {data[:4]!r}")
    (version, n_layers), pos = take("<II", 4)
    if version > FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"{path}: checkpoint version {version} is newer than supported {FORMAT_VERSION}")
    sizes, pos = take(f"<{n_layers}I", pos)
    (act_id, factor), pos = take("<BB", pos)
    (prov_len,), pos = take("<I", pos)
    if pos + prov_len > len(data):
        raise CheckpointFormatError(f"{path}: truncated provenance")
    provenance = data[pos:pos + prov_len].decode("utf-8")
    pos += prov_len
    (count,), pos = take("<Q", pos)
    if len(data) - pos != 4 * count:
        raise CheckpointFormatError(
            f"{path}: expected {count} float32 parameters, found {len(data) - pos} bytes")
    try:
        activation = list(Activation)[act_id]
    except IndexError:
        raise CheckpointFormatError(f"{path}: unknown activation id {act_id}") from None
    config = NetworkConfig(sizes, activation, factor or None, precision)
    if config.n_params != count:
        raise ShapeMismatchError(
            f"{path}: {count} parameters stored but layout needs {config.n_params}")
    params = np.frombuffer(data, dtype="<f4", count=count, offset=pos).astype(config.dtype)
    return config, params, provenance
