"""A small numpy MLP scoring (state, action) pairs, with manual backprop."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

INPUT_WIDTH = 2048
DEFAULT_HIDDEN = (512, 256, 128)
MAGIC = b"LFPN"
FORMAT_VERSION = 1
ACTIVATION_RELU = 1


class WeightFileError(ValueError):
    pass


@dataclass
class PolicyNetwork:
    """Dense layers ``in -> h1 -> h2 -> h3 -> 1``; ReLU + dropout after each hidden layer.

    Parameters live in float32, which is also the on-disk format, so a
    save/load round trip is bit-exact. ``astype(np.float64)`` gives a
    double-precision copy for numerical checks.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    dropout: float = 0.5

    @classmethod
    def create(cls, hidden: Sequence[int] = DEFAULT_HIDDEN, input_width: int = INPUT_WIDTH,
               seed: int = 0, dropout: float = 0.5, zero_output: bool = True) -> "PolicyNetwork":
        rng = np.random.default_rng(seed)
        dims = [input_width, *hidden, 1]
        weights, biases = [], []
        for k, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:])):
            if k == len(dims) - 2 and zero_output:
                w = np.zeros((fan_in, fan_out))
            else:
                w = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out))
            weights.append(w.astype(np.float32))
            biases.append(np.zeros(fan_out, dtype=np.float32))
        return cls(weights, biases, dropout)

    @property
    def dims(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def input_width(self) -> int:
        return self.weights[0].shape[0]

    def parameters(self) -> list[np.ndarray]:
        return [p for pair in zip(self.weights, self.biases) for p in pair]

    @property
    def dtype(self) -> np.dtype:
        return self.weights[0].dtype

    def copy(self) -> "PolicyNetwork":
        return PolicyNetwork([w.copy() for w in self.weights], [b.copy() for b in self.biases], self.dropout)

    def astype(self, dtype) -> "PolicyNetwork":
        return PolicyNetwork([w.astype(dtype) for w in self.weights], [b.astype(dtype) for b in self.biases],
                             self.dropout)

    # -- forward / backward -------------------------------------------------

    def forward(self, x: np.ndarray, masks: list[np.ndarray] | None = None, keep_cache: bool = False):
        """Logits for a batch ``x`` of shape (n, input_width).

        ``masks`` (one per hidden layer, already scaled by 1/keep) switches on
        dropout; without them the pass is the deterministic eval-mode pass.
        """
        x = np.asarray(x, dtype=self.dtype)
        if x.ndim != 2 or x.shape[1] != self.input_width:
            raise ValueError(f"expected features of width {self.input_width}, got shape {x.shape}")
        cache = [x]
        h = x
        last = len(self.weights) - 1
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            if k == last:
                h = z
                break
            h = np.maximum(z, 0.0)
            if masks is not None:
                h = h * masks[k]
            cache.append(h)
        logits = h[:, 0]
        return (logits, cache) if keep_cache else logits

    def backward(self, cache: list[np.ndarray], grad_logits: np.ndarray,
                 masks: list[np.ndarray] | None = None) -> list[np.ndarray]:
        """Gradients (w1, b1, w2, b2, ...) given dL/dlogit for each row."""
        grads: list[np.ndarray] = [None] * (2 * len(self.weights))  # type: ignore[list-item]
        delta = grad_logits.reshape(-1, 1)
        for k in range(len(self.weights) - 1, -1, -1):
            h_in = cache[k]
            grads[2 * k] = h_in.T @ delta
            grads[2 * k + 1] = delta.sum(axis=0)
            if k == 0:
                break
            delta = delta @ self.weights[k].T
            if masks is not None:
                delta = delta * masks[k - 1]
            delta = delta * (cache[k] > 0)
        return grads

    def dropout_masks(self, n: int, rng: np.random.Generator) -> list[np.ndarray] | None:
        if self.dropout <= 0:
            return None
        keep = 1.0 - self.dropout
        return [((rng.random((n, w.shape[1])) < keep) / keep).astype(self.dtype) for w in self.weights[:-1]]

    # -- persistence -------------------------------------------------------

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        dims = self.dims
        header = MAGIC + struct.pack("<IIIf", FORMAT_VERSION, ACTIVATION_RELU, len(dims), self.dropout)
        header += struct.pack(f"<{len(dims)}I", *dims)
        body = b"".join(
            np.ascontiguousarray(p, dtype="<f4").tobytes() for p in self.parameters()
        )
        path.write_bytes(header + body)
        return path

    @classmethod
    def load(cls, path: str | Path, expect_dims: Sequence[int] | None = None) -> "PolicyNetwork":
        data = Path(path).read_bytes()
        if len(data) < 20 or data[:4] != MAGIC:
            raise WeightFileError(f"{path}: not a policy weight file")
        version, activation, n_dims, dropout = struct.unpack_from("<IIIf", data, 4)
        if version != FORMAT_VERSION:
            raise WeightFileError(f"{path}: unsupported format version {version}")
        if activation != ACTIVATION_RELU:
            raise WeightFileError(f"{path}: unknown activation id {activation}")
        offset = 20
        if n_dims < 2 or len(data) < offset + 4 * n_dims:
            raise WeightFileError(f"{path}: truncated header")
        dims = list(struct.unpack_from(f"<{n_dims}I", data, offset))
        offset += 4 * n_dims
        if expect_dims is not None and list(expect_dims) != dims:
            raise WeightFileError(f"{path}: layer sizes {dims} do not match expected {list(expect_dims)}")
        expected = sum(a * b + b for a, b in zip(dims[:-1], dims[1:])) * 4
        if len(data) - offset != expected:
            raise WeightFileError(f"{path}: expected {expected} bytes of parameters, found {len(data) - offset}")
        weights, biases = [], []
        for a, b in zip(dims[:-1], dims[1:]):
            w = np.frombuffer(data, dtype="<f4", count=a * b, offset=offset).reshape(a, b)
            offset += 4 * a * b
            bias = np.frombuffer(data, dtype="<f4", count=b, offset=offset)
            offset += 4 * b
            weights.append(w.astype(np.float32))
            biases.append(bias.astype(np.float32))
        net = cls(weights, biases, float(np.float32(dropout)))
        if not all(np.isfinite(p).all() for p in net.parameters()):
            raise WeightFileError(f"{path}: non-finite weights")
        return net


def save_weights(net: PolicyNetwork, path: str | Path) -> Path:
    return net.save(path)


def load_weights(path: str | Path, expect_dims: Sequence[int] | None = None) -> PolicyNetwork:
    return PolicyNetwork.load(path, expect_dims)
