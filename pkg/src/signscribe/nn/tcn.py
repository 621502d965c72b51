"""Multi-scale dilated temporal convolutional network.

Each block runs a few parallel dilated branches (same-length convolutions
followed by GELU), concatenates them along channels, and adds a residual
connection (1x1-projected when widths differ). A linear head maps the last
block's features to per-frame logits.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import autograd as ag
from .autograd import Tensor

FINGERSPELLING_MAX_DILATIONS = (1, 2, 4, 8, 1, 1)  # receptive field 35
ISR_MAX_DILATIONS = (1, 2, 4, 2, 1, 1)  # receptive field 23


def branch_dilations(max_dilation: int) -> tuple[int, ...]:
    """Per-block multi-scale branches: (d, ceil(d/2), 1)."""
    return (max_dilation, max(1, math.ceil(max_dilation / 2)), 1)


@dataclass(frozen=True)
class TcnConfig:
    input_dim: int
    output_classes: int
    num_blocks: int = 6
    kernel_size: int = 3
    block_dilations: tuple[tuple[int, ...], ...] = tuple(
        branch_dilations(d) for d in FINGERSPELLING_MAX_DILATIONS
    )
    channels: int = 48

    def __post_init__(self):
        if self.num_blocks != len(self.block_dilations):
            raise ValueError("block_dilations must list one dilation tuple per block")
        if self.kernel_size % 2 != 1:
            raise ValueError("kernel_size must be odd")
        for dils in self.block_dilations:
            if not dils or any(d < 1 for d in dils):
                raise ValueError("dilations must be >= 1")
            if self.channels % len(dils) != 0:
                raise ValueError("channels must divide evenly across branches")

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "output_classes": self.output_classes,
            "num_blocks": self.num_blocks,
            "kernel_size": self.kernel_size,
            "block_dilations": [list(d) for d in self.block_dilations],
            "channels": self.channels,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TcnConfig":
        return cls(
            input_dim=int(data["input_dim"]),
            output_classes=int(data["output_classes"]),
            num_blocks=int(data["num_blocks"]),
            kernel_size=int(data["kernel_size"]),
            block_dilations=tuple(tuple(int(x) for x in d) for d in data["block_dilations"]),
            channels=int(data["channels"]),
        )


def fingerspelling_config(input_dim: int, output_classes: int, channels: int = 48) -> TcnConfig:
    return TcnConfig(
        input_dim=input_dim,
        output_classes=output_classes,
        block_dilations=tuple(branch_dilations(d) for d in FINGERSPELLING_MAX_DILATIONS),
        channels=channels,
    )


def isr_config(input_dim: int, output_classes: int, channels: int = 48) -> TcnConfig:
    return TcnConfig(
        input_dim=input_dim,
        output_classes=output_classes,
        block_dilations=tuple(branch_dilations(d) for d in ISR_MAX_DILATIONS),
        channels=channels,
    )


def receptive_field(config: TcnConfig) -> int:
    """Input frames influencing one output frame along the widest path."""
    span = sum(max(dils) for dils in config.block_dilations)
    return 1 + (config.kernel_size - 1) * span


def config_fingerprint(config: TcnConfig) -> str:
    blob = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class FingerprintMismatchError(RuntimeError):
    pass


class Tcn:
    """A TCN instance owning its parameter tensors."""

    def __init__(self, config: TcnConfig, params: dict[str, Tensor]):
        self.config = config
        self.params = params
        self.fingerprint = config_fingerprint(config)

    @classmethod
    def init(cls, config: TcnConfig, rng: np.random.Generator) -> "Tcn":
        params: dict[str, Tensor] = {}
        k = config.kernel_size
        in_width = config.input_dim
        for b, dils in enumerate(config.block_dilations):
            bw = config.channels // len(dils)
            for br in range(len(dils)):
                std = 1.0 / math.sqrt(k * in_width)
                params[f"block{b}.branch{br}.w"] = ag.parameter(
                    rng.normal(0.0, std, size=(k, in_width, bw)), f"block{b}.branch{br}.w"
                )
                params[f"block{b}.branch{br}.b"] = ag.parameter(
                    np.zeros(bw), f"block{b}.branch{br}.b"
                )
            if in_width != config.channels:
                std = 1.0 / math.sqrt(in_width)
                params[f"block{b}.proj"] = ag.parameter(
                    rng.normal(0.0, std, size=(in_width, config.channels)), f"block{b}.proj"
                )
            in_width = config.channels
        std = 1.0 / math.sqrt(in_width)
        params["head.w"] = ag.parameter(
            rng.normal(0.0, std, size=(in_width, config.output_classes)), "head.w"
        )
        params["head.b"] = ag.parameter(np.zeros(config.output_classes), "head.b")
        return cls(config, params)

    def parameters(self) -> list[Tensor]:
        return [self.params[name] for name in sorted(self.params)]

    def forward(self, x: np.ndarray, weights_fingerprint: str | None = None) -> Tensor:
        """Per-frame logits for a (T, input_dim) feature matrix."""
        if weights_fingerprint is not None and weights_fingerprint != self.fingerprint:
            raise FingerprintMismatchError(
                "weights were produced by a different architecture"
            )
        if x.ndim != 2 or x.shape[1] != self.config.input_dim:
            raise ValueError(
                f"expected (T, {self.config.input_dim}) input, got {x.shape}"
            )
        h = ag.constant(x)
        for b, dils in enumerate(self.config.block_dilations):
            branches = []
            for br, d in enumerate(dils):
                w = self.params[f"block{b}.branch{br}.w"]
                bias = self.params[f"block{b}.branch{br}.b"]
                branches.append(ag.gelu(ag.conv1d(h, w, bias, dilation=d)))
            merged = ag.concat_cols(branches)
            proj = self.params.get(f"block{b}.proj")
            residual = ag.matmul(h, proj) if proj is not None else h
            h = ag.add(merged, residual)
        return ag.linear(h, self.params["head.w"], self.params["head.b"])

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {name: t.data for name, t in self.params.items()}

    @classmethod
    def from_arrays(cls, config: TcnConfig, arrays: dict[str, np.ndarray]) -> "Tcn":
        template = cls.init(config, np.random.default_rng(0))
        params: dict[str, Tensor] = {}
        for name, t in template.params.items():
            if name not in arrays:
                raise ValueError(f"missing parameter {name!r}")
            arr = np.asarray(arrays[name], dtype=np.float64)
            if arr.shape != t.data.shape:
                raise ValueError(
                    f"parameter {name!r} has shape {arr.shape}, expected {t.data.shape}"
                )
            params[name] = ag.parameter(arr, name)
        extra = set(arrays) - set(params)
        if extra:
            raise ValueError(f"unexpected parameters: {sorted(extra)}")
        return cls(config, params)
