"""Declarative network specs, shape planning, and the executable Network.

Two canonical stacks are provided: the base architecture
(conv-pool-conv-pool-conv-pool-conv-fc-head) and the larger "plus2"
variant with one extra 512-filter convolution before the final pooling
and a second fully-connected layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..alphabet import MAX_WORD_LEN, NUM_CHAR_CLASSES
from .layers import (
    Conv2D,
    Dense,
    Dropout,
    Flatten,
    Layer,
    MaxPool2,
    Param,
    ReLU,
    Reshape,
    Sigmoid,
    Softmax,
)

STANDARD_INPUT = (1, 32, 100)

HEAD_KINDS = ("dict", "charseq", "ngram")


@dataclass
class LayerSpec:
    kind: str  # conv | relu | maxpool | fc | dropout | softmax-head | multi-softmax-head | logistic-head
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"kind": self.kind, **self.params}

    @classmethod
    def from_json(cls, d: dict) -> "LayerSpec":
        d = dict(d)
        return cls(kind=d.pop("kind"), params=d)


@dataclass
class NetworkSpec:
    layers: list[LayerSpec]
    head: str
    n_out: int  # lexicon size (dict), vocab size (ngram), 23*37 (charseq)
    variant: str = "custom"  # base | plus2 | custom
    input_shape: tuple[int, int, int] = STANDARD_INPUT

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "head": self.head,
            "n_out": self.n_out,
            "input_shape": list(self.input_shape),
            "layers": [l.to_json() for l in self.layers],
        }

    @classmethod
    def from_json(cls, d: dict) -> "NetworkSpec":
        return cls(
            layers=[LayerSpec.from_json(l) for l in d["layers"]],
            head=d["head"],
            n_out=int(d["n_out"]),
            variant=d["variant"],
            input_shape=tuple(d["input_shape"]),
        )


def _head_specs(head: str, n_out: int) -> list[LayerSpec]:
    if head == "dict":
        return [LayerSpec("softmax-head", {"units": n_out})]
    if head == "charseq":
        return [LayerSpec("multi-softmax-head", {"slots": MAX_WORD_LEN, "classes": NUM_CHAR_CLASSES})]
    if head == "ngram":
        return [LayerSpec("logistic-head", {"units": n_out})]
    raise ValueError(f"unknown head {head!r}")


def _normalize_head(head: str, n_out: int) -> int:
    if head == "charseq":
        return MAX_WORD_LEN * NUM_CHAR_CLASSES
    return n_out


def base_spec(head: str, n_out: int, channels=(64, 128, 256, 512),
              fc_units: int = 4096, dropout: float = 0.5) -> NetworkSpec:
    if len(channels) != 4:
        raise ValueError("base stack takes 4 channel widths")
    c1, c2, c3, c4 = channels
    layers = [
        LayerSpec("conv", {"out_channels": c1, "kernel": 5}), LayerSpec("relu"), LayerSpec("maxpool"),
        LayerSpec("conv", {"out_channels": c2, "kernel": 5}), LayerSpec("relu"), LayerSpec("maxpool"),
        LayerSpec("conv", {"out_channels": c3, "kernel": 3}), LayerSpec("relu"), LayerSpec("maxpool"),
        LayerSpec("conv", {"out_channels": c4, "kernel": 3}), LayerSpec("relu"),
        LayerSpec("fc", {"units": fc_units}), LayerSpec("relu"), LayerSpec("dropout", {"rate": dropout}),
    ] + _head_specs(head, n_out)
    return NetworkSpec(layers, head, _normalize_head(head, n_out), variant="base")


def plus2_spec(head: str, n_out: int, channels=(64, 128, 256, 512, 512),
               fc_units: int = 4096, dropout: float = 0.5) -> NetworkSpec:
    if len(channels) != 5:
        raise ValueError("plus2 stack takes 5 channel widths")
    c1, c2, c3, c4, c5 = channels
    layers = [
        LayerSpec("conv", {"out_channels": c1, "kernel": 5}), LayerSpec("relu"), LayerSpec("maxpool"),
        LayerSpec("conv", {"out_channels": c2, "kernel": 5}), LayerSpec("relu"), LayerSpec("maxpool"),
        LayerSpec("conv", {"out_channels": c3, "kernel": 3}), LayerSpec("relu"),
        LayerSpec("conv", {"out_channels": c4, "kernel": 3}), LayerSpec("relu"), LayerSpec("maxpool"),
        LayerSpec("conv", {"out_channels": c5, "kernel": 3}), LayerSpec("relu"),
        LayerSpec("fc", {"units": fc_units}), LayerSpec("relu"), LayerSpec("dropout", {"rate": dropout}),
        LayerSpec("fc", {"units": fc_units}), LayerSpec("relu"), LayerSpec("dropout", {"rate": dropout}),
    ] + _head_specs(head, n_out)
    return NetworkSpec(layers, head, _normalize_head(head, n_out), variant="plus2")


def small_spec(head: str, n_out: int, input_shape=(1, 8, 20), channels=(4, 8),
               fc_units: int = 16, dropout: float = 0.0) -> NetworkSpec:
    """Tiny stack for numerical checks: 2 conv, 1 fc, one head."""
    layers = [
        LayerSpec("conv", {"out_channels": channels[0], "kernel": 3}), LayerSpec("relu"), LayerSpec("maxpool"),
        LayerSpec("conv", {"out_channels": channels[1], "kernel": 3}), LayerSpec("relu"), LayerSpec("maxpool"),
        LayerSpec("fc", {"units": fc_units}), LayerSpec("relu"),
    ]
    if dropout > 0:
        layers.append(LayerSpec("dropout", {"rate": dropout}))
    layers += _head_specs(head, n_out)
    return NetworkSpec(layers, head, _normalize_head(head, n_out), variant="custom", input_shape=input_shape)


def shape_plan(spec: NetworkSpec) -> list[tuple[str, tuple[int, ...]]]:
    """Per-layer output shapes (excluding the batch dimension)."""
    if spec.variant in ("base", "plus2") and tuple(spec.input_shape) != STANDARD_INPUT:
        raise ValueError(f"{spec.variant} stack expects input {STANDARD_INPUT}, got {spec.input_shape}")
    shape: tuple[int, ...] = tuple(spec.input_shape)
    plan = [("input", shape)]
    for ls in spec.layers:
        if ls.kind == "conv":
            if len(shape) != 3:
                raise ValueError("conv after flattening")
            shape = (ls.params["out_channels"], shape[1], shape[2])
        elif ls.kind == "maxpool":
            if len(shape) != 3:
                raise ValueError("maxpool after flattening")
            shape = (shape[0], shape[1] // 2, shape[2] // 2)
            if shape[1] < 1 or shape[2] < 1:
                raise ValueError(f"pooling collapses spatial extent to zero: {shape}")
        elif ls.kind == "fc":
            shape = (ls.params["units"],)
        elif ls.kind in ("relu", "dropout"):
            pass
        elif ls.kind == "softmax-head":
            shape = (ls.params["units"],)
        elif ls.kind == "multi-softmax-head":
            shape = (ls.params["slots"], ls.params["classes"])
        elif ls.kind == "logistic-head":
            shape = (ls.params["units"],)
        else:
            raise ValueError(f"unknown layer kind {ls.kind!r}")
        plan.append((ls.kind, shape))
    return plan


def _flat(shape) -> int:
    return int(np.prod(shape))


class Network:
    """Executable layer stack built from a NetworkSpec."""

    def __init__(self, spec: NetworkSpec, seed: int = 0, dtype=np.float32):
        self.spec = spec
        self.dtype = dtype
        self.rng = np.random.default_rng(seed)
        self.layers: list[Layer] = []
        self._head_dense: Dense | None = None
        shape = tuple(spec.input_shape)
        shape_iter = shape_plan(spec)[1:]
        for ls, (_, out_shape) in zip(spec.layers, shape_iter):
            if ls.kind == "conv":
                self.layers.append(Conv2D(shape[0], ls.params["out_channels"], ls.params["kernel"],
                                          self.rng, dtype=self.dtype, name=f"conv{sum(1 for l in self.layers if isinstance(l, Conv2D)) + 1}"))
            elif ls.kind == "relu":
                self.layers.append(ReLU())
            elif ls.kind == "maxpool":
                self.layers.append(MaxPool2())
            elif ls.kind == "fc":
                if len(shape) != 1:
                    self.layers.append(Flatten())
                self.layers.append(Dense(_flat(shape), ls.params["units"], self.rng, dtype=self.dtype,
                                         name=f"fc{sum(1 for l in self.layers if isinstance(l, Dense)) + 1}"))
            elif ls.kind == "dropout":
                self.layers.append(Dropout(ls.params["rate"], self.rng))
            elif ls.kind == "softmax-head":
                if len(shape) != 1:
                    self.layers.append(Flatten())
                d = Dense(_flat(shape), ls.params["units"], self.rng, dtype=self.dtype, name="head")
                self._head_dense = d
                self.layers.append(d)
                self.layers.append(Softmax())
            elif ls.kind == "multi-softmax-head":
                if len(shape) != 1:
                    self.layers.append(Flatten())
                slots, classes = ls.params["slots"], ls.params["classes"]
                d = Dense(_flat(shape), slots * classes, self.rng, dtype=self.dtype, name="head")
                self._head_dense = d
                self.layers.append(d)
                self.layers.append(Reshape((slots, classes)))
                self.layers.append(Softmax())
            elif ls.kind == "logistic-head":
                if len(shape) != 1:
                    self.layers.append(Flatten())
                d = Dense(_flat(shape), ls.params["units"], self.rng, dtype=self.dtype, name="head")
                self._head_dense = d
                self.layers.append(d)
                self.layers.append(Sigmoid())
            else:
                raise ValueError(f"unknown layer kind {ls.kind!r}")
            shape = out_shape
        if self._head_dense is None:
            raise ValueError("spec has no head layer")

    @property
    def head(self) -> str:
        return self.spec.head

    @property
    def n_out(self) -> int:
        return self.spec.n_out

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        x = np.asarray(x, dtype=self.dtype)
        expected = (x.shape[0],) + tuple(self.spec.input_shape)
        if x.shape != expected:
            raise ValueError(f"input shape {x.shape} != {expected}")
        if not np.isfinite(x).all():
            raise FloatingPointError("non-finite values in network input")
        for layer in self.layers:
            x = layer.forward(x, train=train)
        if not np.isfinite(x).all():
            raise FloatingPointError("non-finite values in network output")
        return x

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        g = np.asarray(grad_out, dtype=self.dtype)
        for layer in reversed(self.layers):
            g = layer.backward(g)
        return g

    def params(self) -> list[Param]:
        out = []
        for layer in self.layers:
            out.extend(layer.params())
        return out

    def zero_grads(self) -> None:
        for p in self.params():
            p.grad[...] = 0.0

    def kink_signature(self) -> bytes:
        return b"".join(layer.kink_signature() for layer in self.layers)

    def num_params(self) -> int:
        return sum(p.value.size for p in self.params())

    def set_dropout_frozen(self, frozen: bool) -> None:
        for layer in self.layers:
            if isinstance(layer, Dropout):
                layer.frozen = frozen

    def expand_dict_head(self, extra_classes: int, init_scale: float = 1e-2,
                         rng: np.random.Generator | None = None) -> None:
        """Grow the classification layer, copying existing class rows.

        New rows are drawn small so pre-expansion logits for old classes
        are preserved exactly and predictions are initially unchanged.
        """
        if self.spec.head != "dict":
            raise ValueError("incremental expansion applies to the dict head")
        if extra_classes < 1:
            raise ValueError("extra_classes must be >= 1")
        rng = rng or self.rng
        head = self._head_dense
        old_w, old_b = head.weight.value, head.bias.value
        K, D = old_w.shape
        new_w = np.empty((K + extra_classes, D), dtype=old_w.dtype)
        new_w[:K] = old_w
        new_w[K:] = rng.normal(0.0, init_scale, (extra_classes, D)).astype(old_w.dtype)
        new_b = np.concatenate([old_b, np.zeros(extra_classes, dtype=old_b.dtype)])
        head.weight.value = new_w
        head.weight.grad = np.zeros_like(new_w)
        head.bias.value = new_b
        head.bias.grad = np.zeros_like(new_b)
        head.out_units = K + extra_classes
        self.spec.n_out = K + extra_classes
        for ls in self.spec.layers:
            if ls.kind == "softmax-head":
                ls.params["units"] = K + extra_classes

    def state_items(self) -> list[tuple[str, np.ndarray]]:
        return [(p.name, p.value) for p in self.params()]

    def load_state(self, items: dict[str, np.ndarray]) -> None:
        for p in self.params():
            if p.name not in items:
                raise ValueError(f"checkpoint missing parameter {p.name}")
            v = items[p.name]
            if v.shape != p.value.shape:
                raise ValueError(f"shape mismatch for {p.name}: {v.shape} vs {p.value.shape}")
            p.value = v.astype(p.value.dtype)
            p.grad = np.zeros_like(p.value)
