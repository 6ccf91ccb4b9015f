"""Network layers with explicit forward and backward passes.

Everything operates on dense numpy arrays in (batch, channels, height,
width) layout.  Convolutions are stride-1 with same-padding, realized as
im2col + GEMM; pooling is 2x2 stride 2 with floor semantics on odd
extents.
"""

from __future__ import annotations

import numpy as np


class Param:
    """A learnable tensor with its gradient accumulator."""

    __slots__ = ("name", "value", "grad")

    def __init__(self, name: str, value: np.ndarray):
        self.name = name
        self.value = value
        self.grad = np.zeros_like(value)


class Layer:
    name = "layer"

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def params(self) -> list[Param]:
        return []

    def kink_signature(self) -> bytes:
        """Hash of any non-differentiable branch choices of the last forward.

        Finite-difference checks skip coordinates whose perturbation flips
        one of these choices (ReLU sign, pooling argmax).
        """
        return b""


def _windows(xp: np.ndarray, k: int) -> np.ndarray:
    """Strided (B, C, H-k+1, W-k+1, k, k) sliding-window view."""
    B, C, H, W = xp.shape
    sb, sc, sh, sw = xp.strides
    return np.lib.stride_tricks.as_strided(
        xp, (B, C, H - k + 1, W - k + 1, k, k), (sb, sc, sh, sw, sh, sw)
    )


class Conv2D(Layer):
    def __init__(self, in_channels: int, out_channels: int, kernel: int,
                 rng: np.random.Generator, dtype=np.float32, name: str = "conv"):
        if kernel % 2 != 1:
            raise ValueError("same-padding convolution needs an odd kernel")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = kernel
        self.name = name
        fan_in = in_channels * kernel * kernel
        std = np.sqrt(2.0 / fan_in)
        self.weight = Param(f"{name}.weight",
                            rng.normal(0.0, std, (out_channels, in_channels, kernel, kernel)).astype(dtype))
        self.bias = Param(f"{name}.bias", np.zeros(out_channels, dtype=dtype))
        self._cache = None

    def forward(self, x, train=False):
        B, C, H, W = x.shape
        if C != self.in_channels:
            raise ValueError(f"{self.name}: expected {self.in_channels} channels, got {C}")
        k, O = self.kernel, self.out_channels
        p = (k - 1) // 2
        xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)))
        cols = np.ascontiguousarray(_windows(xp, k).transpose(0, 2, 3, 1, 4, 5))
        cols = cols.reshape(B * H * W, C * k * k)
        out = cols @ self.weight.value.reshape(O, -1).T
        out += self.bias.value
        self._cache = (cols, (B, C, H, W))
        return out.reshape(B, H, W, O).transpose(0, 3, 1, 2)

    def backward(self, grad_out):
        cols, (B, C, H, W) = self._cache
        k, O = self.kernel, self.out_channels
        p = (k - 1) // 2
        gmat = np.ascontiguousarray(grad_out.transpose(0, 2, 3, 1)).reshape(B * H * W, O)
        self.weight.grad += (gmat.T @ cols).reshape(self.weight.value.shape)
        self.bias.grad += gmat.sum(axis=0)
        # input gradient: same-padded correlation of grad_out with the
        # spatially flipped kernels, channels swapped
        gp = np.pad(grad_out, ((0, 0), (0, 0), (p, p), (p, p)))
        gcols = np.ascontiguousarray(_windows(gp, k).transpose(0, 2, 3, 1, 4, 5))
        gcols = gcols.reshape(B * H * W, O * k * k)
        w_rot = self.weight.value[:, :, ::-1, ::-1].transpose(1, 0, 2, 3)  # (C, O, k, k)
        dx = gcols @ np.ascontiguousarray(w_rot).reshape(C, -1).T
        return dx.reshape(B, H, W, C).transpose(0, 3, 1, 2)

    def params(self):
        return [self.weight, self.bias]


class ReLU(Layer):
    name = "relu"

    def forward(self, x, train=False):
        self._mask = x > 0
        return x * self._mask

    def backward(self, grad_out):
        return grad_out * self._mask

    def kink_signature(self):
        return self._mask.tobytes()


class MaxPool2(Layer):
    """2x2 max pooling, stride 2; odd trailing rows/columns are dropped."""

    name = "maxpool"

    def forward(self, x, train=False):
        B, C, H, W = x.shape
        H2, W2 = H // 2, W // 2
        xc = x[:, :, : 2 * H2, : 2 * W2]
        win = xc.reshape(B, C, H2, 2, W2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(B, C, H2, W2, 4)
        self._idx = win.argmax(axis=-1)
        self._in_shape = (B, C, H, W)
        return np.take_along_axis(win, self._idx[..., None], axis=-1)[..., 0]

    def backward(self, grad_out):
        B, C, H, W = self._in_shape
        H2, W2 = H // 2, W // 2
        scatter = np.zeros((B, C, H2, W2, 4), dtype=grad_out.dtype)
        np.put_along_axis(scatter, self._idx[..., None], grad_out[..., None], axis=-1)
        dx = np.zeros(self._in_shape, dtype=grad_out.dtype)
        dx[:, :, : 2 * H2, : 2 * W2] = (
            scatter.reshape(B, C, H2, W2, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(B, C, 2 * H2, 2 * W2)
        )
        return dx

    def kink_signature(self):
        return self._idx.tobytes()


class Flatten(Layer):
    name = "flatten"

    def forward(self, x, train=False):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad_out):
        return grad_out.reshape(self._shape)


class Dense(Layer):
    def __init__(self, in_units: int, out_units: int, rng: np.random.Generator,
                 dtype=np.float32, name: str = "fc"):
        self.in_units = in_units
        self.out_units = out_units
        self.name = name
        std = np.sqrt(2.0 / in_units)
        self.weight = Param(f"{name}.weight", rng.normal(0.0, std, (out_units, in_units)).astype(dtype))
        self.bias = Param(f"{name}.bias", np.zeros(out_units, dtype=dtype))

    def forward(self, x, train=False):
        if x.ndim != 2 or x.shape[1] != self.in_units:
            raise ValueError(f"{self.name}: expected (B, {self.in_units}), got {x.shape}")
        self._x = x
        return x @ self.weight.value.T + self.bias.value

    def backward(self, grad_out):
        self.weight.grad += grad_out.T @ self._x
        self.bias.grad += grad_out.sum(axis=0)
        return grad_out @ self.weight.value

    def params(self):
        return [self.weight, self.bias]


class Dropout(Layer):
    """Inverted dropout: active only in training, identity at inference."""

    name = "dropout"

    def __init__(self, rate: float, rng: np.random.Generator):
        if not 0.0 <= rate < 1.0:
            raise ValueError("dropout rate must be in [0, 1)")
        self.rate = rate
        self.rng = rng
        self.frozen = False  # reuse the last mask (finite-difference checks)
        self._mask = None

    def forward(self, x, train=False):
        if not train or self.rate == 0.0:
            self._mask = None
            return x
        if not (self.frozen and self._mask is not None and self._mask.shape == x.shape):
            keep = 1.0 - self.rate
            self._mask = (self.rng.random(x.shape) < keep).astype(x.dtype) / keep
        return x * self._mask

    def backward(self, grad_out):
        if self._mask is None:
            return grad_out
        return grad_out * self._mask


class Reshape(Layer):
    """Reshape trailing dimensions; batch dimension is preserved."""

    name = "reshape"

    def __init__(self, target: tuple[int, ...]):
        self.target = target

    def forward(self, x, train=False):
        self._shape = x.shape
        return x.reshape((x.shape[0],) + self.target)

    def backward(self, grad_out):
        return grad_out.reshape(self._shape)


class Softmax(Layer):
    """Softmax over the last axis."""

    name = "softmax"

    def forward(self, x, train=False):
        z = x - x.max(axis=-1, keepdims=True)
        e = np.exp(z)
        self._p = e / e.sum(axis=-1, keepdims=True)
        return self._p

    def backward(self, grad_out):
        p = self._p
        return p * (grad_out - (grad_out * p).sum(axis=-1, keepdims=True))


class Sigmoid(Layer):
    name = "sigmoid"

    def forward(self, x, train=False):
        self._s = 1.0 / (1.0 + np.exp(-x))
        return self._s

    def backward(self, grad_out):
        s = self._s
        return grad_out * s * (1.0 - s)
