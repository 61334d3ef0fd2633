"""Minimal reverse-mode automatic differentiation over NumPy arrays.

Just the operations the graph attention models need: dense linear algebra,
pointwise nonlinearities, row gather/scatter, and segment reductions for
per-node softmax over incident edges. Everything is float64 and
deterministic.
"""

from __future__ import annotations

import numpy as np


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_backward", "_parents")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self._backward = None
        self._parents = ()

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # -- graph construction helpers ------------------------------------

    @staticmethod
    def _lift(x) -> "Tensor":
        return x if isinstance(x, Tensor) else Tensor(x)

    def _needs_grad(self) -> bool:
        return self.requires_grad or bool(self._parents)

    def _accum(self, g):
        if not (self.requires_grad or self._parents):
            return
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float64)
        else:
            self.grad += g

    def backward(self):
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar output")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other):
        other = self._lift(other)
        out = _make(self.data + other.data, (self, other))

        def bw(g):
            _accum_bcast(self, g)
            _accum_bcast(other, g)

        out._backward = bw
        return out

    __radd__ = __add__

    def __neg__(self):
        out = _make(-self.data, (self,))
        out._backward = lambda g: _accum_bcast(self, -g)
        return out

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) + (-self)

    def __mul__(self, other):
        other = self._lift(other)
        out = _make(self.data * other.data, (self, other))

        def bw(g):
            _accum_bcast(self, g * other.data)
            _accum_bcast(other, g * self.data)

        out._backward = bw
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._lift(other)
        out = _make(self.data / other.data, (self, other))

        def bw(g):
            _accum_bcast(self, g / other.data)
            _accum_bcast(other, -g * self.data / (other.data**2))

        out._backward = bw
        return out

    def __matmul__(self, other):
        other = self._lift(other)
        out = _make(self.data @ other.data, (self, other))

        def bw(g):
            if self.requires_grad or self._parents:
                self._accum(g @ other.data.T)
            if other.requires_grad or other._parents:
                other._accum(self.data.T @ g)

        out._backward = bw
        return out

    def sum(self, axis=None, keepdims=False):
        out = _make(self.data.sum(axis=axis, keepdims=keepdims), (self,))

        def bw(g):
            if axis is None:
                self._accum(np.full_like(self.data, float(g)))
            else:
                gg = g if keepdims else np.expand_dims(g, axis)
                self._accum(np.broadcast_to(gg, self.data.shape).copy())

        out._backward = bw
        return out

    def mean(self):
        return self.sum() * (1.0 / self.data.size)

    def item(self) -> float:
        return float(self.data)


def _make(data, parents) -> Tensor:
    out = Tensor(data)
    out._parents = tuple(parents)
    return out


def _accum_bcast(t: Tensor, g):
    """Accumulate gradient, summing over axes that were broadcast in forward."""
    if not (t.requires_grad or t._parents):
        return
    shape = t.data.shape
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, dim in enumerate(shape):
        if dim == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    t._accum(g)


# -- pointwise nonlinearities ------------------------------------------


def relu(t: Tensor) -> Tensor:
    out = _make(np.maximum(t.data, 0.0), (t,))
    out._backward = lambda g: t._accum(g * (t.data > 0))
    return out


def leaky_relu(t: Tensor, slope: float = 0.2) -> Tensor:
    out = _make(np.where(t.data > 0, t.data, slope * t.data), (t,))
    out._backward = lambda g: t._accum(g * np.where(t.data > 0, 1.0, slope))
    return out


def elu(t: Tensor, alpha: float = 1.0) -> Tensor:
    neg = alpha * (np.exp(np.minimum(t.data, 0.0)) - 1.0)
    out = _make(np.where(t.data > 0, t.data, neg), (t,))
    out._backward = lambda g: t._accum(g * np.where(t.data > 0, 1.0, neg + alpha))
    return out


def sigmoid(t: Tensor) -> Tensor:
    s = np.where(t.data >= 0, 1.0 / (1.0 + np.exp(-np.abs(t.data))), np.exp(-np.abs(t.data)) / (1.0 + np.exp(-np.abs(t.data))))
    out = _make(s, (t,))
    out._backward = lambda g: t._accum(g * s * (1.0 - s))
    return out


def tanh(t: Tensor) -> Tensor:
    v = np.tanh(t.data)
    out = _make(v, (t,))
    out._backward = lambda g: t._accum(g * (1.0 - v**2))
    return out


def exp(t: Tensor) -> Tensor:
    v = np.exp(t.data)
    out = _make(v, (t,))
    out._backward = lambda g: t._accum(g * v)
    return out


# -- structural ops -----------------------------------------------------


def reshape(t: Tensor, shape) -> Tensor:
    out = _make(t.data.reshape(shape), (t,))
    out._backward = lambda g: t._accum(g.reshape(t.data.shape))
    return out




def concat(tensors: list[Tensor], axis: int = 0) -> Tensor:
    out = _make(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors))
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def bw(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            idx = [slice(None)] * g.ndim
            idx[axis] = slice(lo, hi)
            t._accum(g[tuple(idx)])

    out._backward = bw
    return out


def _scatter_add(values: np.ndarray, seg: np.ndarray, num_segments: int) -> np.ndarray:
    """Sum rows of `values` into `num_segments` buckets (bincount is much
    faster than np.add.at for the small arrays seen here)."""
    tail = values.shape[1:]
    width = int(np.prod(tail)) if tail else 1
    flat_idx = (seg[:, None] * width + np.arange(width)).ravel() if tail else seg
    acc = np.bincount(flat_idx, weights=values.ravel(), minlength=num_segments * width)
    return acc.reshape((num_segments,) + tail)


def gather_rows(t: Tensor, idx: np.ndarray) -> Tensor:
    out = _make(t.data[idx], (t,))

    def bw(g):
        if not (t.requires_grad or t._parents):
            return
        t._accum(_scatter_add(g, idx, t.data.shape[0]))

    out._backward = bw
    return out


def segment_sum(t: Tensor, seg: np.ndarray, num_segments: int) -> Tensor:
    out = _make(_scatter_add(t.data, seg, num_segments), (t,))
    out._backward = lambda g: t._accum(g[seg])
    return out


def segment_softmax(logits: Tensor, seg: np.ndarray, num_segments: int) -> Tensor:
    """Softmax of per-edge logits within each destination segment.

    The per-segment max is treated as a constant (standard stabilization;
    its gradient contribution cancels).
    """
    m = np.full((num_segments,) + logits.data.shape[1:], -np.inf)
    np.maximum.at(m, seg, logits.data)
    m[~np.isfinite(m)] = 0.0  # empty segments
    z = exp(logits - Tensor(m[seg]))
    denom = segment_sum(z, seg, num_segments)
    return z / gather_rows(denom, seg)
