"""A small reverse-mode automatic differentiation engine over numpy arrays.

Only the operations the policy networks and losses need are implemented.
Broadcasting follows numpy; gradients are summed back to each operand's shape.
"""
from __future__ import annotations

import numpy as np


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for i, n in enumerate(shape):
        if n == 1 and grad.shape[i] != 1:
            grad = grad.sum(axis=i, keepdims=True)
    return grad


def _lift(x) -> "Tensor":
    return x if isinstance(x, Tensor) else Tensor(x)


class Tensor:
    __array_ufunc__ = None

    def __init__(self, data, parents: tuple = (), backward=None, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=float)
        self.grad = None
        self.parents = parents
        self._backward = backward
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    @property
    def shape(self):
        return self.data.shape

    def _make(self, data, parents, backward) -> "Tensor":
        parents = tuple(p for p in parents if p.requires_grad)
        if not parents:
            return Tensor(data)
        return Tensor(data, parents, backward)

    def _accum(self, g):
        if self.requires_grad:
            self.grad = g if self.grad is None else self.grad + g

    # elementwise arithmetic
    def __add__(self, other):
        other = _lift(other)

        def back(g):
            self._accum(_unbroadcast(g, self.shape))
            other._accum(_unbroadcast(g, other.shape))
        return self._make(self.data + other.data, (self, other), back)

    __radd__ = __add__

    def __neg__(self):
        return self._make(-self.data, (self,), lambda g: self._accum(-g))

    def __sub__(self, other):
        return self + (-_lift(other))

    def __rsub__(self, other):
        return _lift(other) + (-self)

    def __mul__(self, other):
        other = _lift(other)

        def back(g):
            self._accum(_unbroadcast(g * other.data, self.shape))
            other._accum(_unbroadcast(g * self.data, other.shape))
        return self._make(self.data * other.data, (self, other), back)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _lift(other)
        out = self.data / other.data

        def back(g):
            self._accum(_unbroadcast(g / other.data, self.shape))
            other._accum(_unbroadcast(-g * out / other.data, other.shape))
        return self._make(out, (self, other), back)

    def __rtruediv__(self, other):
        return _lift(other) / self

    def __pow__(self, k: float):
        out = self.data ** k
        return self._make(out, (self,), lambda g: self._accum(g * k * self.data ** (k - 1)))

    def sqrt(self):
        out = np.sqrt(self.data)
        return self._make(out, (self,), lambda g: self._accum(g * 0.5 / out))

    def exp(self):
        out = np.exp(self.data)
        return self._make(out, (self,), lambda g: self._accum(g * out))

    def tanh(self):
        out = np.tanh(self.data)
        return self._make(out, (self,), lambda g: self._accum(g * (1.0 - out ** 2)))

    def silu(self):
        sig = 1.0 / (1.0 + np.exp(-self.data))
        out = self.data * sig
        return self._make(out, (self,), lambda g: self._accum(g * (sig + out * (1.0 - sig))))

    def relu(self):
        mask = self.data > 0
        return self._make(self.data * mask, (self,), lambda g: self._accum(g * mask))

    # linear algebra and reductions
    def __matmul__(self, other):
        other = _lift(other)

        def back(g):
            self._accum(g @ other.data.T)
            other._accum(self.data.T @ g)
        return self._make(self.data @ other.data, (self, other), back)

    def sum(self, axis=None, keepdims: bool = False):
        out = self.data.sum(axis=axis, keepdims=keepdims)

        def back(g):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            self._accum(np.broadcast_to(g, self.shape).copy())
        return self._make(out, (self,), back)

    def mean(self, axis=None, keepdims: bool = False):
        n = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis, keepdims) * (1.0 / n)

    def reshape(self, *shape):
        return self._make(self.data.reshape(*shape), (self,), lambda g: self._accum(g.reshape(self.shape)))

    def __getitem__(self, idx):
        def back(g):
            full = np.zeros_like(self.data)
            np.add.at(full, idx, g)
            self._accum(full)
        return self._make(self.data[idx], (self,), back)

    def log_softmax(self, axis: int = -1):
        shifted = self.data - self.data.max(axis=axis, keepdims=True)
        out = shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))

        def back(g):
            self._accum(g - np.exp(out) * g.sum(axis=axis, keepdims=True))
        return self._make(out, (self,), back)

    def backward(self, grad=None):
        """Accumulate gradients into every upstream tensor that requires them."""
        order, seen = [], set()
        stack = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            stack.extend((p, False) for p in node.parents)
        self.grad = np.ones_like(self.data) if grad is None else np.asarray(grad, dtype=float)
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)


def concat(tensors, axis: int = -1) -> Tensor:
    tensors = [_lift(t) for t in tensors]
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def back(g):
        for t, piece in zip(tensors, np.split(g, splits, axis=axis)):
            t._accum(piece)
    parents = tuple(t for t in tensors if t.requires_grad)
    data = np.concatenate([t.data for t in tensors], axis=axis)
    return Tensor(data, parents, back) if parents else Tensor(data)


def parameter(data) -> Tensor:
    return Tensor(np.array(data, dtype=float), requires_grad=True)
