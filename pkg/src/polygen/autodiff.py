"""Minimal reverse-mode differentiation over numpy arrays.

A :class:`Tape` records every primitive operation as it happens, so the
node list is topologically ordered by construction.  Each :class:`Node`
carries its forward value, an adjoint accumulator, and a closure that
pushes its adjoint back to its parents.  :func:`grad` runs the reverse
sweep and returns the gradients of every parameter registered on the tape.

Adjoints are lazy: ``None`` means an exact zero, and nodes the loss never
reaches keep it.  Accumulation is non-inplace (``a = a + g``), so adjoint
arrays may alias forward temporaries safely.  Broadcasting follows numpy;
adjoints are summed back over broadcast axes.  All accumulation happens in
a fixed order (reverse tape order), so results are bitwise reproducible.
"""

from __future__ import annotations

import numpy as np


class Tape:
    """Append-only operation record plus the parameter registry."""

    def __init__(self):
        self.nodes = []
        self.params = {}

    def _register(self, node):
        self.nodes.append(node)

    def constant(self, value):
        return Node(self, value)

    def param(self, name: str, value):
        """Register a named parameter leaf; names must be unique per tape."""
        if name in self.params:
            raise ValueError(f"parameter {name!r} already registered")
        node = Node(self, value)
        self.params[name] = node
        return node


class Node:
    __slots__ = ("tape", "value", "adjoint", "_parents", "_backward")

    def __init__(self, tape: Tape, value, parents=(), backward=None):
        self.tape = tape
        if type(value) is not np.ndarray or value.dtype != np.float64:
            value = np.asarray(value, dtype=np.float64)
        self.value = value
        self.adjoint = None
        self._parents = parents
        self._backward = backward
        tape._register(self)

    @property
    def shape(self):
        return self.value.shape

    def _lift(self, other):
        return other if isinstance(other, Node) else Node(self.tape, other)

    def __add__(self, other):
        return add(self, self._lift(other))

    def __radd__(self, other):
        return add(self._lift(other), self)

    def __sub__(self, other):
        return sub(self, self._lift(other))

    def __rsub__(self, other):
        return sub(self._lift(other), self)

    def __mul__(self, other):
        return mul(self, self._lift(other))

    def __rmul__(self, other):
        return mul(self._lift(other), self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, self._lift(other))

    def __repr__(self):
        return f"Node(shape={self.value.shape})"


def _acc(node: Node, g) -> None:
    node.adjoint = g if node.adjoint is None else node.adjoint + g


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum gradient `g` back down to `shape` after numpy broadcasting."""
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g.reshape(shape)


def add(a: Node, b: Node) -> Node:
    out = Node(a.tape, a.value + b.value, (a, b))

    def backward():
        _acc(a, _unbroadcast(out.adjoint, a.value.shape))
        _acc(b, _unbroadcast(out.adjoint, b.value.shape))

    out._backward = backward
    return out


def sub(a: Node, b: Node) -> Node:
    out = Node(a.tape, a.value - b.value, (a, b))

    def backward():
        _acc(a, _unbroadcast(out.adjoint, a.value.shape))
        _acc(b, -_unbroadcast(out.adjoint, b.value.shape))

    out._backward = backward
    return out


def neg(a: Node) -> Node:
    out = Node(a.tape, -a.value, (a,))

    def backward():
        _acc(a, -out.adjoint)

    out._backward = backward
    return out


def mul(a: Node, b: Node) -> Node:
    """Hadamard (elementwise, broadcasting) product."""
    out = Node(a.tape, a.value * b.value, (a, b))

    def backward():
        _acc(a, _unbroadcast(out.adjoint * b.value, a.value.shape))
        _acc(b, _unbroadcast(out.adjoint * a.value, b.value.shape))

    out._backward = backward
    return out


def matmul(a: Node, b: Node) -> Node:
    """Matrix product for 1-D/2-D operands with numpy semantics."""
    out = Node(a.tape, a.value @ b.value, (a, b))
    av, bv = a.value, b.value

    def backward():
        g = out.adjoint
        if av.ndim == 1 and bv.ndim == 2:
            _acc(a, g @ bv.T)
            _acc(b, np.outer(av, g))
        elif av.ndim == 2 and bv.ndim == 1:
            _acc(a, np.outer(g, bv))
            _acc(b, av.T @ g)
        elif av.ndim == 1 and bv.ndim == 1:
            _acc(a, g * bv)
            _acc(b, g * av)
        else:
            _acc(a, g @ bv.T)
            _acc(b, av.T @ g)

    out._backward = backward
    return out


def transpose(a: Node) -> Node:
    out = Node(a.tape, np.ascontiguousarray(a.value.T), (a,))

    def backward():
        _acc(a, out.adjoint.T)

    out._backward = backward
    return out


def broadcast_to(a: Node, shape) -> Node:
    out = Node(a.tape, np.broadcast_to(a.value, shape).copy(), (a,))

    def backward():
        _acc(a, _unbroadcast(out.adjoint, a.value.shape))

    out._backward = backward
    return out


def concat(nodes, axis=1) -> Node:
    values = [n.value for n in nodes]
    out = Node(nodes[0].tape, np.concatenate(values, axis=axis), tuple(nodes))
    sizes = [v.shape[axis] for v in values]
    offsets = np.cumsum([0] + sizes)

    def backward():
        for node, lo, hi in zip(nodes, offsets[:-1], offsets[1:]):
            sl = [slice(None)] * out.adjoint.ndim
            sl[axis] = slice(lo, hi)
            _acc(node, out.adjoint[tuple(sl)])

    out._backward = backward
    return out


def sum_(a: Node, axis=None) -> Node:
    out = Node(a.tape, np.sum(a.value, axis=axis), (a,))

    def backward():
        g = out.adjoint
        if axis is not None:
            g = np.expand_dims(g, axis)
        _acc(a, np.broadcast_to(g, a.value.shape))

    out._backward = backward
    return out


def mean_(a: Node, axis=None) -> Node:
    count = a.value.size if axis is None else a.value.shape[axis]
    out = Node(a.tape, np.mean(a.value, axis=axis), (a,))

    def backward():
        g = out.adjoint / count
        if axis is not None:
            g = np.expand_dims(g, axis)
        _acc(a, np.broadcast_to(g, a.value.shape))

    out._backward = backward
    return out


def log(a: Node) -> Node:
    out = Node(a.tape, np.log(a.value), (a,))

    def backward():
        _acc(a, out.adjoint / a.value)

    out._backward = backward
    return out


def tanh(a: Node) -> Node:
    out = Node(a.tape, np.tanh(a.value), (a,))

    def backward():
        _acc(a, out.adjoint * (1.0 - out.value**2))

    out._backward = backward
    return out


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # stable in both tails
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def sigmoid(a: Node) -> Node:
    out = Node(a.tape, _sigmoid(a.value), (a,))

    def backward():
        _acc(a, out.adjoint * out.value * (1.0 - out.value))

    out._backward = backward
    return out


def softplus(a: Node) -> Node:
    """log(1 + exp(x)), computed as logaddexp(0, x) for stability."""
    out = Node(a.tape, np.logaddexp(0.0, a.value), (a,))

    def backward():
        _acc(a, out.adjoint * _sigmoid(a.value))

    out._backward = backward
    return out


def relu(a: Node) -> Node:
    out = Node(a.tape, np.maximum(a.value, 0.0), (a,))

    def backward():
        _acc(a, out.adjoint * (a.value > 0))

    out._backward = backward
    return out


def leaky_relu(a: Node, slope: float = 0.2) -> Node:
    out = Node(a.tape, np.where(a.value > 0, a.value, slope * a.value), (a,))

    def backward():
        _acc(a, out.adjoint * np.where(a.value > 0, 1.0, slope))

    out._backward = backward
    return out


def grad(loss: Node, tape: Tape) -> dict:
    """Reverse-accumulate d(loss)/d(theta) for every registered parameter.

    The loss must be a scalar node on `tape`.  Nodes the loss does not
    depend on keep a zero adjoint (stored as ``None``); parameters among
    them get explicit zero gradients in the returned map.
    """
    if loss.tape is not tape:
        raise ValueError("loss node does not belong to this tape")
    if loss.value.size != 1:
        raise ValueError(f"loss must be scalar, got shape {loss.value.shape}")
    for node in tape.nodes:
        node.adjoint = None
    loss.adjoint = np.ones_like(loss.value)
    for node in reversed(tape.nodes):
        if node._backward is not None and node.adjoint is not None:
            node._backward()
    return {
        name: (np.zeros_like(node.value) if node.adjoint is None else np.array(node.adjoint))
        for name, node in tape.params.items()
    }
