"""Minimal reverse-mode automatic differentiation over dense float64 matrices.

A computation is recorded on a :class:`Graph` (a tape): every operation
appends its result node in creation order, which is by construction a valid
topological order.  :func:`backward` seeds the scalar loss with gradient 1
and walks the tape in reverse, letting each node scatter its gradient to its
parents.  Gradients accumulate additively, so nodes consumed by several
downstream operations are handled naturally; nodes the loss never reached
keep a gradient of ``None`` (read as zero).

Leaf nodes (:func:`parameter`, :func:`constant`) live outside any tape and
may be reused across graphs; this is what lets a training loop rebuild the
forward pass every epoch while updating one persistent set of parameters.
"""

from __future__ import annotations

import threading
from collections.abc import Callable, Sequence

import numpy as np
from scipy.special import expit

from .errors import ConfigurationError, ShapeError

__all__ = [
    "Node",
    "Graph",
    "parameter",
    "constant",
    "backward",
    "zero_grad",
    "grad_check",
    "matmul",
    "add",
    "sub",
    "mul",
    "scale",
    "sigmoid",
    "tanh",
    "exp",
    "transpose",
    "concat_cols",
    "slice_cols",
    "concat_rows",
    "slice_rows",
    "sum_all",
    "mean_all",
    "mse_loss",
    "smooth_l1_loss",
]


class Node:
    """One value in a recorded computation.

    Attributes
    ----------
    value : np.ndarray
        Dense float64 matrix (always 2-D).
    grad : np.ndarray or None
        Gradient of the final scalar with respect to ``value``; same shape.
        ``None`` until :func:`backward` propagates a contribution (zero).
    parents : tuple[Node, ...]
        Direct inputs of the operation that produced this node (empty for
        leaves).
    """

    __slots__ = ("value", "grad", "parents", "_backward", "graph")

    def __init__(self, value, parents=(), backward=None, graph=None):
        self.value = value
        self.grad = None
        self.parents = parents
        self._backward = backward
        self.graph = graph

    @property
    def shape(self):
        return self.value.shape

    def accumulate(self, g: np.ndarray, fresh: bool = False) -> None:
        """Add a gradient contribution; ``fresh`` hands over ownership of ``g``.

        Pass ``fresh=True`` only for arrays this call site just computed and
        holds the sole reference to; shared or viewed arrays are copied on
        the first contribution so later in-place accumulation cannot alias.
        """
        if self.grad is None:
            self.grad = g if fresh else g.copy()
        else:
            self.grad += g

    def __repr__(self):
        return f"Node(shape={self.value.shape}, leaf={self.graph is None})"


_ACTIVE = threading.local()


class Graph:
    """Tape of operation nodes; use as a context manager around a forward pass."""

    def __init__(self):
        self.nodes: list[Node] = []
        self.consumed = False

    def __enter__(self):
        stack = getattr(_ACTIVE, "stack", None)
        if stack is None:
            stack = _ACTIVE.stack = []
        stack.append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        _ACTIVE.stack.pop()
        return False

    @staticmethod
    def current() -> "Graph":
        stack = getattr(_ACTIVE, "stack", None)
        if not stack:
            raise ConfigurationError(
                "no active Graph: build operations inside a 'with Graph():' block"
            )
        return stack[-1]


def _as_matrix(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(1, -1)
    elif a.ndim != 2:
        raise ShapeError(f"expected at most 2 dimensions, got shape {a.shape}")
    return a


def parameter(value) -> Node:
    """Create a trainable leaf node (not attached to any graph)."""
    return Node(_as_matrix(value).copy())


def constant(value) -> Node:
    """Create a non-trainable leaf node holding fixed data."""
    return Node(_as_matrix(value).copy())


def _record(value, parents, backward) -> Node:
    g = Graph.current()
    node = Node(value, parents=parents, backward=backward, graph=g)
    g.nodes.append(node)
    return node


def backward(loss: Node) -> None:
    """Run reverse-mode accumulation from a scalar loss over its graph.

    The graph is single-use: recording happens in creation order, so the
    reversed tape is a valid topological order for the backward sweep.
    Nodes with no gradient (not on any path to the loss) are skipped.
    """
    if loss.graph is None:
        raise ConfigurationError("backward target is a leaf; record a computation first")
    g = loss.graph
    if g.consumed:
        raise ConfigurationError("graph already consumed by a previous backward pass")
    if loss.value.size != 1:
        raise ShapeError(f"backward requires a scalar loss, got shape {loss.value.shape}")
    g.consumed = True
    loss.grad = np.ones((1, 1))
    for node in reversed(g.nodes):
        if node.grad is not None and node._backward is not None:
            node._backward(node)


def zero_grad(params: Sequence[Node]) -> None:
    """Drop accumulated gradients of the given leaves."""
    for p in params:
        p.grad = None


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def matmul(a: Node, b: Node) -> Node:
    if a.value.shape[1] != b.value.shape[0]:
        raise ShapeError(f"matmul: inner dimensions differ, {a.value.shape} @ {b.value.shape}")

    def _bwd(out):
        a.accumulate(out.grad @ b.value.T, fresh=True)
        b.accumulate(a.value.T @ out.grad, fresh=True)

    return _record(a.value @ b.value, (a, b), _bwd)


def _binary_shapes(op: str, a: Node, b: Node) -> bool:
    """Validate elementwise operand shapes; True when b is a broadcast row."""
    if a.value.shape == b.value.shape:
        return False
    if b.value.shape == (1, a.value.shape[1]):
        return True
    raise ShapeError(f"{op}: incompatible shapes {a.value.shape} and {b.value.shape}")


def add(a: Node, b: Node) -> Node:
    """Elementwise sum; ``b`` may be a single row broadcast over rows of ``a``."""
    row = _binary_shapes("add", a, b)

    def _bwd(out):
        a.accumulate(out.grad)
        if row:
            b.accumulate(out.grad.sum(axis=0, keepdims=True), fresh=True)
        else:
            b.accumulate(out.grad)

    return _record(a.value + b.value, (a, b), _bwd)


def sub(a: Node, b: Node) -> Node:
    """Elementwise difference; ``b`` may be a broadcast row."""
    row = _binary_shapes("sub", a, b)

    def _bwd(out):
        a.accumulate(out.grad)
        if row:
            b.accumulate(-out.grad.sum(axis=0, keepdims=True), fresh=True)
        else:
            b.accumulate(-out.grad, fresh=True)

    return _record(a.value - b.value, (a, b), _bwd)


def mul(a: Node, b: Node) -> Node:
    """Hadamard product of same-shape operands."""
    if a.value.shape != b.value.shape:
        raise ShapeError(f"mul: shapes differ, {a.value.shape} vs {b.value.shape}")

    def _bwd(out):
        a.accumulate(out.grad * b.value, fresh=True)
        b.accumulate(out.grad * a.value, fresh=True)

    return _record(a.value * b.value, (a, b), _bwd)


def scale(a: Node, k: float) -> Node:
    """Multiply by a Python scalar constant."""
    k = float(k)

    def _bwd(out):
        a.accumulate(out.grad * k, fresh=True)

    return _record(a.value * k, (a,), _bwd)


def sigmoid(a: Node) -> Node:
    s = expit(a.value)

    def _bwd(out):
        a.accumulate(out.grad * s * (1.0 - s), fresh=True)

    return _record(s, (a,), _bwd)


def tanh(a: Node) -> Node:
    t = np.tanh(a.value)

    def _bwd(out):
        a.accumulate(out.grad * (1.0 - t * t), fresh=True)

    return _record(t, (a,), _bwd)


def exp(a: Node) -> Node:
    e = np.exp(a.value)

    def _bwd(out):
        a.accumulate(out.grad * e, fresh=True)

    return _record(e, (a,), _bwd)


def transpose(a: Node) -> Node:
    def _bwd(out):
        a.accumulate(out.grad.T)

    return _record(a.value.T.copy(), (a,), _bwd)


def concat_cols(*nodes: Node) -> Node:
    """Concatenate along columns (all operands share a row count)."""
    rows = {n.value.shape[0] for n in nodes}
    if len(nodes) < 1 or len(rows) != 1:
        raise ShapeError(f"concat_cols: row counts differ: {[n.value.shape for n in nodes]}")

    def _bwd(out):
        g = out.grad
        offset = 0
        for n in nodes:
            width = n.value.shape[1]
            n.accumulate(g[:, offset:offset + width])
            offset += width

    return _record(np.concatenate([n.value for n in nodes], axis=1), tuple(nodes), _bwd)


def slice_cols(a: Node, start: int, stop: int) -> Node:
    if not 0 <= start < stop <= a.value.shape[1]:
        raise ShapeError(f"slice_cols: [{start}:{stop}] out of range for {a.value.shape}")

    def _bwd(out):
        if a.grad is None:
            a.grad = np.zeros_like(a.value)
        a.grad[:, start:stop] += out.grad

    return _record(a.value[:, start:stop].copy(), (a,), _bwd)


def concat_rows(*nodes: Node) -> Node:
    """Concatenate along rows (all operands share a column count)."""
    cols = {n.value.shape[1] for n in nodes}
    if len(nodes) < 1 or len(cols) != 1:
        raise ShapeError(f"concat_rows: column counts differ: {[n.value.shape for n in nodes]}")

    def _bwd(out):
        g = out.grad
        offset = 0
        for n in nodes:
            height = n.value.shape[0]
            n.accumulate(g[offset:offset + height, :])
            offset += height

    return _record(np.concatenate([n.value for n in nodes], axis=0), tuple(nodes), _bwd)


def slice_rows(a: Node, start: int, stop: int) -> Node:
    if not 0 <= start < stop <= a.value.shape[0]:
        raise ShapeError(f"slice_rows: [{start}:{stop}] out of range for {a.value.shape}")

    def _bwd(out):
        if a.grad is None:
            a.grad = np.zeros_like(a.value)
        a.grad[start:stop, :] += out.grad

    return _record(a.value[start:stop, :].copy(), (a,), _bwd)


def sum_all(a: Node) -> Node:
    """Sum every element down to a 1x1 node."""

    def _bwd(out):
        a.accumulate(np.full_like(a.value, out.grad[0, 0]), fresh=True)

    return _record(a.value.sum().reshape(1, 1), (a,), _bwd)


def mean_all(a: Node) -> Node:
    """Mean of every element as a 1x1 node."""
    n = a.value.size

    def _bwd(out):
        a.accumulate(np.full_like(a.value, out.grad[0, 0] / n), fresh=True)

    return _record(a.value.mean().reshape(1, 1), (a,), _bwd)


def mse_loss(pred: Node, target: Node) -> Node:
    """Mean squared error over all elements, as a 1x1 node."""
    if pred.value.shape != target.value.shape:
        raise ShapeError(f"mse_loss: shapes differ, {pred.value.shape} vs {target.value.shape}")
    diff = pred.value - target.value
    n = diff.size

    def _bwd(out):
        g = out.grad[0, 0] * 2.0 / n * diff
        pred.accumulate(g)
        target.accumulate(-g, fresh=True)

    return _record((diff * diff).mean().reshape(1, 1), (pred, target), _bwd)


def smooth_l1_loss(pred: Node, target: Node) -> Node:
    """Mean smooth-L1 (Huber, delta=1) over all elements, as a 1x1 node.

    Per element: ``0.5*d**2`` where ``|d| < 1``, else ``|d| - 0.5``.
    """
    if pred.value.shape != target.value.shape:
        raise ShapeError(
            f"smooth_l1_loss: shapes differ, {pred.value.shape} vs {target.value.shape}"
        )
    diff = pred.value - target.value
    small = np.abs(diff) < 1.0
    elem = np.where(small, 0.5 * diff * diff, np.abs(diff) - 0.5)
    n = diff.size

    def _bwd(out):
        g = out.grad[0, 0] / n * np.where(small, diff, np.sign(diff))
        pred.accumulate(g)
        target.accumulate(-g, fresh=True)

    return _record(elem.mean().reshape(1, 1), (pred, target), _bwd)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


def grad_check(
    build: Callable[[], Node],
    params: Sequence[Node],
    eps: float = 1e-5,
) -> float:
    """Compare analytic gradients against central finite differences.

    ``build`` must construct the forward pass from scratch (inside its own
    graph) and return the scalar loss node; it is re-invoked after each
    coordinate perturbation of ``params``.

    Returns the maximum relative error
    ``|analytic - numeric| / max(|analytic|, |numeric|, 1e-8)``
    over every coordinate of every parameter.
    """
    zero_grad(params)
    with Graph():
        loss = build()
    backward(loss)
    analytic = [np.zeros_like(p.value) if p.grad is None else p.grad.copy()
                for p in params]

    def eval_loss() -> float:
        with Graph():
            return float(build().value[0, 0])

    worst = 0.0
    for p, ga in zip(params, analytic):
        flat = p.value.reshape(-1)
        gflat = ga.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            f_plus = eval_loss()
            flat[i] = orig - eps
            f_minus = eval_loss()
            flat[i] = orig
            numeric = (f_plus - f_minus) / (2.0 * eps)
            denom = max(abs(gflat[i]), abs(numeric), 1e-8)
            worst = max(worst, abs(gflat[i] - numeric) / denom)
    return worst
