"""Reverse-mode automatic differentiation on dense float64 tensors.

A Tape is an append-only list of nodes; each node records a primitive op,
the indices of its input nodes, and the computed forward value. backward()
does one reverse topological sweep and returns a gradient for every leaf.

All arithmetic is float64. There is no broadcasting except scalar_mul;
elementwise ops require exactly matching shapes, which turns a whole class
of silent shape bugs into immediate errors.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .validation import ShapeError, ValidationError, as_f64

__all__ = ["Tape", "Node", "apply_primitive", "grad_check", "GradCheckReport", "PRIMITIVE_OPS"]


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _require_same_shape(op: str, a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shape mismatch {a.shape} vs {b.shape}")


# Forward rules: (input values, attrs) -> output value.

def _fwd_matmul(vals, attrs):
    a, b = vals
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} and {b.shape}")
    return a @ b


def _fwd_concat(vals, attrs):
    a, b = vals
    if a.ndim != b.ndim or a.ndim < 1 or a.shape[:-1] != b.shape[:-1]:
        raise ShapeError(f"concat_last_axis: incompatible shapes {a.shape} and {b.shape}")
    return np.concatenate([a, b], axis=-1)


def _fwd_slice(vals, attrs):
    (a,) = vals
    start, stop = attrs["start"], attrs["stop"]
    if a.ndim < 1 or not (0 <= start <= stop <= a.shape[-1]):
        raise ShapeError(f"slice_last_axis: bounds [{start}:{stop}] invalid for shape {a.shape}")
    return a[..., start:stop].copy()


def _fwd_reshape(vals, attrs):
    (a,) = vals
    shape = tuple(attrs["shape"])
    if int(np.prod(shape, dtype=np.int64)) != a.size:
        raise ShapeError(f"reshape: cannot reshape {a.shape} to {shape}")
    return a.reshape(shape)


def _binop(op, fn):
    def fwd(vals, attrs):
        a, b = vals
        _require_same_shape(op, a, b)
        return fn(a, b)
    return fwd


_FORWARD: dict[str, Callable] = {
    "matmul": _fwd_matmul,
    "add": _binop("add", np.add),
    "sub": _binop("sub", np.subtract),
    "elemwise_mul": _binop("elemwise_mul", np.multiply),
    "scalar_mul": lambda vals, attrs: vals[0] * float(attrs["scalar"]),
    "concat_last_axis": _fwd_concat,
    "slice_last_axis": _fwd_slice,
    "relu": lambda vals, attrs: np.maximum(vals[0], 0.0),
    "leaky_relu": lambda vals, attrs: np.where(vals[0] > 0, vals[0], float(attrs.get("alpha", 0.2)) * vals[0]),
    "tanh": lambda vals, attrs: np.tanh(vals[0]),
    "sigmoid": lambda vals, attrs: _sigmoid(vals[0]),
    "abs": lambda vals, attrs: np.abs(vals[0]),
    "mean_all": lambda vals, attrs: np.asarray(np.mean(vals[0])),
    "sum_all": lambda vals, attrs: np.asarray(np.sum(vals[0])),
    "reshape": _fwd_reshape,
}

# Backward rules: (output grad, input values, output value, attrs)
# -> one gradient per input. Kept in a module-level table so tests can
# substitute a deliberately wrong adjoint.

_VJP: dict[str, Callable] = {
    "matmul": lambda g, vals, out, attrs: (g @ vals[1].T, vals[0].T @ g),
    "add": lambda g, vals, out, attrs: (g, g),
    "sub": lambda g, vals, out, attrs: (g, -g),
    "elemwise_mul": lambda g, vals, out, attrs: (g * vals[1], g * vals[0]),
    "scalar_mul": lambda g, vals, out, attrs: (g * float(attrs["scalar"]),),
    "concat_last_axis": lambda g, vals, out, attrs: (
        g[..., : vals[0].shape[-1]].copy(),
        g[..., vals[0].shape[-1]:].copy(),
    ),
    "slice_last_axis": lambda g, vals, out, attrs: (_slice_vjp(g, vals[0], attrs),),
    "relu": lambda g, vals, out, attrs: (g * (vals[0] > 0),),
    "leaky_relu": lambda g, vals, out, attrs: (
        g * np.where(vals[0] > 0, 1.0, float(attrs.get("alpha", 0.2))),
    ),
    "tanh": lambda g, vals, out, attrs: (g * (1.0 - out * out),),
    "sigmoid": lambda g, vals, out, attrs: (g * out * (1.0 - out),),
    "abs": lambda g, vals, out, attrs: (g * np.sign(vals[0]),),
    "mean_all": lambda g, vals, out, attrs: (np.full(vals[0].shape, float(g) / vals[0].size),),
    "sum_all": lambda g, vals, out, attrs: (np.full(vals[0].shape, float(g)),),
    "reshape": lambda g, vals, out, attrs: (g.reshape(vals[0].shape),),
}

PRIMITIVE_OPS = tuple(sorted(_FORWARD))

# Per-input rules for ops whose partials are expensive enough that skipping
# an unneeded side matters (used only when backward() gets a `wrt` filter).
_VJP_SPLIT: dict[str, tuple[Callable, ...]] = {
    "matmul": (
        lambda g, vals, out, attrs: g @ vals[1].T,
        lambda g, vals, out, attrs: vals[0].T @ g,
    ),
}


def _slice_vjp(g, x, attrs):
    dx = np.zeros_like(x)
    dx[..., attrs["start"]:attrs["stop"]] = g
    return dx


@dataclass
class Node:
    op: str                      # primitive tag, or "leaf"
    inputs: tuple[int, ...]
    value: np.ndarray
    attrs: dict = field(default_factory=dict)
    leaf_kind: str | None = None  # "param" | "input" for leaves, else None


class Tape:
    """Single-writer record of a forward computation.

    Node references are plain integer indices; inputs always point at
    strictly earlier nodes, so the list is topologically ordered by
    construction.
    """

    def __init__(self) -> None:
        self.nodes: list[Node] = []

    def leaf(self, value, kind: str = "input") -> int:
        if kind not in ("input", "param"):
            raise ValidationError(f"leaf kind must be 'input' or 'param', got {kind!r}")
        arr = as_f64(value, "leaf")
        self.nodes.append(Node("leaf", (), arr, {}, kind))
        return len(self.nodes) - 1

    def apply(self, op: str, *inputs: int, **attrs) -> int:
        return apply_primitive(self, op, inputs, attrs)

    def value(self, ref: int) -> np.ndarray:
        return self.nodes[ref].value

    def leaves(self, kind: str | None = None) -> list[int]:
        return [
            i for i, n in enumerate(self.nodes)
            if n.op == "leaf" and (kind is None or n.leaf_kind == kind)
        ]

    def backward(self, root: int, wrt=None) -> dict[int, np.ndarray]:
        """Gradient of the scalar node `root` with respect to every leaf.

        Leaves not reachable from root get zero gradients of their shape.
        Each node is touched exactly once in one reverse sweep. When `wrt`
        (an iterable of leaf references) is given, gradient flow is pruned
        to paths that can reach those leaves and only they are returned;
        values are identical to the unpruned sweep.
        """
        root_val = self.nodes[root].value
        if root_val.shape not in ((), (1,)):
            raise ShapeError(f"backward: root must be scalar, got shape {root_val.shape}")
        nodes = self.nodes
        useful = None
        if wrt is not None:
            useful = set(wrt)
            for i in range(root + 1):
                node = nodes[i]
                if node.op != "leaf" and any(j in useful for j in node.inputs):
                    useful.add(i)
        grads: dict[int, np.ndarray] = {root: np.ones_like(root_val)}
        owned: set[int] = set()

        def accumulate(j: int, dj: np.ndarray) -> None:
            if j not in grads:
                grads[j] = dj  # may alias the upstream gradient; copy before mutating
            elif j in owned:
                grads[j] += dj
            else:
                grads[j] = grads[j] + dj
                owned.add(j)

        for i in range(root, -1, -1):
            if i not in grads:
                continue
            node = nodes[i]
            if node.op == "leaf":
                continue
            g = grads.pop(i)
            if useful is not None and i not in useful:
                continue
            targets = node.inputs if useful is None else tuple(
                j for j in node.inputs if j in useful)
            if not targets:
                continue
            if node.op == "slice_last_axis":
                # accumulate straight into the slice region instead of
                # materializing a full-size zero gradient per occurrence
                j = node.inputs[0]
                if j not in grads:
                    grads[j] = np.zeros_like(nodes[j].value)
                    owned.add(j)
                elif j not in owned:
                    grads[j] = grads[j].copy()
                    owned.add(j)
                grads[j][..., node.attrs["start"]:node.attrs["stop"]] += g
                continue
            in_vals = tuple(nodes[j].value for j in node.inputs)
            split = _VJP_SPLIT.get(node.op) if useful is not None else None
            if split is not None and len(targets) < len(node.inputs):
                for pos, j in enumerate(node.inputs):
                    if j in useful:
                        accumulate(j, split[pos](g, in_vals, node.value, node.attrs))
                continue
            partials = _VJP[node.op](g, in_vals, node.value, node.attrs)
            for j, dj in zip(node.inputs, partials):
                if useful is not None and j not in useful:
                    continue
                accumulate(j, dj)
        report = self.leaves() if wrt is None else list(wrt)
        out: dict[int, np.ndarray] = {}
        for i in report:
            out[i] = grads.get(i, np.zeros_like(nodes[i].value))
        return out


def apply_primitive(tape: Tape, op: str, inputs, attrs=None) -> int:
    """Append one primitive node to the tape and return its reference."""
    attrs = dict(attrs or {})
    fwd = _FORWARD.get(op)
    if fwd is None:
        raise ValidationError(f"unknown op tag {op!r}")
    vals = tuple(tape.nodes[i].value for i in inputs)
    value = fwd(vals, attrs)
    tape.nodes.append(Node(op, tuple(inputs), np.asarray(value, dtype=np.float64), attrs))
    return len(tape.nodes) - 1


@dataclass
class GradCheckReport:
    passed: bool
    max_rel_err: float
    worst_index: int
    analytic: np.ndarray
    numeric: np.ndarray

    def __bool__(self) -> bool:
        return self.passed


def grad_check(f, point, eps: float = 1e-5, tol: float = 1e-4,
               zero_tol: float = 1e-8) -> GradCheckReport:
    """Compare tape gradients of a scalar function against central finite
    differences, coordinate by coordinate.

    `f(tape, x_ref) -> root_ref` must build a scalar-rooted tape from the
    single input leaf. A coordinate passes if its relative error is within
    `tol`, or its absolute error is below `zero_tol` when both sides are
    near zero.
    """
    if eps <= 0:
        raise ValidationError("grad_check: eps must be > 0")
    x0 = as_f64(point, "point")

    def run(x: np.ndarray) -> float:
        tape = Tape()
        root = f(tape, tape.leaf(x, kind="input"))
        val = tape.value(root)
        if val.shape not in ((), (1,)):
            raise ShapeError(f"grad_check: f must be scalar-valued, got shape {val.shape}")
        return float(val)

    tape = Tape()
    xref = tape.leaf(x0, kind="input")
    root = f(tape, xref)
    if tape.value(root).shape not in ((), (1,)):
        raise ShapeError(f"grad_check: f must be scalar-valued, got shape {tape.value(root).shape}")
    analytic = tape.backward(root)[xref]

    numeric = np.zeros_like(x0)
    flat = x0.reshape(-1)
    num_flat = numeric.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        fp = run(x0)
        flat[i] = orig - eps
        fm = run(x0)
        flat[i] = orig
        num_flat[i] = (fp - fm) / (2.0 * eps)

    a = analytic.reshape(-1)
    n = numeric.reshape(-1)
    max_rel = 0.0
    worst = 0
    passed = True
    for i in range(a.size):
        err = abs(a[i] - n[i])
        denom = max(abs(a[i]), abs(n[i]))
        if denom < zero_tol:
            ok = err <= zero_tol
            rel = err
        else:
            rel = err / denom
            ok = rel <= tol
        if rel > max_rel:
            max_rel = rel
            worst = i
        passed = passed and ok
    return GradCheckReport(passed, float(max_rel), int(worst), analytic, numeric)
