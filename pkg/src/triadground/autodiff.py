"""Minimal dense-tensor math with reverse-mode differentiation.

Just enough for the grounding network: matrix products, broadcast adds,
concatenation, ReLU, temperature softmax and squared-L2 losses, all in
float64, plus an Adam optimizer and a central-difference gradient checker.
Every op records its parents and a backward closure on the produced
tensor; ``backward()`` on a scalar walks the recorded graph once in
reverse topological order.
"""

from __future__ import annotations

from typing import Callable, Mapping, Sequence

import numpy as np


class ShapeError(ValueError):
    """Operands with incompatible shapes."""


class DomainError(ValueError):
    """Parameter outside its valid domain (e.g. temperature <= 0)."""


class NonFiniteError(FloatingPointError):
    """A tensor or gradient contains NaN or infinity."""


class Tensor:
    """A float64 array plus the tape node that produced it.

    ``parents`` and ``_backward`` are the recorded operation node; leaves
    have neither.  Gradients accumulate in ``grad`` (lazily allocated).
    """

    __slots__ = ("data", "grad", "requires_grad", "parents", "_backward", "name")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        parents: tuple = (),
        backward: Callable[[np.ndarray], None] | None = None,
        name: str = "",
    ):
        arr = np.asarray(data, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError(f"non-finite values in tensor {name or '<anon>'}")
        self.data = arr
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self.parents = parents
        self._backward = backward
        self.name = name

    @property
    def shape(self) -> tuple:
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, grad={'yes' if self.requires_grad else 'no'}, name={self.name!r})"

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self):
        self.grad = None

    def _accumulate(self, g: np.ndarray):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def backward(self):
        """Reverse pass from a scalar; visits each recorded node once."""
        if self.data.ndim != 0:
            raise ShapeError(f"backward requires a scalar loss, got shape {self.data.shape}")
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node.parents:
                if p.requires_grad and id(p) not in seen:
                    stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._backward is not None:
                node._backward(node.grad)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def parameter(data, name: str = "") -> Tensor:
    return Tensor(np.array(data, dtype=np.float64), requires_grad=True, name=name)


def constant(data, name: str = "") -> Tensor:
    return Tensor(data, requires_grad=False, name=name)


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise add; also supports adding a row vector to a matrix."""
    a, b = as_tensor(a), as_tensor(b)
    row_broadcast = a.data.ndim == 2 and b.data.ndim == 1 and a.shape[1] == b.shape[0]
    if not row_broadcast and a.shape != b.shape:
        raise ShapeError(f"add: {a.shape} vs {b.shape}")
    out = Tensor(a.data + b.data, parents=(a, b))

    def _bw(g):
        if a.requires_grad:
            a._accumulate(g)
        if b.requires_grad:
            b._accumulate(g.sum(axis=0) if row_broadcast else g)

    out._backward = _bw
    return out


def sub(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise ShapeError(f"sub: {a.shape} vs {b.shape}")
    out = Tensor(a.data - b.data, parents=(a, b))

    def _bw(g):
        if a.requires_grad:
            a._accumulate(g)
        if b.requires_grad:
            b._accumulate(-g)

    out._backward = _bw
    return out


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise product of same-shape tensors (or a scalar tensor)."""
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape and a.data.ndim != 0 and b.data.ndim != 0:
        raise ShapeError(f"mul: {a.shape} vs {b.shape}")
    out = Tensor(a.data * b.data, parents=(a, b))

    def _bw(g):
        if a.requires_grad:
            ga = g * b.data
            a._accumulate(ga.sum() if a.data.ndim == 0 and ga.ndim > 0 else ga)
        if b.requires_grad:
            gb = g * a.data
            b._accumulate(gb.sum() if b.data.ndim == 0 and gb.ndim > 0 else gb)

    out._backward = _bw
    return out


def scale(a: Tensor, c: float) -> Tensor:
    return mul(a, Tensor(float(c)))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix/vector product for the 2D@2D, 1D@2D and 2D@1D cases."""
    a, b = as_tensor(a), as_tensor(b)
    na, nb = a.data.ndim, b.data.ndim
    if (na, nb) not in {(2, 2), (1, 2), (2, 1)}:
        raise ShapeError(f"matmul: unsupported ranks {na}D @ {nb}D")
    if a.shape[-1] != (b.shape[0] if nb >= 1 else None):
        raise ShapeError(f"matmul: {a.shape} @ {b.shape}")
    out = Tensor(a.data @ b.data, parents=(a, b))

    def _bw(g):
        if (na, nb) == (2, 2):
            if a.requires_grad:
                a._accumulate(g @ b.data.T)
            if b.requires_grad:
                b._accumulate(a.data.T @ g)
        elif (na, nb) == (1, 2):
            if a.requires_grad:
                a._accumulate(b.data @ g)
            if b.requires_grad:
                b._accumulate(np.outer(a.data, g))
        else:  # (2, 1)
            if a.requires_grad:
                a._accumulate(np.outer(g, b.data))
            if b.requires_grad:
                b._accumulate(a.data.T @ g)

    out._backward = _bw
    return out


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    """Concatenate 1D tensors (axis 0) or 2D tensors column-wise (axis 1)."""
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise ShapeError("concat: empty input")
    ndim = tensors[0].data.ndim
    if any(t.data.ndim != ndim for t in tensors):
        raise ShapeError("concat: mixed ranks")
    if ndim not in (1, 2) or axis >= ndim:
        raise ShapeError(f"concat: axis {axis} invalid for {ndim}D inputs")
    out = Tensor(np.concatenate([t.data for t in tensors], axis=axis), parents=tuple(tensors))
    sizes = [t.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def _bw(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            if t.requires_grad:
                t._accumulate(g[lo:hi] if axis == 0 else g[:, lo:hi])

    out._backward = _bw
    return out


def tile_row(v: Tensor, n: int) -> Tensor:
    """Repeat a vector as n identical rows; gradient sums over rows."""
    v = as_tensor(v)
    if v.data.ndim != 1:
        raise ShapeError(f"tile_row: expected a vector, got {v.shape}")
    out = Tensor(np.tile(v.data, (n, 1)), parents=(v,))

    def _bw(g):
        if v.requires_grad:
            v._accumulate(g.sum(axis=0))

    out._backward = _bw
    return out


def reshape(a: Tensor, shape: tuple) -> Tensor:
    a = as_tensor(a)
    out = Tensor(a.data.reshape(shape), parents=(a,))

    def _bw(g):
        if a.requires_grad:
            a._accumulate(g.reshape(a.data.shape))

    out._backward = _bw
    return out


def relu(a: Tensor) -> Tensor:
    a = as_tensor(a)
    out = Tensor(np.maximum(a.data, 0.0), parents=(a,))

    def _bw(g):
        if a.requires_grad:
            a._accumulate(g * (a.data > 0.0))

    out._backward = _bw
    return out


def softmax(a: Tensor, temperature: float = 1.0) -> Tensor:
    """Temperature softmax over a vector: softmax(a / temperature).

    Numerically stabilized by max subtraction; output sums to 1.
    """
    a = as_tensor(a)
    if a.data.ndim != 1:
        raise ShapeError(f"softmax: expected a vector, got {a.shape}")
    if temperature <= 0.0:
        raise DomainError(f"softmax temperature must be positive, got {temperature}")
    z = a.data / temperature
    z = z - z.max()
    e = np.exp(z)
    s = e / e.sum()
    out = Tensor(s, parents=(a,))

    def _bw(g):
        if a.requires_grad:
            a._accumulate((s * (g - np.dot(g, s))) / temperature)

    out._backward = _bw
    return out


def tsum(a: Tensor) -> Tensor:
    a = as_tensor(a)
    out = Tensor(a.data.sum(), parents=(a,))

    def _bw(g):
        if a.requires_grad:
            a._accumulate(np.full_like(a.data, float(g)))

    out._backward = _bw
    return out


def l2_sq(a: Tensor, b: Tensor) -> Tensor:
    """Squared L2 distance sum((a - b)^2), a scalar."""
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise ShapeError(f"l2_sq: {a.shape} vs {b.shape}")
    d = a.data - b.data
    out = Tensor(np.sum(d * d), parents=(a, b))

    def _bw(g):
        if a.requires_grad:
            a._accumulate(2.0 * d * float(g))
        if b.requires_grad:
            b._accumulate(-2.0 * d * float(g))

    out._backward = _bw
    return out


def gradients(loss: Tensor, params: Mapping[str, Tensor]) -> dict[str, np.ndarray]:
    """Backward pass returning one gradient per named parameter.

    Parameters unreachable from the loss get an exact zero gradient.
    """
    for p in params.values():
        p.zero_grad()
    loss.backward()
    return {
        name: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data))
        for name, p in params.items()
    }


class Adam:
    """Adam with bias correction over a named parameter dict.

    Parameters are updated in place; the optimizer owns them exclusively
    during ``step``.
    """

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}

    def step(self, params: Mapping[str, Tensor], grads: Mapping[str, np.ndarray]):
        for name, g in grads.items():
            if not np.all(np.isfinite(g)):
                raise NonFiniteError(
                    f"non-finite gradient for {name!r} at step {self.step_count + 1}: "
                    f"|g|_max={np.abs(g[np.isfinite(g)]).max() if np.any(np.isfinite(g)) else 'n/a'}"
                )
        self.step_count += 1
        t = self.step_count
        for name, p in params.items():
            g = grads[name]
            m = self._m.setdefault(name, np.zeros_like(p.data))
            v = self._v.setdefault(name, np.zeros_like(p.data))
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            m_hat = m / (1.0 - self.beta1**t)
            v_hat = v / (1.0 - self.beta2**t)
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


#: learning-rate presets: "fullscale" matches the original large-data
#: setup, "desk" converges within minutes on the synthetic benchmark.
LR_PRESETS = {"fullscale": 1.3e-5, "desk": 1e-3}


def gradient_check(
    loss_fn: Callable[[], Tensor],
    params: Mapping[str, Tensor],
    h: float = 1e-4,
    floor: float = 1e-3,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Per-element relative error is |g_a - g_fd| / max(|g_a|, |g_fd|, floor);
    the floor keeps the ratio meaningful where both gradients are tiny.
    ``loss_fn`` must rebuild the forward graph from the live parameter data
    on every call.
    """
    analytic = gradients(loss_fn(), params)
    worst = 0.0
    for name, p in params.items():
        flat = p.data.reshape(-1)
        ga = analytic[name].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = loss_fn().item()
            flat[i] = orig - h
            down = loss_fn().item()
            flat[i] = orig
            fd = (up - down) / (2.0 * h)
            err = abs(ga[i] - fd) / max(abs(ga[i]), abs(fd), floor)
            worst = max(worst, err)
    return worst
