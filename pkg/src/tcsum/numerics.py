"""Dense kernels, initialization, AdaGrad and a finite-difference gradient checker.

Tensors are plain ``float64`` numpy arrays. Every random draw in the package
goes through :func:`make_rng`, which pins the bit generator to PCG64 so a seed
yields the same stream on every platform numpy supports.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

DTYPE = np.float64


def make_rng(seed: int) -> np.random.Generator:
    """Return a PCG64-backed generator for ``seed`` (a non-negative 64-bit int)."""
    return np.random.Generator(np.random.PCG64(seed))


def init_uniform(shape, scale: float, rng: np.random.Generator) -> np.ndarray:
    """Draw a tensor with entries i.i.d. uniform in ``[-scale, scale]``.

    Entries are drawn in row-major order, so the same ``rng`` state always
    produces the same tensor.
    """
    shape = tuple(int(s) for s in np.atleast_1d(shape))
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale!r}")
    if any(s <= 0 for s in shape):
        raise ValueError(f"shape must have positive dimensions, got {shape}")
    return rng.uniform(-scale, scale, size=shape).astype(DTYPE, copy=False)


@dataclass
class AdaGradState:
    """Per-scalar squared-gradient accumulators for a list of parameter tensors."""

    accumulators: list[np.ndarray]
    learning_rate: float = 0.1
    epsilon: float = 1e-8
    steps: int = field(default=0)

    @classmethod
    def for_params(cls, params: Sequence[np.ndarray], learning_rate: float = 0.1,
                   epsilon: float = 1e-8) -> "AdaGradState":
        if learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        return cls([np.zeros_like(p, dtype=DTYPE) for p in params], learning_rate, epsilon)


def adagrad_step(params: Sequence[np.ndarray], grads: Sequence[np.ndarray],
                 state: AdaGradState) -> tuple[list[np.ndarray], AdaGradState]:
    """One diagonal AdaGrad update.

    Per scalar: ``acc += g**2`` then ``theta -= lr * g / (sqrt(acc) + eps)``.
    Scalars whose gradient is exactly zero are left untouched (this also keeps
    the ``acc == 0, eps == 0`` corner finite). Inputs are not modified; new
    arrays and a new state are returned.
    """
    if len(params) != len(grads) or len(params) != len(state.accumulators):
        raise ValueError("params, grads and accumulators must have the same length")
    new_params, new_acc = [], []
    for p, g, acc in zip(params, grads, state.accumulators):
        if p.shape != g.shape or p.shape != acc.shape:
            raise ValueError(f"shape mismatch: param {p.shape}, grad {g.shape}, acc {acc.shape}")
        g = np.asarray(g, dtype=DTYPE)
        a = acc + g * g
        denom = np.sqrt(a) + state.epsilon
        nz = g != 0
        step = np.zeros_like(g)
        step[nz] = state.learning_rate * g[nz] / denom[nz]
        new_params.append(p - step)
        new_acc.append(a)
    return new_params, AdaGradState(new_acc, state.learning_rate, state.epsilon, state.steps + 1)


def grad_check(f: Callable[[list[np.ndarray]], float], analytic_grad: Sequence[np.ndarray],
               point: Sequence[np.ndarray], h: float = 1e-4) -> float:
    """Compare ``analytic_grad`` against central differences of ``f`` at ``point``.

    Returns ``max |a - n| / max(|a|, |n|, 1e-8)`` over every scalar of every
    tensor. ``f`` receives a list of arrays shaped like ``point``.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    point = [np.array(p, dtype=DTYPE, copy=True) for p in point]
    if len(point) != len(analytic_grad):
        raise ValueError("analytic_grad and point must have the same length")
    worst = 0.0
    for t, (p, a) in enumerate(zip(point, analytic_grad)):
        if p.shape != np.shape(a):
            raise ValueError(f"tensor {t}: grad shape {np.shape(a)} != param shape {p.shape}")
        flat = p.reshape(-1)
        a_flat = np.asarray(a, dtype=DTYPE).reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            f_plus = float(f(point))
            flat[i] = orig - h
            f_minus = float(f(point))
            flat[i] = orig
            if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
                raise FloatingPointError(f"non-finite objective at tensor {t}, index {i}")
            num = (f_plus - f_minus) / (2 * h)
            err = abs(a_flat[i] - num) / max(abs(a_flat[i]), abs(num), 1e-8)
            worst = max(worst, err)
    return worst


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; 0.0 when either vector has zero norm.

    Each vector is divided by its largest magnitude first so tiny inputs do not underflow.
    """
    sa, sb = np.max(np.abs(a), initial=0.0), np.max(np.abs(b), initial=0.0)
    if sa == 0 or sb == 0:
        return 0.0
    a, b = a / sa, b / sb
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max-logit subtraction."""
    z = np.asarray(logits, dtype=DTYPE)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)
