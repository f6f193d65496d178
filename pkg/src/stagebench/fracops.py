"""Fixed-step fractional-order derivative and integral operators.

The evaluator realizes the Grünwald-Letnikov series

    D^xi f(t) ~= h^(-xi) * sum_k  w_k * f(t - k*h),      w_0 = 1,
    w_k = w_{k-1} * (1 - (xi + 1)/k),

with positive ``xi`` acting as a derivative and negative ``xi`` as an
integral.  The history window is truncated to the most recent ``n_mem``
samples (short-memory principle); the signal is treated as zero before the
first pushed sample.
"""

from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np


@dataclass(frozen=True)
class FracOrder:
    """Order of a fractional operator; positive differentiates, negative integrates."""

    xi: float

    def __post_init__(self):
        if not math.isfinite(self.xi):
            raise ValueError(f"fractional order must be finite, got {self.xi!r}")
        if abs(self.xi) >= 2.0:
            raise ValueError(f"|order| must be < 2, got {self.xi!r}")


def gl_weights(xi: float, count: int) -> np.ndarray:
    """First ``count`` Grünwald-Letnikov weights for order ``xi``.

    For integer ``xi`` the sequence equals the signed binomial coefficients
    and is exactly zero beyond index ``xi``.
    """
    if not math.isfinite(xi):
        raise ValueError(f"fractional order must be finite, got {xi!r}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    w = np.empty(count, dtype=float)
    w[0] = 1.0
    for k in range(1, count):
        w[k] = w[k - 1] * (1.0 - (xi + 1.0) / k)
    return w


def sig_pow(x: float, a: float) -> float:
    """Odd signed power: sgn(x) * |x|**a.  Maps 0 to 0 for any a > 0."""
    if x > 0.0:
        return x**a
    if x < 0.0:
        return -((-x) ** a)
    return 0.0


class FracEvaluator:
    """Streaming fractional derivative/integral over a fixed-rate sample stream.

    Samples must arrive at exactly ``h`` spacing.  Each :meth:`step` pushes one
    sample and returns the operator value at that instant.  Single-writer:
    distinct evaluators may run in parallel, one evaluator must not be stepped
    concurrently.
    """

    def __init__(self, xi: float | FracOrder, h: float, n_mem: int = 2000):
        order = xi if isinstance(xi, FracOrder) else FracOrder(float(xi))
        if h <= 0.0 or not math.isfinite(h):
            raise ValueError(f"step size must be positive and finite, got {h!r}")
        if n_mem < 1:
            raise ValueError(f"n_mem must be >= 1, got {n_mem}")
        self.order = order
        self.h = float(h)
        self.n_mem = int(n_mem)
        self.weights = gl_weights(order.xi, self.n_mem)
        self._scale = self.h ** (-order.xi)
        # reversed weights so the evaluation dot product runs over a
        # chronologically ordered, contiguous window
        self._w_rev = self.weights[::-1].copy()
        # double-write ring buffer: the latest n_mem samples are always the
        # contiguous slice buf[pos + n_mem - count : pos + n_mem]
        self._buf = np.zeros(2 * self.n_mem, dtype=float)
        self._pos = 0
        self._count = 0

    def step(self, sample: float) -> float:
        """Push one sample and return h^(-xi) * sum_k w_k * f(t - k h)."""
        buf = self._buf
        n = self.n_mem
        buf[self._pos] = sample
        buf[self._pos + n] = sample
        self._pos += 1
        if self._pos == n:
            self._pos = 0
        if self._count < n:
            self._count += 1
        count = self._count
        end = self._pos + n if self._pos else n
        window = buf[end - count : end]
        return self._scale * float(np.dot(window, self._w_rev[n - count :]))

    def reset(self) -> "FracEvaluator":
        """Clear history; weights are retained.  Idempotent."""
        self._buf[:] = 0.0
        self._pos = 0
        self._count = 0
        return self

    def __len__(self) -> int:
        return self._count
