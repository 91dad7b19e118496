"""Partial sums of nonnegative series with a finite-depth convergence verdict.

Two level layouts occur. ``generation`` levels are tree depths of a
backward orbit, where convergent sums decay geometrically. ``index``
levels group the terms ``+k`` and ``-k`` of a lattice sum, where decay is a
power of ``k``. The tail model follows the layout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

CONVERGED = "converged"
DIVERGING = "diverging_suspected"
UNDECIDED = "undecided"

TAIL_RTOL = 1e-2
WINDOW = 8
STALL_RATIO = 0.98  # generation ratio at or above this counts as non-decaying
HARMONIC_MARGIN = 0.05  # index decay exponent must exceed 1 + margin


@dataclass
class SeriesEstimate:
    t: float
    level_sums: list
    partial_sums: list
    verdict: str
    tail_bound: float | None = None
    kind: str = "generation"
    decay: float | None = None  # per-level ratio (generation) or exponent (index)
    extra: dict = field(default_factory=dict)

    @property
    def depth(self) -> int:
        return len(self.level_sums)

    @property
    def value(self) -> float:
        return self.partial_sums[-1] if self.partial_sums else 0.0

    @property
    def estimate(self) -> float:
        """Partial sum plus the modelled tail (equal to ``value`` when no tail model applies)."""
        if self.tail_bound is None or not math.isfinite(self.tail_bound):
            return self.value
        return self.value + self.tail_bound

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "kind": self.kind,
            "level_sums": list(self.level_sums),
            "partial_sums": list(self.partial_sums),
            "value": self.value,
            "verdict": self.verdict,
            "tail_bound": self.tail_bound,
            "estimate": self.estimate,
            "decay": self.decay,
            **self.extra,
        }


def partial_sums(level_sums) -> list:
    out, acc = [], []
    for level in level_sums:
        acc.append(level)
        out.append(math.fsum(acc))
    return out


def _fit_slope(x, y) -> float:
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    xm = x - x.mean()
    return float(np.dot(xm, y - y.mean()) / np.dot(xm, xm))


def assess(level_sums, t: float, kind: str = "generation", tail_rtol: float = TAIL_RTOL,
           window: int = WINDOW, extra: dict | None = None) -> SeriesEstimate:
    """Build a :class:`SeriesEstimate` and decide its verdict.

    Divergence is suspected when the last four level sums are
    non-decreasing, or when the fitted decay is too slow to be summable
    (generation ratio >= ``STALL_RATIO``; index exponent <= 1 + margin).
    Convergence requires a summable fit whose modelled tail is at most
    ``tail_rtol`` times the partial sum.
    """
    levels = [float(v) for v in level_sums]
    if any(v < 0 for v in levels):
        raise ValueError("level sums must be nonnegative")
    sums = partial_sums(levels)
    est = SeriesEstimate(t=t, level_sums=levels, partial_sums=sums, verdict=UNDECIDED,
                         kind=kind, extra=dict(extra or {}))
    n = len(levels)
    if n < 4:
        return est
    last4 = levels[-4:]
    if last4[-1] > 0 and all(a <= b for a, b in zip(last4, last4[1:])):
        est.verdict = DIVERGING
        est.tail_bound = math.inf
        return est

    idx = np.arange(1, n + 1)[-window:]
    win = np.array(levels[-window:])
    pos = win > 0
    if not pos.any():
        est.verdict = CONVERGED if sums[-1] > 0 else UNDECIDED
        est.tail_bound = 0.0
        return est
    if pos.sum() < 3:
        return est
    total = sums[-1]
    last = levels[-1]
    if kind == "generation":
        ratio = math.exp(_fit_slope(idx[pos], np.log(win[pos])))
        est.decay = ratio
        if ratio >= STALL_RATIO:
            est.verdict = DIVERGING
            est.tail_bound = math.inf
            return est
        est.tail_bound = last * ratio / (1.0 - ratio)
    elif kind == "index":
        alpha = -_fit_slope(np.log(idx[pos]), np.log(win[pos]))
        est.decay = alpha
        if alpha <= 1.0 + HARMONIC_MARGIN:
            est.verdict = DIVERGING
            est.tail_bound = math.inf
            return est
        est.tail_bound = last * n / (alpha - 1.0)
    else:
        raise ValueError(f"unknown level kind {kind!r}")
    if est.tail_bound <= tail_rtol * total:
        est.verdict = CONVERGED
    return est
