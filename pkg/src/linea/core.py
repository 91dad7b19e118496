"""Complex polynomials, batched root finding and truncated power series.

Coefficients are stored in ascending degree order throughout, so
``coeffs[k]`` multiplies ``z**k``. All evaluation routines accept scalars
or numpy arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import NonConvergence

DEFAULT_TOL = 1e-12
MAX_ITER = 200
_EPS = np.finfo(float).eps


def csum(values: Iterable[complex]) -> complex:
    """Correctly rounded sum of complex values (real and imaginary parts separately)."""
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values)
    if arr.size == 0:
        return 0j
    arr = arr.astype(complex, copy=False).ravel()
    return complex(math.fsum(arr.real), math.fsum(arr.imag))


def rsum(values) -> float:
    """Correctly rounded sum of real values."""
    arr = np.asarray(values, dtype=float).ravel()
    return math.fsum(arr)


@dataclass(frozen=True)
class Polynomial:
    """Complex polynomial with ascending coefficients and nonzero leading term."""

    coeffs: tuple

    def __init__(self, coeffs: Sequence[complex]):
        cs = tuple(complex(c) for c in coeffs)
        if len(cs) < 2:
            raise ValueError("a Polynomial needs degree >= 1")
        if cs[-1] == 0:
            raise ValueError("leading coefficient must be nonzero")
        object.__setattr__(self, "coeffs", cs)

    @classmethod
    def from_roots(cls, roots: Sequence[complex], lead: complex = 1.0) -> "Polynomial":
        c = np.array([lead], dtype=complex)
        for r in roots:
            c = np.convolve(c, [1.0, -r])
        return cls(c[::-1])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lead(self) -> complex:
        return self.coeffs[-1]

    @property
    def scale(self) -> float:
        return max(abs(c) for c in self.coeffs)

    def array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=complex)

    def derivative(self) -> "Polynomial | complex":
        d = [k * c for k, c in enumerate(self.coeffs)][1:]
        return Polynomial(d) if len(d) > 1 else d[0]

    def __call__(self, z):
        return poly_eval(self, z)[0]

    def __str__(self) -> str:
        return format_poly(self.coeffs)


def format_poly(coeffs: Sequence[complex]) -> str:
    terms = []
    for k, c in enumerate(coeffs):
        if c == 0:
            continue
        if c.imag == 0:
            cs = repr(c.real)
        else:
            cs = f"({c.real!r}{c.imag:+}i)"
        mono = "" if k == 0 else ("z" if k == 1 else f"z^{k}")
        terms.append(cs if not mono else f"{cs}*{mono}")
    return " + ".join(terms) if terms else "0"


def poly_eval(p: Polynomial, z):
    """Return ``(p(z), p'(z))`` by Horner's scheme."""
    c = p.coeffs
    value = c[-1] * np.ones_like(z, dtype=complex) if isinstance(z, np.ndarray) else complex(c[-1])
    deriv = 0 * value
    for a in reversed(c[:-1]):
        deriv = deriv * z + value
        value = value * z + a
    return value, deriv


def _horner_rows(c: np.ndarray, z: np.ndarray):
    # c: (N, D+1) ascending; z: (N, m). Returns value and derivative at z.
    value = np.repeat(c[:, -1:], z.shape[1], axis=1)
    deriv = np.zeros_like(value)
    for k in range(c.shape[1] - 2, -1, -1):
        deriv = deriv * z + value
        value = value * z + c[:, k : k + 1]
    return value, deriv


def _rounding_floor(c: np.ndarray, z: np.ndarray) -> np.ndarray:
    # Size of the rounding error in a Horner evaluation at z.
    az = np.abs(z)
    acc = np.repeat(np.abs(c[:, -1:]), z.shape[1], axis=1)
    for k in range(c.shape[1] - 2, -1, -1):
        acc = acc * az + np.abs(c[:, k : k + 1])
    return 16 * _EPS * acc


def roots_batch(coeffs: np.ndarray, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER) -> np.ndarray:
    """All roots of many polynomials of equal degree at once.

    ``coeffs`` has shape ``(N, D+1)`` in ascending order. Returns ``(N, D)``
    roots, each row sorted by (real, imaginary). Uses Aberth-Ehrlich
    simultaneous iteration started on a circle of radius
    ``1 + max|c_k|/|c_D|`` and finishes with guarded Newton polishing.
    """
    c = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    n_poly, d1 = c.shape
    deg = d1 - 1
    if deg < 1:
        raise ValueError("degree must be >= 1")
    if np.any(c[:, -1] == 0):
        raise ValueError("leading coefficient must be nonzero")
    if deg == 1:
        return (-c[:, 0] / c[:, 1])[:, None]

    lead = np.abs(c[:, -1])
    radius = 1.0 + np.max(np.abs(c[:, :-1]), axis=1) / lead
    # angular offset keeps symmetric starts off invariant lines such as the real axis
    angles = 2 * np.pi * np.arange(deg) / deg + 0.4
    z = radius[:, None] * np.exp(1j * angles)[None, :]

    active = np.arange(n_poly)
    offdiag = ~np.eye(deg, dtype=bool)
    for _ in range(max_iter):
        if active.size == 0:
            break
        za = z[active]
        v, dv = _horner_rows(c[active], za)
        at_floor = np.abs(v) <= _rounding_floor(c[active], za)
        dv = np.where(dv == 0, _EPS, dv)
        ratio = v / dv
        diff = za[:, :, None] - za[:, None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.where(offdiag, 1.0 / np.where(offdiag, diff, 1.0), 0.0)
        s = inv.sum(axis=2)
        denom = 1.0 - ratio * s
        denom = np.where(denom == 0, _EPS, denom)
        step = ratio / denom
        step = np.where(np.isfinite(step), step, 0.0)
        za = za - step
        z[active] = za
        small = np.abs(step) <= 4 * _EPS * np.maximum(np.abs(za), 1e-300)
        done = np.all(small | at_floor, axis=1)
        active = active[~done]

    z = _polish(c, z)
    v, _ = _horner_rows(c, z)
    scale = np.max(np.abs(c), axis=1)
    ok = (np.abs(v) < tol * scale[:, None]) | (np.abs(v) <= _rounding_floor(c, z))
    if not np.all(ok):
        bad = int(np.argmin(np.all(ok, axis=1)))
        raise NonConvergence(
            f"root residual {np.max(np.abs(v[bad])):.3e} above tol {tol:g} after {max_iter} iterations"
        )
    # quantized real key so conjugate pairs order by imaginary part
    order = np.lexsort((z.imag, np.round(z.real, 10)), axis=-1)
    return np.take_along_axis(z, order, axis=1)


def _polish(c: np.ndarray, z: np.ndarray, steps: int = 3) -> np.ndarray:
    for _ in range(steps):
        v, dv = _horner_rows(c, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = z - v / dv
        cand = np.where(np.isfinite(cand), cand, z)
        vc, _ = _horner_rows(c, cand)
        z = np.where(np.abs(vc) < np.abs(v), cand, z)
    return z


def poly_roots(p: Polynomial, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER) -> list[complex]:
    """Roots of ``p`` with multiplicity, sorted by (real, imaginary)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    return [complex(r) for r in roots_batch(p.array()[None, :], tol, max_iter)[0]]


def preimages_batch(p: Polynomial, targets: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Solutions of ``p(z) = w`` for every ``w`` in ``targets``; shape ``(N, D)``."""
    t = np.asarray(targets, dtype=complex).ravel()
    c = np.tile(p.array(), (t.size, 1))
    c[:, 0] -= t
    return roots_batch(c, tol)


@dataclass(frozen=True)
class PowerSeries:
    """Truncated power series ``sum a_n z**n`` for ``n <= truncation_order``."""

    coeffs: tuple

    def __init__(self, coeffs: Sequence[complex]):
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in coeffs))

    @property
    def truncation_order(self) -> int:
        return len(self.coeffs) - 1

    def eval(self, z):
        """Value and derivative of the truncated series at ``z``."""
        c = self.coeffs
        value = c[-1] * np.ones_like(z, dtype=complex) if isinstance(z, np.ndarray) else complex(c[-1])
        deriv = 0 * value
        for a in reversed(c[:-1]):
            deriv = deriv * z + value
            value = value * z + a
        return value, deriv

    def __call__(self, z):
        return self.eval(z)[0]
