"""Fixed points, critical orbits, backward-orbit trees and Poincaré series of a polynomial."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_TOL, Polynomial, poly_eval, poly_roots, preimages_batch, rsum
from .errors import BudgetExceeded, PostcriticalQuery
from .regions import RegionSpec, default_escape_radius, filled_julia_mask
from .series import TAIL_RTOL, SeriesEstimate, assess

SUPERATTRACTING = "superattracting"
ATTRACTING = "attracting"
REPELLING = "repelling"
INDIFFERENT = "indifferent"

CLASS_TOL = 1e-9
NODE_BUDGET = 2_000_000
POSTCRITICAL_ITER = 64


@dataclass(frozen=True)
class FixedPointInfo:
    location: complex
    multiplier: complex
    classification: str

    def to_dict(self):
        return {"location": [self.location.real, self.location.imag],
                "multiplier": [self.multiplier.real, self.multiplier.imag],
                "abs_multiplier": abs(self.multiplier),
                "classification": self.classification}


def classify(multiplier: complex) -> str:
    m = abs(multiplier)
    if m < CLASS_TOL:
        return SUPERATTRACTING
    if abs(m - 1.0) < CLASS_TOL:
        return INDIFFERENT
    return ATTRACTING if m < 1.0 else REPELLING


def fixed_points(p: Polynomial, tol: float = DEFAULT_TOL) -> list[FixedPointInfo]:
    if p.degree < 2:
        raise ValueError("fixed_points needs degree >= 2")
    c = list(p.coeffs)
    c[1] -= 1.0
    out = []
    for z in poly_roots(Polynomial(c), tol):
        lam = poly_eval(p, z)[1]
        out.append(FixedPointInfo(z, complex(lam), classify(lam)))
    return out


def critical_points(p: Polynomial, tol: float = DEFAULT_TOL) -> list[complex]:
    dp = p.derivative()
    if not isinstance(dp, Polynomial):
        return []
    return poly_roots(dp, tol)


def critical_orbit_analysis(p: Polynomial, n_max: int, escape_radius: float | None = None,
                            tol: float = DEFAULT_TOL):
    """Forward orbits of the critical points.

    Returns ``(postcritical_points, connected)``. The points are
    ``p^n(c)`` for ``1 <= n <= n_max`` with exact repeats removed; an orbit
    is abandoned once it leaves ``escape_radius``, which also makes the
    Julia set disconnected.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    R = default_escape_radius(p) if escape_radius is None else escape_radius
    points: list[complex] = []
    seen = set()
    connected = True
    for c in critical_points(p, tol):
        z = c
        for _ in range(n_max):
            z = complex(poly_eval(p, z)[0])
            if not abs(z) <= R:
                connected = False
                break
            if z not in seen:
                seen.add(z)
                points.append(z)
    return points, connected


def in_filled_julia(p: Polynomial, z: complex, max_iter: int = 500,
                    escape_radius: float | None = None) -> bool:
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    R = default_escape_radius(p) if escape_radius is None else escape_radius
    with np.errstate(over="ignore", invalid="ignore"):
        return bool(filled_julia_mask(p, np.array([z]), max_iter, R)[0])


@dataclass
class TreeLevel:
    z: np.ndarray
    deriv: np.ndarray  # (p^k)'(z)
    parent: np.ndarray  # index into the previous level


@dataclass
class PreimageTree:
    """Iterated preimages ``p^{-k}(w)``; children of a node are sorted by (real, imag)."""

    p: Polynomial
    w: complex
    levels: list

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def node_count(self) -> int:
        return sum(len(lv.z) for lv in self.levels)

    def path(self, level: int, index: int) -> list[complex]:
        """Points from the node back to the root ``w``."""
        out = []
        for k in range(level, -1, -1):
            out.append(complex(self.levels[k].z[index]))
            index = int(self.levels[k].parent[index])
        return out


def preimage_tree(p: Polynomial, w: complex, depth: int, node_budget: int = NODE_BUDGET,
                  tol: float = DEFAULT_TOL) -> PreimageTree:
    if depth < 1:
        raise ValueError("depth must be >= 1")
    D = p.degree
    total = sum(D**k for k in range(depth + 1))
    if total > node_budget:
        raise BudgetExceeded(f"{total} nodes needed for depth {depth}, budget is {node_budget}")
    root = TreeLevel(np.array([complex(w)]), np.array([1.0 + 0j]), np.array([-1]))
    levels = [root]
    for _ in range(depth):
        prev = levels[-1]
        kids = preimages_batch(p, prev.z, tol)  # (N, D), rows sorted
        z = kids.ravel()
        parent = np.repeat(np.arange(len(prev.z)), D)
        dp = poly_eval(p, z)[1]
        levels.append(TreeLevel(z, dp * prev.deriv[parent], parent))
    return PreimageTree(p, complex(w), levels)


def check_not_postcritical(p: Polynomial, w: complex, tol: float = 1e-9,
                           n_max: int = POSTCRITICAL_ITER) -> None:
    points, _ = critical_orbit_analysis(p, n_max)
    if points:
        dist = min(abs(w - q) for q in points)
        if dist < tol * (1.0 + abs(w)):
            raise PostcriticalQuery(f"w = {w!r} is within {dist:.2e} of the postcritical set")


def poincare_series(p: Polynomial, w: complex, t: float, depth: int,
                    restrict: RegionSpec | None = None, tail_rtol: float = TAIL_RTOL,
                    node_budget: int = NODE_BUDGET, tree: PreimageTree | None = None) -> SeriesEstimate:
    """Level sums ``L_n = sum |(p^n)'(z)|^(-t)`` over ``z`` in ``p^{-n}(w)``.

    Derivatives are Euclidean. For unrestricted sums this differs from the
    spherical version by bounded factors only while the backward orbit
    stays in a bounded set, which holds for polynomials.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    check_not_postcritical(p, w)
    if tree is None:
        tree = preimage_tree(p, w, depth, node_budget)
    levels = []
    for lv in tree.levels[1 : depth + 1]:
        mod = np.abs(lv.deriv)
        if restrict is not None:
            mod = mod[restrict.contains(lv.z)]
        levels.append(rsum(mod ** (-t)))
    return assess(levels, t, "generation", tail_rtol,
                  extra={"w": [complex(w).real, complex(w).imag], "depth": depth})
