"""Pushforwards of quadratic differentials ``q(z) dz^2`` and pole orders at infinity."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .core import Polynomial, csum, poly_roots
from .errors import PoleHit, ZeroSample
from .linearizer import PoincareMap, invert_patch, lin_eval_array, preimages_in_annuli

POLE_TOL = 1e-9


def _trim(coeffs) -> tuple:
    cs = [complex(c) for c in coeffs]
    while len(cs) > 1 and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


@dataclass(frozen=True)
class QDSpec:
    """Coefficient ``num(z)/den(z)`` of a quadratic differential; ascending coefficients."""

    num: tuple
    den: tuple

    def __init__(self, num, den=(1,)):
        num, den = _trim(num), _trim(den)
        if all(c == 0 for c in den):
            raise ValueError("denominator is identically zero")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def power(cls, k: int) -> "QDSpec":
        """``z^k dz^2`` for any integer ``k``."""
        if k >= 0:
            return cls([0] * k + [1])
        return cls([1], [0] * (-k) + [1])

    def poles(self) -> list[complex]:
        """Roots of the denominator with multiplicity."""
        if len(self.den) < 2:
            return []
        return poly_roots(Polynomial(self.den))

    def pole_orders(self) -> list[tuple[complex, int]]:
        out: list[tuple[complex, int]] = []
        for r in self.poles():
            for i, (c, m) in enumerate(out):
                if abs(r - c) < 1e-6 * (1 + abs(c)):
                    out[i] = (c, m + 1)
                    break
            else:
                out.append((r, 1))
        return out

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.polyval(self.num[::-1], z) / np.polyval(self.den[::-1], z)

    def to_dict(self):
        return {"num": [[c.real, c.imag] for c in self.num], "den": [[c.real, c.imag] for c in self.den]}


@dataclass(frozen=True)
class PushforwardSample:
    w: complex
    sigma: complex
    terms_used: int
    tail_estimate: float
    skipped: int = 0

    def to_dict(self):
        return {"w": [self.w.real, self.w.imag], "sigma": [self.sigma.real, self.sigma.imag],
                "abs_sigma": abs(self.sigma), "terms_used": self.terms_used,
                "tail_estimate": self.tail_estimate, "skipped_poles": self.skipped}


def _pole_mask(q: QDSpec, z: np.ndarray, skip: bool) -> np.ndarray:
    """Mask of preimages to keep; raises :class:`PoleHit` unless ``skip``."""
    keep = np.ones(z.shape, dtype=bool)
    for c in q.poles():
        hit = np.abs(z - c) < POLE_TOL * (1 + abs(c))
        if hit.any() and not skip:
            raise PoleHit(f"preimage {complex(z[hit][0])!r} lies on a pole of q")
        keep &= ~hit
    return keep


def exp_lattice(n_max: int) -> np.ndarray:
    """Indices ``0, 1, -1, 2, -2, ..., n_max, -n_max``."""
    k = np.arange(1, n_max + 1)
    return np.concatenate([[0], np.column_stack([k, -k]).ravel()])


def pushforward_eval(F, q: QDSpec, w: complex, n_max: int, skip_poles: bool = False) -> PushforwardSample:
    """``sum q(z)/f'(z)^2`` over preimages ``z`` of ``w``.

    For ``"exp"`` the preimages are ``Log w + 2 pi i k`` with ``|k| <= n_max``,
    summed in the order ``0, +-1, +-2, ...``; the tail estimate is the last
    pair's modulus times ``n_max`` (a ``k^-2`` tail). For a linearizer all
    preimages with ``|z| < eta |lam|^n_max`` are used and the tail estimate
    is the modulus of the last generation's sum. Preimages on a pole of
    ``q`` raise :class:`PoleHit`, or are left out with ``skip_poles``.
    """
    w = complex(w)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if isinstance(F, str):
        if F != "exp":
            raise ValueError("only the exp tag is supported")
        if w == 0:
            raise ValueError("w = 0 is the omitted value of exp")
        z = cmath.log(w) + 2j * np.pi * exp_lattice(n_max)
        keep = _pole_mask(q, z, skip_poles)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(keep, q(z) / (w * w), 0.0)
        pairs = terms[1:].reshape(-1, 2).sum(axis=1)
        sigma = csum(np.concatenate([terms[:1], pairs]))
        return PushforwardSample(w, sigma, int(keep.sum()), float(abs(pairs[-1]) * n_max),
                                 int((~keep).sum()))
    if not isinstance(F, PoincareMap):
        raise TypeError("F must be a PoincareMap or 'exp'")
    pts = preimages_in_annuli(F, w, n_max)
    idx, core = invert_patch(F, np.array([w]), inner=True)
    zs = np.array([p.z for p in pts] + list(core), dtype=complex)
    if zs.size == 0:
        return PushforwardSample(w, 0j, 0, 0.0)
    keep = _pole_mask(q, zs, skip_poles)
    fp = np.array([p.f_prime for p in pts], dtype=complex)
    if core.size:
        fp = np.concatenate([fp, lin_eval_array(F, core)[1]])
    levels = np.array([p.level for p in pts] + [-1] * core.size)
    zs, fp, levels = zs[keep], fp[keep], levels[keep]
    terms = q(zs) / fp**2
    last = terms[levels == n_max]
    return PushforwardSample(w, csum(terms), int(zs.size), float(abs(csum(last))),
                             int((~keep).sum()))


def exp_identity(w: complex, N: int, branch_shift: int = 0):
    """Truncated ``sum_{|k|<=N} 1/(w^2 (log w + 2 pi i k)^2)`` against ``1/(w^3 - 2w^2 + w)``.

    The ``+k`` and ``-k`` terms are added pairwise before the compensated
    sum. ``branch_shift`` moves ``log w`` by ``2 pi i`` multiples.
    Returns ``(lhs, rhs, abs_diff)``.
    """
    w = complex(w)
    if w == 0 or w == 1:
        raise ValueError("w must avoid 0 and 1")
    if N < 0:
        raise ValueError("N must be >= 0")
    L = cmath.log(w) + 2j * math.pi * branch_shift
    k = np.arange(1, N + 1)
    pairs = 1.0 / (L + 2j * np.pi * k) ** 2 + 1.0 / (L - 2j * np.pi * k) ** 2
    lhs = csum(np.concatenate([[1.0 / L**2], pairs])) / (w * w)
    rhs = 1.0 / (w**3 - 2 * w**2 + w)
    return lhs, rhs, abs(lhs - rhs)


def pole_fit(samples) -> tuple[float, float]:
    """Slope of ``log|sigma|`` against ``log|w|`` and the pole order ``slope + 4`` at infinity.

    A pole of order ``d`` at infinity means ``sigma(w) ~ w^(d-4)``, since
    ``dw^2 = du^2/u^4`` under ``u = 1/w``.
    """
    samples = list(samples)
    if len(samples) < 4:
        raise ValueError("need at least 4 samples")
    r = np.array([abs(s.w) for s in samples])
    s = np.array([abs(s.sigma) for s in samples])
    if np.any(s < 1e-300):
        raise ZeroSample("a sample has |sigma| < 1e-300")
    if r.min() <= 0 or math.log10(r.max() / r.min()) < 3 - 1e-9:
        raise ValueError("samples must span at least 3 decades in |w|")
    slope = float(np.polyfit(np.log(r), np.log(s), 1)[0])
    return slope, slope + 4.0
