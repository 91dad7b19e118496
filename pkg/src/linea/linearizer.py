"""Poincaré functions (linearizers) of polynomials at repelling fixed points.

The linearizer ``f`` solves ``f(lam*z) = p(f(z))`` with ``f(0) = zeta`` and
``f'(0) = 1``. Near 0 it is a Koenigs power series; everywhere else it is
reached by pulling ``z`` into the series patch and pushing forward with
``p``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import Polynomial, PowerSeries, poly_eval
from .dynamics import preimage_tree
from .errors import (DegenerateRadius, InsufficientGrowth, NotRepelling, OverflowEscape,
                     SeedFailure)

DEFAULT_ORDER = 64
REPEL_MARGIN = 1e-6
ETA_CAP = 1.0
ETA_FLOOR = 1e-6
OVERFLOW = 1e150
SAMPLES_PER_CIRCLE = 1024
_BIG = 1e100  # switch to log-modulus tracking beyond this


@dataclass
class PoincareMap:
    p: Polynomial
    zeta: complex
    lam: complex
    series: PowerSeries
    eta: float = 0.0
    conv_radius_est: float = math.inf
    notes: dict = field(default_factory=dict)

    @property
    def degree(self) -> int:
        return self.p.degree

    def eval(self, z):
        return lin_eval(self, z)

    def to_dict(self):
        return {"poly": [[c.real, c.imag] for c in self.p.coeffs],
                "zeta": [self.zeta.real, self.zeta.imag],
                "lambda": [self.lam.real, self.lam.imag],
                "eta": self.eta, "conv_radius_est": self.conv_radius_est,
                "coeffs": [[c.real, c.imag] for c in self.series.coeffs]}


def _taylor_at(p: Polynomial, z0: complex) -> list[complex]:
    """Coefficients of ``p(z0 + h)`` in powers of ``h``."""
    c = list(p.coeffs)
    out = []
    for _ in range(len(c)):
        # synthetic division by (z - z0)
        rem = c[-1]
        quot = []
        for a in reversed(c[:-1]):
            quot.append(rem)
            rem = a + rem * z0
        out.append(rem)
        c = list(reversed(quot))
        if not c:
            break
    return out


def koenigs_coeffs(p: Polynomial, zeta: complex, M: int = DEFAULT_ORDER) -> PoincareMap:
    """Koenigs series of the linearizer at the fixed point ``zeta``.

    With ``g = f - zeta`` and ``b_k`` the Taylor coefficients of ``p`` at
    ``zeta``, comparing coefficients of ``z^n`` gives
    ``a_n (lam^n - lam) = sum_{k>=2} b_k [z^n] g^k``, whose right side only
    involves ``a_1 .. a_{n-1}``.
    """
    if M < 2:
        raise ValueError("M must be >= 2")
    zeta = complex(zeta)
    val, lam = poly_eval(p, zeta)
    scale = max(1.0, abs(zeta))
    if abs(val - zeta) > 1e-8 * scale:
        raise ValueError(f"{zeta!r} is not a fixed point (residual {abs(val - zeta):.2e})")
    lam = complex(lam)
    if abs(lam) <= 1.0 + REPEL_MARGIN:
        raise NotRepelling(f"|multiplier| = {abs(lam):.6g} is not > 1")
    b = _taylor_at(p, zeta)
    D = p.degree
    a = np.zeros(M + 1, dtype=complex)
    a[0], a[1] = zeta, 1.0
    # pw[k][m] = [z^m] g^k
    pw = np.zeros((D + 1, M + 1), dtype=complex)
    pw[1, 1] = 1.0
    for k in range(2, D + 1):
        pw[k, k] = 1.0
    for n in range(2, M + 1):
        rhs = 0j
        for k in range(2, D + 1):
            if n > k:
                # a_j pairs with [z^{n-j}] g^{k-1}, j = 1 .. n-k+1
                j = np.arange(1, n - k + 2)
                pw[k, n] = np.dot(pw[1, j], pw[k - 1, n - j])
            rhs += b[k] * pw[k, n]
        a[n] = rhs / (lam**n - lam)
        pw[1, n] = a[n]
    F = PoincareMap(p, zeta, lam, PowerSeries(a), conv_radius_est=_cauchy_hadamard(a))
    injectivity_radius(F)
    return F


def _cauchy_hadamard(a: np.ndarray, tail: int = 16) -> float:
    n = np.arange(len(a))[-tail:]
    mags = np.abs(a[-tail:])
    with np.errstate(divide="ignore"):
        roots = np.where(mags > 0, mags ** (1.0 / n), 0.0)
    top = roots.max()
    return math.inf if top == 0 else 1.0 / top


def _patch_ok(series: PowerSeries, r: float, n_boundary: int = 512, n_radii: int = 12,
              n_angles: int = 48) -> bool:
    # f' bounded away from 0 on a polar grid, and every grid value is taken
    # exactly once inside the disc (winding number of the boundary image is 1).
    theta = 2 * np.pi * np.arange(n_boundary) / n_boundary
    bnd = series(r * np.exp(1j * theta))
    radii = r * (np.arange(n_radii) + 0.5) / n_radii
    ang = 2 * np.pi * (np.arange(n_angles) + 0.25) / n_angles
    grid = (radii[:, None] * np.exp(1j * ang)[None, :]).ravel()
    vals, ders = series.eval(grid)
    if np.min(np.abs(ders)) < 1e-2:
        return False
    return bool(np.all(winding_numbers(bnd, vals) == 1))


def winding_numbers(curve: np.ndarray, points: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Winding number of the closed polygon ``curve`` around each point."""
    points = np.asarray(points, dtype=complex).ravel()
    nxt = np.roll(curve, -1)
    out = np.empty(points.size, dtype=int)
    for s in range(0, points.size, chunk):
        q = points[s : s + chunk, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            turn = np.angle((nxt[None, :] - q) / (curve[None, :] - q)).sum(axis=1)
        out[s : s + chunk] = np.rint(turn / (2 * np.pi)).astype(int)
    return out


def injectivity_radius(F: PoincareMap, shrink: float = 0.75) -> float:
    """Largest sampled-injective radius of the series patch, stored in ``F.eta``.

    Starts from ``min(0.5 * conv_radius_est, 1)`` and shrinks geometrically.
    The checks are heuristic: a sampled winding-number test of the
    boundary image plus a lower bound on ``|f'|`` over a grid.
    """
    r = min(0.5 * F.conv_radius_est, ETA_CAP)
    while r >= ETA_FLOOR:
        if _patch_ok(F.series, r):
            F.eta = r
            return r
        r *= shrink
    raise DegenerateRadius("no radius >= 1e-6 passed the injectivity checks")


def _levels_needed(F: PoincareMap, absz: np.ndarray) -> np.ndarray:
    loglam = math.log(abs(F.lam))
    with np.errstate(divide="ignore"):
        n = np.ceil(np.log(np.maximum(absz, 1e-300) / F.eta) / loglam)
    n = np.maximum(n, 0).astype(int)
    # repair rounding at band edges
    lam_abs = abs(F.lam)
    too_big = absz / lam_abs**n > F.eta
    n[too_big] += 1
    shrink = (n > 0) & (absz / lam_abs ** np.maximum(n - 1, 0) <= F.eta)
    n[shrink] -= 1
    return n


def lin_eval_array(F: PoincareMap, z):
    """Vectorized value and derivative; escaped points get ``nan`` and are flagged.

    Returns ``(value, derivative, escaped)``.
    """
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    n = _levels_needed(F, np.abs(flat))
    lam_n = F.lam ** n.astype(float)
    u = flat / lam_n
    w, du = F.series.eval(u)
    d = np.ones_like(w)
    escaped = np.zeros(flat.shape, dtype=bool)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(int(n.max(initial=0))):
            m = (k < n) & ~escaped
            pv, dv = poly_eval(F.p, w[m])
            d[m] *= dv
            w[m] = pv
            bad = ~np.isfinite(w) | ~np.isfinite(d) | (np.abs(w) > OVERFLOW)
            escaped |= bad
        deriv = d * du / lam_n
    w[escaped] = np.nan
    deriv[escaped] = np.nan
    return w.reshape(z.shape), deriv.reshape(z.shape), escaped.reshape(z.shape)


def lin_eval(F: PoincareMap, z: complex):
    """``(f(z), f'(z))``; raises :class:`OverflowEscape` beyond binary64 range."""
    v, d, esc = lin_eval_array(F, np.array([complex(z)]))
    if esc[0]:
        raise OverflowEscape(f"iterates exceeded {OVERFLOW:g} evaluating f({z!r})")
    return complex(v[0]), complex(d[0])


def lin_log_abs(F: PoincareMap, z) -> np.ndarray:
    """``log|f(z)|`` that keeps going past overflow by tracking the logarithm.

    Once ``|w| > 1e100`` the lower-order terms of ``p`` change
    ``log|p(w)|`` by less than 1e-90, so ``log|p(w)| = D log|w| + log|c_D|``.
    """
    z = np.asarray(z, dtype=complex).ravel()
    n = _levels_needed(F, np.abs(z))
    u = z / F.lam ** n.astype(float)
    w = F.series(u)
    logabs = np.full(z.shape, np.nan)
    big = np.zeros(z.shape, dtype=bool)
    D = F.degree
    loglead = math.log(abs(F.p.lead))
    for k in range(int(n.max(initial=0))):
        m = k < n
        mb = m & big
        logabs[mb] = D * logabs[mb] + loglead
        ms = m & ~big
        w[ms] = poly_eval(F.p, w[ms])[0]
        newbig = ms & (np.abs(w) > _BIG)
        logabs[newbig] = np.log(np.abs(w[newbig]))
        big |= newbig
    small = ~big
    with np.errstate(divide="ignore"):
        logabs[small] = np.log(np.abs(w[small]))
    return logabs


@dataclass(frozen=True)
class OrderEstimate:
    value: float
    method: str
    fit_residual: float | None = None
    radii: tuple = ()
    log_max_modulus: tuple = ()

    def to_dict(self):
        return {"value": self.value, "method": self.method, "fit_residual": self.fit_residual,
                "radii": list(self.radii), "log_max_modulus": list(self.log_max_modulus)}


def order_exact(F: PoincareMap) -> OrderEstimate:
    return OrderEstimate(math.log(F.degree) / math.log(abs(F.lam)), "exact_formula")


def max_log_modulus(F: PoincareMap, r: float, samples: int = SAMPLES_PER_CIRCLE) -> float:
    theta = 2 * np.pi * np.arange(samples) / samples
    return float(np.max(lin_log_abs(F, r * np.exp(1j * theta))))


def order_empirical(F: PoincareMap, radii, samples_per_circle: int = SAMPLES_PER_CIRCLE) -> OrderEstimate:
    """Slope of ``log log M(r)`` against ``log r`` by least squares."""
    radii = [float(r) for r in radii]
    if len(radii) < 4:
        raise ValueError("need at least 4 radii")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be increasing")
    if radii[0] <= F.eta:
        raise ValueError("radii must exceed the patch radius eta")
    logM = [max_log_modulus(F, r, samples_per_circle) for r in radii]
    if any(not lm > 0 for lm in logM):
        raise InsufficientGrowth("max modulus <= 1 on some circle; use larger radii")
    x = np.log(radii)
    y = np.log(logM)
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return OrderEstimate(float(slope), "growth_fit", resid, tuple(radii), tuple(logM))


@dataclass(frozen=True)
class AnnulusPreimage:
    level: int
    z: complex
    f_prime: complex
    zeta_tilde: complex
    w_tilde: complex
    residual: float


def _seed_points(F: PoincareMap, count: int = 64) -> np.ndarray:
    lam = abs(F.lam)
    half = count // 2
    ang = 2 * np.pi * np.arange(half) / half
    r1 = F.eta * lam ** (-2.0 / 3.0)
    r2 = F.eta * lam ** (-1.0 / 3.0)
    return np.concatenate([r1 * np.exp(1j * ang), r2 * np.exp(1j * (ang + np.pi / half))])


def _newton_patch(F: PoincareMap, targets: np.ndarray, seeds: np.ndarray, iters: int = 40,
                  tol: float = 1e-13):
    """Solve ``series(x) = target`` inside the patch, trying seeds best-first."""
    n = targets.size
    sol = np.full(n, np.nan + 0j)
    ok = np.zeros(n, dtype=bool)
    if n == 0:
        return sol, ok
    seed_vals = F.series(seeds)
    order = np.argsort(np.abs(seed_vals[None, :] - targets[:, None]), axis=1)
    limit = 1.2 * F.eta
    for attempt in range(seeds.size):
        todo = np.flatnonzero(~ok)
        if todo.size == 0:
            break
        x = seeds[order[todo, attempt]]
        tgt = targets[todo]
        for _ in range(iters):
            v, dv = F.series.eval(x)
            step = (v - tgt) / dv
            x = x - step
            out = np.abs(x) > limit
            x[out] = x[out] / np.abs(x[out]) * limit
        v = F.series(x)
        good = np.abs(v - tgt) <= tol * (1 + np.abs(tgt))
        sol[todo[good]] = x[good]
        ok[todo[good]] = True
    return sol, ok


def invert_patch(F: PoincareMap, targets, inner: bool = False, failures: list | None = None, level: int = 0):
    """Points ``x`` of the patch with ``f(x) = target``.

    With ``inner=False`` only solutions in the annulus
    ``eta/|lam| <= |x| < eta`` are returned; with ``inner=True`` only those
    in the core disc ``|x| < eta/|lam|``. Membership is decided by winding
    numbers of the boundary images, so it does not depend on Newton
    succeeding. Returns ``(indices, solutions)``.
    """
    targets = np.asarray(targets, dtype=complex).ravel()
    theta = 2 * np.pi * np.arange(1024) / 1024
    outer = F.series(F.eta * np.exp(1j * theta))
    core = F.series(F.eta / abs(F.lam) * np.exp(1j * theta))
    reach = np.max(np.abs(outer - F.zeta))
    cand = np.flatnonzero(np.abs(targets - F.zeta) <= reach * (1 + 1e-9))
    if cand.size == 0:
        return cand, np.empty(0, dtype=complex)
    in_outer = winding_numbers(outer, targets[cand]) == 1
    in_core = winding_numbers(core, targets[cand]) == 1
    keep = in_core if inner else (in_outer & ~in_core)
    idx = cand[keep]
    sol, ok = _newton_patch(F, targets[idx], _seed_points(F))
    if failures is not None:
        for i in idx[~ok]:
            failures.append(SeedFailure(level, complex(targets[i])))
    return idx[ok], sol[ok]


def preimages_in_annuli(F: PoincareMap, w: complex, n_max: int, failures: list | None = None,
                        tree=None) -> list[AnnulusPreimage]:
    """Preimages of ``w`` under ``f`` with ``|z| < eta*|lam|^n_max``, outside the core disc.

    Level ``n`` lists ``z = lam^n * x`` where ``x`` in the annulus solves
    ``f(x) = w~`` for ``w~`` in ``p^{-n}(w)``; these are exactly the
    preimages with ``eta*|lam|^(n-1) <= |z| < eta*|lam|^n``.
    Newton failures are appended to ``failures`` when given.
    """
    w = complex(w)
    if tree is None:
        tree = preimage_tree(F.p, w, max(n_max, 1))
    out = []
    for n in range(0, n_max + 1):
        lv = tree.levels[n]
        idx, xs = invert_patch(F, lv.z, failures=failures, level=n)
        if idx.size == 0:
            continue
        zs = xs * F.lam**n
        vals, ders, esc = lin_eval_array(F, zs)
        for i, x, z, v, d, e in zip(idx, xs, zs, vals, ders, esc):
            if e:
                continue
            out.append(AnnulusPreimage(n, complex(z), complex(d), complex(x), complex(lv.z[i]),
                                       float(abs(v - w))))
    return out


SCHWARZIAN_KINDS = ("entire_nonlinearity", "meromorphic_schwarzian", "log_singularity_count")


def schwarzian_order(kind: str, deg_or_count: int) -> Fraction:
    """Order of a map with rational Schwarzian derivative or nonlinearity.

    ``entire_nonlinearity``: 1 + degree at infinity of f''/f'.
    ``meromorphic_schwarzian``: (2 + degree at infinity of S_f) / 2.
    ``log_singularity_count``: half the number of logarithmic singularities.
    """
    if deg_or_count < 0:
        raise ValueError("deg_or_count must be >= 0")
    if kind == "entire_nonlinearity":
        return Fraction(1 + deg_or_count)
    if kind == "meromorphic_schwarzian":
        return Fraction(2 + deg_or_count, 2)
    if kind == "log_singularity_count":
        return Fraction(deg_or_count, 2)
    raise ValueError(f"unknown kind {kind!r}; expected one of {SCHWARZIAN_KINDS}")
