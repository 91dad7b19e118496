"""Area-property sums, Monte Carlo cylindrical areas and the Siegel contrast.

Maps are either a :class:`PoincareMap` or one of the closed-form tags
``"exp"`` (``e^z``, the linearizer of ``z^2`` at 1) and ``"cosh_sqrt"``
(``2cosh(sqrt z)``, the linearizer of ``z^2 - 2`` at 2). The tags have
exact preimages and serve as oracles for the generic path.
"""
from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import Polynomial, poly_eval, rsum
from .dynamics import check_not_postcritical, poincare_series
from .errors import PostcriticalQuery, SingularQuery, SiegelValidationFailed
from .linearizer import PoincareMap, lin_eval_array, preimages_in_annuli
from .regions import HalfLine, RegionSpec, default_escape_radius
from .series import SeriesEstimate, assess

TAGS = ("exp", "cosh_sqrt")
SINGULAR_TOL = 1e-9
_CHUNK = 200_000


def _check_tag(tag):
    if tag not in TAGS:
        raise ValueError(f"unknown map tag {tag!r}; expected one of {TAGS}")


def singular_values(tag: str) -> list[complex]:
    _check_tag(tag)
    # exp omits 0; 2cosh(sqrt z) has critical values 2cos(pi m) = +-2
    return [0j] if tag == "exp" else [2 + 0j, -2 + 0j]


def _check_singular(tag: str, w: complex):
    for s in singular_values(tag):
        if abs(w - s) < SINGULAR_TOL * (1 + abs(w)):
            raise SingularQuery(f"w = {w!r} is a singular value of {tag}")


def tag_eval(tag: str, z):
    """Value and derivative of a tagged map on an array."""
    _check_tag(tag)
    z = np.asarray(z, dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        if tag == "exp":
            v = np.exp(z)
            return v, v
        s = np.sqrt(z)
        v = 2 * np.cosh(s)
        small = np.abs(s) < 1e-8
        d = np.where(small, 1.0 + z / 6.0, np.sinh(s) / np.where(small, 1.0, s))
        return v, d


def tag_preimage_terms(tag: str, w: complex, k_max: int):
    """``(k, z, |z f'(z)|)`` for the preimages of ``w`` with lattice index ``|k| <= k_max``.

    exp: ``z = Log w + 2 pi i k`` and ``|z f'(z)| = |z||w|``.
    cosh_sqrt: ``z = (a + 2 pi i k)^2`` with ``a = arccosh(w/2)``, so
    ``|z f'(z)| = |s||sinh a|`` for ``s = a + 2 pi i k``.
    """
    _check_tag(tag)
    k = np.concatenate([[0], np.ravel(np.column_stack([np.arange(1, k_max + 1), -np.arange(1, k_max + 1)]))])
    if tag == "exp":
        z = cmath.log(w) + 2j * np.pi * k
        zfp = np.abs(z) * abs(w)
    else:
        a = cmath.acosh(w / 2)
        s = a + 2j * np.pi * k
        z = s * s
        zfp = np.abs(s) * abs(cmath.sinh(a))
    return k.astype(int), z, zfp


def _index_levels(k, values, k_max):
    # level j holds the terms with |k| = j; the k = 0 term joins level 1
    levels = np.zeros(max(k_max, 1))
    idx = np.maximum(np.abs(k), 1) - 1
    np.add.at(levels, idx, values)
    return levels.tolist()


def area_sum(F, w: complex, t: float, n_max: int, failures: list | None = None) -> SeriesEstimate:
    """``sum 1/(|z| |f'(z)|)^t`` over preimages ``z`` of ``w`` with ``|z| > 1``.

    For tags, levels are lattice indices ``|k| = 1..n_max``; for a
    linearizer they are the annulus generations ``1..n_max`` of
    :func:`preimages_in_annuli`.
    """
    if not 0 < t <= 4:
        raise ValueError("t must lie in (0, 4]")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    w = complex(w)
    if isinstance(F, str):
        _check_singular(F, w)
        k, z, zfp = tag_preimage_terms(F, w, n_max)
        with np.errstate(divide="ignore"):
            vals = np.where(np.abs(z) > 1, zfp ** (-t), 0.0)
        return assess(_index_levels(k, vals, n_max), t, "index",
                      extra={"map": F, "w": [w.real, w.imag], "k_max": n_max})
    try:
        check_not_postcritical(F.p, w)
    except PostcriticalQuery as exc:
        raise SingularQuery(str(exc)) from None
    pts = preimages_in_annuli(F, w, n_max, failures)
    levels = [[] for _ in range(n_max + 1)]
    for q in pts:
        if abs(q.z) > 1:
            levels[q.level].append((abs(q.z) * abs(q.f_prime)) ** (-t))
    sums = [rsum(v) for v in levels[1:]]
    resid = max((q.residual for q in pts), default=0.0)
    return assess(sums, t, "generation",
                  extra={"map": "linearizer", "w": [w.real, w.imag], "n_max": n_max,
                         "preimages": len(pts), "max_residual": resid,
                         "seed_failures": len(failures) if failures is not None else None})


@dataclass(frozen=True)
class AreaEstimate:
    value: float
    std_error: float
    samples: int
    seed: int
    hits: int = 0
    r_min: float = 1.0
    r_max: float = math.e
    partitions: int = 1
    overflow: int = 0

    def to_dict(self):
        return dict(self.__dict__)


def map_values(F, z):
    """``f(z)`` on an array with escaped points set to ``nan``; returns ``(values, n_escaped)``."""
    if isinstance(F, str):
        v, _ = tag_eval(F, z)
    else:
        v, _, _ = lin_eval_array(F, z)
    bad = ~np.isfinite(v)
    v = np.where(bad, np.nan, v)
    return v, int(bad.sum())


def _partition_hits(F, K, r_min, r_max, n, seed, part):
    rng = np.random.default_rng([seed, part])
    lo, hi = math.log(r_min), math.log(r_max)
    hits = over = 0
    done = 0
    while done < n:
        m = min(_CHUNK, n - done)
        r = np.exp(rng.uniform(lo, hi, m))
        theta = rng.uniform(0.0, 2 * np.pi, m)
        v, bad = map_values(F, r * np.exp(1j * theta))
        with np.errstate(over="ignore", invalid="ignore"):
            hits += int(np.count_nonzero(K.contains(v)))
        over += bad
        done += m
    return hits, over


def cylindrical_area_annulus(F, K: RegionSpec, r_min: float, r_max: float, samples: int, seed: int,
                             partitions: int = 1, threads: int = 1) -> AreaEstimate:
    """Cylindrical area of ``f^{-1}(K)`` within ``r_min < |z| < r_max``.

    Radii are log-uniform and angles uniform, which is the normalized
    cylindrical measure. Partition ``i`` draws from the stream
    ``(seed, i)``; results depend on the partition count but not on
    ``threads``.
    """
    if not r_max > r_min > 0:
        raise ValueError("need 0 < r_min < r_max")
    if samples < 1 or partitions < 1:
        raise ValueError("samples and partitions must be positive")
    sizes = [samples // partitions + (1 if i < samples % partitions else 0) for i in range(partitions)]
    jobs = [(F, K, r_min, r_max, sizes[i], seed, i) for i in range(partitions)]
    if threads > 1 and partitions > 1:
        with ThreadPoolExecutor(threads) as ex:
            res = list(ex.map(lambda a: _partition_hits(*a), jobs))
    else:
        res = [_partition_hits(*a) for a in jobs]
    hits = sum(h for h, _ in res)
    over = sum(o for _, o in res)
    measure = 2 * math.pi * math.log(r_max / r_min)
    phat = hits / samples
    value = phat * measure
    # binomial model; with no hits the estimate and its error are both 0
    err = value * math.sqrt((1 - phat) / (phat * samples)) if hits else 0.0
    return AreaEstimate(value, err, samples, seed, hits, r_min, r_max, partitions, over)


def cylindrical_area_mc(F, K: RegionSpec, R_max: float, samples: int, seed: int,
                        partitions: int = 1, threads: int = 1) -> AreaEstimate:
    """Cylindrical area of ``f^{-1}(K)`` in ``1 < |z| < R_max``."""
    if not R_max > 1:
        raise ValueError("R_max must exceed 1")
    if samples < 10_000:
        raise ValueError("samples must be >= 1e4")
    if isinstance(F, str):
        _check_tag(F)
    return cylindrical_area_annulus(F, K, 1.0, R_max, samples, seed, partitions, threads)


def el_growth(F: PoincareMap, K: RegionSpec, n_max: int, samples: int, seed: int,
              partitions: int = 1, threads: int = 1) -> list[tuple[int, float, float]]:
    """``(n, A_n, std_error)`` for ``A_n`` the cylindrical area of ``f^{-1}(K)`` in ``1 <= |z| <= |lam|^n``.

    Each band ``|lam|^(j-1) < |z| < |lam|^j`` gets its own ``samples``
    points and stream ``seed + j``; ``A_n`` adds the bands and their
    errors in quadrature. ``A_0 = 0``.
    """
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    lam = abs(F.lam) if isinstance(F, PoincareMap) else 2.0
    out = [(0, 0.0, 0.0)]
    total, var = 0.0, 0.0
    for j in range(1, n_max + 1):
        est = cylindrical_area_annulus(F, K, lam ** (j - 1), lam**j, samples, seed + j, partitions, threads)
        total += est.value
        var += est.std_error**2
        out.append((j, total, math.sqrt(var)))
    return out


def linear_fit(points) -> dict:
    """Least-squares line through ``(n, A_n)`` with its coefficient of determination."""
    x = np.array([p[0] for p in points], float)
    y = np.array([p[1] for p in points], float)
    slope, intercept = np.polyfit(x, y, 1)
    ss_res = float(np.sum((y - (slope * x + intercept)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2}


def distance_form_sum(tag: str, w: complex, K: RegionSpec, k_max: int) -> SeriesEstimate:
    """``sum dist(z, f^{-1}(K))^2 / |z|^2`` over ``z = Log w + 2 pi i k`` with ``|z| >= 1``.

    Only ``exp`` with ``K`` a ray from 0 is supported: its preimage is the
    family of lines ``Im z = arg(direction) + 2 pi m``, so the distance is
    exact.
    """
    if tag != "exp":
        raise ValueError("distance_form_sum supports only the exp tag")
    if not isinstance(K, HalfLine) or K.anchor != 0:
        raise ValueError("K must be a ray from 0")
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    w = complex(w)
    if K.contains(np.array([w]))[0]:
        raise ValueError("w lies on the ray K")
    _check_singular("exp", w)
    phi = cmath.phase(K.direction)
    k, z, _ = tag_preimage_terms("exp", w, k_max)
    gap = np.mod(z.imag - phi, 2 * np.pi)
    dist = np.minimum(gap, 2 * np.pi - gap)
    with np.errstate(divide="ignore"):
        vals = np.where(np.abs(z) >= 1, dist**2 / np.abs(z) ** 2, 0.0)
    return assess(_index_levels(k, vals, k_max), 2.0, "index",
                  extra={"map": "exp", "w": [w.real, w.imag], "k_max": k_max})


def siegel_poly(theta: float) -> Polynomial:
    return Polynomial([0, cmath.exp(2j * math.pi * theta), 1])


def validate_siegel_point(p: Polynomial, w: complex, iters: int = 10_000, ret_tol: float = 1e-2) -> dict:
    """Orbit-based check that ``w`` lies in a rotation domain about 0.

    The orbit must stay within ``2|w|`` and come back within ``ret_tol``
    of ``w``.
    """
    z = complex(w)
    bound = 2 * abs(w)
    best, when = math.inf, None
    for n in range(1, iters + 1):
        z = complex(poly_eval(p, z)[0])
        if not abs(z) <= bound:
            raise SiegelValidationFailed(f"orbit of {w!r} left |z| <= {bound:g} at step {n}")
        d = abs(z - w)
        if d < best:
            best, when = d, n
    if best >= ret_tol:
        raise SiegelValidationFailed(f"orbit of {w!r} never returned within {ret_tol:g} (closest {best:.3e})")
    return {"closest_return": best, "return_step": when}


def escapes(p: Polynomial, w: complex, iters: int = 1000) -> bool:
    R = default_escape_radius(p)
    z = complex(w)
    for _ in range(iters):
        if abs(z) > R:
            return True
        z = complex(poly_eval(p, z)[0])
    return abs(z) > R


def siegel_compare(theta: float, w_in: complex, w_out: complex, depth: int, t: float = 2.0):
    """Poincaré-series traces at a Siegel-disc point and at an escaping point.

    The polynomial is ``e^{2 pi i theta} z + z^2``. The series runs over
    all backward orbits, so the repelling fixed point ``1 - lam`` enters
    only as a diagnostic.
    """
    p = siegel_poly(theta)
    lam = p.coeffs[1]
    val = validate_siegel_point(p, w_in)
    zeta = 1 - lam
    diag = {"theta": theta, "fixed_point": [zeta.real, zeta.imag],
            "fixed_point_multiplier_abs": abs(2 - lam), **val,
            "w_out_escapes": escapes(p, w_out)}
    trace_in = poincare_series(p, w_in, t, depth)
    trace_out = poincare_series(p, w_out, t, depth)
    for tr in (trace_in, trace_out):
        tr.extra.update(diag)
    return trace_in, trace_out
