"""Exact scaled-integer correlation quantities on Z_m.

Everything is stored multiplied by a power of N so identities can be
compared with integer equality:

* balanced function      N * f(x)
* autocorrelation        N^2 * R(t)
* energy                 N^4 * E(f)
* window sums / moments  N * S_d(x),  N^2 * V_d
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import CapacityError
from .modring import ModContext
from .sets import DenseSet

INT64_LIMIT = 2**63 - 1
THREADS_ENV = "ROTHLAB_THREADS"


def resolve_threads(threads=None) -> int:
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    if threads < 1:
        raise ValueError("threads must be at least 1")
    return threads


def _readonly(arr):
    arr.setflags(write=False)
    return arr


def _span(values) -> int:
    nz = np.flatnonzero(values)
    return int(nz[-1]) + 1 if nz.size else 0


def _maxabs(values) -> int:
    return int(np.abs(values).max()) if len(values) else 0


def exact_sum_squares(values) -> int:
    """Sum of squares as a Python int, int64 fast path only when it cannot overflow."""
    arr = np.asarray(values)
    if arr.dtype != object and len(arr) * _maxabs(arr) ** 2 <= INT64_LIMIT:
        return int(np.dot(arr, arr))
    return sum(v * v for v in arr.tolist())


def _chunks(total, parts):
    step = -(-total // parts)
    return [(lo, min(lo + step, total)) for lo in range(0, total, step)]


@dataclass(frozen=True, eq=False)
class BalancedProfile:
    ctx: ModContext
    values: np.ndarray
    size: int

    @property
    def scale(self) -> int:
        return self.ctx.N

    @property
    def m(self) -> int:
        return self.ctx.m

    @property
    def density(self) -> Fraction:
        return Fraction(self.size, self.ctx.N)


@dataclass(frozen=True, eq=False)
class CorrelationProfile:
    ctx: ModContext
    rvals: np.ndarray

    @property
    def scale(self) -> int:
        return self.ctx.N ** 2


@dataclass(frozen=True)
class EnergyValue:
    evalue: int
    scale: int

    @property
    def exact(self) -> Fraction:
        return Fraction(self.evalue, self.scale)


@dataclass(frozen=True, eq=False)
class WindowProfile:
    d: int
    ell: int
    svals: np.ndarray
    vvalue: int


@dataclass(frozen=True, eq=False)
class ScaledFunction:
    """A rational function on Z_m stored as ``values / scale``."""

    values: np.ndarray
    scale: int = 1

    def __post_init__(self):
        if self.scale < 1:
            raise ValueError("scale must be positive")
        object.__setattr__(self, "values", _readonly(np.asarray(self.values, dtype=np.int64).copy()))

    @property
    def m(self) -> int:
        return len(self.values)

    def is_bounded(self, bound=1) -> bool:
        return _maxabs(self.values) <= bound * self.scale

    @classmethod
    def indicator(cls, A: DenseSet, m: int) -> "ScaledFunction":
        vals = np.zeros(m, dtype=np.int64)
        vals[list(A.members)] = 1
        return cls(vals, 1)

    @classmethod
    def model(cls, A: DenseSet, m: int) -> "ScaledFunction":
        """The density-weighted interval indicator alpha * 1_[N]."""
        vals = np.zeros(m, dtype=np.int64)
        vals[: A.n] = A.size
        return cls(vals, A.n)

    @classmethod
    def balanced(cls, p: BalancedProfile) -> "ScaledFunction":
        return cls(p.values, p.scale)


def balanced_profile(A: DenseSet, ctx: ModContext) -> BalancedProfile:
    if A.n != ctx.N:
        raise ValueError(f"set lives in [{A.n}] but context has N={ctx.N}")
    vals = np.zeros(ctx.m, dtype=np.int64)
    vals[: ctx.N] = -A.size
    vals[list(A.members)] += ctx.N
    return BalancedProfile(ctx, _readonly(vals), A.size)


def _correlate_range(values, span, lo, hi):
    # R(t) = sum_{x < span} v[x] v[(x + t) mod m] for lo <= t < hi
    wrapped = np.concatenate([values, values[:span]])
    return np.correlate(wrapped[lo: hi + span - 1], values[:span], mode="valid")


def autocorrelation_all(values, threads=None) -> np.ndarray:
    """Full circular autocorrelation of an integer vector, bit-exact.

    Only the nonzero prefix of ``values`` is used as the sliding kernel,
    so the cost is ``m * span``. With ``threads > 1`` the range of shifts
    is split into contiguous chunks; each shift is an independent integer
    sum so the result does not depend on the split.
    """
    values = np.asarray(values, dtype=np.int64)
    m = len(values)
    span = _span(values)
    if span == 0:
        return np.zeros(m, dtype=np.int64)
    if span * _maxabs(values) ** 2 > INT64_LIMIT:
        raise CapacityError("autocorrelation would overflow 64-bit accumulators")
    threads = min(resolve_threads(threads), m)
    if threads == 1:
        return _correlate_range(values, span, 0, m)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = pool.map(lambda c: _correlate_range(values, span, *c), _chunks(m, threads))
        return np.concatenate(list(parts))


def autocorrelation_reference(values) -> np.ndarray:
    """Plain double loop over the support; arbitrary precision."""
    vals = [int(v) for v in values]
    m = len(vals)
    support = [(x, v) for x, v in enumerate(vals) if v]
    out = [0] * m
    for x, fx in support:
        for y, fy in support:
            out[(y - x) % m] += fx * fy
    return np.array(out, dtype=object)


def autocorrelation(p: BalancedProfile, threads=None, method: str = "fast") -> CorrelationProfile:
    if method == "fast":
        rvals = autocorrelation_all(p.values, threads)
    elif method == "reference":
        ref = autocorrelation_reference(p.values)
        if _maxabs(ref) > INT64_LIMIT:
            raise CapacityError("autocorrelation exceeds 64-bit storage")
        rvals = ref.astype(np.int64)
    else:
        raise ValueError(f"unknown method {method!r}")
    return CorrelationProfile(p.ctx, _readonly(rvals))


def energy(c: CorrelationProfile) -> EnergyValue:
    return EnergyValue(exact_sum_squares(c.rvals), c.scale ** 2)


def function_energy(g: ScaledFunction, threads=None) -> Fraction:
    """E(g) = sum_t (sum_x g(x) g(x+t))^2 as an exact rational."""
    r = autocorrelation_all(g.values, threads)
    return Fraction(exact_sum_squares(r), g.scale ** 4)


def trilinear(g1: ScaledFunction, g2: ScaledFunction, g3: ScaledFunction) -> Fraction:
    """Lambda(g1, g2, g3) = sum over x, r in Z_m of g1(x) g2(x+r) g3(x+2r)."""
    m = g1.m
    if g2.m != m or g3.m != m:
        raise ValueError("functions live on different moduli")
    xs = np.flatnonzero(g1.values)
    ys = np.flatnonzero(g2.values)
    if not xs.size or not ys.size:
        return Fraction(0)
    if len(ys) * _maxabs(g2.values) * _maxabs(g3.values) > INT64_LIMIT:
        raise CapacityError("trilinear inner sum would overflow")
    w2 = g2.values[ys]
    g3v = g3.values
    total = 0
    # substitute y = x + r, so the third term sits at 2y - x
    for x in xs.tolist():
        inner = int(np.dot(w2, g3v[(2 * ys - x) % m]))
        total += int(g1.values[x]) * inner
    return Fraction(total, g1.scale * g2.scale * g3.scale)


def _check_ell(ell, m):
    if not (1 <= ell and 2 * ell < m):
        raise ValueError(f"window length {ell} outside [1, m/2) for m={m}")


def window_sums(p: BalancedProfile, d: int, ell: int) -> WindowProfile:
    m = p.m
    _check_ell(ell, m)
    d %= m
    vals = p.values
    if 2 * m * max(_maxabs(vals), 1) * ell > INT64_LIMIT:
        raise CapacityError("window sums would overflow")
    if d == 0:
        svals = ell * vals
    else:
        # walk the single cycle 0, d, 2d, ... and slide a window along it
        order = (np.arange(m, dtype=np.int64) * d) % m
        seq = vals[order]
        csum = np.concatenate([[0], np.cumsum(np.concatenate([seq, seq[:ell]]))])
        svals = np.empty(m, dtype=np.int64)
        svals[order] = csum[ell: ell + m] - csum[:m]
    svals = _readonly(np.asarray(svals, dtype=np.int64))
    return WindowProfile(d, ell, svals, exact_sum_squares(svals))


def _v_range(rvals, ell, lo, hi, dtype):
    m = len(rvals)
    r = rvals.astype(dtype)
    ds = np.arange(lo, hi, dtype=np.int64)
    out = np.full(hi - lo, ell, dtype=dtype) * r[0]
    idx = np.zeros_like(ds)
    for h in range(1, ell):
        idx = (idx + ds) % m
        out += (ell - h) * (r[idx] + r[(m - idx) % m])
    return out


def v_profile(p: BalancedProfile, ell: int, corr: CorrelationProfile = None, threads=None) -> np.ndarray:
    """Every second moment V_d via the lag expansion sum_{|h|<ell} (ell-|h|) R(hd).

    Returns an int64 array, or an object array of Python ints when the
    int64 bound cannot be guaranteed.
    """
    m = p.m
    _check_ell(ell, m)
    if corr is None:
        corr = autocorrelation(p, threads)
    dtype = np.int64 if ell * ell * max(_maxabs(corr.rvals), 1) <= 2**62 else object
    threads = min(resolve_threads(threads), m)
    if threads == 1:
        out = _v_range(corr.rvals, ell, 0, m, dtype)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = pool.map(lambda c: _v_range(corr.rvals, ell, *c, dtype), _chunks(m, threads))
            out = np.concatenate(list(parts))
    return _readonly(out)


def dump_profile_csv(stream, key: str, column: str, values: Sequence[int]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow([key, column])
    for i, v in enumerate(values):
        writer.writerow([i, int(v)])
