"""One density-increment step.

Certified mode follows the argument literally: size a window from the
measured energy, take the step with the largest second moment, the start
with the largest window sum, pass to a subprogression whose step has a
small integer representative, split it into short blocks, keep the
densest block and intersect it with [N]. Each link of that chain is
recorded as an exact certificate.

Greedy mode scores every block of every candidate step and keeps the best
rectified progression; it exists because the certified choices are
pessimistic.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from .certify import InequalityReport, format_rational, identity
from .correlation import (
    BalancedProfile,
    EnergyValue,
    autocorrelation,
    balanced_profile,
    energy,
    v_profile,
    window_sums,
)
from .errors import RothlabError
from .modring import ModContext, centered_rep, choose_modulus
from .sets import DenseSet

MODES = ("certified", "greedy")


class IncrementError(RothlabError):
    pass


class ZeroEnergy(IncrementError):
    """The balanced function vanishes, so there is nothing to increment."""


class NoIncrement(IncrementError):
    pass


class TooShort(IncrementError):
    pass


class WindowTooShort(TooShort):
    pass


class RectifyError(IncrementError):
    pass


@dataclass(frozen=True)
class IncrementConfig:
    mode: str = "certified"
    c_ell: Fraction = Fraction(1, 64)
    c_K: Fraction = Fraction(1, 20)
    ell_override: Optional[int] = None
    min_len: int = 3
    seed: int = 0
    # greedy mode scans every step when m - 1 is at most this, else samples this many
    sample_threshold: int = 512
    threads: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "c_ell", Fraction(self.c_ell))
        object.__setattr__(self, "c_K", Fraction(self.c_K))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not 0 < self.c_ell <= 1:
            raise ValueError("c_ell must lie in (0, 1]")
        if not 0 < self.c_K <= Fraction(1, 10):
            raise ValueError("c_K must lie in (0, 1/10]")
        if self.min_len < 1:
            raise ValueError("min_len must be positive")
        if self.sample_threshold < 1:
            raise ValueError("sample_threshold must be positive")


@dataclass(frozen=True)
class Block:
    """Modular progression: residues start, start+step, ... taken mod m."""

    start: int
    step: int
    length: int

    def residues(self, m: int) -> List[int]:
        return [(self.start + i * self.step) % m for i in range(self.length)]


@dataclass(frozen=True)
class Progression:
    """Integer progression a, a+s, ..., a+(L-1)s."""

    a: int
    s: int
    L: int

    def terms(self) -> List[int]:
        return [self.a + i * self.s for i in range(self.L)]


@dataclass(frozen=True)
class IncrementResult:
    mode: str
    alpha: Fraction
    d: int
    x: int
    ell: int
    q: int
    s: int
    K: int
    block: Block
    P: Progression
    eta: Fraction
    new_density: Fraction
    certificates: Tuple[InequalityReport, ...] = field(default_factory=tuple)

    @property
    def certified(self) -> bool:
        return all(c.holds for c in self.certificates)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "alpha": format_rational(self.alpha),
            "d": self.d,
            "x": self.x,
            "ell": self.ell,
            "q": self.q,
            "s": self.s,
            "K": self.K,
            "block": {"start": self.block.start, "step": self.block.step, "len": self.block.length},
            "P": {"a": self.P.a, "s": self.P.s, "L": self.P.L},
            "eta": format_rational(self.eta),
            "new_density": format_rational(self.new_density),
            "certificates": [c.to_dict() for c in self.certificates],
        }


# -- the individual links ------------------------------------------------------

def max_window(m: int) -> int:
    return (m + 1) // 2 - 1


def choose_window(p: BalancedProfile, e: EnergyValue, cfg: IncrementConfig = IncrementConfig()) -> int:
    """Window length from the measured energy ratio, clamped to [1, ceil(m/2) - 1]."""
    m = p.m
    if e.evalue == 0:
        raise ZeroEnergy("balanced function is identically zero")
    if cfg.ell_override is not None:
        ell = cfg.ell_override
        if not (1 <= ell and 2 * ell < m):
            raise ValueError(f"ell_override={ell} outside [1, m/2)")
        return ell
    beta_hat = Fraction(e.evalue, e.scale * m ** 3)
    raw = math.floor(cfg.c_ell * beta_hat * m / p.density ** 2)
    return min(max(raw, 1), max_window(m))


def best_step(vp) -> int:
    """Nonzero step with the largest second moment, smallest on ties."""
    vals = np.asarray(vp)
    if len(vals) < 2:
        raise NoIncrement("no nonzero steps")
    d = int(np.argmax(vals[1:])) + 1
    if vals[d] <= 0:
        raise NoIncrement("all second moments vanish")
    return d


def step_certificate(vp, d: int) -> InequalityReport:
    """V_d * sum_d' V_d' >= sum_{d' != 0} V_d'^2 (the max beats the weighted average)."""
    vals = [int(v) for v in np.asarray(vp).tolist()]
    total = sum(vals)
    return InequalityReport("chain_best_step", sum(v * v for v in vals[1:]), vals[d] * total)


def best_start(p: BalancedProfile, d: int, ell: int) -> Tuple[int, int]:
    """Start with the largest scaled window sum along step d, smallest on ties."""
    if d % p.m == 0:
        raise ValueError("step must be nonzero")
    sv = window_sums(p, d, ell).svals
    x = int(np.argmax(sv))
    return x, int(sv[x])


def small_step(d: int, m: int, ell: int) -> Tuple[int, int]:
    """Multiplier q <= isqrt(ell) making q*d closest to 0 mod m, smallest q on ties."""
    if d % m == 0:
        raise ValueError("step must be nonzero")
    best = None
    for q in range(1, max(1, math.isqrt(ell)) + 1):
        s = centered_rep(q * d, m)
        if best is None or abs(s) < abs(best[1]):
            best = (q, s)
    return best


def block_length(ell: int, q: int, s: int, m: int, c_K: Fraction) -> int:
    """K = max(1, floor(c_K sqrt(ell))), shrunk until K|s| < m/10 and capped at floor(ell/q).

    Returns 0 when no positive K is admissible.
    """
    c_K = Fraction(c_K)
    K = max(1, math.isqrt(c_K.numerator ** 2 * ell) // c_K.denominator)
    K = min(K, ell // q)
    while K >= 1 and 10 * K * abs(s) >= m:
        K -= 1
    return K


def travel_block_length(ell: int, q: int, s: int, m: int) -> int:
    """Largest K with K|s| < m/10, capped at floor(ell/q)."""
    return min((m - 1) // (10 * abs(s)), ell // q)


def _block_layout(ell: int, q: int, K: int, s: int, m: int):
    """(first window index, length) of every block, subprogression by subprogression.

    A short tail is merged into its predecessor unless that would push the
    block's travel to m/10 or beyond, in which case it stays separate.
    """
    layout = []
    for r in range(q):
        count = len(range(r, ell, q))
        full, tail = divmod(count, K)
        lengths = [K] * full
        if tail:
            if full and 10 * (K + tail - 1) * abs(s) < m:
                lengths[-1] += tail
            else:
                lengths.append(tail)
        j = 0
        for length in lengths:
            layout.append((r + j * q, length))
            j += length
    return layout


def extract_block(p: BalancedProfile, x: int, d: int, ell: int, q: int, s: int,
                  cfg: IncrementConfig = IncrementConfig()) -> Tuple[Block, int, int]:
    """Densest block of the window, as ``(block, block_sum, K)``.

    Blocks are compared by mean (sum over length), earliest first on ties,
    so the chosen block's mean is at least the mean of the whole window.
    """
    m = p.m
    if ell < 4:
        raise WindowTooShort(f"window of length {ell} is too short to split")
    K = block_length(ell, q, s, m, cfg.c_K)
    if K < 1:
        raise WindowTooShort("no block length satisfies the travel constraint")
    blocks = _blocks(p, x, d, ell, q, s, K)
    block, total = blocks[0]
    for cand, cand_total in blocks[1:]:
        if cand_total * block.length > total * cand.length:
            block, total = cand, cand_total
    return block, total, K


def _blocks(p, x, d, ell, q, s, K):
    m = p.m
    vals = p.values
    out = []
    for i0, length in _block_layout(ell, q, K, s, m):
        blk = Block((x + i0 * d) % m, s, length)
        out.append((blk, int(sum(int(vals[r]) for r in blk.residues(m)))))
    return out


def rectify(block: Block, ctx: ModContext) -> Progression:
    """The terms of a short block lying in [N], as a genuine integer progression."""
    m, N = ctx.m, ctx.N
    if 10 * (block.length - 1) * abs(block.step) >= m:
        raise ValueError("block travels m/10 or more; rectification needs a short block")
    res = block.residues(m)
    hits = [i for i, r in enumerate(res) if r < N]
    if not hits:
        raise RectifyError("block misses [N]")
    if hits != list(range(hits[0], hits[-1] + 1)):
        raise RectifyError("block meets [N] in a non-consecutive pattern")
    run = [res[i] for i in hits]
    for u, v in zip(run, run[1:]):
        if v - u != block.step:
            raise RectifyError("run inside [N] wraps modulo m")
    return Progression(run[0], block.step, len(run))


def rescale(A: DenseSet, P: Progression) -> DenseSet:
    """The set {i : a + i*s in A} inside [L]."""
    terms = P.terms()
    if P.L < 1 or min(terms) < 0 or max(terms) >= A.n:
        raise ValueError("progression leaves [n]")
    return DenseSet(P.L, tuple(i for i, t in enumerate(terms) if t in A))


# -- composition -------------------------------------------------------------------

def _finish(mode, A, ctx, p, d, x, ell, q, s, K, block, block_sum, chain, cfg):
    N, m = ctx.N, ctx.m
    P = rectify(block, ctx)
    vals = p.values
    p_sum = sum(int(vals[t]) for t in P.terms())
    hits = sum(1 for t in P.terms() if t in A)
    alpha = A.density
    eta = Fraction(p_sum, P.L * N)
    new_density = alpha + eta
    certs = list(chain) + [
        InequalityReport("chain_small_step", abs(s) * max(1, math.isqrt(ell)), m),
        identity("conservation_block_to_P", p_sum, block_sum),
        InequalityReport("length_bound", block_sum, P.L * N),
        identity("chain_new_density", new_density, Fraction(hits, P.L)),
    ]
    if eta <= 0:
        raise NoIncrement(f"best progression has non-positive excess {eta}")
    if P.L < cfg.min_len:
        raise TooShort(f"progression of length {P.L} below min_len={cfg.min_len}")
    return IncrementResult(mode, alpha, d, x, ell, q, s, K, block, P, eta, new_density, tuple(certs))


def _certified(A, ctx, p, corr, e, cfg):
    m, N = ctx.m, ctx.N
    ell = choose_window(p, e, cfg)
    if ell < 4:
        raise WindowTooShort(f"window length {ell} from the energy ratio is too short")
    vp = v_profile(p, ell, corr, cfg.threads)
    d = best_step(vp)
    chain = [step_certificate(vp, d)]
    x, smax = best_start(p, d, ell)
    vd = int(vp[d])
    chain.append(InequalityReport("chain_best_start", vd, 2 * ell * N * m * smax))
    if smax <= 0:
        raise NoIncrement("no window with positive sum")
    q, s = small_step(d, m, ell)
    block, block_sum, K = extract_block(p, x, d, ell, q, s, cfg)
    chain.append(InequalityReport("chain_block_mean", smax * block.length, block_sum * ell))
    return _finish("certified", A, ctx, p, d, x, ell, q, s, K, block, block_sum, chain, cfg)


def _score_partition(vals, N, m, x, d, ell, q, s, K):
    """Best (sum, hits-in-[N], block index, layout) of one partition by sum/hits."""
    layout = _block_layout(ell, q, K, s, m)
    # lay the window out subprogression by subprogression so blocks are contiguous
    order = np.concatenate([np.arange(r, ell, q) for r in range(q)])
    res = (x + order * d) % m
    starts = []
    pos = {}
    offset = 0
    for r in range(q):
        pos[r] = offset
        offset += len(range(r, ell, q))
    for i0, _ in layout:
        starts.append(pos[i0 % q] + i0 // q)
    starts = np.asarray(starts)
    sums = np.add.reduceat(vals[res], starts)
    inside = np.add.reduceat((res < N).astype(np.int64), starts)
    ok = inside > 0
    if not ok.any():
        return None
    ratio = np.where(ok, sums / np.maximum(inside, 1), -np.inf)
    top = ratio.max()
    best = None
    for j in np.flatnonzero(ratio >= top - 1e-9 * max(1.0, abs(top))).tolist():
        key = (Fraction(int(sums[j]), int(inside[j])), int(inside[j]), -j)
        if best is None or key > best[0]:
            best = (key, j)
    (_, hits, _), j = best
    return int(sums[j]), hits, j, layout


def _greedy(A, ctx, p, corr, e, cfg):
    m, N = ctx.m, ctx.N
    if cfg.ell_override is not None:
        ells = [choose_window(p, e, cfg)]
    else:
        ells = sorted({choose_window(p, e, cfg), max_window(m)})
    ells = [ell for ell in ells if ell >= 4]
    if not ells:
        raise WindowTooShort("no admissible window of length >= 4")
    vals = p.values
    rng = random.Random(cfg.seed)
    best = None
    for ell in ells:
        steps = list(range(1, m))
        if len(steps) > cfg.sample_threshold:
            vp = v_profile(p, ell, corr, cfg.threads)
            picked = set(rng.sample(steps, cfg.sample_threshold))
            picked.add(best_step(vp))
            steps = sorted(picked)
        for d in steps:
            sv = window_sums(p, d, ell).svals
            x = int(np.argmax(sv))
            if sv[x] <= 0:
                continue
            q, s = small_step(d, m, ell)
            for K in sorted({block_length(ell, q, s, m, cfg.c_K), travel_block_length(ell, q, s, m)}):
                if K < 1:
                    continue
                scored = _score_partition(vals, N, m, x, d, ell, q, s, K)
                if scored is None:
                    continue
                total, hits, j, layout = scored
                if total <= 0 or hits < cfg.min_len:
                    continue
                key = (Fraction(total, hits), hits, -ell, -d, -K, -j)
                if best is None or key > best[0]:
                    best = (key, (d, x, ell, q, s, K, layout[j], total))
    if best is None:
        raise NoIncrement("no block with positive excess and enough terms")
    d, x, ell, q, s, K, (i0, length), total = best[1]
    block = Block((x + i0 * d) % m, s, length)
    return _finish("greedy", A, ctx, p, d, x, ell, q, s, K, block, total, [], cfg)


def density_increment(A: DenseSet, ctx: ModContext = None,
                      cfg: IncrementConfig = IncrementConfig()) -> IncrementResult:
    if ctx is None:
        ctx = choose_modulus(A.n)
    p = balanced_profile(A, ctx)
    corr = autocorrelation(p, cfg.threads)
    e = energy(corr)
    if e.evalue == 0:
        raise ZeroEnergy("balanced function is identically zero")
    if cfg.mode == "certified":
        return _certified(A, ctx, p, corr, e, cfg)
    return _greedy(A, ctx, p, corr, e, cfg)
