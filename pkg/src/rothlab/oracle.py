"""Brute-force references.

These are deliberately naive transcriptions of the defining sums and share
no code with the fast paths in :mod:`rothlab.correlation` and
:mod:`rothlab.sets`. Inputs are plain integer sequences.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import BudgetExceeded

EXHAUSTIVE_MAX_N = 600
ENUMERATE_MAX_N = 22


def count_3aps_integer(elements) -> int:
    """Number of integer pairs (x, r), r of any sign, with x, x+r, x+2r all in the set."""
    members = set(elements)
    count = 0
    for x in members:
        for y in members:
            if 2 * y - x in members:
                count += 1
    return count


def has_3ap_naive(elements) -> bool:
    s = sorted(set(elements))
    for i in range(len(s)):
        for j in range(i + 1, len(s)):
            for k in range(j + 1, len(s)):
                if s[j] - s[i] == s[k] - s[j]:
                    return True
    return False


def balanced_naive(n, elements, m):
    """N * f on Z_m, built pointwise."""
    k = len(set(elements))
    members = set(elements)
    return [(n - k if x in members else -k) if x < n else 0 for x in range(m)]


def r_naive(values, t) -> int:
    vals = [int(v) for v in values]
    m = len(vals)
    return sum(vals[x] * vals[(x + t) % m] for x in range(m))


def v_naive(values, d, ell) -> int:
    vals = [int(v) for v in values]
    m = len(vals)
    total = 0
    for x in range(m):
        s = 0
        for i in range(ell):
            s += vals[(x + i * d) % m]
        total += s * s
    return total


def trilinear_naive(g1, g2, g3) -> int:
    a, b, c = ([int(v) for v in g] for g in (g1, g2, g3))
    m = len(a)
    total = 0
    for x in range(m):
        for r in range(m):
            total += a[x] * b[(x + r) % m] * c[(x + 2 * r) % m]
    return total


def positivity_sum_naive(values, h, k) -> int:
    """sum_d R(hd) R(kd) straight from the definition of R."""
    m = len(values)
    rv = [r_naive(values, t) for t in range(m)]
    return sum(rv[(h * d) % m] * rv[(k * d) % m] for d in range(m))


def r3_enumerate(n: int):
    """r3(j) for every j <= n by checking all 2^n subsets of [n] at once.

    A bitmask below 2^j is a subset of [j], so one pass answers every
    prefix length.
    """
    if n > ENUMERATE_MAX_N:
        raise BudgetExceeded(f"full enumeration limited to n <= {ENUMERATE_MAX_N}")
    masks = np.arange(1 << n, dtype=np.int64)
    bad = np.zeros(1 << n, dtype=bool)
    for x in range(n):
        for r in range(1, n):
            if x + 2 * r >= n:
                break
            tri = (1 << x) | (1 << (x + r)) | (1 << (x + 2 * r))
            bad |= (masks & tri) == tri
    sizes = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        sizes += (masks >> i) & 1
    sizes[bad] = -1
    return [0] + [int(sizes[: 1 << j].max()) for j in range(1, n + 1)]


def best_progression_exhaustive(n, elements, min_len=1):
    """Densest integer progression inside [n] with at least ``min_len`` terms.

    Returns ``((start, step, length), density)``. Ties prefer the longer
    progression, then the smaller start, then the smaller step. Each set
    of terms is visited once, with a positive step.
    """
    if n > EXHAUSTIVE_MAX_N:
        raise BudgetExceeded(f"exhaustive progression search limited to n <= {EXHAUSTIVE_MAX_N}")
    if min_len > n:
        raise ValueError("min_len exceeds n")
    inside = [False] * n
    for e in elements:
        inside[e] = True
    best_key = None
    best = None

    def consider(a, s, length, hits):
        nonlocal best_key, best
        key = (Fraction(hits, length), length, -a, -s)
        if best_key is None or key > best_key:
            best_key, best = key, (a, s, length)

    if min_len <= 1:
        for a in range(n):
            consider(a, 1, 1, int(inside[a]))
    for a in range(n):
        for s in range(1, n):
            if a + s >= n:
                break
            hits = int(inside[a])
            length = 1
            x = a + s
            while x < n:
                hits += inside[x]
                length += 1
                if length >= min_len:
                    consider(a, s, length, hits)
                x += s
    return best, best_key[0]
