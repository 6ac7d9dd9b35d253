"""3AP-free subsets of [n] = {0, ..., n-1}: generators, validation, exact r3."""

from __future__ import annotations

import json
import math
import random
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from pathlib import Path
from typing import Iterable, Optional, Tuple

from .errors import BudgetExceeded

R3_MAX_N = 40


@dataclass(frozen=True)
class DenseSet:
    n: int
    members: Tuple[int, ...]

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("ambient length must be non-negative")
        members = tuple(int(a) for a in self.members)
        object.__setattr__(self, "members", members)
        for a, b in zip(members, members[1:]):
            if a >= b:
                raise ValueError("members must be strictly increasing")
        if members and (members[0] < 0 or members[-1] >= self.n):
            raise ValueError(f"members must lie in [0, {self.n})")

    @classmethod
    def from_iterable(cls, n: int, elements: Iterable[int]) -> "DenseSet":
        return cls(n, tuple(sorted(set(elements))))

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def density(self) -> Fraction:
        return Fraction(len(self.members), self.n) if self.n else Fraction(0)

    def __len__(self):
        return len(self.members)

    def __contains__(self, x):
        return x in self._lookup

    def __iter__(self):
        return iter(self.members)

    @property
    def _lookup(self):
        cached = self.__dict__.get("_lookup_cache")
        if cached is None:
            cached = frozenset(self.members)
            object.__setattr__(self, "_lookup_cache", cached)
        return cached

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "elements": list(self.members)})

    @classmethod
    def from_json(cls, text: str) -> "DenseSet":
        """Parse the set file format ``{"n": int, "elements": [sorted ints]}``."""
        data = json.loads(text)
        if not isinstance(data, dict) or set(data) != {"n", "elements"}:
            raise ValueError('set file must be an object with keys "n" and "elements"')
        n, elements = data["n"], data["elements"]
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise ValueError('"n" must be a positive integer')
        if not isinstance(elements, list) or not all(
            isinstance(e, int) and not isinstance(e, bool) for e in elements
        ):
            raise ValueError('"elements" must be a list of integers')
        return cls(n, tuple(elements))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "DenseSet":
        return cls.from_json(Path(path).read_text())


@dataclass(frozen=True)
class FreenessReport:
    free: bool
    witness: Optional[Tuple[int, int, int]] = None


def is_3ap_free(A: DenseSet) -> FreenessReport:
    """Scan pairs (first, middle) in lexicographic order for a completing third term."""
    members = A.members
    lookup = A._lookup
    for i, x in enumerate(members):
        for y in members[i + 1:]:
            z = 2 * y - x
            if z > members[-1]:
                break
            if z in lookup:
                return FreenessReport(False, (x, y, z))
    return FreenessReport(True, None)


def greedy_free(n: int) -> DenseSet:
    if n < 1:
        raise ValueError("n must be positive")
    kept = []
    lookup = set()
    for e in range(n):
        # e is the third term of (2b - e, b, e) for some kept b
        if not any(2 * b - e in lookup for b in kept):
            kept.append(e)
            lookup.add(e)
    return DenseSet(n, tuple(kept))


def _behrend_sphere(n: int):
    k = max(1, round(math.sqrt(math.log2(n))))
    b = math.isqrt(n) if k == 2 else int(round(n ** (1.0 / k)))
    while b ** k > n:
        b -= 1
    while (b + 1) ** k <= n:
        b += 1
    if b < 3:
        return None
    top = (b + 1) // 2  # digits a with 2a < b
    shells = defaultdict(list)
    for digits in product(range(top), repeat=k):
        value = sum(a * b ** i for i, a in enumerate(digits))
        shells[sum(a * a for a in digits)].append(value)
    # most popular sphere; smallest radius on ties
    _, radius = max((len(v), -r) for r, v in shells.items())
    return sorted(shells[-radius])


def behrend(n: int) -> DenseSet:
    """Digit/sphere construction: base-b digits below b/2 on the most popular sphere.

    Falls back to :func:`greedy_free` when the construction degenerates
    (fewer than three points). The result is always re-verified.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    points = _behrend_sphere(n)
    if points is None or len(points) < 3:
        return greedy_free(n)
    A = DenseSet(n, tuple(points))
    if not is_3ap_free(A).free:
        return greedy_free(n)
    return A


def random_subset(n: int, alpha, seed: int = 0) -> DenseSet:
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    rng = random.Random(seed)
    p = float(alpha)
    return DenseSet(n, tuple(x for x in range(n) if rng.random() < p))


def r3_exact(n: int, max_n: int = R3_MAX_N) -> Tuple[int, DenseSet]:
    """Largest 3AP-free subset of [n] by depth-first branch and bound.

    Elements are decided in increasing order, include-branch first, so the
    witness is the first optimum in that order. A branch is pruned when the
    chosen elements plus the best possible completion on the remaining
    suffix (bounded by r3 of its length, computed for shorter lengths first)
    cannot beat the incumbent.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n > max_n:
        raise BudgetExceeded(f"r3_exact limited to n <= {max_n}")
    # bound[j] = r3(j) for j < length; r3 of a suffix [i, n) is r3(n - i)
    bound = [0]
    witness = ()
    for length in range(1, n + 1):
        best, witness = _r3_search(length, bound)
        bound.append(best)
    return bound[n], DenseSet(n, witness)


def _r3_search(n, bound):
    best = [bound[-1]]  # r3(n) >= r3(n-1); must strictly beat it
    best_set = [None]
    chosen = []

    def dfs(i, forbidden):
        # forbidden: bitmask of elements completing a 3AP with chosen ones
        if i == n:
            if len(chosen) > best[0]:
                best[0] = len(chosen)
                best_set[0] = tuple(chosen)
            return
        rest = n - i
        cap = bound[rest] if rest < len(bound) else bound[-1] + 1
        if len(chosen) + cap <= best[0]:
            return
        if not (forbidden >> i) & 1:
            new = forbidden
            for a in chosen:
                c = 2 * i - a
                if c < n:
                    new |= 1 << c
            chosen.append(i)
            dfs(i + 1, new)
            chosen.pop()
        dfs(i + 1, forbidden)

    dfs(0, 0)
    if best_set[0] is None:
        # r3(n) == r3(n-1): any optimum of [n-1] still works; redo search allowing ties
        best[0] = bound[-1] - 1
        dfs(0, 0)
    return best[0], best_set[0]
