"""Prime modulus selection and small modular helpers."""

from __future__ import annotations

from dataclasses import dataclass

# Miller-Rabin with these bases is exact below this bound.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_LIMIT = 3_317_044_064_679_887_385_961_981


def is_prime(n: int) -> bool:
    """Deterministic primality test for ``n < 3.3e24``."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    if n >= _MR_LIMIT:
        raise ValueError(f"{n} exceeds the deterministic primality range")
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class ModContext:
    """Ambient length ``N`` embedded in ``Z_m`` with ``m`` prime and ``4N < m < 8N``."""

    N: int
    m: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be positive")
        if not 4 * self.N < self.m < 8 * self.N:
            raise ValueError(f"modulus {self.m} not in (4N, 8N) for N={self.N}")
        if not is_prime(self.m):
            raise ValueError(f"modulus {self.m} is not prime")


def choose_modulus(N: int) -> ModContext:
    """Smallest prime strictly between 4N and 8N."""
    if N < 1:
        raise ValueError("N must be positive")
    for m in range(4 * N + 1, 8 * N):
        if is_prime(m):
            return ModContext(N, m)
    raise AssertionError("Bertrand's postulate failed")  # unreachable


def centered_rep(x: int, m: int) -> int:
    """The integer ``s`` congruent to ``x`` with ``-m/2 < s <= m/2``."""
    s = x % m
    if 2 * s > m:
        s -= m
    return s


def mod_inverse(a: int, m: int) -> int:
    if a % m == 0:
        raise ZeroDivisionError(f"{a} is not invertible modulo {m}")
    return pow(a, -1, m)
