import pytest
from hypothesis import given, strategies as st

from rothlab.modring import ModContext, centered_rep, choose_modulus, is_prime, mod_inverse


def test_is_prime_against_trial_division():
    def slow(n):
        return n >= 2 and all(n % p for p in range(2, int(n ** 0.5) + 1))
    assert [n for n in range(2000) if is_prime(n)] == [n for n in range(2000) if slow(n)]


def test_is_prime_large():
    assert is_prime(2 ** 61 - 1)
    assert not is_prime(3215031751)  # strong pseudoprime to bases 2, 3, 5, 7
    assert not is_prime((2 ** 31 - 1) * (2 ** 41 - 1))
    with pytest.raises(ValueError):
        is_prime(2 ** 89 - 1)


@pytest.mark.parametrize("n, m", [(1, 5), (5, 23), (10, 41), (2000, 8009)])
def test_choose_modulus(n, m):
    assert choose_modulus(n).m == m


@given(st.integers(1, 20000))
def test_modulus_window(n):
    ctx = choose_modulus(n)
    assert 4 * n < ctx.m < 8 * n and is_prime(ctx.m)
    assert not any(is_prime(k) for k in range(4 * n + 1, ctx.m))


def test_modcontext_rejects_bad_modulus():
    with pytest.raises(ValueError):
        ModContext(5, 21)
    with pytest.raises(ValueError):
        ModContext(5, 41)
    with pytest.raises(ValueError):
        choose_modulus(0)


@pytest.mark.parametrize("x, m, want", [(7, 23, 7), (21, 23, -2), (12, 23, -11), (11, 23, 11), (0, 5, 0)])
def test_centered_rep(x, m, want):
    assert centered_rep(x, m) == want


@given(st.integers(-10 ** 6, 10 ** 6), st.sampled_from([5, 7, 23, 41, 8009]))
def test_centered_rep_range(x, m):
    s = centered_rep(x, m)
    assert (s - x) % m == 0 and -m < 2 * s <= m


@pytest.mark.parametrize("a, want", [(1, 1), (2, 12), (7, 10)])
def test_mod_inverse(a, want):
    assert mod_inverse(a, 23) == want


def test_mod_inverse_zero():
    with pytest.raises(ZeroDivisionError):
        mod_inverse(46, 23)
