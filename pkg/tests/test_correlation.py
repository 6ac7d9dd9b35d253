from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rothlab import oracle
from rothlab.correlation import (
    ScaledFunction, autocorrelation, autocorrelation_all, autocorrelation_reference,
    balanced_profile, dump_profile_csv, energy, function_energy, trilinear, v_profile, window_sums,
)
from rothlab.errors import CapacityError
from rothlab.modring import choose_modulus
from rothlab.sets import DenseSet

from conftest import random_corpus

R_E1 = [20, -6, -7, 2, 1] + [0] * 14 + [1, 2, -7, -6]


@pytest.fixture
def p1(e1):
    return balanced_profile(e1, choose_modulus(5))


def test_balanced_examples(p1):
    assert p1.values.tolist() == [1, 1, -4, 1, 1] + [0] * 18
    ctx = choose_modulus(5)
    assert not balanced_profile(DenseSet(5, ()), ctx).values.any()
    assert not balanced_profile(DenseSet(5, tuple(range(5))), ctx).values.any()
    with pytest.raises(ValueError):
        balanced_profile(DenseSet(6, ()), ctx)


def test_profile_is_read_only(p1):
    with pytest.raises(ValueError):
        p1.values[0] = 3


def test_autocorrelation_e1(p1):
    c = autocorrelation(p1)
    assert c.rvals.tolist() == R_E1
    assert c.scale == 25
    assert autocorrelation(p1, method="reference").rvals.tolist() == R_E1
    assert energy(c).evalue == 580
    assert energy(c).exact == Fraction(580, 625)


def test_autocorrelation_empty():
    p = balanced_profile(DenseSet(5, ()), choose_modulus(5))
    assert not autocorrelation(p).rvals.any()
    assert energy(autocorrelation(p)).evalue == 0


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-50, 50), min_size=1, max_size=40), st.integers(1, 6))
def test_fast_matches_reference_and_threads(vals, threads):
    fast = autocorrelation_all(vals, threads)
    assert fast.tolist() == autocorrelation_reference(vals).tolist()
    assert fast.tolist() == [oracle.r_naive(vals, t) for t in range(len(vals))]


def test_capacity_guard():
    vals = np.zeros(64, dtype=np.int64)
    vals[:4] = 2 ** 31
    with pytest.raises(CapacityError):
        autocorrelation_all(vals)


def test_window_sums_e1(p1):
    w = window_sums(p1, 1, 2)
    nonzero = {x: int(v) for x, v in enumerate(w.svals.tolist()) if v}
    assert nonzero == {0: 2, 1: -3, 2: -3, 3: 2, 4: 1, 22: 1}
    assert w.vvalue == 28 == oracle.v_naive(p1.values, 1, 2)
    assert window_sums(p1, 5, 1).vvalue == 20
    w0 = window_sums(p1, 0, 3)
    assert w0.svals.tolist() == (3 * p1.values).tolist() and w0.vvalue == 9 * 20


def test_window_range(p1):
    for ell in (0, 12):
        with pytest.raises(ValueError):
            window_sums(p1, 1, ell)
        with pytest.raises(ValueError):
            v_profile(p1, ell)


def test_v_profile_e1(p1):
    vp = v_profile(p1, 2)
    assert vp[1] == 28
    assert sum(vp.tolist()) == 920 == 2 * 23 * 20


def test_v_profile_against_oracle():
    for A in random_corpus(12, 5, 30, seed=11):
        p = balanced_profile(A, choose_modulus(A.n))
        for ell in (1, 2, 5):
            want = [oracle.v_naive(p.values, d, ell) for d in range(p.m)]
            assert v_profile(p, ell).tolist() == want
            assert v_profile(p, ell, threads=3).tolist() == want


def test_v_lag_expansion_in_python_ints(p1):
    # the object-dtype path used near the int64 limit agrees with the int64 one
    from rothlab.correlation import _v_range
    r = autocorrelation(p1).rvals
    wide = _v_range(r, 4, 0, 23, object)
    assert wide.dtype == object
    assert wide.tolist() == v_profile(p1, 4).tolist()


def test_trilinear_examples(e1):
    m = 23
    u = ScaledFunction.indicator(e1, m)
    assert trilinear(u, u, u) == 4
    full = ScaledFunction.indicator(DenseSet(5, tuple(range(5))), m)
    assert trilinear(full, full, full) == 13
    zero = ScaledFunction(np.zeros(m, dtype=np.int64))
    assert trilinear(zero, zero, zero) == 0
    v = ScaledFunction.model(e1, m)
    assert trilinear(v, v, v) == Fraction(832, 125)


def test_trilinear_against_oracle():
    for A in random_corpus(10, 5, 25, seed=5):
        ctx = choose_modulus(A.n)
        p = balanced_profile(A, ctx)
        f = ScaledFunction.balanced(p)
        u = ScaledFunction.indicator(A, ctx.m)
        want = Fraction(oracle.trilinear_naive(p.values, u.values, p.values), A.n ** 2)
        assert trilinear(f, u, f) == want


def test_function_energy(p1):
    assert function_energy(ScaledFunction.balanced(p1)) == Fraction(580, 5 ** 4)


def test_scaled_function_bounds(e1):
    assert ScaledFunction.indicator(e1, 23).is_bounded()
    assert not ScaledFunction(np.array([3, 0, 0]), 2).is_bounded()
    with pytest.raises(ValueError):
        ScaledFunction(np.array([1]), 0)


def test_dump_csv(p1):
    import io
    buf = io.StringIO()
    dump_profile_csv(buf, "t", "R_scaled", autocorrelation(p1).rvals.tolist())
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,R_scaled" and lines[1] == "0,20" and len(lines) == 24
