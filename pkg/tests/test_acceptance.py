"""Acceptance gate: one test per criterion, each printed as PASS or FAIL in the summary."""

import functools
import random
import time
from fractions import Fraction

import pytest

from rothlab import oracle
from rothlab.certify import (
    check_discrepancy, check_lambda_energy, check_positivity_all, check_window_identities,
    correlation_invariants, interval_count, sample_pairs,
)
from rothlab.correlation import (
    ScaledFunction, autocorrelation, autocorrelation_all, balanced_profile, energy, trilinear,
    v_profile, window_sums,
)
from rothlab.increment import IncrementConfig, IncrementError, density_increment, max_window
from rothlab.iterate import run
from rothlab.modring import choose_modulus
from rothlab.sets import DenseSet, behrend, greedy_free, is_3ap_free, r3_exact, random_subset

from conftest import random_corpus

ELLS = (1, 2, 3, 8)


@functools.lru_cache(maxsize=None)
def identity_corpus():
    """100 seeded random sets with N in 20..200."""
    return tuple(random_corpus(100, 20, 200, seed=2024))


@functools.lru_cache(maxsize=None)
def generator_corpus():
    return (greedy_free(243), behrend(243), greedy_free(2000), behrend(2000), greedy_free(2187))


def _setup(A):
    ctx = choose_modulus(A.n)
    p = balanced_profile(A, ctx)
    c = autocorrelation(p)
    return ctx, p, c, energy(c)


def test_criterion_1_exact_identities(record_property):
    start = time.perf_counter()
    bad = []
    for A in identity_corpus():
        ctx, p, c, e = _setup(A)
        m, N, k = ctx.m, A.n, A.size
        r = c.rvals.tolist()
        if any(r[t] != r[-t % m] for t in range(m)):
            bad.append((A.n, "symmetry"))
        if sum(r) != 0:
            bad.append((A.n, "zero sum"))
        # R(0) in unscaled units is (N|A| - |A|^2)/N; the stored value carries N^2
        if Fraction(r[0], N * N) * N != N * k - k * k or r[0] != N * (N * k - k * k):
            bad.append((A.n, "R(0)"))
        for ell in ELLS:
            expanded = v_profile(p, ell, c).tolist()
            direct = [window_sums(p, d, ell).vvalue for d in range(m)]
            if expanded != direct:
                bad.append((A.n, ell, "v-identity"))
            if sum(direct) != ell * m * r[0]:
                bad.append((A.n, ell, "first moment"))
    elapsed = time.perf_counter() - start
    record_property("detail", f"{len(identity_corpus())} sets, {len(bad)} mismatches, {elapsed:.1f}s (limit 60s)")
    assert not bad
    assert elapsed <= 60


def test_criterion_2_positivity(record_property):
    rng = random.Random(7)
    violations = 0
    mismatch = 0
    small = [random_subset(rng.randint(2, 30), Fraction(rng.randint(1, 9), 10), seed=100 + i) for i in range(20)]
    for A in small:
        _, p, c, _ = _setup(A)
        pos, wit = check_positivity_all(p, c)
        violations += not pos.holds
        mismatch += wit.lhs
    pairs_checked = 0
    large = [random_subset(rng.randint(100, 200), Fraction(rng.randint(1, 9), 10), seed=200 + i) for i in range(3)]
    for i, A in enumerate(large):
        ctx, p, c, _ = _setup(A)
        pairs = sample_pairs(ctx.m, 1000, seed=i)
        pos, wit = check_positivity_all(p, c, pairs)
        violations += not pos.holds
        mismatch += wit.lhs
        pairs_checked += len(pairs)
    record_property("detail", f"20 exhaustive sets + {pairs_checked} sampled pairs, "
                              f"{violations} violations, witness mismatch {mismatch}")
    assert violations == 0 and mismatch == 0


def test_criterion_3_explicit_constants(record_property):
    corpus = list(random_corpus(100, 20, 200, seed=33)) + list(generator_corpus())
    failures = []
    for A in corpus:
        ctx = choose_modulus(A.n)
        p = balanced_profile(A, ctx)
        c = autocorrelation(p)
        f = ScaledFunction.balanced(p)
        u = ScaledFunction.indicator(A, ctx.m)
        v = ScaledFunction.model(A, ctx.m)
        for gs, name in (((f, f, f), "fff"), ((u, u, u), "uuu"), ((f, u, v), "fuv")):
            if not check_lambda_energy(*gs).holds:
                failures.append((A.n, name))
        if not check_discrepancy(A, ctx, c)[0].holds:
            failures.append((A.n, "discrepancy"))
    record_property("detail", f"{len(corpus)} sets, {len(failures)} violations")
    assert not failures


def test_criterion_4_free_counting(record_property):
    corpus = list(identity_corpus()) + list(generator_corpus())
    corpus += [DenseSet.from_iterable(n, random.Random(n).sample(greedy_free(n).members, greedy_free(n).size // 2))
               for n in range(10, 200, 7)]
    free_sets = 0
    failures = []
    for A in corpus:
        m = choose_modulus(A.n).m
        u = ScaledFunction.indicator(A, m)
        lam = trilinear(u, u, u)
        if is_3ap_free(A).free:
            free_sets += 1
            if lam != A.size:
                failures.append((A.n, "free count"))
        if lam != oracle.count_3aps_integer(A.members):
            failures.append((A.n, "integer count"))
    for n in range(1, 61):
        full = ScaledFunction.indicator(DenseSet(n, tuple(range(n))), choose_modulus(n).m)
        if not trilinear(full, full, full) == interval_count(n) == oracle.count_3aps_integer(range(n)):
            failures.append((n, "interval"))
    if interval_count(5) != 13:
        failures.append((5, "interval example"))
    record_property("detail", f"{len(corpus)} sets ({free_sets} free), intervals 1..60, {len(failures)} mismatches")
    assert not failures


def test_criterion_5_second_moment(record_property):
    failures = []
    checks = 0
    for A in identity_corpus():
        ctx, p, c, e = _setup(A)
        r0 = int(c.rvals[0])
        for ell in ELLS:
            direct = [window_sums(p, d, ell).vvalue for d in range(ctx.m)]
            v0 = direct[0]
            lhs = sum(v * v for v in direct[1:])
            rhs = 2 * sum(j * j for j in range(1, ell)) * e.evalue - v0 * v0
            checks += 1
            if v0 != ell * ell * r0 or lhs < rhs:
                failures.append((A.n, ell))
            report = [x for x in check_window_identities(p, ell, c, e) if x.name.startswith("v_second_moment")][0]
            if not report.holds:
                failures.append((A.n, ell, "report"))
    record_property("detail", f"{checks} (set, ell) pairs, {len(failures)} violations")
    assert not failures


CHAIN = ("chain_best_step", "chain_best_start", "chain_block_mean", "chain_small_step", "chain_new_density")


def test_criterion_6_increment_chain(record_property):
    runs = 0
    failures = []
    corpus = [greedy_free(243), behrend(243), greedy_free(2000), behrend(2000)]
    for A in corpus:
        ctx, p, _, _ = _setup(A)
        N, m = ctx.N, ctx.m
        for ell in (None, 4, 16, 64, 256, max_window(m)):
            cfg = IncrementConfig(ell_override=ell, min_len=1)
            try:
                res = density_increment(A, ctx, cfg)
            except IncrementError:
                continue
            runs += 1
            names = {c.name: c for c in res.certificates}
            for key in CHAIN + ("conservation_block_to_P",):
                if key not in names or not names[key].holds:
                    failures.append((A.n, ell, key))
            terms = res.P.terms()
            if not all(0 <= t < N for t in terms):
                failures.append((A.n, ell, "P outside [N]"))
            residues = res.block.residues(m)
            inside = [i for i, r in enumerate(residues) if r < N]
            if inside != list(range(inside[0], inside[-1] + 1)) or [residues[i] for i in inside] != terms:
                failures.append((A.n, ell, "not a consecutive run"))
            if sum(int(p.values[t]) for t in terms) != sum(int(p.values[r]) for r in residues):
                failures.append((A.n, ell, "conservation"))
            if res.new_density != A.density + Fraction(sum(int(p.values[t]) for t in terms), res.P.L * N):
                failures.append((A.n, ell, "density"))
    record_property("detail", f"{runs} certified runs, {len(failures)} certificate failures")
    assert runs > 0 and not failures


def test_criterion_7_iteration(record_property):
    start = time.perf_counter()
    failures = []
    summary = []
    cfg = IncrementConfig(mode="greedy")
    for A in (behrend(2000), greedy_free(2187)):
        traj = run(A, cfg)
        summary.append(f"N={A.n}: {traj.successful_steps} step(s), {traj.stop_reason}")
        if traj.successful_steps < 1:
            failures.append((A.n, "no stage"))
        alphas = traj.alphas
        if not all(a < b for a, b in zip(alphas, alphas[1:])):
            failures.append((A.n, "densities"))
        if not all(is_3ap_free(s.A).free for s in traj.stages):
            failures.append((A.n, "freeness"))
        if run(A, cfg).to_json() != traj.to_json() or run(A, cfg).to_csv() != traj.to_csv():
            failures.append((A.n, "replay"))
    elapsed = time.perf_counter() - start
    record_property("detail", "; ".join(summary) + f"; {elapsed:.1f}s (limit 120s)")
    assert not failures
    assert elapsed <= 120


def test_criterion_8_extremal_oracle(record_property):
    start = time.perf_counter()
    enumerated = oracle.r3_enumerate(20)
    failures = []
    for n in range(1, 21):
        size, witness = r3_exact(n)
        if size != enumerated[n] or witness.size != size or not is_3ap_free(witness).free:
            failures.append(n)
    elapsed = time.perf_counter() - start
    record_property("detail", f"n=1..20, {len(failures)} mismatches, {elapsed:.1f}s (limit 60s)")
    assert not failures
    assert elapsed <= 60


def _best_time(fn, reps=7):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def test_criterion_9_performance(record_property):
    A = behrend(2000)
    ctx = choose_modulus(A.n)
    vals = balanced_profile(A, ctx).values
    single = autocorrelation_all(vals, threads=1)
    multi = autocorrelation_all(vals, threads=8)
    identical = single.dtype == multi.dtype and single.tobytes() == multi.tobytes()
    t1 = _best_time(lambda: autocorrelation_all(vals, threads=1))
    t8 = _best_time(lambda: autocorrelation_all(vals, threads=8))
    speedup = t1 / t8
    record_property("detail", f"m={ctx.m}, 1 thread {t1 * 1e3:.1f}ms (limit 5s), 8 threads {t8 * 1e3:.1f}ms, "
                              f"speedup {speedup:.2f}x (need 3x), bit-identical {identical}")
    assert ctx.m < 16000
    assert identical
    assert t1 <= 5
    assert speedup >= 3
