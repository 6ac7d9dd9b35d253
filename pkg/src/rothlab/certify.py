"""Exact certificates for the identities and inequalities behind the increment argument.

Every check is an :class:`InequalityReport` ``lhs <= rhs`` over exact
rationals. Identities are reported as ``|difference| <= 0`` so a single
report shape covers both.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .correlation import (
    INT64_LIMIT,
    BalancedProfile,
    CorrelationProfile,
    EnergyValue,
    ScaledFunction,
    autocorrelation,
    balanced_profile,
    energy,
    exact_sum_squares,
    function_energy,
    trilinear,
    v_profile,
    window_sums,
)
from .modring import ModContext, choose_modulus, mod_inverse
from .sets import DenseSet, FreenessReport, is_3ap_free


def format_rational(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class InequalityReport:
    name: str
    lhs: Fraction
    rhs: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lhs", Fraction(self.lhs))
        object.__setattr__(self, "rhs", Fraction(self.rhs))

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs

    @property
    def margin(self) -> Fraction:
        return self.rhs - self.lhs

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": format_rational(self.lhs),
            "rhs": format_rational(self.rhs),
            "holds": self.holds,
            "margin": format_rational(self.margin),
        }


def identity(name, left, right) -> InequalityReport:
    """Equality ``left == right`` as the report ``|left - right| <= 0``."""
    return InequalityReport(name, abs(Fraction(left) - Fraction(right)), 0)


@dataclass(frozen=True)
class DiscrepancyReport:
    lambda_A: int
    lambda_model: Fraction
    delta: Fraction
    energy: EnergyValue
    beta_hat: Fraction
    # the lower bound on E(f)/m^3 that the discrepancy inequality forces
    beta_lower: Fraction

    def to_dict(self) -> dict:
        return {
            "lambda_A": self.lambda_A,
            "lambda_model": format_rational(self.lambda_model),
            "delta": format_rational(self.delta),
            "energy_scaled": self.energy.evalue,
            "energy_scale": self.energy.scale,
            "beta_hat": format_rational(self.beta_hat),
            "beta_lower": format_rational(self.beta_lower),
        }


# -- positivity -----------------------------------------------------------

def _rvals_exact(c: CorrelationProfile):
    r = c.rvals
    if len(r) * int(np.abs(r).max()) ** 2 > INT64_LIMIT:
        return r.astype(object)
    return r


def positivity_direct(c: CorrelationProfile, h: int, k: int) -> int:
    m = c.ctx.m
    r = _rvals_exact(c)
    d = np.arange(m, dtype=np.int64)
    return int(np.dot(r[(h * d) % m], r[(k * d) % m]))


def positivity_witness(p: BalancedProfile, lam: int) -> int:
    """sum_u (sum_a f(a) f(u + lam*a))^2, the sum-of-squares form of the positivity sum."""
    m = p.m
    vals = p.values
    support = np.flatnonzero(vals)
    weights = vals[support]
    inner = np.zeros(m, dtype=np.int64)
    # f(u + lam*a) != 0 only for u = y - lam*a with y in the support
    for a, fa in zip(support.tolist(), weights.tolist()):
        inner[(support - lam * a) % m] += fa * weights
    return exact_sum_squares(inner)


def positivity_matrix(c: CorrelationProfile) -> np.ndarray:
    """G[h-1, k-1] = sum_d R(hd) R(kd) for every pair of nonzero residues."""
    m = c.ctx.m
    r = _rvals_exact(c)
    d = np.arange(m, dtype=np.int64)
    dil = r[(np.arange(1, m, dtype=np.int64)[:, None] * d[None, :]) % m]
    return dil @ dil.T


def check_positivity(p: BalancedProfile, c: CorrelationProfile, h: int, k: int) -> List[InequalityReport]:
    """Positivity of sum_d R(hd) R(kd) plus agreement with its sum-of-squares witness."""
    m = p.m
    if h % m == 0 or k % m == 0:
        raise ValueError("h and k must be nonzero residues")
    direct = positivity_direct(c, h, k)
    lam = k * mod_inverse(h, m) % m
    sos = positivity_witness(p, lam)
    return [
        InequalityReport(f"positivity[h={h},k={k}]", 0, direct),
        identity(f"positivity_witness[h={h},k={k}]", direct, sos),
    ]


def check_positivity_all(p: BalancedProfile, c: CorrelationProfile, pairs=None) -> List[InequalityReport]:
    """Aggregate positivity over all pairs (``pairs=None``) or the given list.

    The positivity report carries the minimum direct sum; the witness
    report carries the total absolute disagreement with the
    sum-of-squares form, which depends only on ``k/h``.
    """
    m = p.m
    witness = {}
    if pairs is None:
        gram = positivity_matrix(c)
        mismatch = 0
        for h in range(1, m):
            hinv = mod_inverse(h, m)
            for k in range(1, m):
                lam = k * hinv % m
                if lam not in witness:
                    witness[lam] = positivity_witness(p, lam)
                mismatch += abs(int(gram[h - 1, k - 1]) - witness[lam])
        label = "all"
        lowest = int(gram.min()) if gram.size else 0
    else:
        lowest = None
        mismatch = 0
        for h, k in pairs:
            direct = positivity_direct(c, h, k)
            lowest = direct if lowest is None else min(lowest, direct)
            lam = k * mod_inverse(h, m) % m
            if lam not in witness:
                witness[lam] = positivity_witness(p, lam)
            mismatch += abs(direct - witness[lam])
        label = f"{len(pairs)} pairs"
        lowest = 0 if lowest is None else lowest
    return [
        InequalityReport(f"positivity[{label}]", 0, lowest),
        InequalityReport(f"positivity_witness[{label}]", mismatch, 0),
    ]


# -- trilinear forms --------------------------------------------------------

def check_lambda_energy(g1: ScaledFunction, g2: ScaledFunction, g3: ScaledFunction,
                        name: str = "lambda_energy", threads=None) -> InequalityReport:
    """Lambda(g1,g2,g3)^4 <= m^5 * min_i E(g_i) for functions bounded by 1."""
    for g in (g1, g2, g3):
        if not g.is_bounded(1):
            raise ValueError("lambda-energy check needs |g_i| <= 1")
    m = g1.m
    lam = trilinear(g1, g2, g3)
    min_energy = min(function_energy(g, threads) for g in (g1, g2, g3))
    return InequalityReport(name, lam ** 4, m ** 5 * min_energy)


def interval_count(N: int) -> int:
    """Number of (x, r) with x, x+r, x+2r in [N], trivial r = 0 included."""
    return N + 2 * sum(N - 2 * r for r in range(1, (N - 1) // 2 + 1))


def check_discrepancy(A: DenseSet, ctx: ModContext, corr: CorrelationProfile = None,
                      threads=None) -> Tuple[InequalityReport, DiscrepancyReport]:
    """|Lambda(u,u,u) - Lambda(v,v,v)|^4 <= 81 m^5 E(f) with u = 1_A, v = alpha 1_[N]."""
    m = ctx.m
    p = balanced_profile(A, ctx)
    if corr is None:
        corr = autocorrelation(p, threads)
    e = energy(corr)
    u = ScaledFunction.indicator(A, m)
    v = ScaledFunction.model(A, m)
    lambda_u = trilinear(u, u, u)
    lambda_v = trilinear(v, v, v)
    delta = abs(lambda_u - lambda_v)
    rhs = 81 * m ** 5 * e.exact
    report = InequalityReport("trilinear_discrepancy", delta ** 4, rhs)
    disc = DiscrepancyReport(
        lambda_A=int(lambda_u),
        lambda_model=lambda_v,
        delta=delta,
        energy=e,
        beta_hat=e.exact / m ** 3,
        beta_lower=delta ** 4 / (81 * Fraction(m) ** 8),
    )
    return report, disc


# -- window sums -------------------------------------------------------------

def check_window_identities(p: BalancedProfile, ell: int, corr: CorrelationProfile = None,
                            e: EnergyValue = None, threads=None) -> List[InequalityReport]:
    m, N, k = p.m, p.scale, p.size
    if corr is None:
        corr = autocorrelation(p, threads)
    if e is None:
        e = energy(corr)
    r0 = int(corr.rvals[0])
    expanded = v_profile(p, ell, corr, threads).tolist()
    direct = [window_sums(p, d, ell).vvalue for d in range(m)]
    mismatch = sum(abs(a - b) for a, b in zip(direct, expanded))
    total = sum(direct)
    v0 = direct[0]
    diag = 2 * sum(j * j for j in range(1, ell)) * e.evalue
    nonzero_sq = sum(v * v for v in direct[1:])
    tag = f"[ell={ell}]"
    return [
        InequalityReport("v_identity" + tag, mismatch, 0),
        identity("v_first_moment_identity" + tag, total, ell * m * r0),
        InequalityReport("v_first_moment_r0" + tag, ell * m * r0, ell * m * N * N * k),
        InequalityReport("v_first_moment_bound" + tag, total, k * N * ell * m * m),
        identity("v_zero_step" + tag, v0, ell * ell * r0),
        InequalityReport("v_zero_step_bound" + tag, v0, ell * ell * N * N * k),
        InequalityReport("v_second_moment_nonzero" + tag, diag - v0 * v0, nonzero_sq),
    ]


def correlation_invariants(p: BalancedProfile, corr: CorrelationProfile, e: EnergyValue) -> List[InequalityReport]:
    m, N, k = p.m, p.scale, p.size
    vals = p.values.tolist()
    r = corr.rvals.tolist()
    out_of_range = sum(1 for x, v in enumerate(vals) if not (-k <= v <= N - k) or (x >= N and v))
    return [
        identity("balanced_zero_sum", sum(vals), 0),
        InequalityReport("balanced_bounds", out_of_range, 0),
        InequalityReport("r_symmetry", sum(abs(r[t] - r[-t % m]) for t in range(m)), 0),
        identity("r_zero_sum", sum(r), 0),
        identity("r_zero_value", r[0], N * (N * k - k * k)),
        InequalityReport("r_zero_bound", r[0], N * N * k),
        InequalityReport("energy_ge_r0_squared", r[0] * r[0], e.evalue),
    ]


# -- aggregate ---------------------------------------------------------------

@dataclass(frozen=True)
class VerifyConfig:
    ells: Sequence[int] = (1, 2, 3)
    positivity_exhaustive_max_m: int = 300
    positivity_samples: int = 64
    seed: int = 0
    threads: Optional[int] = None


@dataclass(frozen=True)
class CertificateReport:
    n: int
    m: int
    freeness: FreenessReport
    discrepancy: DiscrepancyReport
    reports: Tuple[InequalityReport, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(r.holds for r in self.reports)

    @property
    def failures(self) -> List[InequalityReport]:
        return [r for r in self.reports if not r.holds]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "passed": self.passed,
            "free": self.freeness.free,
            "witness": list(self.freeness.witness) if self.freeness.witness else None,
            "discrepancy": self.discrepancy.to_dict(),
            "reports": [r.to_dict() for r in self.reports],
        }


def sample_pairs(m: int, count: int, seed: int = 0):
    rng = random.Random(seed)
    return [(rng.randrange(1, m), rng.randrange(1, m)) for _ in range(count)]


def verify_all(A: DenseSet, config: VerifyConfig = VerifyConfig()) -> CertificateReport:
    ctx = choose_modulus(A.n)
    m, N = ctx.m, ctx.N
    threads = config.threads
    p = balanced_profile(A, ctx)
    corr = autocorrelation(p, threads)
    e = energy(corr)
    freeness = is_3ap_free(A)

    reports = correlation_invariants(p, corr, e)

    if m <= config.positivity_exhaustive_max_m:
        reports += check_positivity_all(p, corr)
    else:
        reports += check_positivity_all(p, corr, sample_pairs(m, config.positivity_samples, config.seed))

    u = ScaledFunction.indicator(A, m)
    v = ScaledFunction.model(A, m)
    f = ScaledFunction.balanced(p)
    full = ScaledFunction.indicator(DenseSet(N, tuple(range(N))), m)
    lambda_u = trilinear(u, u, u)
    if freeness.free:
        reports.append(identity("lambda_counts_trivial_only", lambda_u, A.size))
    else:
        reports.append(InequalityReport("lambda_counts_trivial_lower", A.size, lambda_u))
    lambda_full = trilinear(full, full, full)
    reports.append(identity("interval_count", lambda_full, interval_count(N)))
    if N >= 3:
        reports.append(InequalityReport("interval_count_quadratic", Fraction(N * N, 4), lambda_full))

    reports.append(check_lambda_energy(f, f, f, "lambda_energy[f,f,f]", threads))
    reports.append(check_lambda_energy(u, u, u, "lambda_energy[u,u,u]", threads))
    reports.append(check_lambda_energy(f, u, v, "lambda_energy[f,u,v]", threads))

    disc_report, disc = check_discrepancy(A, ctx, corr, threads)
    reports.append(disc_report)

    for ell in config.ells:
        if 2 * ell < m:
            reports += check_window_identities(p, ell, corr, e, threads)

    return CertificateReport(N, m, freeness, disc, tuple(reports))
