"""Run the increment repeatedly: increment, rescale, record."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

from .certify import format_rational
from .increment import IncrementConfig, IncrementError, IncrementResult, ZeroEnergy, density_increment, rescale
from .modring import choose_modulus
from .sets import DenseSet, is_3ap_free

STOP_REASONS = ("DensityCap", "NTooSmall", "NoIncrement", "ZeroEnergy", "MaxSteps", "FoundAP")
CSV_COLUMNS = ["j", "N_j", "alpha_num", "alpha_den", "eta_num", "eta_den", "P_len", "stop_reason"]


@dataclass(frozen=True)
class Stage:
    j: int
    A: DenseSet
    increment: Optional[IncrementResult] = None

    @property
    def n(self) -> int:
        return self.A.n

    @property
    def alpha(self) -> Fraction:
        return self.A.density


@dataclass(frozen=True)
class Trajectory:
    stages: Tuple[Stage, ...]
    stop_reason: str
    witness: Optional[Tuple[int, int, int]] = None
    detail: str = ""

    @property
    def alphas(self) -> List[Fraction]:
        return [s.alpha for s in self.stages]

    @property
    def successful_steps(self) -> int:
        return sum(1 for s in self.stages if s.increment is not None)

    def to_dict(self) -> dict:
        return {
            "stop_reason": self.stop_reason,
            "detail": self.detail,
            "witness": list(self.witness) if self.witness else None,
            "stages": [
                {
                    "j": s.j,
                    "N": s.n,
                    "alpha": format_rational(s.alpha),
                    "elements": list(s.A.members),
                    "increment": s.increment.to_dict() if s.increment else None,
                }
                for s in self.stages
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        last = len(self.stages) - 1
        for s in self.stages:
            inc = s.increment
            writer.writerow([
                s.j, s.n, s.alpha.numerator, s.alpha.denominator,
                inc.eta.numerator if inc else "",
                inc.eta.denominator if inc else "",
                inc.P.L if inc else "",
                self.stop_reason if s.j == last else "",
            ])
        return buf.getvalue()


def run(A: DenseSet, cfg: IncrementConfig = IncrementConfig(), max_steps: int = 32, min_n: int = 8) -> Trajectory:
    """Iterate until a stop condition; every failure becomes a recorded stop reason.

    A full interval at the start stops with ZeroEnergy before the 3AP
    check; density 1 reached by the iteration itself stops with DensityCap.
    """
    stages = []
    current = A
    j = 0
    while True:
        if current.n < min_n:
            stages.append(Stage(j, current))
            return Trajectory(tuple(stages), "NTooSmall")
        if current.density == 1:
            # f vanishes on a full interval, so there is nothing to increment
            stages.append(Stage(j, current))
            if j == 0:
                return Trajectory(tuple(stages), "ZeroEnergy", detail="full interval")
            return Trajectory(tuple(stages), "DensityCap")
        report = is_3ap_free(current)
        if not report.free:
            stages.append(Stage(j, current))
            return Trajectory(tuple(stages), "FoundAP", report.witness)
        if j >= max_steps:
            stages.append(Stage(j, current))
            return Trajectory(tuple(stages), "MaxSteps")
        try:
            result = density_increment(current, choose_modulus(current.n), cfg)
        except ZeroEnergy as exc:
            stages.append(Stage(j, current))
            return Trajectory(tuple(stages), "ZeroEnergy", detail=str(exc))
        except IncrementError as exc:
            stages.append(Stage(j, current))
            return Trajectory(tuple(stages), "NoIncrement", detail=f"{type(exc).__name__}: {exc}")
        stages.append(Stage(j, current, result))
        current = rescale(current, result.P)
        j += 1


@dataclass(frozen=True)
class BoundReport:
    N: int
    alpha: float
    C: float
    c0: float
    threshold: float
    within_bound: bool
    steps: int
    rows: List[Tuple[int, float]] = field(default_factory=list)
    truncated: bool = False

    def lines(self) -> List[str]:
        out = [
            f"N = {self.N}, alpha = {self.alpha:.12g}",
            f"C (log log N)^(-1/11) = {self.threshold:.12g} (C = {self.C:g})",
            f"alpha <= bound: {self.within_bound}",
            f"J = floor(c0 alpha^-11) = {self.steps} (c0 = {self.c0:g})",
            "j,log_N_j_lower",
        ]
        out += [f"{j},{v:.12g}" for j, v in self.rows]
        if self.truncated:
            out.append(f"... truncated after {len(self.rows)} rows")
        return out


def bound_report(N: int, alpha, C: float = 1.0, c0: float = 1.0, max_rows: int = 64) -> BoundReport:
    """Floating-point display of the double-logarithmic bound and the length recursion."""
    if N < 16:
        raise ValueError("bound report needs N >= 16")
    a = float(alpha)
    if not 0 < a <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    threshold = C * math.log(math.log(N)) ** (-1 / 11)
    steps = math.floor(c0 * a ** -11)
    shown = min(steps, max_rows - 1)
    log_n = math.log(N)
    penalty = C * math.log(math.e / a)
    rows = [(j, 2.0 ** -j * log_n - penalty) for j in range(shown + 1)]
    return BoundReport(N, a, C, c0, threshold, a <= threshold, steps, rows, shown < steps)
