import random
from fractions import Fraction

import pytest

from rothlab.sets import DenseSet, random_subset


@pytest.fixture
def e1():
    """The five-point running example {0,1,3,4} in [5]."""
    return DenseSet(5, (0, 1, 3, 4))


def random_corpus(count, lo, hi, seed):
    rng = random.Random(seed)
    out = []
    for i in range(count):
        n = rng.randint(lo, hi)
        out.append(random_subset(n, Fraction(rng.randint(1, 9), 10), seed=seed * 1000 + i))
    return out


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nodeid or rep.when != "call" and outcome != "error":
                continue
            num = int(nodeid.split("test_criterion_")[1].split("_")[0])
            detail = dict(rep.user_properties).get("detail", "")
            lines.append((num, f"criterion {num}: {'PASS' if outcome == 'passed' else 'FAIL'}  {detail}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
