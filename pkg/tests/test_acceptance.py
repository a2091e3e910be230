"""The twelve acceptance criteria at their stated tolerances.

Each criterion prints one PASS/FAIL line (collected into the terminal
summary under pytest). Run directly with ``python3 tests/test_acceptance.py``
to get the same lines without pytest.
"""

import sys
import time

import pytest

from reflmax.checks import CRITERIA

TITLES = {
    1: "oracle equivalence, n <= 16",
    2: "closed-form position law, n <= 200",
    3: "exact position moments and n = 1e4 limits",
    4: "trigonometric Q_N(a) vs DP",
    5: "limit constants to 5 decimals",
    6: "finite-N moments at N = 1e6",
    7: "theta duality and identity residual",
    8: "first-term bounds",
    9: "limit-law convergence in a",
    10: "Monte Carlo concordance, 1e6 walks of n = 1000",
    11: "Abel-limit route",
    12: "first passage to a = 3",
}


def evaluate(num: int) -> tuple[bool, str]:
    t0 = time.perf_counter()
    checks = CRITERIA[num]("full")
    dt = time.perf_counter() - t0
    ok = all(c.passed for c in checks)
    detail = "; ".join(f"{c.name}={_short(c.measured)}" for c in checks)
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num:>2} ({TITLES[num]}) [{dt:.1f}s]: {detail}"
    failed = [c.line() for c in checks if not c.passed]
    return ok, line + ("".join("\n    " + f for f in failed))


def _short(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


@pytest.mark.parametrize("num", sorted(CRITERIA))
def test_criterion(num):
    from conftest import ACCEPTANCE_LINES

    ok, line = evaluate(num)
    ACCEPTANCE_LINES[num] = line
    print(line)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(n) for n in sorted(CRITERIA)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
