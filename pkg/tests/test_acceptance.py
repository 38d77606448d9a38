"""Acceptance gate: one verification suite per criterion, one PASS/FAIL line each.

Run under pytest (lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""

import sys

import pytest

from spincurve.verify import SUITES, run_suite

# wall-clock budgets (seconds) for criteria that state one
RUNTIME_LIMIT = {1: 1.0, 6: 5.0}


def evaluate(key):
    res = run_suite(key)
    limit = RUNTIME_LIMIT.get(key)
    if limit is not None:
        res.details["budget_s"] = limit
        res.ok = res.ok and res.elapsed < limit
    return res


@pytest.mark.acceptance
@pytest.mark.parametrize("key", sorted(SUITES))
def test_criterion(key):
    import conftest
    res = evaluate(key)
    line = res.line()
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert res.ok, line


if __name__ == "__main__":
    results = [evaluate(k) for k in sorted(SUITES)]
    for r in results:
        print(r.line())
    sys.exit(0 if all(r.ok for r in results) else 1)
