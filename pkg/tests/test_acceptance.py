"""Acceptance gate: every numbered check at its stated tolerance.

Run `python3 -m pytest tests/test_acceptance.py -s` to see one printed
pass/fail line per criterion; the same lines are what `verify-all` emits.
"""

import pytest

from ahlab import verify


@pytest.fixture(scope="module")
def shared():
    return verify.SharedRuns()


@pytest.mark.parametrize(
    "idx", range(len(verify.CRITERIA)), ids=lambda i: "criterion_%02d" % (i + 1)
)
def test_criterion(shared, idx):
    result = verify.CRITERIA[idx](shared)
    line = verify.format_line(result)
    print(line)
    for label, measured, tolerance, ok in result.checks:
        assert ok, "%s: %s measured %.3e tolerance %.3e" % (
            line, label, measured, tolerance)
    assert result.passed, line
