"""The eleven acceptance criteria, one test each.

Each test prints its pass/fail line; the same lines are repeated in the
terminal summary so they appear even when output is captured.
"""

import pytest

from treeshift.acceptance import CRITERIA, run_criterion

RESULTS = []


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA], ids=[f"criterion_{c[0]:02d}" for c in CRITERIA])
def test_criterion(number):
    res = run_criterion(number)
    RESULTS.append(res)
    print(res.line(timing=True))
    assert res.passed, res.detail


def test_fault_injection_is_detected():
    res = run_criterion(10, inject_fault=True)
    print(res.line(timing=True))
    assert not res.passed
