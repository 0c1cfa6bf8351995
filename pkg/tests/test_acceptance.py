"""Acceptance criteria 1-10 at their stated tolerances.

Each criterion prints one PASS/FAIL line (visible with ``pytest -v`` or ``-s``).
"""

import pytest

from petty import acceptance

BUDGET = {1: 30, 3: 300, 7: 120}


@pytest.mark.parametrize("criterion", acceptance.CRITERIA, ids=lambda c: f"criterion_{c.number:02d}")
def test_criterion(criterion, capsys):
    res = criterion()
    with capsys.disabled():
        print(f"\n{res.line()}")
    assert res.passed, res.detail
    if res.number in BUDGET:
        assert res.seconds < BUDGET[res.number], f"took {res.seconds:.1f}s"
