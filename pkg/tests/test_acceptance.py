"""Acceptance suite: one check per criterion, each printing a single PASS/FAIL line.

The same checks back ``hypersos repro all``.
"""

import pytest

from hypersos.repro import CHECKS


@pytest.mark.parametrize("name", list(CHECKS))
def test_criterion(name, capsys):
    result = CHECKS[name]()
    with capsys.disabled():
        print("\n" + result.line())
    assert result.ok, result.detail
