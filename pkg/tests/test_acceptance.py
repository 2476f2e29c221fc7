"""One test per acceptance criterion, each at its stated tolerance and time limit.

Every run prints a PASS/FAIL line per criterion (also collected into the
terminal summary).  Criteria that cannot be met are left failing.
"""

import json

import pytest

from antipode.acceptance import ALL_CHECKS

from conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("number", range(1, len(ALL_CHECKS) + 1))
def test_acceptance_criterion(number):
    result = ALL_CHECKS[number - 1]()
    line = result.line()
    print(line)
    print(json.dumps(result.details, default=str, indent=1))
    ACCEPTANCE_LINES.append(line)
    assert result.passed, line
