"""Every acceptance criterion at its stated tolerance, one line per check.

The wave-packet criteria run two full packet propagations and take about a
minute and a half together.
"""

import pytest

from twobarrier import acceptance

CHECKS = [fn for fn in acceptance.FULL]


@pytest.mark.parametrize("check", CHECKS, ids=[fn.__name__.removeprefix("check_") for fn in CHECKS])
def test_criterion(check, acceptance_report):
    results = check()
    for r in results:
        print(r.line())
    acceptance_report.extend(results)
    failed = [r.line() for r in results if not r.passed]
    assert not failed, "\n".join(failed)
