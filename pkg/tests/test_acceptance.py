"""Acceptance gate: every headline claim of the package, one line each.

The suite is computed once per session (several minutes; the resonant
solves at p = 1.5 dominate) and each criterion then gets its own test so
a failure points at the exact claim that broke.
"""

import pytest

from plapext import accept


@pytest.fixture(scope="module")
def results():
    res = accept.run_all()
    print()
    for r in res:
        print(r.line())
    return {r.number: r for r in res}


def _check(results, number):
    r = results[number]
    print(r.line())
    assert r.passed, f"criterion {number} failed: {r.details}"


@pytest.mark.parametrize("number,name", [(n, name) for n, name, _
                                         in accept.CRITERIA])
def test_criterion(results, number, name):
    _check(results, number)


def test_all_twelve_present(results):
    assert sorted(results) == list(range(1, 13))
