"""The eleven acceptance criteria, each printed as one PASS/FAIL line."""
import pytest

from twophase import acceptance


@pytest.mark.parametrize("check", acceptance.CHECKS, ids=lambda c: c.__name__)
def test_criterion(check):
    res = check()
    print("\n" + res.line())
    assert res.passed, res.detail
