"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run directly (``python3 tests/test_acceptance.py``) for the twelve lines
alone, or through pytest for the same lines plus test outcomes.
"""

import sys

import pytest

from spin7.acceptance import CRITERIA, run_criterion, sign_flipped_rhs

NUMBERS = list(range(1, len(CRITERIA) + 1))


@pytest.mark.parametrize("number", NUMBERS, ids=[f"criterion_{k:02d}_{CRITERIA[k - 1].__name__}" for k in NUMBERS])
def test_criterion(number, capsys):
    result = run_criterion(number)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.note or result.measured


def test_sign_flip_mutation_is_caught(capsys):
    failed = {k for k in (1, 2) if not run_criterion(k, sign_flipped_rhs).passed}
    with capsys.disabled():
        print(f"\nsign-flip mutation fails criteria {sorted(failed)}")
    assert failed == {1, 2}


if __name__ == "__main__":
    results = [run_criterion(k) for k in NUMBERS]
    for r in results:
        print(r.line())
    sys.exit(0 if all(r.passed for r in results) else 1)
