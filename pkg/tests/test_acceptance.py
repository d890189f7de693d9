"""End-to-end acceptance checks for the whole laboratory.

Each criterion bundles one headline claim about the discrete model: the
fundamental solution mass law, the barrier constants, solver cross checks,
the rescaled limits for every datum class, and deterministic reruns.  Every
test simply runs the corresponding criterion and asserts that it passed,
echoing the measured details on failure.
"""

import pytest

from nldiff import acceptance


def test_criterion_catalog_is_complete():
    numbers = acceptance.criterion_numbers()
    assert numbers == tuple(range(1, 12))
    for n in numbers:
        assert acceptance.criterion_title(n)


def test_unknown_criterion_rejected():
    with pytest.raises(KeyError):
        acceptance.run_criterion(12)


@pytest.mark.parametrize("number", acceptance.criterion_numbers())
def test_criterion_passes(number):
    res = acceptance.run_criterion(number)
    assert res.number == number
    assert res.title == acceptance.criterion_title(number)
    assert res.passed, f"criterion {number} ({res.title}): {res.details}"
