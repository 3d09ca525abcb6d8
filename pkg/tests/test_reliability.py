from __future__ import annotations

import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from asilalloc.instance import Asil
from asilalloc.reliability import (
    PMHF_TARGETS,
    check_pmhf,
    check_pmhf_linear,
    log_pof_budget,
    log_pof_coefficient,
    pof,
    pof_budget,
    pof_decomposed,
)

T = 5000.0


def test_targets():
    assert PMHF_TARGETS == {Asil.D: 1e-8, Asil.C: 1e-7, Asil.B: 1e-7}
    assert pof_budget(Asil.A, T) is None
    assert log_pof_budget(Asil.A, T) is None


def test_pof_values():
    assert pof(1e-6, T) == pytest.approx(1 - math.exp(-5e-3), rel=1e-15)
    assert pof(1e-8, T) == pytest.approx(4.99988e-5, abs=1e-9)


def test_pair_classification_for_asil_d():
    budget = pof_budget(Asil.D, T)
    e12 = pof_decomposed([1e-6, 2e-6], T)
    e13 = pof_decomposed([1e-6, 3e-6], T)
    # references evaluated at 40 significant digits
    assert e12 == pytest.approx(4.962666121229455e-5, rel=1e-12)
    assert e13 == pytest.approx(7.425451101032739e-5, rel=1e-12)
    assert budget == pytest.approx(4.999875002083307e-5, rel=1e-12)
    assert e12 <= budget < e13
    assert check_pmhf(Asil.D, [1e-6, 2e-6], T)
    assert not check_pmhf(Asil.D, [1e-6, 3e-6], T)


def test_single_ecu_never_meets_b():
    assert not check_pmhf(Asil.B, [8e-7], T)


def test_asil_a_passes_vacuously():
    assert check_pmhf(Asil.A, [3e-6], T)
    assert check_pmhf_linear(Asil.A, [3e-6], T)


@pytest.mark.parametrize("bad", [0.0, -1e-6])
def test_pof_rejects_non_positive(bad):
    with pytest.raises(ValueError):
        pof(bad, T)
    with pytest.raises(ValueError):
        pof(1e-6, bad)


def test_empty_host_list():
    with pytest.raises(ValueError):
        pof_decomposed([], T)


def test_linear_matches_product_on_table_subsets(case_study):
    rates = [e.failure_rate_per_hour for e in case_study.ecus]
    for asil in (Asil.B, Asil.C, Asil.D):
        for r in range(1, len(rates) + 1):
            for hosts in itertools.combinations(rates, r):
                assert check_pmhf(asil, hosts, T) == check_pmhf_linear(asil, hosts, T)


rates = st.floats(1e-9, 1e-4)


@given(st.lists(rates, min_size=1, max_size=4))
def test_log_coefficients_sum_to_log_product(rs):
    assert math.fsum(log_pof_coefficient(r, T) for r in rs) == pytest.approx(math.log(pof_decomposed(rs, T)), rel=1e-9)


@given(st.lists(rates, min_size=1, max_size=3), rates)
def test_extra_replica_never_raises_pof(rs, extra):
    assert pof_decomposed(rs + [extra], T) <= pof_decomposed(rs, T)


@given(rates, rates)
def test_pof_monotone_in_rate(a, b):
    lo, hi = sorted((a, b))
    assert pof(lo, T) <= pof(hi, T)
