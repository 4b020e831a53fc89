import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardydil.classify import (
    apriori_bound,
    boundedness_scan,
    equiv_norm_decision,
    hardy_equal_decision,
    is_positive_multiple,
    random_multiple_pair,
    random_perturbed_pair,
)
from hardydil.dilations import check_admissible, random_admissible
from hardydil.errors import NotAdmissible
from hardydil.lie import abelian, heisenberg


def test_same_matrix_is_equivalent(H):
    A = np.diag([1.0, 1.0, 2.0])
    rep = equiv_norm_decision(A, A, H)
    assert rep.verdict == "both" and rep.norm_residual == 0.0


def test_scalar_multiple_is_equal_hardy_but_not_equivalent(R2):
    rep = equiv_norm_decision(2 * np.eye(2), np.eye(2), R2)
    assert rep.verdict == "equal-hardy"
    assert rep.trace_A == 4 and rep.trace_B == 2
    assert hardy_equal_decision(2 * np.eye(2), np.eye(2), R2).verdict == "equal-hardy"


def test_ratio_sup_grows_with_range(diverge_pair):
    A, B = diverge_pair
    small = equiv_norm_decision(A, B, S=2).log_ratio_sup_estimate
    large = equiv_norm_decision(A, B, S=8).log_ratio_sup_estimate
    assert large > small + 5


def test_c_star_for_multiple(R2):
    A = check_admissible(np.diag([1.0, 2.0]), R2)
    rep = hardy_equal_decision(A.scaled(3.0), A)
    assert rep.verdict == "equal-hardy" and rep.c_star == pytest.approx(3.0)


def test_control_profile_is_bounded_by_one(control_pair):
    A, B = control_pair
    rep = hardy_equal_decision(A, B, J=32)
    assert rep.verdict == "equal-hardy"
    assert max(rep.growth_profile) == pytest.approx(1.0)
    assert rep.growth_bounded and not rep.alarm


def test_diverging_profile_closed_form(diverge_pair):
    A, B = diverge_pair
    js, logs = boundedness_scan(A, B, 16)
    assert logs[js.index(10)] == pytest.approx(10.0, abs=1e-12)
    rep = hardy_equal_decision(A, B, J=16)
    assert rep.verdict == "neither" and rep.alarm
    assert max(rep.log_growth_profile) == pytest.approx(16.0, abs=1e-12)
    assert rep.d_sequence == list(range(1, 17))


def test_identity_pair_profile_within_apriori_bound(R2):
    A = check_admissible(np.diag([1.0, 2.0]), R2)
    rep = hardy_equal_decision(A, A, J=20)
    assert all(v <= rep.apriori_bound * (1 + 1e-12) for v in rep.growth_profile)


def test_apriori_bound_closed_form(R2):
    A = check_admissible(np.diag([1.0, 2.0]), R2)
    assert apriori_bound(A, 1.0) == pytest.approx(1.0)
    # twisted A: the max over r in [-1, 0] is interior or at an end; bracket by dense sampling
    H = heisenberg()
    rng = np.random.default_rng(4)
    T = random_admissible(H, rng)
    dense = max(np.linalg.norm(T.exp_times(r), 2) for r in np.linspace(-0.5, 0, 5001))
    assert apriori_bound(T, 2.0) >= dense * (1 - 1e-12)


def test_non_admissible_input_is_rejected(H):
    with pytest.raises(NotAdmissible):
        hardy_equal_decision(np.diag([1.0, 2.0, 2.0]), np.diag([1.0, 1.0, 2.0]), H)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_multiples_recover_c(seed):
    rng = np.random.default_rng(seed)
    A, cA, c = random_multiple_pair(heisenberg(), rng)
    rep = hardy_equal_decision(cA, A, J=8, d_window=0)
    assert rep.verdict in {"equal-hardy", "both"}
    assert rep.c_star == pytest.approx(c, rel=1e-9)
    assert is_positive_multiple(cA, A)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_perturbed_pairs_are_separated(seed):
    rng = np.random.default_rng(seed)
    A, B = random_perturbed_pair(abelian(3), rng)
    assert not is_positive_multiple(A, B)
    assert hardy_equal_decision(A, B, J=8, d_window=0).verdict == "neither"


def test_report_json_handles_inf(diverge_pair):
    A, B = diverge_pair
    d = hardy_equal_decision(A, B, J=4).to_json()
    assert all(not (isinstance(v, float) and math.isinf(v)) for v in d.values())
