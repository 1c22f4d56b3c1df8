from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qunion.instances import random_density, random_projector, random_pure_state
from qunion.operators import ValidationError, ket, pure_density
from qunion.union_bound import (
    check_lemma_identities,
    gao_rhs,
    optimal_c,
    sequential_bound_rhs,
    sen_rhs,
    sequential_success_prob,
    verify_union_bound,
)

A3 = (0.01, 0.02, 0.03)
# c* and the minimum from a grid search over c in (0, 10] with step 1e-5
GRID_C_STAR = 0.77460
GRID_RHS_MIN = 0.16745966692414835


def _grid_minimum(a, step=1e-5):
    cs = np.arange(step, 10 + step / 2, step)
    first, mid, last = a[0], sum(a[1:-1]), a[-1]
    vals = (1 + cs) * last + (2 + cs + 1 / cs) * mid + (2 + 1 / cs) * first
    k = int(np.argmin(vals))
    return cs[k], vals[k]


def test_sequential_plus_then_zero_is_quarter():
    plus = np.array([1, 1]) / math.sqrt(2)
    p1 = np.outer(plus, plus)
    p2 = np.diag([1.0, 0.0])
    assert abs(sequential_success_prob(ket(0, 2), [p1, p2]) - 0.25) < 1e-12
    assert abs(sequential_success_prob(pure_density(ket(0, 2)), [p1, p2]) - 0.25) < 1e-12


def test_sequential_identity_and_repeated_projector():
    rho = random_density(4, 2, 1)
    assert abs(sequential_success_prob(rho, [np.eye(4)] * 3) - 1) < 1e-12
    p = np.diag([1.0, 1.0, 0.0, 0.0])
    rho_c = np.diag([0.1, 0.2, 0.3, 0.4])
    assert abs(sequential_success_prob(rho_c, [p, p, p]) - 0.3) < 1e-12


def test_rhs_coefficient_examples():
    assert abs(sequential_bound_rhs(A3, 1.0) - 0.17) < 1e-12
    assert abs(sequential_bound_rhs(A3, 0.5) - 0.175) < 1e-12
    assert sequential_bound_rhs((0.0, 0.0, 0.0, 0.0), 3.0) == 0.0


def test_rhs_two_terms_has_no_middle():
    assert abs(sequential_bound_rhs((0.1, 0.2), 1.0) - (2 * 0.2 + 3 * 0.1)) < 1e-12


def test_optimal_c_matches_grid_search():
    opt = optimal_c(A3)
    assert opt.branch == "interior"
    assert abs(opt.c_star - math.sqrt(0.03 / 0.05)) < 1e-12
    assert abs(opt.c_star - GRID_C_STAR) < 1e-5
    assert abs(opt.rhs_min - GRID_RHS_MIN) < 1e-9
    c_grid, v_grid = _grid_minimum(A3)
    assert abs(opt.c_star - c_grid) < 1e-5 and opt.rhs_min <= v_grid + 1e-15


def test_optimal_c_uniform_and_zero():
    assert abs(optimal_c((0.2,) * 5).c_star - 1.0) < 1e-12
    z = optimal_c((0.0, 0.0, 0.0))
    assert z.rhs_min == 0.0


def test_optimal_c_boundary_branches():
    only_last = optimal_c((0.0, 0.0, 0.3))
    assert only_last.branch == "c->0" and only_last.c_star is None
    assert abs(only_last.rhs_min - 0.3) < 1e-15
    only_first = optimal_c((0.3, 0.0, 0.0))
    assert only_first.branch == "c->inf"
    assert abs(only_first.rhs_min - 0.6) < 1e-15


def test_previous_bounds():
    assert abs(gao_rhs(A3) - 0.24) < 1e-12
    assert abs(sen_rhs(A3) - 2 * math.sqrt(0.06)) < 1e-12
    assert abs(sen_rhs(A3) - 0.4898979485566356) < 1e-12
    assert gao_rhs((0.0,)) == 0 and sen_rhs((0.0,)) == 0
    assert abs(gao_rhs((0.5, 0.5)) - 4) < 1e-12 and abs(sen_rhs((0.5, 0.5)) - 2) < 1e-12


def test_rhs_rejects_nonpositive_c():
    with pytest.raises(ValidationError):
        sequential_bound_rhs(A3, 0.0)


def test_classical_commuting_events():
    rho = np.diag([0.4, 0.3, 0.2, 0.1])
    ps = [np.diag([1.0, 1, 1, 0]), np.diag([1.0, 1, 0, 1]), np.diag([1.0, 0, 1, 1])]
    rep = verify_union_bound(rho, ps, 0.3)
    assert rep.lhs <= sum(rep.a) + 1e-12 <= rep.rhs_ours + 1e-12


def test_random_mixed_d8_l4_orders_bounds():
    rho = random_density(8, 5, 42)
    ps = [random_projector(8, 5, 100 + i) for i in range(4)]
    rep = verify_union_bound(rho, ps, 1.0)
    assert rep.holds
    assert rep.lhs <= rep.rhs_ours <= rep.rhs_gao


def test_fixed_state_gives_zero_both_sides():
    psi = random_pure_state(3, 5)
    p = np.outer(psi, psi.conj())
    rep = verify_union_bound(pure_density(psi), [p, p, p], 2.0)
    assert abs(rep.lhs) < 1e-12 and abs(rep.rhs_ours) < 1e-12


def test_single_projector_rejected_by_bound():
    with pytest.raises(ValidationError):
        verify_union_bound(ket(0, 2), [np.eye(2)], 1.0)


def test_lemma_identities_trivial_projectors():
    r = check_lemma_identities(random_pure_state(4, 3), [np.eye(4)] * 3)
    assert max(r.left_telescope, r.right_telescope, r.sandwich_telescope) < 1e-12
    assert r.cauchy_schwarz_slack >= -1e-12 and r.deviation_slack >= -1e-12


def test_lemma_identities_random_d4_l3():
    psi = random_pure_state(4, 9)
    ps = [random_projector(4, 2, 30 + i) for i in range(3)]
    r = check_lemma_identities(psi, ps)
    assert max(r.left_telescope, r.right_telescope, r.sandwich_telescope) <= 1e-10
    assert min(r.cauchy_schwarz_slack, r.deviation_slack, r.pure_bound_slack) >= -1e-10


def test_lemma_identity_orthogonal_pair():
    # psi in range(P1), P1 orthogonal to P2: <Q2 P1> = 1 and 1 - <P2 P1> = 1
    p1 = np.diag([1.0, 0.0])
    p2 = np.diag([0.0, 1.0])
    r = check_lemma_identities(ket(0, 2), [p1, p2])
    assert r.left_telescope < 1e-15
    assert abs(sequential_success_prob(ket(0, 2), [p1, p2])) < 1e-15


@settings(max_examples=60, deadline=None)
@given(
    seed=st.integers(0, 10**6),
    d=st.sampled_from([2, 3, 5]),
    L=st.integers(2, 5),
    c=st.floats(1e-3, 1e3),
    mixed=st.booleans(),
)
def test_union_bound_property(seed, d, L, c, mixed):
    state = random_density(d, d, seed) if mixed else random_pure_state(d, seed)
    ps = [random_projector(d, 1 + (seed + i) % d, seed + 7 * i + 1) for i in range(L)]
    rep = verify_union_bound(state, ps, c)
    assert rep.holds
    assert rep.rhs_min <= rep.rhs_ours + 1e-12
    one = verify_union_bound(state, ps, 1.0)
    assert one.rhs_ours <= one.rhs_gao + 1e-12


@settings(max_examples=60, deadline=None)
@given(a=st.lists(st.floats(0, 1), min_size=2, max_size=8), c=st.floats(1e-3, 1e3))
def test_optimal_c_is_minimal(a, c):
    opt = optimal_c(a)
    assert opt.rhs_min <= sequential_bound_rhs(a, c) + 1e-12 * (1 + sequential_bound_rhs(a, c))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), c=st.floats(0.01, 10))
def test_bound_holds_with_identity_projectors(seed, c):
    rho = random_density(4, 2, seed)
    ps = [np.eye(4), random_projector(4, 2, seed + 1), np.eye(4), random_projector(4, 3, seed + 2)]
    assert verify_union_bound(rho, ps, c).holds


def test_identity_ends_cannot_beat_gao():
    # a_1 = a_L = 0 leaves (2 + c + 1/c) * sum(a) >= 4 * sum(a) for every c
    a = [0.0, 0.05, 0.02, 0.0]
    for c in (0.01, 0.1, 1.0, 10.0, 1.0 + 1e-9):
        assert sequential_bound_rhs(a, c) >= gao_rhs(a) - 1e-15
