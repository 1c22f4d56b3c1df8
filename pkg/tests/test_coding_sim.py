from __future__ import annotations

import math

import numpy as np
import pytest

from qunion.coding_sim import (
    CodingScenario,
    PremiseError,
    bob_marginal,
    check_premise,
    cq_rate_point,
    default_c,
    message_count,
    permute_subsystems,
    run_decoding_experiment,
    sequential_decode,
    sequential_decode_explicit,
    decoding_error_bound,
    witness_test,
)
from qunion.instances import random_channel, random_density, random_pure_state
from qunion.operators import (
    ValidationError,
    amplitude_damping_channel,
    apply_channel,
    completely_depolarizing_channel,
    depolarizing_channel,
    embed,
    identity_channel,
    max_entangled,
    pure_density,
    tensor,
)
from qunion.second_order import rate_penalty
from qunion.union_bound import sequential_success_prob

from oracles import bell_projector, dh_linprog, kron_all, swap_matrix

BELL = pure_density(max_entangled(2))
# (R1, B, R2) -> (R1, R2, B) on three qubits
P132 = kron_all(np.eye(2), swap_matrix(2, 2))


def _scenario(M, channel=None, resource=BELL, eps=0.5, eta=0.2, c=None):
    return CodingScenario(channel or identity_channel(2), resource, (2, 2), M, eps, eta, c)


def test_default_c():
    assert abs(default_c(0.5, 0.2) - 0.25) < 1e-15
    assert _scenario(2).c == default_c(0.5, 0.2)


def test_scenario_validation():
    with pytest.raises(ValidationError):
        _scenario(2, eps=0.2, eta=0.3)
    with pytest.raises(ValidationError):
        _scenario(0)
    with pytest.raises(ValidationError):
        CodingScenario(identity_channel(2), BELL, (2, 2), 12, 0.5, 0.2)  # 2^12 * 2 > 4096


def test_permute_subsystems_matches_swap():
    a, b = random_density(2, 2, 1), random_density(3, 2, 2)
    assert np.abs(permute_subsystems(tensor(a, b), [2, 3], [1, 0]) - tensor(b, a)).max() < 1e-12


def test_bob_marginal_single_message():
    ch = amplitude_damping_channel(0.3)
    sc = _scenario(1, ch)
    assert np.abs(bob_marginal(sc, 1) - apply_channel(ch, BELL, 1, [2, 2])).max() < 1e-12


def test_bob_marginal_bell_first_slot():
    sc = _scenario(2)
    expected = P132 @ np.kron(BELL, np.eye(2) / 2) @ P132.T
    assert np.abs(bob_marginal(sc, 1) - expected).max() < 1e-12
    assert np.abs(bob_marginal(sc, 2) - np.kron(np.eye(2) / 2, BELL)).max() < 1e-12


def test_bob_marginal_product_resource_independent_of_m():
    res = tensor(random_density(2, 2, 3), random_density(2, 2, 4))
    sc = _scenario(3, depolarizing_channel(2, 0.2), res)
    states = [bob_marginal(sc, m) for m in (1, 2, 3)]
    assert max(np.abs(s - states[0]).max() for s in states) < 1e-12


def test_single_message_error_is_type_one_error():
    sc = _scenario(1, depolarizing_channel(2, 0.2))
    lam = witness_test(sc).witness
    row = sequential_decode(sc, lam, 1)
    type1 = check_premise(sc, lam)
    assert abs(row.error - type1) < 1e-12 and type1 <= 0.3 + 1e-9


def test_identity_test_always_fires_first():
    sc = _scenario(3)
    for m in (1, 2, 3):
        row = sequential_decode(sc, np.eye(4), m)
        assert abs(row.outcomes[0] - 1) < 1e-12
        assert abs(row.error - (0.0 if m == 1 else 1.0)) < 1e-12


def test_bell_projector_two_messages():
    sc = _scenario(2)
    phi = bell_projector()
    lam1 = P132 @ np.kron(phi, np.eye(2)) @ P132.T  # on (R1, B)
    lam2 = np.kron(np.eye(2), phi)  # on (R2, B)
    omega2 = np.kron(np.eye(2) / 2, BELL)
    # projector test: success(2) = Tr{L2 (I - L1) w (I - L1) L2}
    q1 = np.eye(8) - lam1
    oracle = np.trace(lam2 @ q1 @ omega2 @ q1 @ lam2).real
    rows = [sequential_decode(sc, phi, m) for m in (1, 2)]
    assert abs(rows[0].success - 1) < 1e-12
    assert abs(rows[1].success - oracle) < 1e-12
    assert abs(rows[1].success - 0.5625) < 1e-12
    explicit = sequential_decode_explicit(sc, phi, 2)
    assert np.abs(explicit.outcomes - rows[1].outcomes).max() < 1e-12


def test_projector_test_reduces_to_product_of_projectors():
    sc = _scenario(3, depolarizing_channel(2, 0.1), eps=0.6, eta=0.3)
    phi = bell_projector()
    dims = sc.bob_dims
    slot = [embed(phi, dims, [i, 3]) for i in range(3)]
    for m in (1, 2, 3):
        omega = bob_marginal(sc, m)
        ps = [np.eye(16) - slot[i] for i in range(m - 1)] + [slot[m - 1]]
        assert abs(sequential_decode(sc, phi, m).success - sequential_success_prob(omega, ps)) < 1e-10


def test_outcomes_complete_and_match_explicit_probes():
    sc = _scenario(3, random_channel(2, 2, 3, 5), pure_density(random_pure_state(4, 6)), eps=0.7, eta=0.3)
    lam = witness_test(sc).witness
    for m in (1, 2, 3):
        row = sequential_decode(sc, lam, m)
        assert abs(row.outcomes.sum() - 1) < 1e-10
        assert row.outcomes.min() >= -1e-12
        assert np.abs(sequential_decode_explicit(sc, lam, m).outcomes - row.outcomes).max() < 1e-10


def test_premise_violation_rejected():
    sc = _scenario(2)
    with pytest.raises(PremiseError) as info:
        sequential_decode(sc, np.zeros((4, 4)), 1)
    assert info.value.slack < 0


def test_random_channel_three_messages_within_bound():
    sc = _scenario(3, random_channel(2, 2, 2, 17))
    res = run_decoding_experiment(sc)
    assert res.holds
    assert all(p <= res.analytic_bound + 1e-8 for p in res.per_message_error)
    assert all(p <= u + 1e-10 for p, u in zip(res.per_message_error, res.union_rhs))


def test_single_message_bound_formula():
    sc = _scenario(1, depolarizing_channel(2, 0.3))
    res = run_decoding_experiment(sc)
    c = 0.25
    assert abs(res.analytic_bound - ((1 + c) * 0.3 + (2 + c + 1 / c) * res.beta)) < 1e-12
    assert abs(res.beta - witness_test(sc).type2) < 1e-12


def test_message_count_rule_gives_bound_below_eps():
    eps, eta = 0.9, 0.85
    sc4 = CodingScenario(identity_channel(4), pure_density(max_entangled(4)), (4, 4), 1, eps, eta)
    info = witness_test(sc4).lower
    # maximally entangled ququarts: beta = (1 - 0.05) / 16
    assert abs(info - (4 - math.log2(0.95))) < 1e-9
    M = message_count(info, eps, eta)
    assert M == math.floor(2 ** (info - rate_penalty(eps, eta))) == 3
    sc = CodingScenario(identity_channel(4), pure_density(max_entangled(4)), (4, 4), M, eps, eta)
    res = run_decoding_experiment(sc)
    assert res.analytic_bound <= eps + 1e-12
    assert res.max_error <= eps


def test_decoding_bound_equals_eps_at_exact_message_count():
    # with c = eta / (2 eps - eta) and M beta = 2^{-penalty} the bound is exactly eps
    eps, eta = 0.4, 0.1
    c = default_c(eps, eta)
    m_beta = 2 ** -rate_penalty(eps, eta)
    assert abs(decoding_error_bound(eps, eta, c, 1, m_beta) - eps) < 1e-14


def test_cq_rate_orthogonal_outputs():
    rho_xa = np.diag([0.5, 0.0, 0.0, 0.5])
    cq = cq_rate_point(rho_xa, (2, 2), identity_channel(2), 0.5, 0.2)
    lam = np.array([0.5, 0.0, 0.0, 0.5])
    mu = np.full(4, 0.25)
    assert cq.method == "commuting"
    assert abs(cq.info_bits - dh_linprog(lam, mu, 0.3)) < 1e-9
    assert abs(cq.rate.rate_bits_per_use - (cq.info_bits - rate_penalty(0.5, 0.2))) < 1e-12


def test_cq_rate_single_symbol_has_no_information_beyond_trivial_test():
    # |X| = 1: zeta_XB is a product, and D_H^{e}(tau || tau) = -log2(1 - e)
    rho_a = random_density(2, 2, 8)
    cq = cq_rate_point(rho_a, (1, 2), depolarizing_channel(2, 0.3), 0.5, 0.2)
    assert abs(cq.info_bits + math.log2(0.7)) < 1e-9
    assert abs(cq.rate.rate_bits_per_use - (-math.log2(0.7) - rate_penalty(0.5, 0.2))) < 1e-9


def test_cq_rate_completely_depolarizing():
    rho_xa = np.diag([0.5, 0.0, 0.0, 0.5])
    cq = cq_rate_point(rho_xa, (2, 2), completely_depolarizing_channel(2), 0.5, 0.2)
    assert abs(cq.info_bits + math.log2(0.7)) < 1e-9
    assert cq.rate.rate_bits_per_use < 0


def test_cq_rate_noncommuting_blocks_use_bracket():
    plus = np.full((2, 2), 0.5)
    rho_xa = 0.5 * np.kron(np.diag([1.0, 0.0]), np.diag([1.0, 0.0])) + 0.5 * np.kron(np.diag([0.0, 1.0]), plus)
    cq = cq_rate_point(rho_xa, (2, 2), identity_channel(2), 0.5, 0.2)
    assert cq.method == "bracket" and cq.info_bits <= cq.upper_bits + 1e-9


def test_cq_rate_rejects_coherent_input():
    with pytest.raises(ValidationError):
        cq_rate_point(BELL, (2, 2), identity_channel(2), 0.5, 0.2)
