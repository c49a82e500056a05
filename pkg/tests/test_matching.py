import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csimatch import (
    Matching,
    PreferenceTable,
    QuotaConfig,
    SharingSet,
    SystemConfig,
    beta_bounds,
    draw_channels,
    brute_force_stable_matchings,
    choose,
    compute_quota,
    is_stable,
    matching_to_sharing_set,
    phi_rx,
    phi_tx,
    preference_table,
    run_deferred_acceptance,
    target_prelog,
)
from csimatch.matching import (
    DegenerateChannelError,
    InvalidMatchingError,
    QuotaRangeError,
    SizeLimitError,
    UnsupportedConfigurationError,
    alpha,
)
from csimatch.network import ChannelSet, NetworkInstance

from oracles import best_subset, phi_rx_naive, stable_by_definition

PAPER = SystemConfig(K=25, M=5, N=5, d=2, T=10_000)


def random_prefs(rng, K, reserve_direct=True):
    return PreferenceTable(rng.random((K, K)), rng.random((K, K)), reserve_direct=reserve_direct)


def _instance(gamma):
    gamma = np.asarray(gamma, dtype=float)
    K = gamma.shape[0]
    return NetworkInstance(np.zeros((K, 2)), np.zeros((K, 2)), gamma ** (-1 / 3), gamma)


# -- utilities ---------------------------------------------------------------


def test_phi_of_empty_counterpart_is_zero(small_net):
    cfg, inst, ch = small_net
    assert phi_rx(None, 0, ch, inst) == 0.0
    assert phi_tx(0, None, ch, inst, cfg) == 0.0


def test_phi_rx_identity_direct_channel():
    N = 3
    ch = ChannelSet([[np.eye(N)]])
    for g in (1e-6, 1.0, 7.0):
        assert phi_rx(0, 0, ch, _instance([[g]])) == pytest.approx(1 / math.sqrt(N), rel=1e-14)


def test_phi_rx_matches_scalar_loop():
    rng = np.random.default_rng(9)
    cfg3 = SystemConfig(K=3, M=3, N=3, d=1)
    ch3 = draw_channels(cfg3, rng)
    gamma = rng.uniform(1e-7, 1e-5, (3, 3))
    inst3 = _instance(gamma)
    for j in range(3):
        for k in range(3):
            assert phi_rx(j, k, ch3, inst3) == pytest.approx(
                phi_rx_naive(ch3.H, gamma, j, k), abs=1e-12, rel=1e-12
            )


def test_phi_rx_degenerate_direct_channel():
    ch = ChannelSet([[np.zeros((2, 2))]])
    with pytest.raises(DegenerateChannelError):
        phi_rx(0, 0, ch, _instance([[1.0]]))


def test_phi_tx_normalisation_and_linearity():
    M, N = 3, 2
    h = np.ones((N, M)) * (1 + 0j)  # ||h||_F^2 = M N
    ch = ChannelSet([[h]])
    inst = _instance([[1.0]])
    cfg = SystemConfig(K=1, M=M, N=N, d=1, P=1.0)
    assert phi_tx(0, 0, ch, inst, cfg) == pytest.approx(1.0)
    cfg2 = SystemConfig(K=1, M=M, N=N, d=1, P=2.0)
    assert phi_tx(0, 0, ch, inst, cfg2) == pytest.approx(2 * phi_tx(0, 0, ch, inst, cfg))


def test_phi_tx_uses_receiver_antenna_count():
    cfg = SystemConfig(K=2, M=3, N=(1, 3), d=1)
    h = np.ones((3, 3), dtype=complex)
    ch = ChannelSet([[np.ones((1, 3)), h], [np.ones((1, 3)), h]])
    inst = _instance(np.ones((2, 2)))
    assert phi_tx(0, 1, ch, inst, cfg) == pytest.approx(9 / 9)
    assert phi_tx(0, 0, ch, inst, cfg) == pytest.approx(3 / 3)


def test_preference_table_layout(small_net):
    cfg, inst, ch = small_net
    prefs = preference_table(ch, inst, cfg)
    assert prefs.phi_rx[2, 1] == phi_rx(1, 2, ch, inst)
    assert prefs.phi_tx[1, 2] == phi_tx(1, 2, ch, inst, cfg)


def test_preference_table_rejects_negative():
    with pytest.raises(ValueError):
        PreferenceTable(-np.ones((2, 2)), np.ones((2, 2)))
    with pytest.raises(ValueError):
        PreferenceTable(np.full((2, 2), np.nan), np.ones((2, 2)))


# -- choice ------------------------------------------------------------------


def test_choose_top_q():
    assert choose([(1, 0.9), (2, 0.5), (3, 0.7)], 2) == {1, 3}
    assert choose([(1, 0.9), (2, 0.5)], 0) == set()
    assert choose([(1, 0.9)], 5) == {1}


def test_choose_ties_go_to_lower_index():
    assert choose([(4, 1.0), (2, 1.0), (3, 1.0)], 2) == {2, 3}


def test_choose_matches_subset_enumeration():
    rng = np.random.default_rng(0)
    for _ in range(200):
        vals = dict(enumerate(rng.random(6)))
        assert choose(vals.items(), 3) == best_subset(vals, 3)


@settings(max_examples=100, deadline=None)
@given(
    vals=st.lists(st.floats(0, 1e6, allow_nan=False), min_size=1, max_size=8),
    q=st.integers(0, 8),
    c=st.floats(1e-3, 1e3),
)
def test_choice_is_scale_invariant(vals, q, c):
    items = list(enumerate(vals))
    scaled = [(i, v * c) for i, v in items]
    # rescaling can merge near-equal floats into exact ties; compare only when order is strict
    if len(set(vals)) == len(vals) and len({v for _, v in scaled}) == len(vals):
        assert choose(items, q) == choose(scaled, q)
    assert len(choose(items, q)) == min(q, len(vals))


# -- quotas ------------------------------------------------------------------


def test_beta_bounds_paper_constants():
    assert beta_bounds(PAPER) == (0.9575, 0.6575)


def test_beta_bounds_single_pair_floor():
    assert beta_bounds(SystemConfig(K=1, M=1, N=1, d=1, T=4))[0] == 0.0


def test_beta_bounds_vanish_with_long_blocks():
    hi, lo = beta_bounds(SystemConfig(K=25, M=5, N=5, d=2, T=10**15))
    assert hi == pytest.approx(1.0, abs=1e-11) and lo == pytest.approx(1.0, abs=1e-11)


def test_beta_bounds_need_symmetry():
    with pytest.raises(UnsupportedConfigurationError):
        beta_bounds(SystemConfig(K=2, M=(3, 4), N=2, d=1))


@pytest.mark.parametrize("beta_hat, q", [(0.9575, 1), (0.6575, 25), (0.8075, 13)])
def test_compute_quota_paper_constants(beta_hat, q):
    assert compute_quota(PAPER, beta_hat) == q


def test_compute_quota_range():
    with pytest.raises(QuotaRangeError):
        compute_quota(PAPER, 0.99)
    with pytest.raises(QuotaRangeError):
        compute_quota(PAPER, 0.5)


def test_compute_quota_never_exceeds_budget():
    rng = np.random.default_rng(3)
    K, M, N, d, T = 25, 5, 5, 2, 10_000
    for b in rng.uniform(0.6575, 0.9575, 500):
        q = compute_quota(PAPER, b)
        assert 1 <= q <= K
        if q > 1:
            assert K * (M + N + d) + q * K * M <= T * (1 - b) + 1e-6
        # one more slot would overshoot the budget (unless already at K)
        if q < K:
            assert K * (M + N + d) + (q + 1) * K * M > T * (1 - b) - 1e-6


def test_alpha_and_target_prelog():
    hi, lo = beta_bounds(PAPER)
    assert alpha(0.0) == 0.0
    assert target_prelog(PAPER, 0.0) == hi
    a_inf = math.log(2)
    assert target_prelog(PAPER, 1e15) == pytest.approx(a_inf * lo + (1 - a_inf) * hi, abs=1e-12)
    assert alpha(math.inf, base=2) == 1.0
    prev = hi
    for snr in np.logspace(-3, 6, 40):
        b = target_prelog(PAPER, snr)
        assert lo <= b <= hi
        assert b <= prev + 1e-15
        prev = b


# -- matching types ----------------------------------------------------------


def test_matching_from_pairs_is_symmetric():
    m = Matching.from_pairs([(0, 1), (1, 1)], 2)
    assert m.of_tx == (frozenset({1}), frozenset({1}))
    assert m.of_rx == (frozenset(), frozenset({0, 1}))
    assert m.is_symmetric()


def test_asymmetric_matching_is_rejected():
    bad = Matching((frozenset({1}), frozenset()), (frozenset(), frozenset()))
    prefs = random_prefs(np.random.default_rng(0), 2)
    with pytest.raises(InvalidMatchingError):
        is_stable(bad, prefs, QuotaConfig.uniform(2, 1))


def test_quota_config_range():
    with pytest.raises(QuotaRangeError):
        QuotaConfig.uniform(3, 0)
    with pytest.raises(QuotaRangeError):
        QuotaConfig.uniform(3, 4)


def test_sharing_set_requires_direct_links():
    with pytest.raises(ValueError):
        SharingSet(frozenset({(0, 0)}), 2)


def test_matching_to_sharing_set():
    assert matching_to_sharing_set(Matching.empty(2)).pairs == {(0, 0), (1, 1)}
    full = Matching.from_pairs([(j, k) for j in range(2) for k in range(2)], 2)
    assert matching_to_sharing_set(full).pairs == SharingSet.full(2).pairs
    one = matching_to_sharing_set(Matching.from_pairs([(0, 1)], 2))
    assert one.pairs == {(0, 0), (1, 1), (0, 1)}


# -- deferred acceptance -----------------------------------------------------


def test_single_pair():
    prefs = PreferenceTable([[0.3]], [[0.2]])
    trace = []
    m, L_SM = run_deferred_acceptance(prefs, QuotaConfig.uniform(1, 1), trace=trace)
    assert m.pairs() == {(0, 0)}
    assert len(trace) <= 1


def test_single_pair_without_reservation():
    prefs = PreferenceTable([[0.3]], [[0.2]], reserve_direct=False)
    trace = []
    m, L_SM = run_deferred_acceptance(prefs, QuotaConfig.uniform(1, 1), trace=trace)
    assert m.pairs() == {(0, 0)}
    assert len(trace) == 1
    assert L_SM == 2  # one application, one answer


@pytest.mark.parametrize("reserve", [True, False])
def test_no_scarcity_gives_complete_matching(reserve):
    rng = np.random.default_rng(1)
    K = 4
    m, _ = run_deferred_acceptance(random_prefs(rng, K, reserve), QuotaConfig.uniform(K, K))
    assert m.pairs() == {(j, k) for j in range(K) for k in range(K)}


def test_unit_quota_with_reserved_direct_links_needs_no_messages():
    prefs = random_prefs(np.random.default_rng(2), 5)
    m, L_SM = run_deferred_acceptance(prefs, QuotaConfig.uniform(5, 1))
    assert m.pairs() == {(k, k) for k in range(5)}
    assert L_SM == 0


def test_hand_worked_two_pair_instance():
    # rx0 likes tx1, tx1 likes rx0 -> with q=2 they match on top of direct links
    prefs = PreferenceTable([[0.0, 0.9], [0.1, 0.0]], [[0.0, 0.1], [0.8, 0.0]])
    m, L_SM = run_deferred_acceptance(prefs, QuotaConfig.uniform(2, 2))
    assert m.pairs() == {(0, 0), (1, 1), (1, 0), (0, 1)}
    # round 1: both receivers apply, both transmitters answer
    assert L_SM == 4


def test_lsm_counts_only_active_nodes():
    # q_rx=2: rx0 and rx1 both want tx2 as second partner; tx2 keeps one of them
    K = 3
    phi_rx = np.array([[0, 0.1, 0.9], [0.1, 0, 0.9], [0.5, 0.5, 0]])
    phi_tx = np.array([[0, 0.3, 0.3], [0.3, 0, 0.3], [0.2, 0.8, 0]])
    quotas = QuotaConfig((2, 2, 1), (2, 2, 2))
    trace = []
    m, L_SM = run_deferred_acceptance(PreferenceTable(phi_rx, phi_tx), quotas, trace=trace)
    # round 1: rx0 -> tx2, rx1 -> tx2 (2 senders), tx2 answers (1) -> rejects rx0
    # round 2: rx0 -> tx1 (1 sender), tx1 answers (1)
    assert L_SM == 5
    assert len(trace) == 2
    assert m.pairs() == {(0, 0), (1, 1), (2, 2), (2, 1), (1, 0)}
    assert is_stable(m, PreferenceTable(phi_rx, phi_tx), quotas)


@pytest.mark.parametrize("reserve", [True, False])
def test_da_output_is_stable_and_in_brute_force_set(reserve):
    rng = np.random.default_rng(17)
    for K in (2, 3):
        for q in range(1, K + 1):
            for _ in range(40):
                prefs = random_prefs(rng, K, reserve)
                quotas = QuotaConfig.uniform(K, q)
                m, _ = run_deferred_acceptance(prefs, quotas)
                assert is_stable(m, prefs, quotas)
                assert m in brute_force_stable_matchings(prefs, quotas)


@pytest.mark.parametrize("reserve", [True, False])
def test_is_stable_agrees_with_definition_oracle(reserve):
    rng = np.random.default_rng(23)
    K = 3
    pairs = [(j, k) for j in range(K) for k in range(K)]
    for _ in range(60):
        prefs = random_prefs(rng, K, reserve)
        quotas = QuotaConfig(tuple(rng.integers(1, K + 1, K)), tuple(rng.integers(1, K + 1, K)))
        for _ in range(10):
            chosen = [p for p in pairs if rng.random() < 0.5]
            m = Matching.from_pairs(chosen, K)
            expect = stable_by_definition(
                m.of_tx, m.of_rx, prefs.phi_rx, prefs.phi_tx, quotas.q_rx, quotas.q_tx, reserve
            )
            assert is_stable(m, prefs, quotas) == expect


def test_empty_matching_is_blocked():
    prefs = random_prefs(np.random.default_rng(4), 3, reserve_direct=False)
    assert not is_stable(Matching.empty(3), prefs, QuotaConfig.uniform(3, 1))


def test_two_pair_crossed_matching_is_blocked():
    # each receiver paired with the transmitter it values less
    phi_rx = np.array([[0.9, 0.2], [0.3, 0.8]])
    phi_tx = np.array([[0.7, 0.1], [0.2, 0.6]])
    crossed = Matching.from_pairs([(1, 0), (0, 1)], 2)
    for reserve in (True, False):
        prefs = PreferenceTable(phi_rx, phi_tx, reserve_direct=reserve)
        assert not is_stable(crossed, prefs, QuotaConfig.uniform(2, 1))
        # (tx0, rx0) is the blocking pair
        assert stable_by_definition(crossed.of_tx, crossed.of_rx, phi_rx, phi_tx, (1, 1), (1, 1), reserve) is False


def test_over_quota_matching_is_not_individually_rational():
    prefs = random_prefs(np.random.default_rng(5), 2)
    full = Matching.from_pairs([(j, k) for j in range(2) for k in range(2)], 2)
    assert not is_stable(full, prefs, QuotaConfig.uniform(2, 1))


def test_brute_force_examples():
    prefs = PreferenceTable([[0.4]], [[0.6]], reserve_direct=False)
    assert brute_force_stable_matchings(prefs, QuotaConfig.uniform(1, 1)) == {
        Matching.from_pairs([(0, 0)], 1)
    }
    prefs2 = random_prefs(np.random.default_rng(6), 2, reserve_direct=False)
    full = Matching.from_pairs([(j, k) for j in range(2) for k in range(2)], 2)
    assert full in brute_force_stable_matchings(prefs2, QuotaConfig.uniform(2, 2))


def test_brute_force_size_limit():
    with pytest.raises(SizeLimitError):
        brute_force_stable_matchings(random_prefs(np.random.default_rng(0), 5), QuotaConfig.uniform(5, 1))


def test_stable_matching_always_exists_small():
    rng = np.random.default_rng(8)
    for K in (1, 2, 3):
        for _ in range(30):
            quotas = QuotaConfig(tuple(rng.integers(1, K + 1, K)), tuple(rng.integers(1, K + 1, K)))
            for reserve in (True, False):
                assert brute_force_stable_matchings(random_prefs(rng, K, reserve), quotas)


@settings(max_examples=80, deadline=None)
@given(K=st.integers(2, 6), seed=st.integers(0, 2**32 - 1), data=st.data())
def test_da_invariants(K, seed, data):
    rng = np.random.default_rng(seed)
    reserve = data.draw(st.booleans())
    prefs = random_prefs(rng, K, reserve)
    quotas = QuotaConfig(
        tuple(data.draw(st.lists(st.integers(1, K), min_size=K, max_size=K))),
        tuple(data.draw(st.lists(st.integers(1, K), min_size=K, max_size=K))),
    )
    trace = []
    m, L_SM = run_deferred_acceptance(prefs, quotas, trace=trace)
    assert is_stable(m, prefs, quotas)
    # each receiver applies at most once to each transmitter
    assert sum(t["applications"] for t in trace) <= K * K
    for t in trace:
        snap = t["matching"]
        assert snap.is_symmetric()
        assert all(len(s) <= q for s, q in zip(snap.of_tx, quotas.q_tx))
        assert all(len(s) <= q for s, q in zip(snap.of_rx, quotas.q_rx))
    # at most one message per node per round
    assert L_SM <= 2 * K * len(trace)
    if reserve:
        assert all((k, k) in m.pairs() for k in range(K))


def test_scaling_one_agents_values_keeps_matching():
    rng = np.random.default_rng(12)
    K = 4
    for _ in range(30):
        prefs = random_prefs(rng, K)
        quotas = QuotaConfig.uniform(K, 2)
        m, L = run_deferred_acceptance(prefs, quotas)
        phi_rx = prefs.phi_rx.copy()
        phi_rx[1] *= 37.0
        phi_tx = prefs.phi_tx.copy()
        phi_tx[2] *= 1e-3
        m2, L2 = run_deferred_acceptance(PreferenceTable(phi_rx, phi_tx), quotas)
        assert (m, L) == (m2, L2)


def test_saturation_can_fail_in_a_stable_matching():
    """Uniform quotas do not force every node to fill its quota.

    Found by search with K=3, q=2: every node has its direct link, but one
    receiver and one transmitter end with a single partner, and the pair between
    them is not blocking because they are already matched.
    """
    rng = np.random.default_rng(0)
    K, q = 3, 2
    quotas = QuotaConfig.uniform(K, q)
    for _ in range(200):
        prefs = random_prefs(rng, K)
        m, _ = run_deferred_acceptance(prefs, quotas)
        if any(len(s) != q for s in m.of_tx + m.of_rx):
            break
    else:
        pytest.fail("no unsaturated outcome found")
    assert m in brute_force_stable_matchings(prefs, quotas)
    assert stable_by_definition(m.of_tx, m.of_rx, prefs.phi_rx, prefs.phi_tx, quotas.q_rx, quotas.q_tx)
    assert len(m.pairs()) < q * K
