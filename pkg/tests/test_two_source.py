import math
import random

import pytest

import lossnet as ln
from lossnet.errors import InvalidInputError, UndefinedThresholdError
from lossnet.two_source import TwoSourceState, cross_check_state


def rand_two_source(rng, n_max=15):
    n1 = rng.randint(1, n_max)
    n2 = rng.randint(1, n1)
    q = rng.choice([0.0, 1.0, rng.random(), rng.random(), rng.random()])
    mu = rng.choice([0.5, 1.0, 3.0, 10.0])
    return ln.Instance((n1, n2), 1.0, mu, q)


def test_threshold_values():
    inst = ln.Instance((3, 2), 1.0, 1.0, 0.5)
    assert ln.t1(inst, 2) == pytest.approx(4.5, abs=1e-12)
    assert ln.t2(inst, 3) == pytest.approx(5.0, abs=1e-12)
    big = ln.Instance((100, 1), 1.0, 1.0, 0.1)
    assert ln.t1(big, 1) == pytest.approx(92.0 / 1.8, rel=1e-12)


def test_threshold_q0_symmetric_counts():
    inst = ln.Instance((6, 6), 1.0, 1.0, 0.0)
    for u2 in range(7):
        assert ln.t1(inst, u2) == pytest.approx(u2 + 0.5, abs=1e-12)
    # with equal counts the two thresholds are the same function
    for u in range(7):
        assert ln.t1(inst, u) == pytest.approx(ln.t2(inst, u), abs=1e-12)


def test_threshold_undefined_at_q1():
    inst = ln.Instance((3, 2), 1.0, 1.0, 1.0)
    with pytest.raises(UndefinedThresholdError):
        ln.t1(inst, 0)
    with pytest.raises(UndefinedThresholdError):
        ln.t2(inst, 0)


def test_threshold_requires_sorted_counts():
    inst = ln.Instance((2, 5), 1.0, 1.0, 0.5)
    with pytest.raises(InvalidInputError):
        ln.t1(inst, 0)


def test_all_direct_region_condition_matches_threshold_at_boundary():
    # u1 <= t1(n2) evaluated at u1 = n1 is algebraically the same test as
    # n1 qbar <= q mu / phi + n2 + qbar.
    rng = random.Random(51)
    for _ in range(100):
        n1 = rng.randint(1, 30)
        n2 = rng.randint(1, n1)
        q = rng.uniform(0.0, 0.999)
        mu = rng.uniform(0.1, 20.0)
        inst = ln.Instance((n1, n2), 1.0, mu, q)
        lhs = n1 <= ln.t1(inst, n2) + 1e-12
        rhs = n1 * inst.qbar <= q * mu / inst.phi + n2 + inst.qbar + 1e-12
        assert lhs == rhs


def test_classify_frozen_examples():
    inst = ln.Instance((3, 2), 1.0, 1.0, 0.5)
    v = ln.classify(inst, TwoSourceState(3, 2))
    assert v.case_id == "4" and v.is_ne
    v = ln.classify(inst, TwoSourceState(3, 1))
    assert v.case_id == "1a" and not v.is_ne
    v = ln.classify(inst, TwoSourceState(0, 2))
    assert v.case_id == "1b" and not v.is_ne


def test_case_partition_exhaustive_and_exclusive():
    inst = ln.Instance((4, 3), 1.0, 1.0, 0.3)
    n1, n2 = inst.user_counts
    seen = {}
    for u1 in range(n1 + 1):
        for u2 in range(n2 + 1):
            case = ln.classify(inst, TwoSourceState(u1, u2)).case_id
            seen[(u1, u2)] = case
            if u1 == n1 and u2 == n2:
                assert case == "4"
            elif u1 == n1:
                assert case == "1a"
            elif u1 == 0 and u2 > 0:
                assert case == "1b"
            elif u2 == n2 and u1 > 0:
                assert case == "3"
            else:
                assert case == "2"
    assert len(seen) == (n1 + 1) * (n2 + 1)


def test_classify_agrees_with_general_checkers_on_grids():
    rng = random.Random(53)
    for _ in range(15):
        inst = rand_two_source(rng, n_max=9)
        n1, n2 = inst.user_counts
        for u1 in range(n1 + 1):
            for u2 in range(n2 + 1):
                assert cross_check_state(inst, TwoSourceState(u1, u2)), (
                    inst, u1, u2,
                )


def test_classify_handles_unsorted_instances():
    inst = ln.Instance((2, 6), 1.0, 1.0, 0.4)
    for u1 in range(3):
        for u2 in range(7):
            assert cross_check_state(inst, TwoSourceState(u1, u2))
    states = ln.scan_nash(inst)
    assert states  # existence carries over after relabeling


def test_scan_unique_all_direct():
    inst = ln.Instance((3, 2), 1.0, 1.0, 0.5)
    assert ln.scan_nash(inst) == [TwoSourceState(3, 2)]


def test_scan_matches_classify_gridwise():
    rng = random.Random(59)
    for _ in range(15):
        inst = rand_two_source(rng, n_max=10)
        n1, n2 = inst.user_counts
        grid = sorted(
            (u1, u2)
            for u1 in range(n1 + 1)
            for u2 in range(n2 + 1)
            if ln.classify(inst, TwoSourceState(u1, u2)).is_ne
        )
        assert [(s.u1, s.u2) for s in ln.scan_nash(inst)] == grid


def test_swap_everything_at_q0_with_near_equal_counts():
    # One extra user on the larger side and lossless sidelinks: the full-swap
    # state is an equilibrium.
    for k in (1, 3, 6):
        inst = ln.Instance((k + 1, k), 1.0, 1.0, 0.0)
        assert TwoSourceState(0, 0) in ln.scan_nash(inst)


def test_scan_nonempty_with_a_full_small_source_state():
    rng = random.Random(61)
    for _ in range(40):
        inst = rand_two_source(rng, n_max=12)
        states = ln.scan_nash(inst)
        assert states
        n2 = min(inst.user_counts)
        assert any(s.u2 == inst.user_counts[1] and s.u1 > 0 for s in states), (
            inst, states,
        )


def test_existence_construction_frozen_examples():
    assert ln.construct_existence_ne(
        ln.Instance((3, 2), 1.0, 1.0, 0.5)
    ) == TwoSourceState(3, 2)
    assert ln.construct_existence_ne(
        ln.Instance((100, 1), 1.0, 1.0, 0.1)
    ) == TwoSourceState(51, 1)


def test_existence_construction_always_verified():
    rng = random.Random(67)
    for _ in range(60):
        inst = rand_two_source(rng, n_max=20)
        s = ln.construct_existence_ne(inst)
        assert s.u1 > 0
        assert s.u2 == inst.user_counts[1]
        assert ln.classify(inst, s).is_ne
        assert ln.is_nash_deviation_oracle(inst, s.expand(inst)).is_ne


def test_case3_upper_companion_condition_is_implied():
    # In the full-small-source region the companion inequality u2 <= t2(u1)
    # follows from u1 >= t1(n2) - 1; sample it rather than trust it.
    rng = random.Random(71)
    for _ in range(200):
        n1 = rng.randint(2, 25)
        n2 = rng.randint(1, n1)
        q = rng.uniform(0.001, 0.999)
        mu = rng.uniform(0.1, 10.0)
        inst = ln.Instance((n1, n2), 1.0, mu, q)
        lo = ln.t1(inst, n2) - 1.0
        for u1 in range(max(1, math.ceil(lo - 1e-9)), n1):
            if u1 > ln.t1(inst, n2) + 1e-9:
                break
            assert n2 <= ln.t2(inst, u1) + 1e-9, (inst, u1)


def test_corollaries_q1_instance():
    res = ln.check_corollaries(ln.Instance((4, 2), 1.0, 1.0, 1.0))
    assert res["optimal_all_direct_is_ne"] == "pass"
    assert res["all_indirect_ne_iff"] == "pass"


def test_corollary_full_swap_condition_b():
    # Equal counts and nearly lossless sidelinks: (0, 0) is an equilibrium.
    inst = ln.Instance((5, 5), 1.0, 1.0, 0.01)
    n1, qb = 5, 0.99
    assert n1 * (1 - qb * qb) <= qb - 0.01 * 1.0
    assert ln.classify(inst, TwoSourceState(0, 0)).is_ne
    assert ln.check_corollaries(inst)["all_indirect_ne_iff"] == "pass"


def test_corollary_uniqueness_sampled():
    rng = random.Random(73)
    found = 0
    while found < 25:
        inst = rand_two_source(rng, n_max=12)
        n1, n2 = inst.user_counts
        qm = inst.q * inst.mu / inst.phi
        if n1 * inst.qbar < qm + n2 + inst.qbar and inst.q > 2.0 / inst.n:
            found += 1
            assert ln.check_corollaries(inst)["unique_all_direct_ne"] == "pass"
            assert ln.scan_nash(inst) == [TwoSourceState(n1, n2)]


def test_corollaries_always_return_verdict_per_rule():
    rng = random.Random(79)
    for _ in range(20):
        inst = rand_two_source(rng)
        res = ln.check_corollaries(inst)
        assert set(res) == {
            "optimal_all_direct_is_ne",
            "all_indirect_ne_iff",
            "unique_all_direct_ne",
        }
        assert all(v in ("pass", "fail", "not-applicable") for v in res.values())
        assert res["optimal_all_direct_is_ne"] != "fail"
        assert res["all_indirect_ne_iff"] != "fail"
        assert res["unique_all_direct_ne"] != "fail"


def test_two_source_ops_reject_other_sizes():
    inst = ln.Instance((2, 2, 2), 1.0, 1.0, 0.5)
    with pytest.raises(InvalidInputError):
        ln.scan_nash(inst)
    with pytest.raises(InvalidInputError):
        ln.classify(inst, TwoSourceState(1, 1))


def test_state_expansion_round_trip():
    inst = ln.Instance((3, 2), 1.0, 1.0, 0.5)
    prof = TwoSourceState(1, 2).expand(inst)
    assert prof.flow == ((1, 2), (0, 2))
    assert prof.u() == (1, 2)
    with pytest.raises(InvalidInputError):
        TwoSourceState(4, 0).expand(inst)
