import itertools
import random

import pytest

import lossnet as ln
from lossnet.errors import CapacityError

from conftest import count_shapes, random_instance, random_profile


def both_verdicts(inst, prof):
    return (
        ln.is_nash_characterization(inst, prof).is_ne,
        ln.is_nash_deviation_oracle(inst, prof).is_ne,
    )


def test_all_direct_is_equilibrium_3_2():
    inst = ln.Instance((3, 2), 1.0, 1.0, 0.5)
    prof = ln.RoutingProfile.all_direct(inst)
    assert both_verdicts(inst, prof) == (True, True)


def test_full_large_source_with_partial_small_source_never_ne():
    inst = ln.Instance((3, 2), 1.0, 1.0, 0.5)
    # u1 = n1 while the small source has a relaying user
    prof = ln.RoutingProfile(((3, 0), (1, 1)))
    assert both_verdicts(inst, prof) == (False, False)


def test_single_source_trivially_ne():
    inst = ln.Instance((4,), 1.0, 1.0, 0.5)
    prof = ln.RoutingProfile(((4,),))
    v = ln.is_nash_characterization(inst, prof)
    assert v.is_ne and v.violations == ()
    assert ln.is_nash_deviation_oracle(inst, prof).is_ne


def test_q1_direct_pair_is_ne_and_indirect_is_not():
    inst = ln.Instance((1, 1), 1.0, 1.0, 1.0)
    assert both_verdicts(inst, ln.RoutingProfile.all_direct(inst)) == (True, True)
    assert both_verdicts(inst, ln.RoutingProfile(((0, 1), (1, 0)))) == (False, False)


def test_characterization_matches_oracle_exhaustively_small():
    for counts in count_shapes(3, 6):
        for q in (0.0, 0.5, 1.0):
            for mu in (0.5, 1.0, 3.0):
                inst = ln.Instance(counts, 1.0, mu, q)
                for prof in ln.iter_profiles(inst):
                    a, b = both_verdicts(inst, prof)
                    assert a == b, (counts, q, mu, prof.flow)


def test_characterization_matches_oracle_randomized():
    rng = random.Random(31)
    for _ in range(5000):
        inst = random_instance(rng, m_choices=(2, 3, 4), n_max=12)
        prof = random_profile(rng, inst)
        a, b = both_verdicts(inst, prof)
        assert a == b, (inst, prof.flow)


def test_minimum_load_source_coincides_with_deviator():
    # Regression for the condition set evaluated at the global minimum-load
    # source: profiles engineered so that source equals the deviator's own
    # source or its relay.
    q = 0.5
    # relay-side coincidence: the relay itself carries the minimum load
    inst = ln.Instance((4, 2, 1), 1.0, 1.0, q)
    prof = ln.RoutingProfile(((3, 0, 1), (0, 2, 0), (0, 0, 1)))
    verdicts = both_verdicts(inst, prof)
    assert verdicts[0] == verdicts[1]
    # origin-side coincidence: the deviator's own source has minimum load
    inst2 = ln.Instance((3, 1, 1), 1.0, 1.0, q)
    prof2 = ln.RoutingProfile(((0, 3, 0), (0, 1, 0), (0, 0, 1)))
    verdicts2 = both_verdicts(inst2, prof2)
    assert verdicts2[0] == verdicts2[1]
    # and the two-source shapes from the analysis notes
    inst3 = ln.Instance((5, 1), 1.0, 1.0, 0.0)
    prof3 = ln.RoutingProfile(((5, 0), (0, 1)))
    assert both_verdicts(inst3, prof3)[0] == both_verdicts(inst3, prof3)[1]


def test_enumerate_unique_equilibrium_3_2():
    inst = ln.Instance((3, 2), 1.0, 1.0, 0.5)
    nes = ln.enumerate_nash(inst, cap=10**6)
    assert [p.flow for p, _ in nes] == [((3, 0), (0, 2))]


def test_enumerate_single_source():
    inst = ln.Instance((3,), 1.0, 1.0, 0.5)
    nes = ln.enumerate_nash(inst, cap=100)
    assert len(nes) == 1 and nes[0][0].flow == ((3,),)


def test_enumerate_frozen_equilibrium_set_2_2():
    # Fixed by exhaustive deviation-oracle enumeration before the build.
    inst = ln.Instance((2, 2), 1.0, 1.0, 0.05)
    nes = ln.enumerate_nash(inst, cap=10**6)
    assert [p.flow for p, _ in nes] == [
        ((0, 2), (2, 0)),
        ((1, 1), (1, 1)),
        ((2, 0), (0, 2)),
    ]
    worst = min(s.total_traffic for _, s in nes)
    assert worst == pytest.approx(1.3103448275862069, rel=1e-12)


def test_enumerate_cap_error_names_count_and_cap():
    inst = ln.Instance((4, 4), 1.0, 1.0, 0.5)
    with pytest.raises(CapacityError, match="25 profiles.*cap 10"):
        ln.enumerate_nash(inst, cap=10)


def test_enumeration_summaries_are_consistent():
    inst = ln.Instance((2, 2), 1.0, 1.0, 0.05)
    for prof, summary in ln.enumerate_nash(inst, cap=10**6):
        assert summary.total_traffic == pytest.approx(
            ln.total_traffic(inst, prof), rel=1e-12
        )


def test_dynamics_fixed_point_converges_immediately():
    inst = ln.Instance((3, 2), 1.0, 1.0, 0.5)
    ne = ln.RoutingProfile.all_direct(inst)
    res = ln.best_response_dynamics(inst, ne, max_rounds=50, seed=0)
    assert res.outcome == "converged"
    assert res.rounds == 1
    assert res.profile == ne


def test_dynamics_reaches_unique_equilibrium():
    inst = ln.Instance((3, 2), 1.0, 1.0, 0.5)
    starts = [
        ln.RoutingProfile(((0, 3), (2, 0))),
        ln.RoutingProfile(((1, 2), (1, 1))),
        ln.RoutingProfile(((2, 1), (0, 2))),
    ]
    for seed, start in itertools.product((0, 1, 2), starts):
        res = ln.best_response_dynamics(inst, start, max_rounds=200, seed=seed)
        assert res.outcome == "converged"
        assert res.profile.flow == ((3, 0), (0, 2))


def test_dynamics_converged_profiles_pass_the_oracle():
    rng = random.Random(37)
    for _ in range(30):
        inst = random_instance(rng, m_choices=(2, 3), n_max=6)
        start = random_profile(rng, inst)
        res = ln.best_response_dynamics(inst, start, max_rounds=300, seed=rng.randrange(100))
        if res.outcome == "converged":
            assert ln.is_nash_deviation_oracle(inst, res.profile).is_ne


def test_poa_bound_not_applicable_example():
    rep = ln.poa_report(ln.Instance((3, 2), 1.0, 1.0, 0.5))
    assert rep.z == pytest.approx(-0.375, abs=1e-12)
    assert rep.poa_bound is None
    assert rep.ne_count == 1
    assert rep.poa_exact == pytest.approx(1.0, abs=1e-12)


def test_poa_is_one_at_q1():
    rng = random.Random(41)
    for _ in range(10):
        inst = random_instance(rng, m_choices=(2, 3), n_max=6, q_choices=(1.0,))
        rep = ln.poa_report(inst)
        assert rep.ne_count >= 1
        assert rep.poa_exact == pytest.approx(1.0, abs=1e-9)


def test_poa_frozen_2_2():
    inst = ln.Instance((2, 2), 1.0, 1.0, 0.05)
    rep = ln.poa_report(inst)
    assert rep.ne_count == 3
    assert rep.tr_worst_ne == pytest.approx(1.3103448275862069, rel=1e-12)
    assert rep.poa_exact == pytest.approx(rep.tr_opt / rep.tr_worst_ne, rel=1e-12)
    assert rep.poa_exact >= 1.0


def test_poa_empty_equilibrium_set_is_reported_not_raised():
    # No guarantee an equilibrium exists for m >= 3; fabricate a check that
    # the report path tolerates ne_count = 0 by raising the cap high enough
    # for a tiny instance and filtering on an impossible predicate is not
    # possible here; instead verify the report fields stay None-consistent.
    inst = ln.Instance((2, 1, 1), 1.0, 1.0, 0.5)
    rep = ln.poa_report(inst, cap=10**6)
    if rep.ne_count == 0:
        assert rep.tr_worst_ne is None and rep.poa_exact is None
    else:
        assert rep.tr_worst_ne is not None and rep.poa_exact >= 1.0


def test_ne_traffic_bounds_example():
    bounds = ln.ne_traffic_bounds(ln.Instance((3, 2), 1.0, 1.0, 0.5))
    assert bounds.opt_upper == pytest.approx(1.5, abs=1e-12)
    assert bounds.ne_lower is None  # z < 0 here


def test_bounds_hold_for_equilibria_when_z_positive():
    # Engineered so z > 0: n / (4m) comfortably above qbar + q mu / phi.
    inst = ln.Instance((20, 20), 1.0, 1.0, 0.9)
    z = ln.mixing_level(inst)
    assert z > 0
    bounds = ln.ne_traffic_bounds(inst)
    rep = ln.poa_report(inst)
    assert rep.ne_count >= 1
    assert rep.tr_worst_ne >= bounds.ne_lower - 1e-9
    assert rep.tr_opt <= bounds.opt_upper + 1e-9
    assert rep.poa_exact <= rep.poa_bound + 1e-6


def test_verdict_violation_records_are_ordered_pairs():
    inst = ln.Instance((4, 1), 1.0, 1.0, 0.0)
    prof = ln.RoutingProfile.all_direct(inst)  # severely unbalanced at q=0
    v = ln.is_nash_characterization(inst, prof)
    assert not v.is_ne
    for viol in v.violations:
        assert viol.lhs > viol.rhs + ln.TOLERANCE
