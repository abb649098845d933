"""Closed-form equilibrium analysis for the two-source game.

With two sources the whole profile is pinned down by the pair (u1, u2) of
direct-path counts, since every user not on its direct path takes the single
indirect route through the other source.  Writing qb = 1 - q, the boundary

    t1(u2) = (q*mu/phi + u2*(1 + qb^2) + (n1 + 1)*qb - n2*qb^2) / (2*qb)

(and t2 with the roles of the sources swapped) separates equilibrium from
non-equilibrium states, and the (u1, u2) grid splits into five regions:

    1a: u1 = n1, u2 < n2           never an equilibrium
    1b: u1 = 0,  u2 > 0            never an equilibrium
    2:  u1 < n1, u2 < n2           NE iff u1 >= t1(u2) - 1 and u2 >= t2(u1) - 1
    3:  0 < u1 < n1, u2 = n2       NE iff t1(n2) - 1 <= u1 <= t1(n2)
    4:  u1 = n1, u2 = n2           NE iff n1*qb <= q*mu/phi + n2 + qb

The thresholds divide by 2*qb, so at q = 1 they are undefined; there the
all-direct state is the unique equilibrium (any relayed packet is lost with
certainty, so rerouting to the direct path always strictly helps) and the
mixed regions are settled by the deviation oracle.

Throughout, "source 1" means the source with the larger user count; instances
given in the other order are relabeled internally and results are mapped back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InternalCheckError, InvalidInputError, UndefinedThresholdError
from .model import TOLERANCE, Instance, RoutingProfile, total_traffic
from .equilibrium import is_nash_characterization, is_nash_deviation_oracle


@dataclass(frozen=True)
class TwoSourceState:
    """Direct-path counts (u1, u2), indexed as in the given instance."""

    u1: int
    u2: int

    def expand(self, inst: Instance) -> RoutingProfile:
        """The unique flow matrix realizing this state."""
        _check_two_sources(inst)
        n1, n2 = inst.user_counts
        if not (0 <= self.u1 <= n1 and 0 <= self.u2 <= n2):
            raise InvalidInputError(f"state {self} out of range for counts {inst.user_counts}")
        return RoutingProfile(((self.u1, n1 - self.u1), (n2 - self.u2, self.u2)))


@dataclass(frozen=True)
class TwoSourceVerdict:
    case_id: str  # "1a" | "1b" | "2" | "3" | "4"
    is_ne: bool
    t1_at_u2: float | None
    t2_at_u1: float | None


def _check_two_sources(inst: Instance) -> None:
    if inst.m != 2:
        raise InvalidInputError(f"two-source analysis requires m = 2, got m = {inst.m}")


def _check_sorted(inst: Instance) -> None:
    if inst.user_counts[0] < inst.user_counts[1]:
        raise InvalidInputError(
            "threshold formulas assume user_counts[0] >= user_counts[1]; "
            "relabel the sources first"
        )


def _canonical2(inst: Instance) -> tuple[Instance, bool]:
    """(instance with counts non-increasing, whether the sources were swapped)."""
    _check_two_sources(inst)
    if inst.user_counts[0] >= inst.user_counts[1]:
        return inst, False
    swapped = Instance(
        (inst.user_counts[1], inst.user_counts[0]), inst.phi, inst.mu, inst.q
    )
    return swapped, True


def t1(inst: Instance, u2: int) -> float:
    """Largest u1 (up to the -1 slack) tolerated at equilibrium, given u2."""
    _check_two_sources(inst)
    _check_sorted(inst)
    if inst.q == 1.0:
        raise UndefinedThresholdError("t1 is undefined at q = 1 (divides by 2*(1-q))")
    n1, n2 = inst.user_counts
    qb = inst.qbar
    qm = inst.q * inst.mu / inst.phi
    return (qm + u2 * (1.0 + qb * qb) + (n1 + 1) * qb - n2 * qb * qb) / (2.0 * qb)


def t2(inst: Instance, u1: int) -> float:
    """Mirror threshold for the smaller source, given u1."""
    _check_two_sources(inst)
    _check_sorted(inst)
    if inst.q == 1.0:
        raise UndefinedThresholdError("t2 is undefined at q = 1 (divides by 2*(1-q))")
    n1, n2 = inst.user_counts
    qb = inst.qbar
    qm = inst.q * inst.mu / inst.phi
    return (qm + u1 * (1.0 + qb * qb) + (n2 + 1) * qb - n1 * qb * qb) / (2.0 * qb)


def _case_id(n1: int, n2: int, a1: int, a2: int) -> str:
    if a1 == n1 and a2 == n2:
        return "4"
    if a1 == n1:
        return "1a"
    if a1 == 0 and a2 > 0:
        return "1b"
    if a2 == n2:
        return "3"
    return "2"


def classify(
    inst: Instance, state: TwoSourceState, eps: float = TOLERANCE
) -> TwoSourceVerdict:
    """Equilibrium verdict for one (u1, u2) state via the region conditions."""
    canon, swapped = _canonical2(inst)
    n1, n2 = canon.user_counts
    a1, a2 = (state.u2, state.u1) if swapped else (state.u1, state.u2)
    if not (0 <= a1 <= n1 and 0 <= a2 <= n2):
        raise InvalidInputError(f"state {state} out of range for counts {inst.user_counts}")
    case = _case_id(n1, n2, a1, a2)

    if canon.q == 1.0:
        if case == "4":
            is_ne = True  # n1*qb = 0 <= q*mu/phi + n2 + qb holds trivially
        elif case in ("1a", "1b"):
            is_ne = False
        else:
            is_ne = is_nash_deviation_oracle(inst, state.expand(inst)).is_ne
        return TwoSourceVerdict(case, is_ne, None, None)

    th1 = t1(canon, a2)
    th2 = t2(canon, a1)
    qm = canon.q * canon.mu / canon.phi
    if case in ("1a", "1b"):
        is_ne = False
    elif case == "2":
        is_ne = a1 >= th1 - 1.0 - eps and a2 >= th2 - 1.0 - eps
    elif case == "3":
        is_ne = th1 - 1.0 - eps <= a1 <= th1 + eps
    else:  # case 4
        is_ne = n1 * canon.qbar <= qm + n2 + canon.qbar + eps
    if swapped:
        th1, th2 = th2, th1
    return TwoSourceVerdict(case, is_ne, th1, th2)


def scan_nash(inst: Instance, eps: float = TOLERANCE) -> list[TwoSourceState]:
    """All equilibrium states on the (u1, u2) grid, sorted by (u1, u2).

    Vectorized over the whole grid; feasible up to user counts around 1e4.
    """
    canon, swapped = _canonical2(inst)
    n1, n2 = canon.user_counts
    if canon.q == 1.0:
        states = [(n1, n2)]
    else:
        qb = canon.qbar
        qm = canon.q * canon.mu / canon.phi
        a1 = np.arange(n1 + 1)[:, None]
        a2 = np.arange(n2 + 1)[None, :]
        th1 = (qm + a2 * (1.0 + qb * qb) + (n1 + 1) * qb - n2 * qb * qb) / (2.0 * qb)
        th2 = (qm + a1 * (1.0 + qb * qb) + (n2 + 1) * qb - n1 * qb * qb) / (2.0 * qb)
        case4 = (a1 == n1) & (a2 == n2) & (n1 * qb <= qm + n2 + qb + eps)
        case3 = (
            (a1 > 0) & (a1 < n1) & (a2 == n2)
            & (a1 >= th1 - 1.0 - eps) & (a1 <= th1 + eps)
        )
        case2 = (
            (a1 < n1) & (a2 < n2) & ~((a1 == 0) & (a2 > 0))
            & (a1 >= th1 - 1.0 - eps) & (a2 >= th2 - 1.0 - eps)
        )
        ne = case4 | case3 | case2
        states = [(int(i), int(j)) for i, j in np.argwhere(ne)]
    if swapped:
        states = [(b, a) for a, b in states]
    return [TwoSourceState(a, b) for a, b in sorted(states)]


def construct_existence_ne(inst: Instance) -> TwoSourceState:
    """A guaranteed equilibrium with u1 > 0 and u2 = n2.

    All-direct when the grand condition holds; otherwise the integer
    floor(t1(n2)), clamped into [t1(n2) - 1, t1(n2)] and [1, n1 - 1], paired
    with u2 = n2.  The result is re-checked before being returned.
    """
    canon, swapped = _canonical2(inst)
    n1, n2 = canon.user_counts
    qb = canon.qbar
    qm = canon.q * canon.mu / canon.phi
    if n1 * qb <= qm + n2 + qb + TOLERANCE:
        a1, a2 = n1, n2
    else:
        a1 = min(max(math.floor(t1(canon, n2)), 1), n1 - 1)
        a2 = n2
    state = TwoSourceState(a2, a1) if swapped else TwoSourceState(a1, a2)
    verdict = classify(inst, state)
    if not verdict.is_ne:
        raise InternalCheckError(f"constructed state {state} is not an equilibrium")
    return state


def check_corollaries(inst: Instance, eps: float = TOLERANCE) -> dict[str, str]:
    """Evaluate the three structural consequences on this instance.

    Returns "pass" / "fail" / "not-applicable" for each of:
      optimal_all_direct_is_ne -- if all-direct maximizes traffic, it is a NE;
      all_indirect_ne_iff      -- (0, 0) is a NE exactly when n1 = n2 + 1 with
                                  q = 0, or n1 = n2 with
                                  n1*(1 - qb^2) <= qb - q*mu/phi;
      unique_all_direct_ne     -- if n1*qb < q*mu/phi + n2 + qb and q > 2/n,
                                  all-direct is the only NE.
    """
    from .optimizer import solve_optimal  # deferred: optimizer is heavier

    canon, swapped = _canonical2(inst)
    n1, n2 = canon.user_counts
    qb = canon.qbar
    qm = canon.q * canon.mu / canon.phi
    results: dict[str, str] = {}

    all_direct = TwoSourceState(inst.user_counts[0], inst.user_counts[1])
    tr_opt = solve_optimal(inst).tr
    tr_all_direct = total_traffic(inst, all_direct.expand(inst))
    if tr_all_direct >= tr_opt - TOLERANCE * max(1.0, tr_opt):
        results["optimal_all_direct_is_ne"] = (
            "pass" if classify(inst, all_direct).is_ne else "fail"
        )
    else:
        results["optimal_all_direct_is_ne"] = "not-applicable"

    expected_zero = (n1 == n2 + 1 and inst.q == 0.0) or (
        n1 == n2 and n1 * (1.0 - qb * qb) <= qb - qm + eps
    )
    actual_zero = classify(inst, TwoSourceState(0, 0)).is_ne
    results["all_indirect_ne_iff"] = "pass" if expected_zero == actual_zero else "fail"

    if n1 * qb < qm + n2 + qb - eps and inst.q > 2.0 / inst.n + eps:
        states = scan_nash(inst)
        results["unique_all_direct_ne"] = (
            "pass" if states == [all_direct] else "fail"
        )
    else:
        results["unique_all_direct_ne"] = "not-applicable"
    return results


def cross_check_state(inst: Instance, state: TwoSourceState) -> bool:
    """True iff classify, the general characterization, and the oracle agree."""
    prof = state.expand(inst)
    a = classify(inst, state).is_ne
    b = is_nash_characterization(inst, prof).is_ne
    c = is_nash_deviation_oracle(inst, prof).is_ne
    return a == b == c
