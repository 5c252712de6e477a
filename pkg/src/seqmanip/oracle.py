"""Ground-truth solvers for desk-scale instances.

Two independent exact methods: an exhaustive choice tree over manipulator
picks, and greedy runs over every dominated policy.  Either one pins down
the manipulator's optimal utility; agreeing with each other and with the
dynamic program is the core cross-validation of this package.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import engine
from .engine import AllocationSequence, Bundle, PickingStrategy
from .greedy import greedy_alg
from .model import MANIPULATOR, Instance
from .policy import Policy, enumerate_dominated

DEFAULT_NODE_BUDGET = 10**7
DEFAULT_POLICY_BUDGET = 10**6

BUDGET_ENV_VAR = "SEQMANIP_BUDGET"


class BudgetExceeded(RuntimeError):
    """An exhaustive search outgrew its configured budget."""


def _resolve_budget(value: int | None, default: int) -> int:
    if value is not None:
        return value
    env = os.environ.get(BUDGET_ENV_VAR)
    if env is not None:
        return int(env)
    return default


@dataclass(frozen=True)
class Solution:
    """Optimal strategy, its trace on the instance, and the resulting bundle."""

    strategy: PickingStrategy
    sequence: AllocationSequence
    bundle: Bundle
    utility: Fraction


def _solution_from_strategy(inst: Instance, strategy: PickingStrategy) -> Solution:
    seq = engine.execute(inst, strategy)
    bundle = engine.manipulator_bundle(inst, seq)
    return Solution(strategy=strategy, sequence=seq, bundle=bundle, utility=bundle.total_utility)


def choice_tree_best(inst: Instance, node_budget: int | None = None) -> Solution:
    """Exact optimum by branching over every remaining item at every
    manipulator turn (non-manipulator turns are forced).

    States are memoised on the set of allocated items, which determines the
    position and the remaining subproblem.  Raises :class:`BudgetExceeded`
    after expanding more than ``node_budget`` states (default 10**7,
    overridable via the ``SEQMANIP_BUDGET`` environment variable).

    Ties between optimal bundles break towards the bundle whose items rank
    lexicographically best in the manipulator's own ranking, making the
    result independent of exploration order.
    """
    budget = _resolve_budget(node_budget, DEFAULT_NODE_BUDGET)
    m = inst.m
    ranking1 = inst.manipulator_ranking
    rank1 = {item: r for r, item in enumerate(ranking1)}
    index = {item: i for i, item in enumerate(inst.items)}
    utility = [inst.utility[item] for item in inst.items]
    prefs = {
        agent: [index[item] for item in ranking]
        for agent, ranking in inst.rankings.items()
    }
    rank1_by_index = [rank1[item] for item in inst.items]
    policy = inst.policy
    memo: dict[int, tuple[Fraction, tuple[int, ...]]] = {}
    nodes = 0

    def solve(mask: int, pos: int) -> tuple[Fraction, tuple[int, ...]]:
        nonlocal nodes
        if pos == m:
            return Fraction(0), ()
        cached = memo.get(mask)
        if cached is not None:
            return cached
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(
                f"choice tree expanded more than {budget} states; raise the budget to continue"
            )
        agent = policy[pos]
        if agent != MANIPULATOR:
            pick = next(i for i in prefs[agent] if not mask & (1 << i))
            result = solve(mask | (1 << pick), pos + 1)
        else:
            best: tuple[Fraction, tuple[int, ...]] | None = None
            for i in range(m):
                bit = 1 << i
                if mask & bit:
                    continue
                sub_util, sub_bundle = solve(mask | bit, pos + 1)
                cand_util = utility[i] + sub_util
                cand_bundle = tuple(sorted(sub_bundle + (rank1_by_index[i],)))
                if (
                    best is None
                    or cand_util > best[0]
                    or (cand_util == best[0] and cand_bundle < best[1])
                ):
                    best = (cand_util, cand_bundle)
            assert best is not None
            result = best
        memo[mask] = result
        return result

    best_util, best_ranks = solve(0, 0)
    # Rebuild the chosen trace by walking the memoised tree again.
    steps = []
    mask = 0
    target = set(best_ranks)
    for pos, agent in enumerate(policy):
        if agent != MANIPULATOR:
            pick = next(i for i in prefs[agent] if not mask & (1 << i))
        else:
            pick = None
            chosen: tuple[Fraction, tuple[int, ...]] | None = None
            for i in range(m):
                bit = 1 << i
                if mask & bit:
                    continue
                sub_util, sub_bundle = solve(mask | bit, pos + 1)
                cand = (utility[i] + sub_util, tuple(sorted(sub_bundle + (rank1_by_index[i],))))
                if chosen is None or cand[0] > chosen[0] or (cand[0] == chosen[0] and cand[1] < chosen[1]):
                    chosen = cand
                    pick = i
            assert pick is not None
        steps.append((inst.items[pick], agent))
        mask |= 1 << pick
    seq = tuple(steps)
    solution = _solution_from_strategy(inst, engine.strategy_from_sequence(inst, seq))
    if solution.utility != best_util or {rank1[i] for i in solution.bundle.items} != target:
        raise RuntimeError("internal error: rebuilt trace does not match the memoised optimum")
    return solution


def dominated_greedy_best(
    inst: Instance, policy_budget: int | None = None
) -> tuple[Solution, Policy]:
    """Best greedy outcome over every policy dominated by the instance's own.

    Returns the solution replayed on the original instance together with the
    dominated policy achieving it (the certificate policy); ties break by
    enumeration order, i.e. the lexicographically first position vector.
    """
    budget = _resolve_budget(policy_budget, DEFAULT_POLICY_BUDGET)
    best_util: Fraction | None = None
    best_strategy: PickingStrategy | None = None
    best_policy: Policy | None = None
    count = 0
    for pol in enumerate_dominated(inst.policy):
        count += 1
        if count > budget:
            raise BudgetExceeded(
                f"dominated-policy enumeration exceeded {budget} policies"
            )
        variant = inst.with_policy(pol)
        seq, strategy = greedy_alg(variant)
        util = engine.manipulator_bundle(variant, seq).total_utility
        if best_util is None or util > best_util:
            best_util, best_strategy, best_policy = util, strategy, pol
    assert best_strategy is not None and best_policy is not None
    solution = _solution_from_strategy(inst, best_strategy)
    if solution.utility != best_util:
        raise RuntimeError(
            "internal error: greedy strategy of the best dominated policy does "
            "not recover the same utility on the original instance"
        )
    return solution, best_policy


def is_crucial(
    inst: Instance,
    node_budget: int | None = None,
    policy_budget: int | None = None,
) -> bool:
    """Is every strictly dominated policy strictly worse at the optimum?

    Vacuously true when the policy has no strict dominatee.
    """
    budget = _resolve_budget(policy_budget, DEFAULT_POLICY_BUDGET)
    own = choice_tree_best(inst, node_budget=node_budget).utility
    count = 0
    for pol in enumerate_dominated(inst.policy):
        count += 1
        if count > budget:
            raise BudgetExceeded(f"dominated-policy enumeration exceeded {budget} policies")
        if pol == inst.policy:
            continue
        other = choice_tree_best(inst.with_policy(pol), node_budget=node_budget).utility
        if other >= own:
            return False
    return True


def achievable_bundles_exact(inst: Instance, target: frozenset) -> bool:
    """Can the manipulator end up with exactly ``target``?

    Independent decision procedure used to cross-check the reduction in
    :mod:`seqmanip.responses`: depth-first search over manipulator picks
    restricted to the target set (a pick outside it can never produce the
    exact bundle), with non-manipulator turns forced.
    """
    if len(target) != inst.k1:
        return False
    index = {item: i for i, item in enumerate(inst.items)}
    prefs = {
        agent: [index[item] for item in ranking]
        for agent, ranking in inst.rankings.items()
    }
    target_idx = [index[item] for item in sorted(target)]
    policy = inst.policy
    m = inst.m
    seen: set[int] = set()

    def search(mask: int, pos: int) -> bool:
        if pos == m:
            return True
        if mask in seen:
            return False
        agent = policy[pos]
        if agent != MANIPULATOR:
            pick = next(i for i in prefs[agent] if not mask & (1 << i))
            if search(mask | (1 << pick), pos + 1):
                return True
        else:
            for i in target_idx:
                if not mask & (1 << i) and search(mask | (1 << i), pos + 1):
                    return True
        seen.add(mask)
        return False

    return search(0, 0)
