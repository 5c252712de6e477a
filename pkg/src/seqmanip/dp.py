"""Polynomial-time best response via dynamic programming over segments.

States are tuples (x, y, i2..in): segments completed, items taken by the
manipulator so far, and the rank of each non-manipulator's last item in its
own ranking (0 while it has received nothing).  Stage x appends one segment:
q manipulator picks of the stage agent's favourite remaining items followed
by that agent's own pick.  Every stored state therefore replays to a greedy
partial trace whose turn order is dominated by the instance's policy, and
the best completion over the final stage is the exact optimum.

The table is sparse: only reachable states are materialised.  Entries store
utility and a backpointer; allocated item sets are carried stage-to-stage
during construction and can be rebuilt later by replaying backpointers.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

from . import engine
from .engine import AllocationSequence, Step
from .model import MANIPULATOR, Instance
from .oracle import Solution
from .policy import decompose


class DPState(NamedTuple):
    x: int
    y: int
    last_rank: tuple[int, ...]


class DPEntry(NamedTuple):
    utility: Fraction
    pred: DPState | None
    q: int
    pred_rank: int

    @property
    def is_base(self) -> bool:
        return self.pred is None


def _tie_key(entry: DPEntry) -> tuple:
    return entry.q, entry.pred_rank, entry.pred


def _build(
    inst: Instance, check_invariance: bool = False
) -> tuple[dict[DPState, DPEntry], dict[DPState, int]]:
    """Fill the table; returns it plus the allocated-item bitmasks of the
    final stage (needed to complete solutions)."""
    dec = decompose(inst.policy)
    core = dec.core
    n = inst.n_agents
    m = inst.m
    index = {item: i for i, item in enumerate(inst.items)}
    utility = [inst.utility[item] for item in inst.items]
    prefs = {
        agent: [index[item] for item in ranking]
        for agent, ranking in inst.rankings.items()
    }
    base = DPState(0, 0, (0,) * (n - 1))
    table: dict[DPState, DPEntry] = {base: DPEntry(Fraction(0), None, 0, 0)}
    masks: dict[DPState, int] = {base: 0}
    for x in range(1, dec.m_prime + 1):
        stage_agent = core[x - 1]
        coord = stage_agent - 2
        k_x = dec.k_prefix[x]
        pref = prefs[stage_agent]
        new_masks: dict[DPState, int] = {}
        for pred_state, pred_mask in masks.items():
            pred_entry = table[pred_state]
            y0 = pred_state.y
            remaining = m - (x - 1) - y0
            q_max = min(k_x - y0, remaining - 1)
            if q_max < 0:
                continue
            tops: list[int] = []
            for i in pref:
                if not pred_mask & (1 << i):
                    tops.append(i)
                    if len(tops) > q_max:
                        break
            taken_util = Fraction(0)
            taken_mask = 0
            for q in range(q_max + 1):
                received = tops[q]
                new_rank = pref.index(received) + 1
                last = pred_state.last_rank
                state = DPState(
                    x, y0 + q, last[:coord] + (new_rank,) + last[coord + 1 :]
                )
                cand = DPEntry(
                    pred_entry.utility + taken_util,
                    pred_state,
                    q,
                    last[coord],
                )
                incumbent = table.get(state)
                if check_invariance and incumbent is not None:
                    cand_seq = replay_state(inst, table, pred_state) + _segment_steps(
                        inst, stage_agent, tops, q
                    )
                    stored_seq = replay_state(inst, table, state)
                    if not engine.invariance_related(cand_seq, stored_seq):
                        raise RuntimeError(
                            f"internal error: state {state} reached by traces "
                            "outside the invariance relation"
                        )
                if (
                    incumbent is None
                    or cand.utility > incumbent.utility
                    or (
                        cand.utility == incumbent.utility
                        and _tie_key(cand) < _tie_key(incumbent)
                    )
                ):
                    table[state] = cand
                    new_masks[state] = pred_mask | taken_mask | (1 << received)
                elif state not in new_masks:
                    new_masks[state] = pred_mask | taken_mask | (1 << received)
                taken_util += utility[received]
                taken_mask |= 1 << received
        masks = new_masks
    return table, masks


def _segment_steps(
    inst: Instance, stage_agent: int, tops: list[int], q: int
) -> AllocationSequence:
    steps: list[Step] = [(inst.items[i], MANIPULATOR) for i in tops[:q]]
    steps.append((inst.items[tops[q]], stage_agent))
    return tuple(steps)


def build_opt_table(
    inst: Instance, check_invariance: bool = False
) -> dict[DPState, DPEntry]:
    """All reachable states with their best utilities and backpointers.

    With ``check_invariance=True`` every state collision replays both
    candidate traces and verifies they are invariance-related (slow; meant
    for desk-scale validation).
    """
    return _build(inst, check_invariance)[0]


def replay_state(
    inst: Instance, table: dict[DPState, DPEntry], state: DPState
) -> AllocationSequence:
    """Reconstruct the stored partial trace realising ``state``."""
    chain: list[DPState] = []
    cursor = state
    while True:
        entry = table[cursor]
        if entry.pred is None:
            break
        chain.append(cursor)
        cursor = entry.pred
    chain.reverse()
    core = decompose(inst.policy).core
    index = {item: i for i, item in enumerate(inst.items)}
    prefs = {
        agent: [index[item] for item in ranking]
        for agent, ranking in inst.rankings.items()
    }
    mask = 0
    steps: list[Step] = []
    for node in chain:
        entry = table[node]
        stage_agent = core[node.x - 1]
        tops: list[int] = []
        for i in prefs[stage_agent]:
            if not mask & (1 << i):
                tops.append(i)
                if len(tops) > entry.q:
                    break
        for i in tops[: entry.q]:
            steps.append((inst.items[i], MANIPULATOR))
            mask |= 1 << i
        steps.append((inst.items[tops[entry.q]], stage_agent))
        mask |= 1 << tops[entry.q]
    return tuple(steps)


def best_response_with_table(
    inst: Instance,
) -> tuple[Solution, dict[DPState, DPEntry]]:
    """Solve best response and also return the table (for stats or dumps)."""
    table, final_masks = _build(inst)
    index = {item: i for i, item in enumerate(inst.items)}
    pref1 = [index[item] for item in inst.manipulator_ranking]
    utility = [inst.utility[item] for item in inst.items]
    best_state: DPState | None = None
    best_total: Fraction | None = None
    best_extension: list[int] | None = None
    for state, mask in final_masks.items():
        entry = table[state]
        extension = [i for i in pref1 if not mask & (1 << i)]
        total = entry.utility + sum((utility[i] for i in extension), Fraction(0))
        if (
            best_total is None
            or total > best_total
            or (total == best_total and state < best_state)
        ):
            best_state, best_total, best_extension = state, total, extension
    assert best_state is not None and best_extension is not None
    seq = replay_state(inst, table, best_state) + tuple(
        (inst.items[i], MANIPULATOR) for i in best_extension
    )
    strategy = engine.strategy_from_sequence(inst, seq)
    bundle = engine.manipulator_bundle(inst, seq)
    if bundle.total_utility != best_total:
        raise RuntimeError("internal error: replayed trace utility disagrees with table")
    replayed = engine.manipulator_bundle(inst, engine.execute(inst, strategy))
    if replayed.items != bundle.items:
        raise RuntimeError(
            "internal error: associated strategy does not recover the optimal "
            "bundle on the original policy"
        )
    solution = Solution(
        strategy=strategy, sequence=seq, bundle=bundle, utility=bundle.total_utility
    )
    return solution, table


def dp_best_response(inst: Instance) -> Solution:
    """The manipulator's exact optimum: strategy, trace, bundle, utility."""
    return best_response_with_table(inst)[0]
