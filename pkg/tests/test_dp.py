from fractions import Fraction

import seqmanip as sm
from seqmanip.dp import DPState, best_response_with_table, build_opt_table, replay_state
from seqmanip.policy import decompose
from _util import random_instances


def test_first_stage_states_example1(ex1):
    table = build_opt_table(ex1)
    stage1 = {state: entry for state, entry in table.items() if state.x == 1}
    assert set(stage1) == {DPState(1, 0, (0, 1)), DPState(1, 1, (0, 2))}
    assert stage1[DPState(1, 0, (0, 1))].utility == 0
    assert stage1[DPState(1, 1, (0, 2))].utility == Fraction(1)  # picked e
    assert replay_state(ex1, table, DPState(1, 0, (0, 1))) == (("e", 3),)
    assert replay_state(ex1, table, DPState(1, 1, (0, 2))) == (("e", 1), ("b", 3))


def test_collision_keeps_better_candidate_example1(ex1):
    # two traces reach (3, 1, (4, 1)): one paid for b, the other for c
    table = build_opt_table(ex1)
    state = DPState(3, 1, (4, 1))
    assert table[state].utility == Fraction(4)
    assert replay_state(ex1, table, state) == (
        ("e", 3),
        ("c", 2),
        ("b", 1),
        ("d", 2),
    )


def test_best_response_example1(ex1):
    solution, table = best_response_with_table(ex1)
    assert solution.bundle.items == {"a", "b"}
    assert solution.utility == Fraction(9)
    assert solution.sequence == (("e", 3), ("c", 2), ("b", 1), ("d", 2), ("a", 1))
    assert solution.strategy == ("b", "a", "c", "d", "e")
    assert DPState(3, 1, (4, 1)) in table


def test_tightness_best_response():
    inst = sm.generate_tightness_instance(10)
    solution = sm.dp_best_response(inst)
    assert solution.bundle.items == {"g2", "g1"}
    assert solution.utility == Fraction(19, 10)


def test_manipulator_only_policy_uses_base_state_only():
    inst = sm.make_instance(
        ["a", "b", "c"], 1, [1, 1, 1], {1: ["a", "b", "c"]}, {"a": 3, "b": 2, "c": 1}
    )
    table = build_opt_table(inst)
    assert set(table) == {DPState(0, 0, ())}
    solution = sm.dp_best_response(inst)
    assert solution.bundle.items == {"a", "b", "c"}
    assert solution.utility == Fraction(6)


def test_empty_instance():
    inst = sm.make_instance([], 2, [], {1: [], 2: []}, {})
    solution = sm.dp_best_response(inst)
    assert solution.bundle.items == frozenset()
    assert solution.utility == 0
    assert solution.sequence == ()


def test_no_manipulator_turns():
    inst = sm.make_instance(
        ["a", "b"], 2, [2, 2], {1: ["a", "b"], 2: ["b", "a"]}, {"a": 2, "b": 1}
    )
    solution = sm.dp_best_response(inst)
    assert solution.bundle.items == frozenset()
    assert solution.utility == 0


def test_table_invariants_on_random_instances():
    for inst, seed in random_instances(120, seed=29, max_items=7):
        dec = decompose(inst.policy)
        table = build_opt_table(inst)
        for state, entry in table.items():
            assert 0 <= state.x <= dec.m_prime
            assert 0 <= state.y <= dec.k_prefix[state.x] if state.x else state.y == 0
            trace = replay_state(inst, table, state)
            assert len(trace) == state.x + state.y
            assert sm.trace_feasible(inst, trace)
            assert sm.is_greedy(inst, trace)
            if trace:
                assert trace[-1][1] != sm.MANIPULATOR
            # per-prefix manipulator counts stay within the original policy's
            replayed_policy = tuple(agent for _, agent in trace)
            replayed_dec = decompose(replayed_policy)
            assert replayed_dec.m_prime == state.x
            for r in range(1, state.x + 1):
                assert replayed_dec.k_prefix[r] <= dec.k_prefix[r], f"seed={seed}"
            # last-rank coordinates match the replayed trace
            for agent in range(2, inst.n_agents + 1):
                received = [item for item, a in trace if a == agent]
                expected = (
                    inst.rankings[agent].index(received[-1]) + 1 if received else 0
                )
                assert state.last_rank[agent - 2] == expected
            # utility recorded for the manipulator's share of the trace
            assert entry.utility == sm.manipulator_bundle(inst, trace).total_utility


def test_solution_trace_policy_is_dominated():
    for inst, seed in random_instances(150, seed=43, max_items=8):
        solution = sm.dp_best_response(inst)
        recovered = tuple(agent for _, agent in solution.sequence)
        assert sm.dominates(inst.policy, recovered), f"seed={seed}"
        assert sm.is_greedy(inst, solution.sequence)


def test_invariance_assertion_mode(ex1):
    # collisions replay both candidate traces and verify the relation holds
    build_opt_table(ex1, check_invariance=True)
    for inst, _seed in random_instances(80, seed=47, max_items=7):
        build_opt_table(inst, check_invariance=True)


def test_state_count_within_box_bound():
    for inst, _seed in random_instances(100, seed=53, max_items=9):
        table = build_opt_table(inst)
        bound = (
            (1 + inst.m) ** (inst.n_agents - 1)
            * (inst.m_prime + 1)
            * (inst.k1 + 1)
        )
        assert len(table) <= bound


def test_dp_is_deterministic(ex1):
    assert sm.dp_best_response(ex1) == sm.dp_best_response(ex1)
    inst = sm.generate_random_instance(3, 12, seed=99)
    assert sm.dp_best_response(inst) == sm.dp_best_response(inst)
