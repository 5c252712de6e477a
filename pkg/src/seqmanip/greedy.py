"""The greedy picking procedure.

At each manipulator turn, take the most preferred remaining item of the next
non-manipulator still to move (or the manipulator's own best remaining item
once no non-manipulator turn is left).  The result is optimal exactly on
crucial instances and is the building block of both the search oracle and
the dynamic program.
"""

from __future__ import annotations

from .engine import AllocationSequence, PickingStrategy, Step
from .model import MANIPULATOR, Agent, Instance, Item


def greedy_alg(inst: Instance) -> tuple[AllocationSequence, PickingStrategy]:
    """Run the greedy procedure; returns the trace and its unique strategy.

    Non-manipulator turns are truthful as always.  Runtime is linear in the
    number of items thanks to one monotone ranking cursor per agent.

    >>> from .model import generate_tightness_instance
    >>> trace, strategy = greedy_alg(generate_tightness_instance(10))
    >>> [item for item, agent in trace if agent == 1]
    ['g2', 'g1']
    """
    policy = inst.policy
    m = inst.m
    # next_watcher[t]: first non-manipulator at or after turn t
    next_watcher: list[Agent | None] = [None] * (m + 1)
    for t in range(m - 1, -1, -1):
        next_watcher[t] = policy[t] if policy[t] != MANIPULATOR else next_watcher[t + 1]
    allocated: set[Item] = set()
    cursors = {agent: 0 for agent in range(1, inst.n_agents + 1)}

    def top_remaining(agent: Agent) -> Item:
        ranking = inst.rankings[agent]
        cur = cursors[agent]
        while ranking[cur] in allocated:
            cur += 1
        cursors[agent] = cur
        return ranking[cur]

    steps: list[Step] = []
    picks: list[Item] = []
    for t, agent in enumerate(policy):
        if agent == MANIPULATOR:
            watcher = next_watcher[t + 1]
            item = top_remaining(watcher if watcher is not None else MANIPULATOR)
            picks.append(item)
        else:
            item = top_remaining(agent)
        allocated.add(item)
        steps.append((item, agent))
    picked = set(picks)
    rest = [item for item in inst.manipulator_ranking if item not in picked]
    return tuple(steps), tuple(picks + rest)
