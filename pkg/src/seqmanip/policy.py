"""Structural algebra on policies.

A policy is the turn sequence of agents, one turn per item.  This module
splits policies into segments, extracts cores and manipulator position
vectors, tests domination and enumerates dominated policies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from .model import MANIPULATOR, Agent

Policy = tuple[Agent, ...]


@dataclass(frozen=True)
class PolicyDecomposition:
    """Segment structure of a policy.

    ``segments`` cuts the policy after every non-manipulator turn; each
    non-trivial segment therefore holds zero or more manipulator turns
    followed by exactly one non-manipulator.  The final entry is the trivial
    segment: trailing manipulator turns only, possibly empty.  ``core`` is
    the policy with manipulator turns deleted, ``position_vector`` the
    1-based manipulator positions, and ``k_prefix[x]`` the number of
    manipulator turns within the first ``x`` segments.

    >>> decompose((1, 3, 2, 2, 1)).segments
    ((1, 3), (2,), (2,), (1,))
    >>> decompose((1, 3, 2, 2, 1)).core
    (3, 2, 2)
    >>> decompose((1, 3, 2, 2, 1)).position_vector
    (1, 5)
    """

    segments: tuple[tuple[Agent, ...], ...]
    core: tuple[Agent, ...]
    position_vector: tuple[int, ...]
    k_prefix: tuple[int, ...]

    @property
    def m_prime(self) -> int:
        return len(self.core)

    @property
    def trivial_segment(self) -> tuple[Agent, ...]:
        return self.segments[-1]

    def prefix_segments(self, x: int) -> Policy:
        """Concatenation of the first ``x`` segments."""
        out: list[Agent] = []
        for seg in self.segments[:x]:
            out.extend(seg)
        return tuple(out)


def decompose(policy: Sequence[Agent]) -> PolicyDecomposition:
    """Split ``policy`` into segments and derive core, positions and k(x)."""
    segments: list[tuple[Agent, ...]] = []
    current: list[Agent] = []
    core: list[Agent] = []
    for agent in policy:
        current.append(agent)
        if agent != MANIPULATOR:
            core.append(agent)
            segments.append(tuple(current))
            current = []
    segments.append(tuple(current))
    k_prefix = [0]
    for seg in segments[:-1]:
        k_prefix.append(k_prefix[-1] + len(seg) - 1)
    position_vector = tuple(
        pos for pos, agent in enumerate(policy, start=1) if agent == MANIPULATOR
    )
    return PolicyDecomposition(
        segments=tuple(segments),
        core=tuple(core),
        position_vector=position_vector,
        k_prefix=tuple(k_prefix),
    )


def core_of(policy: Sequence[Agent]) -> tuple[Agent, ...]:
    """The policy with all manipulator turns deleted."""
    return tuple(a for a in policy if a != MANIPULATOR)


def position_vector(policy: Sequence[Agent]) -> tuple[int, ...]:
    """1-based positions of the manipulator in the policy, increasing."""
    return tuple(pos for pos, a in enumerate(policy, start=1) if a == MANIPULATOR)


def dominates(p1: Sequence[Agent], p2: Sequence[Agent]) -> bool:
    """True iff both policies share length and core and every manipulator
    turn in ``p1`` is no later than the matching turn in ``p2``.

    Policies with different cores are simply unrelated (never an error).

    >>> dominates((1, 3, 2, 2, 1), (3, 2, 1, 2, 1))
    True
    >>> dominates((2, 1), (1, 2))
    False
    """
    if len(p1) != len(p2) or core_of(p1) != core_of(p2):
        return False
    return all(z1 <= z2 for z1, z2 in zip(position_vector(p1), position_vector(p2)))


def policy_from_positions(core: Sequence[Agent], positions: Sequence[int], length: int) -> Policy:
    """Rebuild a policy from its core and manipulator position vector."""
    taken = set(positions)
    out: list[Agent] = []
    core_iter = iter(core)
    for pos in range(1, length + 1):
        out.append(MANIPULATOR if pos in taken else next(core_iter))
    return tuple(out)


def enumerate_dominated(policy: Sequence[Agent]) -> Iterator[Policy]:
    """Yield every policy dominated by ``policy`` (itself included) lazily,
    in lexicographic order of manipulator position vectors.

    >>> list(enumerate_dominated((1, 2)))
    [(1, 2), (2, 1)]
    """
    policy = tuple(policy)
    z = position_vector(policy)
    core = core_of(policy)
    m = len(policy)
    k = len(z)
    if k == 0:
        yield policy
        return

    def rec(i: int, min_pos: int, acc: tuple[int, ...]) -> Iterator[Policy]:
        if i == k:
            yield policy_from_positions(core, acc, m)
            return
        for pos in range(max(z[i], min_pos), m - (k - i) + 2):
            yield from rec(i + 1, pos + 1, acc + (pos,))

    yield from rec(0, 1, ())


def move_manipulator_turn(policy: Sequence[Agent], src: int, dst: int) -> Policy:
    """Move the manipulator turn at 1-based position ``src`` so it lands at
    1-based position ``dst`` of the resulting policy."""
    if policy[src - 1] != MANIPULATOR:
        raise ValueError(f"position {src} holds agent {policy[src - 1]}, not the manipulator")
    if not 1 <= dst <= len(policy):
        raise ValueError(f"target position {dst} out of range 1..{len(policy)}")
    out = list(policy)
    del out[src - 1]
    out.insert(dst - 1, MANIPULATOR)
    return tuple(out)
