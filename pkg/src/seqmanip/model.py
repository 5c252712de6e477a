"""Instance model for manipulation in sequential allocation.

Items are short string tokens, agents are 1-based integers, and agent 1 is
always the manipulator. The manipulator's cardinal utilities are exact
rationals so that solver comparisons never suffer floating-point ties.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Mapping

Item = str
Agent = int

MANIPULATOR: Agent = 1

_DOCUMENT_KEYS = {"items", "agents", "policy", "rankings", "utilities"}


class InstanceError(ValueError):
    """Invalid instance document or field; ``path`` points at the culprit."""

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True, eq=True)
class Instance:
    """A manipulation problem: items, agents, policy, rankings, utilities.

    ``rankings`` maps each agent to its complete strict preference ranking (a
    permutation of ``items``, most preferred first).  ``utility`` gives the
    manipulator's cardinal value per item and must decrease strictly along the
    manipulator's own ranking.  Instances are immutable after construction and
    safe to share between concurrent solver calls.
    """

    items: tuple[Item, ...]
    n_agents: int
    policy: tuple[Agent, ...]
    rankings: Mapping[Agent, tuple[Item, ...]]
    utility: Mapping[Item, Fraction]

    def __post_init__(self):
        _validate(self)

    @property
    def m(self) -> int:
        """Number of items."""
        return len(self.items)

    @property
    def k1(self) -> int:
        """Number of manipulator turns in the policy."""
        return sum(1 for a in self.policy if a == MANIPULATOR)

    @property
    def m_prime(self) -> int:
        """Number of non-manipulator turns in the policy."""
        return self.m - self.k1

    @property
    def manipulator_ranking(self) -> tuple[Item, ...]:
        return self.rankings[MANIPULATOR]

    def with_policy(self, policy: Iterable[Agent]) -> "Instance":
        """A copy of this instance under a different policy (revalidated)."""
        return replace(self, policy=tuple(policy))


def _validate(inst: Instance) -> None:
    if inst.n_agents < 1:
        raise InstanceError("agents", "need at least one agent")
    item_set = set(inst.items)
    if len(item_set) != len(inst.items):
        raise InstanceError("items", "duplicate item identifiers")
    for it in inst.items:
        if not isinstance(it, str) or not it:
            raise InstanceError("items", f"item identifiers must be non-empty strings, got {it!r}")
    if len(inst.policy) != len(inst.items):
        raise InstanceError(
            "policy",
            f"length {len(inst.policy)} does not match item count {len(inst.items)}",
        )
    for pos, agent in enumerate(inst.policy):
        if not isinstance(agent, int) or not 1 <= agent <= inst.n_agents:
            raise InstanceError(f"policy[{pos}]", f"agent index {agent!r} out of range 1..{inst.n_agents}")
    expected_agents = set(range(1, inst.n_agents + 1))
    if set(inst.rankings) != expected_agents:
        raise InstanceError("rankings", f"need exactly agents {sorted(expected_agents)}, got {sorted(inst.rankings)}")
    for agent, ranking in inst.rankings.items():
        if set(ranking) != item_set or len(ranking) != len(inst.items):
            raise InstanceError(f"rankings.{agent}", "not a permutation of the item set")
    if set(inst.utility) != item_set:
        raise InstanceError("utilities", "must assign a value to exactly the item set")
    for item, value in inst.utility.items():
        if not isinstance(value, Fraction):
            raise InstanceError(f"utilities.{item}", f"expected an exact rational, got {type(value).__name__}")
        if value <= 0:
            raise InstanceError(f"utilities.{item}", f"utilities must be strictly positive, got {value}")
    ranking1 = inst.rankings[MANIPULATOR]
    for better, worse in zip(ranking1, ranking1[1:]):
        if not inst.utility[better] > inst.utility[worse]:
            raise InstanceError(
                f"utilities.{worse}",
                f"utility inconsistent with ranking: u({better})={inst.utility[better]} "
                f"must exceed u({worse})={inst.utility[worse]}",
            )


def make_instance(
    items: Iterable[Item],
    n_agents: int,
    policy: Iterable[Agent],
    rankings: Mapping[Agent, Iterable[Item]],
    utility: Mapping[Item, object],
) -> Instance:
    """Canonicalise raw fields into a validated :class:`Instance`.

    Items are stored sorted, rankings as tuples, and utility values are
    coerced to :class:`fractions.Fraction` (ints and "p/q" strings accepted).
    """
    try:
        coerced = {item: Fraction(v) for item, v in utility.items()}
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise InstanceError("utilities", f"unparseable rational: {exc}") from exc
    return Instance(
        items=tuple(sorted(items)),
        n_agents=n_agents,
        policy=tuple(policy),
        rankings={int(agent): tuple(r) for agent, r in rankings.items()},
        utility=coerced,
    )


def parse_instance(text: str) -> Instance:
    """Parse and validate an instance document (JSON, UTF-8).

    The document format::

        {
          "items": ["a", "b", "c"],
          "agents": 2,
          "policy": [1, 2, 1],
          "rankings": {"1": ["a", "b", "c"], "2": ["b", "c", "a"]},
          "utilities": {"a": "3", "b": "2", "c": "1"}
        }

    Utility values are decimal integers or "p/q" rational strings.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError("document", f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InstanceError("document", "top level must be an object")
    missing = _DOCUMENT_KEYS - set(doc)
    if missing:
        raise InstanceError("document", f"missing keys: {sorted(missing)}")
    unknown = set(doc) - _DOCUMENT_KEYS
    if unknown:
        raise InstanceError("document", f"unknown keys: {sorted(unknown)}")
    items = doc["items"]
    if not isinstance(items, list):
        raise InstanceError("items", "must be a list of item identifiers")
    if not isinstance(doc["agents"], int):
        raise InstanceError("agents", "must be an integer")
    if not isinstance(doc["policy"], list):
        raise InstanceError("policy", "must be a list of agent indices")
    if not isinstance(doc["rankings"], dict):
        raise InstanceError("rankings", "must be an object keyed by agent index")
    if not isinstance(doc["utilities"], dict):
        raise InstanceError("utilities", "must be an object keyed by item")
    rankings: dict[Agent, list[Item]] = {}
    for key, ranking in doc["rankings"].items():
        try:
            agent = int(key)
        except ValueError as exc:
            raise InstanceError(f"rankings.{key}", "agent keys must be integers") from exc
        if not isinstance(ranking, list):
            raise InstanceError(f"rankings.{key}", "ranking must be a list of items")
        rankings[agent] = ranking
    utilities: dict[Item, Fraction] = {}
    for item, raw in doc["utilities"].items():
        try:
            utilities[item] = Fraction(raw)
        except (ValueError, ZeroDivisionError, TypeError) as exc:
            raise InstanceError(f"utilities.{item}", f"unparseable rational {raw!r}") from exc
    return make_instance(items, doc["agents"], doc["policy"], rankings, utilities)


def serialize_instance(inst: Instance) -> str:
    """Canonical JSON for an instance: sorted keys, reduced rationals."""
    doc = {
        "items": list(inst.items),
        "agents": inst.n_agents,
        "policy": list(inst.policy),
        "rankings": {str(agent): list(r) for agent, r in inst.rankings.items()},
        "utilities": {item: str(value) for item, value in inst.utility.items()},
    }
    return json.dumps(doc, sort_keys=True, indent=2)


def generate_random_instance(n_agents: int, n_items: int, seed: int) -> Instance:
    """Deterministic random instance: uniform rankings and policy.

    The manipulator's utilities are the integers ``n_items .. 1`` assigned
    along its ranking; magnitudes do not matter to the ordinal agents.
    """
    if n_agents < 1:
        raise InstanceError("agents", "need at least one agent")
    if n_items < 0:
        raise InstanceError("items", "item count must be non-negative")
    rng = random.Random(seed)
    items = [f"g{i}" for i in range(1, n_items + 1)]
    rankings = {
        agent: tuple(rng.sample(items, len(items)))
        for agent in range(1, n_agents + 1)
    }
    policy = tuple(rng.randrange(1, n_agents + 1) for _ in range(n_items))
    utility = {
        item: Fraction(n_items - pos)
        for pos, item in enumerate(rankings[MANIPULATOR])
    }
    return make_instance(items, n_agents, policy, rankings, utility)


def generate_tightness_instance(k: int) -> Instance:
    """The three-item family whose truthful/optimal ratio approaches 1/2.

    With ``eps = 1/k`` the manipulator values the items 1, 1-eps, eps; the
    policy is 121.  Requires ``k >= 3`` so the two cheap items keep strictly
    different utilities.
    """
    if k < 3:
        raise InstanceError("k", "need k >= 3: k = 2 would give two items equal utility 1/2")
    eps = Fraction(1, k)
    return make_instance(
        items=["g1", "g2", "g3"],
        n_agents=2,
        policy=[1, 2, 1],
        rankings={1: ["g1", "g2", "g3"], 2: ["g2", "g3", "g1"]},
        utility={"g1": Fraction(1), "g2": 1 - eps, "g3": eps},
    )
