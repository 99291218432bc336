"""Belief hierarchies, their canonical encodings and partition refinement."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .coalg import Agent, Coalgebra, Type
from .measure import CPS, ConditionalSpace, Verdict

# (event label, ((θ index, opponent digests), mass), ...)
Payload = Tuple[Tuple[str, Tuple[Tuple[Tuple[int, Tuple[str, ...]], Fraction], ...]], ...]


class Description:
    """One type's hierarchy up to some depth, hash-consed by its digest.

    Level ``k+1`` stores, per conditioning event, the belief pushed onto
    ``Θ × (opponents' level-k descriptions)``, with opponents referenced by
    digest.  Equal descriptions are the same object.
    """

    __slots__ = ("depth", "parent", "payload", "digest", "__weakref__")

    _table: Dict[str, "Description"] = {}

    def __new__(cls, parent: Optional["Description"], payload: Payload):
        h = hashlib.blake2b(digest_size=16)
        h.update(parent.digest.encode() if parent is not None else b"unit")
        h.update(repr(payload).encode())
        digest = h.hexdigest()
        found = cls._table.get(digest)
        if found is not None:
            return found
        self = super().__new__(cls)
        self.depth = 0 if parent is None else parent.depth + 1
        self.parent = parent
        self.payload = payload
        self.digest = digest
        return cls._table.setdefault(digest, self)

    def level(self, k: int) -> Payload:
        """The belief payload added at level `k` (``1 ≤ k ≤ depth``)."""
        return truncate_description(self, k).payload

    def __reduce__(self):
        return (Description, (self.parent, self.payload))

    def __repr__(self):
        return f"Description(depth={self.depth}, {self.digest[:10]})"


UNIT = Description(None, ())


def truncate_description(d: Description, depth: int) -> Description:
    if depth > d.depth or depth < 0:
        raise ValueError(f"cannot truncate a depth-{d.depth} description to depth {depth}")
    while d.depth > depth:
        d = d.parent
    return d


def describe_belief(base: ConditionalSpace, nu: CPS, opponent_maps: Sequence[Mapping[Type, Description]]) -> Payload:
    """Canonical form of `nu` pushed forward along opponents' descriptions."""
    out = []
    for ev in base.events:
        acc: Dict[Tuple[int, Tuple[str, ...]], Fraction] = {}
        for (theta, prof), w in nu.given(ev.label).items():
            key = (base.index(theta), tuple(m[t].digest for m, t in zip(opponent_maps, prof)))
            acc[key] = acc.get(key, Fraction(0)) + w
        out.append((ev.label, tuple(sorted((k, v) for k, v in acc.items() if v))))
    return tuple(out)


def _levels(structure: Coalgebra, depth: int) -> List[Dict[Agent, Dict[Type, Description]]]:
    levels = structure._levels
    if not levels:
        levels.append({i: {t: UNIT for t in ts} for i, ts in structure.carriers.items()})
    while len(levels) <= depth:
        prev = levels[-1]
        nxt = {}
        for i in structure.agents:
            opp = [prev[j] for j in structure.opponents(i)]
            nxt[i] = {t: Description(prev[i][t], describe_belief(structure.base, structure.beliefs[i][t], opp))
                      for t in structure.carriers[i]}
        levels.append(nxt)
    return levels


def hierarchy_level(structure: Coalgebra, agent: Agent, depth: int) -> Dict[Type, Description]:
    """Depth-`depth` hierarchy description of every type of `agent`."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    return dict(_levels(structure, depth)[depth][agent])


def hierarchy_levels(structure: Coalgebra, depth: int) -> Dict[Agent, Dict[Type, Description]]:
    return {i: dict(m) for i, m in _levels(structure, depth)[depth].items()}


def class_ids(structure: Coalgebra, agent: Agent, depth: int) -> List[Dict[Type, int]]:
    """Per level ``0..depth``, dense class ids in first-seen type order."""
    out = []
    for k in range(depth + 1):
        seen: Dict[str, int] = {}
        ids = {}
        for t, d in hierarchy_level(structure, agent, k).items():
            ids[t] = seen.setdefault(d.digest, len(seen))
        out.append(ids)
    return out


@dataclass
class HierarchyPartition:
    blocks: Dict[Agent, Tuple[Tuple[Type, ...], ...]]
    depth: int

    def block_of(self, agent: Agent, t: Type) -> Tuple[Type, ...]:
        for b in self.blocks[agent]:
            if t in b:
                return b
        raise KeyError(t)

    def is_discrete(self) -> bool:
        return all(len(b) == 1 for bs in self.blocks.values() for b in bs)


def _blocks(classes: Mapping[Agent, Mapping[Type, int]]) -> Dict[Agent, Tuple[Tuple[Type, ...], ...]]:
    out = {}
    for i, ids in classes.items():
        groups: Dict[int, List[Type]] = {}
        for t, c in ids.items():
            groups.setdefault(c, []).append(t)
        out[i] = tuple(tuple(g) for g in groups.values())
    return out


def refine_to_fixed_point(structure: Coalgebra) -> HierarchyPartition:
    """Split types by one-step behaviour over the current opponent classes.

    Stops as soon as a round produces no split or the partition is
    discrete; the reported depth is the number of rounds run.
    """
    classes = {i: {t: 0 for t in ts} for i, ts in structure.carriers.items()}
    count = len(structure.agents)
    depth = 0
    base = structure.base
    while count < structure.size():
        nxt = {}
        for i in structure.agents:
            opp = [classes[j] for j in structure.opponents(i)]
            seen: Dict[tuple, int] = {}
            ids = {}
            for t in structure.carriers[i]:
                sig = [classes[i][t]]
                for ev in base.events:
                    acc: Dict[tuple, Fraction] = {}
                    for (theta, prof), w in structure.beliefs[i][t].given(ev.label).items():
                        key = (base.index(theta),) + tuple(c[u] for c, u in zip(opp, prof))
                        acc[key] = acc.get(key, Fraction(0)) + w
                    sig.append(tuple(sorted(acc.items())))
                ids[t] = seen.setdefault(tuple(sig), len(seen))
            nxt[i] = ids
        depth += 1
        new_count = sum(len(set(ids.values())) for ids in nxt.values())
        classes = nxt
        if new_count == count:
            break
        count = new_count
    return HierarchyPartition(_blocks(classes), depth)


def is_non_redundant(structure: Coalgebra) -> Verdict:
    """Discreteness of the stable partition; witness ``(agent, t, t')``."""
    part = refine_to_fixed_point(structure)
    for i in structure.agents:
        for b in part.blocks[i]:
            if len(b) > 1:
                return Verdict(False, (i, b[0], b[1]))
    return Verdict(True)


def joint_stabilization_depth(structures: Iterable[Coalgebra]) -> int:
    """Rounds needed before descriptions stop splitting across all inputs.

    Computed on description digests, so types of different structures are
    compared with each other as in their disjoint union.
    """
    structures = list(structures)
    agents = structures[0].agents
    total = sum(s.size() for s in structures)

    def count(k):
        return sum(len({d.digest for s in structures for d in hierarchy_level(s, i, k).values()})
                   for i in agents)

    k = 0
    c = count(0)
    while c < total:
        c_next = count(k + 1)
        k += 1
        if c_next == c:
            break
        c = c_next
    return k
