"""Type structures read as coalgebras of the CPS functor.

A :class:`Coalgebra` assigns to every type of agent ``i`` a CPS over
``Θ × T_{-i}``.  Opponent profiles are always tuples of types in agent
order, so with two agents an atom looks like ``(θ, (u,))``.
"""
from __future__ import annotations

from itertools import product
from typing import Dict, Hashable, List, Mapping, Sequence, Tuple

from .measure import (CPS, ConditionalSpace, ProbabilityMeasure, ProductSpace,
                      StructureMismatch, Verdict, cps_from_prior, lift_space, pushforward_cps,
                      validate_cps)

Agent = Hashable
Type = Hashable
Morphism = Mapping[Agent, Mapping[Type, Type]]


class InvalidStructure(ValueError):
    def __init__(self, problems: List[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


class Coalgebra:
    """Per-agent finite carriers with belief maps into CPSs.

    With ``check=True`` (the default) construction fails unless every
    carrier is nonempty and every belief is a CPS over the right space.
    """

    def __init__(self, base: ConditionalSpace, carriers: Mapping[Agent, Sequence[Type]],
                 beliefs: Mapping[Agent, Mapping[Type, CPS]], check: bool = True):
        self.base = base
        self.agents: Tuple[Agent, ...] = tuple(carriers)
        self.carriers: Dict[Agent, Tuple[Type, ...]] = {i: tuple(ts) for i, ts in carriers.items()}
        self.beliefs: Dict[Agent, Dict[Type, CPS]] = {i: dict(beliefs.get(i, {})) for i in self.agents}
        self._spaces: Dict[Agent, ProductSpace] = {}
        self._levels: list = []
        if check:
            problems = self.problems()
            if problems:
                raise InvalidStructure(problems)

    @classmethod
    def from_weights(cls, base: ConditionalSpace, carriers: Mapping[Agent, Sequence[Type]],
                     weights: Mapping[Agent, Mapping[Type, Mapping[str, Mapping]]],
                     check: bool = True) -> "Coalgebra":
        """Build beliefs from ``{agent: {type: {event: {(θ, opp): p}}}}``.

        A bare opponent type is accepted in place of a one-element tuple.
        """
        skeleton = cls(base, carriers, {}, check=False)
        beliefs = {}
        for i in skeleton.agents:
            space = skeleton.belief_space(i)
            beliefs[i] = {}
            for t, conds in weights.get(i, {}).items():
                beliefs[i][t] = CPS(space, {
                    label: {(theta, opp if isinstance(opp, tuple) else (opp,)): p
                            for (theta, opp), p in m.items()}
                    for label, m in conds.items()})
        return cls(base, carriers, beliefs, check=check)

    @classmethod
    def from_priors(cls, base: ConditionalSpace, carriers: Mapping[Agent, Sequence[Type]],
                    priors: Mapping[Agent, Mapping[Type, Mapping]], check: bool = True) -> "Coalgebra":
        """Beliefs obtained by conditioning one prior per type on every event."""
        skeleton = cls(base, carriers, {}, check=False)
        beliefs = {}
        for i in skeleton.agents:
            space = skeleton.belief_space(i)
            beliefs[i] = {}
            for t, prior in priors.get(i, {}).items():
                prior = prior if isinstance(prior, ProbabilityMeasure) else ProbabilityMeasure(
                    {(theta, opp if isinstance(opp, tuple) else (opp,)): p
                     for (theta, opp), p in prior.items()})
                beliefs[i][t] = cps_from_prior(space, prior)
        return cls(base, carriers, beliefs, check=check)

    def opponents(self, agent: Agent) -> Tuple[Agent, ...]:
        return tuple(j for j in self.agents if j != agent)

    def opponent_profiles(self, agent: Agent) -> List[Tuple[Type, ...]]:
        return list(product(*(self.carriers[j] for j in self.opponents(agent))))

    def belief_space(self, agent: Agent) -> ProductSpace:
        if agent not in self._spaces:
            self._spaces[agent] = lift_space(self.base, self.opponent_profiles(agent))
        return self._spaces[agent]

    def problems(self) -> List[str]:
        out = []
        if not self.agents:
            out.append("no agents")
        for i in self.agents:
            ts = self.carriers[i]
            if not ts:
                out.append(f"agent {i}: empty carrier")
                continue
            if len(set(ts)) != len(ts):
                out.append(f"agent {i}: duplicate types")
            extra = [t for t in self.beliefs[i] if t not in ts]
            if extra:
                out.append(f"agent {i}: beliefs for unknown types {extra!r}")
        if out:
            return out
        for i in self.agents:
            space = self.belief_space(i)
            for t in self.carriers[i]:
                if t not in self.beliefs[i]:
                    out.append(f"agent {i}, type {t}: missing belief")
                    continue
                nu = self.beliefs[i][t]
                if nu.space != space:
                    out.append(f"agent {i}, type {t}: belief is not over Θ × T_-i")
                    continue
                report = validate_cps(space, nu)
                out += [f"agent {i}, type {t}: {line}" for line in report.lines()]
        return out

    def size(self) -> int:
        return sum(len(ts) for ts in self.carriers.values())

    def __repr__(self):
        sizes = ", ".join(f"{i}: {len(ts)}" for i, ts in self.carriers.items())
        return f"Coalgebra({sizes})"


def _check_shapes(mu: Morphism, source: Coalgebra, target: Coalgebra) -> None:
    if source.base != target.base:
        raise StructureMismatch("source and target are built on different base spaces")
    if source.agents != target.agents:
        raise StructureMismatch("source and target have different agents")
    for i in source.agents:
        if i not in mu:
            raise StructureMismatch(f"morphism has no component for agent {i!r}")
        m = mu[i]
        for t in source.carriers[i]:
            if t not in m:
                raise StructureMismatch(f"morphism is undefined on type {t!r} of agent {i!r}")
            if m[t] not in target.carriers[i]:
                raise StructureMismatch(f"morphism sends {t!r} to {m[t]!r}, not a type of agent {i!r}")
        stray = [t for t in m if t not in source.carriers[i]]
        if stray:
            raise StructureMismatch(f"morphism mentions unknown types {stray!r} of agent {i!r}")


def profile_map(mu: Morphism, source: Coalgebra, agent: Agent):
    """The atom map ``(θ, t_-i) ↦ (θ, μ_-i(t_-i))``."""
    comps = [mu[j] for j in source.opponents(agent)]

    def f(atom):
        theta, prof = atom
        return theta, tuple(m[t] for m, t in zip(comps, prof))
    return f


def functor_on_morphism(mu: Morphism, source: Coalgebra, target: Coalgebra):
    """Per agent, the map on CPSs induced by ``(id_Θ, μ_-i)``."""
    _check_shapes(mu, source, target)
    out = {}
    for i in source.agents:
        f = profile_map(mu, source, i)
        space = target.belief_space(i)
        out[i] = (lambda f, space: lambda nu: pushforward_cps(f, nu, space))(f, space)
    return out


def check_coalgebra_morphism(mu: Morphism, source: Coalgebra, target: Coalgebra) -> Verdict:
    """Exact check of ``β'_i ∘ μ_i = (id, μ_-i)^ ∘ β_i``.

    The witness is ``(agent, type, event, atom, expected, actual)`` for the
    first failure in agent, type, event, atom order, where `expected` is
    the pushed-forward source mass and `actual` the target mass.
    """
    _check_shapes(mu, source, target)
    for i in source.agents:
        f = profile_map(mu, source, i)
        space = target.belief_space(i)
        for t in source.carriers[i]:
            pushed = pushforward_cps(f, source.beliefs[i][t], space, check=False)
            actual = target.beliefs[i][mu[i][t]]
            if pushed == actual:
                continue
            for ev in space.events:
                p, a = pushed.given(ev.label), actual.given(ev.label)
                if p == a:
                    continue
                for atom in space.points:
                    if p[atom] != a[atom]:
                        return Verdict(False, (i, t, ev.label, atom, p[atom], a[atom]))
    return Verdict(True)


def identity_morphism(structure: Coalgebra) -> Dict[Agent, Dict[Type, Type]]:
    return {i: {t: t for t in ts} for i, ts in structure.carriers.items()}


def compose(second: Morphism, first: Morphism) -> Dict[Agent, Dict[Type, Type]]:
    """``second ∘ first``."""
    return {i: {t: second[i][u] for t, u in m.items()} for i, m in first.items()}


def is_isomorphism(mu: Morphism, source: Coalgebra, target: Coalgebra) -> bool:
    if not check_coalgebra_morphism(mu, source, target):
        return False
    inverse = {}
    for i in source.agents:
        m = mu[i]
        if len(set(m.values())) != len(m) or len(m) != len(target.carriers[i]):
            return False
        inverse[i] = {u: t for t, u in m.items()}
    return bool(check_coalgebra_morphism(inverse, target, source))
