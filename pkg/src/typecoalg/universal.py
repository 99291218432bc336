"""Quotients to non-redundant structures and finite fragments of the universal carrier."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .coalg import (Agent, Coalgebra, Morphism, Type, check_coalgebra_morphism,
                    profile_map)
from .hierarchy import (Description, describe_belief, hierarchy_level, joint_stabilization_depth,
                        refine_to_fixed_point, truncate_description)
from .measure import CPS, StructureMismatch, pushforward_cps


class FragmentError(ValueError):
    pass


class FragmentDepthError(FragmentError):
    def __init__(self, depth, required):
        super().__init__(f"materialization depth {depth} is below the required depth {required}")
        self.depth = depth
        self.required = required


class UnmaterializedHierarchy(FragmentError):
    def __init__(self, agent, t, reason="its hierarchy does not occur in the fragment"):
        super().__init__(f"agent {agent!r}, type {t!r}: {reason}")
        self.agent = agent
        self.type = t


@dataclass
class QuotientResult:
    quotient: Coalgebra
    projection: Dict[Agent, Dict[Type, Type]]


def _pushed_structure(structure: Coalgebra, carriers, mu, reps) -> Coalgebra:
    """Coalgebra on `carriers` whose element ``r`` believes ``(id, μ_-i)^ β(reps[r])``."""
    target = Coalgebra(structure.base, carriers, {}, check=False)
    beliefs = {}
    for i in structure.agents:
        f = profile_map(mu, structure, i)
        space = target.belief_space(i)
        beliefs[i] = {r: pushforward_cps(f, structure.beliefs[i][reps[i][r]], space, check=False)
                      for r in carriers[i]}
    return Coalgebra(structure.base, carriers, beliefs)


def quotient(structure: Coalgebra) -> QuotientResult:
    """Merge hierarchy-equivalent types; each block is named by its first member."""
    part = refine_to_fixed_point(structure)
    carriers, proj, reps = {}, {}, {}
    for i in structure.agents:
        carriers[i] = [b[0] for b in part.blocks[i]]
        reps[i] = {b[0]: b[0] for b in part.blocks[i]}
        proj[i] = {t: b[0] for b in part.blocks[i] for t in b}
    q = _pushed_structure(structure, carriers, proj, reps)
    verdict = check_coalgebra_morphism(proj, structure, q)
    if not verdict:
        raise AssertionError(f"projection onto the quotient does not commute: {verdict.witness}")
    return QuotientResult(q, proj)


@dataclass
class FragmentReport:
    issues: List[Tuple[str, tuple]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def lines(self) -> List[str]:
        return [f"{kind}: {' '.join(map(str, where))}" for kind, where in self.issues]


class UniversalFragment:
    """Hierarchy streams reachable from some finite structures, with their transition.

    Elements are depth-`depth` :class:`Description` objects; each carries
    a label (``"<input index>:<type>"`` of its first generator) and the
    list of (input index, type) pairs that generate it.
    """

    def __init__(self, base, agents, depth, elements, labels, provenance, transitions):
        self.base = base
        self.agents = tuple(agents)
        self.depth = depth
        self.elements: Dict[Agent, Tuple[Description, ...]] = elements
        self.labels: Dict[Agent, Dict[Description, str]] = labels
        self.provenance: Dict[Agent, Dict[Description, List[Tuple[int, Type]]]] = provenance
        self.transitions: Dict[Agent, Dict[str, CPS]] = transitions
        self._coalgebra: Optional[Coalgebra] = None

    def element(self, agent: Agent, label: str) -> Description:
        for d, lab in self.labels[agent].items():
            if lab == label:
                return d
        raise KeyError(label)

    def carriers(self) -> Dict[Agent, List[str]]:
        return {i: [self.labels[i][d] for d in self.elements[i]] for i in self.agents}

    def as_coalgebra(self, check: bool = True) -> Coalgebra:
        if self._coalgebra is None:
            self._coalgebra = Coalgebra(self.base, self.carriers(), self.transitions, check=check)
        return self._coalgebra

    def with_transition(self, agent: Agent, label: str, nu: CPS) -> "UniversalFragment":
        """Copy with one transition replaced; no checks are run."""
        trans = {i: dict(m) for i, m in self.transitions.items()}
        trans[agent][label] = nu
        return UniversalFragment(self.base, self.agents, self.depth, self.elements, self.labels,
                                 self.provenance, trans)

    def _canonical(self):
        maps = [{lab: d for d, lab in self.labels[i].items()} for i in self.agents]
        out = []
        for k, i in enumerate(self.agents):
            opp = [maps[j] for j, a in enumerate(self.agents) if a != i]
            out.append(tuple((d, describe_belief(self.base, self.transitions[i][self.labels[i][d]], opp))
                             for d in self.elements[i]))
        return (self.base, self.depth, tuple(out))

    def __eq__(self, other):
        if not isinstance(other, UniversalFragment):
            return NotImplemented
        return self._canonical() == other._canonical()

    def size(self) -> int:
        return sum(len(e) for e in self.elements.values())

    def __repr__(self):
        sizes = ", ".join(f"{i}: {len(self.elements[i])}" for i in self.agents)
        return f"UniversalFragment(depth={self.depth}, {sizes})"


def build_fragment(structures: Sequence[Coalgebra], depth: Optional[int] = None) -> UniversalFragment:
    """Carve the hierarchy streams of all `structures` out of the universal carrier.

    `depth` defaults to the joint stabilization depth of the inputs and may
    not be smaller.  The transition of an element is the pushforward of any
    generator's belief along the opponents' hierarchy maps; every generator
    is checked to give the same answer.
    """
    structures = list(structures)
    if not structures:
        raise FragmentError("at least one structure is needed")
    base, agents = structures[0].base, structures[0].agents
    for s in structures[1:]:
        if s.base != base:
            raise StructureMismatch("input structures are built on different base spaces")
        if s.agents != agents:
            raise StructureMismatch("input structures have different agents")
    required = joint_stabilization_depth(structures)
    if depth is None:
        depth = required
    elif depth < required:
        raise FragmentDepthError(depth, required)

    elements = {i: [] for i in agents}
    labels = {i: {} for i in agents}
    provenance = {i: {} for i in agents}
    hmaps = []
    for k, s in enumerate(structures):
        hm = {i: hierarchy_level(s, i, depth) for i in agents}
        hmaps.append(hm)
        for i in agents:
            for t in s.carriers[i]:
                d = hm[i][t]
                if d not in labels[i]:
                    labels[i][d] = f"{k}:{t}"
                    elements[i].append(d)
                    provenance[i][d] = []
                provenance[i][d].append((k, t))

    carriers = {i: [labels[i][d] for d in elements[i]] for i in agents}
    skeleton = Coalgebra(base, carriers, {}, check=False)
    transitions = {i: {} for i in agents}
    for i in agents:
        space = skeleton.belief_space(i)
        for d in elements[i]:
            lab = labels[i][d]
            for k, t in provenance[i][d]:
                s = structures[k]
                mu = {j: {u: labels[j][hmaps[k][j][u]] for u in s.carriers[j]} for j in agents}
                nu = pushforward_cps(profile_map(mu, s, i), s.beliefs[i][t], space, check=False)
                prev = transitions[i].setdefault(lab, nu)
                if prev != nu:
                    raise FragmentError(
                        f"generators of element {lab} disagree on its transition ({k}:{t})")
    frag = UniversalFragment(base, agents, depth, {i: tuple(e) for i, e in elements.items()},
                             labels, provenance, transitions)
    frag.as_coalgebra()
    return frag


def terminal_map(structure: Coalgebra, fragment: UniversalFragment) -> Dict[Agent, Dict[Type, str]]:
    """The type morphism sending each type to its hierarchy stream in `fragment`."""
    if structure.base != fragment.base or structure.agents != fragment.agents:
        raise StructureMismatch("structure and fragment are built on different spaces")
    out = {}
    for i in structure.agents:
        out[i] = {}
        for t, d in hierarchy_level(structure, i, fragment.depth).items():
            if d not in fragment.labels[i]:
                raise UnmaterializedHierarchy(i, t)
            out[i][t] = fragment.labels[i][d]
    verdict = check_coalgebra_morphism(out, structure, fragment.as_coalgebra())
    if not verdict:
        i, t = verdict.witness[:2]
        raise UnmaterializedHierarchy(i, t, "fragment depth is too shallow to separate its hierarchy")
    return out


def check_uniqueness(structure: Coalgebra, fragment: UniversalFragment, candidate: Morphism) -> bool:
    """Whether a morphism into `fragment` is the terminal map."""
    if not check_coalgebra_morphism(candidate, structure, fragment.as_coalgebra()):
        raise ValueError("candidate is not a coalgebra morphism into the fragment")
    expected = terminal_map(structure, fragment)
    return all(dict(candidate[i]) == expected[i] for i in structure.agents)


def fragment_transition_checks(fragment: UniversalFragment) -> FragmentReport:
    """Shift compatibility, self-identity of hierarchies, and transition injectivity."""
    report = FragmentReport()
    agents = fragment.agents
    by_label = {i: {lab: d for d, lab in fragment.labels[i].items()} for i in agents}
    for i in agents:
        opp_agents = [j for j in agents if j != i]
        for d in fragment.elements[i]:
            lab = fragment.labels[i][d]
            nu = fragment.transitions[i][lab]
            for n in range(fragment.depth):
                opp = [{l: truncate_description(e, n) for l, e in by_label[j].items()} for j in opp_agents]
                got = describe_belief(fragment.base, nu, opp)
                want = truncate_description(d, n + 1).payload
                if got != want:
                    bad = next(g[0] for g, w in zip(got, want) if g != w)
                    report.issues.append(("shift", (i, lab, n + 1, bad)))
                    break
    coalgebra = fragment.as_coalgebra(check=False)
    problems = coalgebra.problems()
    if problems:
        report.issues += [("invalid", (p,)) for p in problems]
        return report
    for i in agents:
        recomputed = hierarchy_level(coalgebra, i, fragment.depth)
        for d in fragment.elements[i]:
            lab = fragment.labels[i][d]
            if recomputed[lab] is not d:
                report.issues.append(("identity", (i, lab)))
    for i in agents:
        seen = {}
        for d in fragment.elements[i]:
            lab = fragment.labels[i][d]
            other = seen.setdefault(fragment.transitions[i][lab], lab)
            if other != lab:
                report.issues.append(("injectivity", (i, other, lab)))
    return report
