"""Dynamic games with simultaneous moves, and the conditioning events they induce.

Histories are tuples of action profiles; a profile lists one action per
player in player order.  Every player acts at every non-terminal history,
an inactive player having a single available action.  A strategy is the
tuple of actions a player picks at her information sets, in declaration
order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

from .coalg import Coalgebra, check_coalgebra_morphism
from .measure import (CPS, ConditionalSpace, ProbabilityMeasure, ProductSpace, Verdict,
                      cps_from_prior, lift_space, marginal)

History = Tuple[Tuple[str, ...], ...]
Strategy = Tuple[str, ...]
ROOT: History = ()


class GameError(ValueError):
    pass


class UnreachableInformationSet(GameError):
    def __init__(self, player, label):
        super().__init__(f"information set {label!r} of player {player!r} is not allowed by any "
                         "strategy profile, so it cannot be a conditioning event")
        self.player = player
        self.label = label


@dataclass(frozen=True, eq=False)
class ExtensiveGame:
    players: Tuple[str, ...]
    payoff_types: Mapping[str, Tuple[str, ...]]
    histories: Tuple[History, ...]
    actions: Mapping[History, Mapping[str, Tuple[str, ...]]]
    information_sets: Mapping[str, Mapping[str, Tuple[History, ...]]]
    utilities: Mapping[str, Mapping[tuple, Fraction]] = field(default_factory=dict)

    def children(self, x: History) -> List[History]:
        return [y for y in self.histories if len(y) == len(x) + 1 and y[:-1] == x]

    def is_terminal(self, x: History) -> bool:
        return not self.children(x)

    @property
    def terminals(self) -> Tuple[History, ...]:
        return tuple(x for x in self.histories if self.is_terminal(x))

    def info_set_of(self, player: str, x: History) -> Optional[str]:
        for label, xs in self.information_sets.get(player, {}).items():
            if x in xs:
                return label
        return None

    def available(self, player: str, label: str) -> Tuple[str, ...]:
        x = self.information_sets[player][label][0]
        return tuple(self.actions[x][player])

    def index(self, player: str) -> int:
        return self.players.index(player)


@dataclass
class GameReport:
    issues: List[Tuple[str, object, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def add(self, kind, witness, detail):
        self.issues.append((kind, witness, detail))

    def lines(self) -> List[str]:
        return [f"{kind} {format_history(w) if isinstance(w, tuple) else w}: {detail}"
                for kind, w, detail in self.issues]


def format_history(x: History) -> str:
    return "/".join(",".join(p) for p in x)


def validate_game(g: ExtensiveGame) -> GameReport:
    """Structural checks on the tree, the information sets and perfect recall."""
    rep = GameReport()
    n = len(g.players)
    if not n or len(set(g.players)) != n:
        rep.add("players", g.players, "players must be nonempty and distinct")
        return rep
    for i in g.players:
        if not g.payoff_types.get(i):
            rep.add("payoff-types", i, "every player needs a nonempty set of payoff types")
    hs = set(g.histories)
    if len(hs) != len(g.histories):
        rep.add("histories", None, "duplicate histories")
    if ROOT not in hs:
        rep.add("root", ROOT, "the empty history is missing")
    for x in g.histories:
        if any(len(p) != n for p in x):
            rep.add("profile-width", x, f"every profile needs {n} actions")
        elif x and x[:-1] not in hs:
            rep.add("prefix", x, "parent history is missing")
    if not rep.ok:
        return rep
    for x in g.histories:
        kids = {y[-1] for y in g.children(x)}
        acts = g.actions.get(x)
        if not kids:
            if acts:
                rep.add("terminal-actions", x, "terminal history declares available actions")
            continue
        if acts is None:
            rep.add("missing-actions", x, "non-terminal history has no available actions")
            continue
        if any(not acts.get(i) for i in g.players):
            rep.add("empty-actions", x, "some player has no available action")
            continue
        feasible = set(product(*(acts[i] for i in g.players)))
        for a in sorted(kids - feasible):
            rep.add("infeasible-profile", x + (a,), "profile is not available at its parent")
        for a in sorted(feasible - kids):
            rep.add("missing-successor", x + (a,), "available profile has no successor history")
    for x in g.actions:
        if x not in hs:
            rep.add("unknown-history", x, "actions declared for an unknown history")
    if not rep.ok:
        return rep
    for i in g.players:
        covered: Dict[History, str] = {}
        for label, xs in g.information_sets.get(i, {}).items():
            if not xs:
                rep.add("empty-info-set", label, f"information set of player {i} is empty")
                continue
            for x in xs:
                if x not in hs or g.is_terminal(x):
                    rep.add("info-set-history", x, f"{i}:{label} contains a non-decision history")
                elif x in covered:
                    rep.add("overlap", x, f"history is in {i}:{covered[x]} and {i}:{label}")
                else:
                    covered[x] = label
            good = [x for x in xs if x in hs and not g.is_terminal(x)]
            if len({tuple(g.actions[x][i]) for x in good}) > 1:
                rep.add("availability", label, f"histories of {i}:{label} offer different actions")
        for x in g.histories:
            if not g.is_terminal(x) and len(g.actions[x][i]) >= 2 and x not in covered:
                rep.add("uncovered", x, f"player {i} is active but has no information set here")
    if not rep.ok:
        return rep
    for i in g.players:
        k = g.index(i)
        for label, xs in g.information_sets.get(i, {}).items():
            exps = {_experience(g, i, k, x) for x in xs}
            if len(exps) > 1:
                rep.add("perfect-recall", label, f"histories of {i}:{label} differ in {i}'s own experience")
    if rep.ok and g.utilities:
        atoms = set(xi_atoms(g))
        for i, table in g.utilities.items():
            if i not in g.players:
                rep.add("utility-player", i, "utilities for an unknown player")
                continue
            for atom in table:
                if atom not in atoms:
                    rep.add("utility-atom", str(atom), f"utility of {i} indexed by a non-profile")
    return rep


def _experience(g: ExtensiveGame, player: str, k: int, x: History):
    return tuple((g.info_set_of(player, x[:m]), x[m][k]) for m in range(len(x))
                 if g.info_set_of(player, x[:m]) is not None)


def strategies(g: ExtensiveGame, player: str) -> List[Strategy]:
    sets = [g.available(player, label) for label in g.information_sets.get(player, {})]
    return list(product(*sets))


def profiles(g: ExtensiveGame) -> List[Tuple[Strategy, ...]]:
    return list(product(*(strategies(g, i) for i in g.players)))


def play_out(g: ExtensiveGame, profile: Sequence[Strategy]) -> History:
    """The terminal history reached when everybody follows `profile`."""
    labels = {i: list(g.information_sets.get(i, {})) for i in g.players}
    x: History = ROOT
    while not g.is_terminal(x):
        step = []
        for k, i in enumerate(g.players):
            label = g.info_set_of(i, x)
            step.append(profile[k][labels[i].index(label)] if label is not None else g.actions[x][i][0])
        x = x + (tuple(step),)
    return x


def _consistent(g: ExtensiveGame, player: str, x: History) -> List[Strategy]:
    """Strategies of `player` that take her actions along `x`."""
    k = g.index(player)
    labels = list(g.information_sets.get(player, {}))
    fixed = {}
    for m in range(len(x)):
        label = g.info_set_of(player, x[:m])
        if label is None:
            continue
        if fixed.setdefault(label, x[m][k]) != x[m][k]:
            return []
    return [s for s in strategies(g, player)
            if all(s[labels.index(lab)] == a for lab, a in fixed.items())]


@dataclass
class AllowingSet:
    profiles: List[Tuple[Strategy, ...]]
    slices: Dict[str, List[Strategy]]

    @property
    def degenerate(self) -> bool:
        return not self.profiles


def allowing_set(g: ExtensiveGame, player: str, label: str) -> AllowingSet:
    """``S(h)`` for information set `label` of `player`, with its coordinate projections."""
    try:
        xs = g.information_sets[player][label]
    except KeyError:
        raise GameError(f"unknown information set {player}:{label}") from None
    found = set()
    for x in xs:
        found.update(product(*(_consistent(g, i, x) for i in g.players)))
    order = {i: {s: n for n, s in enumerate(strategies(g, i))} for i in g.players}
    key = lambda prof: tuple(order[i][s] for i, s in zip(g.players, prof))
    profs = sorted(found, key=key)
    slices = {}
    for k, i in enumerate(g.players):
        slices[i] = sorted({p[k] for p in profs}, key=order[i].__getitem__)
    return AllowingSet(profs, slices)


def xi_atoms(g: ExtensiveGame) -> List[tuple]:
    """``Ξ = Π_i Θ_i × S_i`` as tuples of (payoff type, strategy) pairs."""
    per = [list(product(g.payoff_types[i], strategies(g, i))) for i in g.players]
    return list(product(*per))


@dataclass(frozen=True)
class GameEvent:
    player: str
    label: str
    info_sets: Tuple[str, ...]
    opponent_profiles: frozenset   # Θ_-i × S_-i(h), as tuples over the other players
    members: frozenset             # the same set lifted into Ξ


def conditioning_family(g: ExtensiveGame, player: str) -> List[GameEvent]:
    """``{Ξ_-i(h) : h ∈ H_i}``; information sets with equal events share one entry."""
    k = g.index(player)
    others = [j for j in g.players if j != player]
    groups: Dict[frozenset, List[str]] = {}
    for label in g.information_sets.get(player, {}):
        allowed = allowing_set(g, player, label)
        if allowed.degenerate:
            raise UnreachableInformationSet(player, label)
        s_opp = {p[:k] + p[k + 1:] for p in allowed.profiles}
        opp = frozenset(tuple(zip(thetas, s)) for s in s_opp
                        for thetas in product(*(g.payoff_types[j] for j in others)))
        groups.setdefault(opp, []).append(label)
    out = []
    atoms = xi_atoms(g)
    for opp, labels in groups.items():
        members = frozenset(a for a in atoms if a[:k] + a[k + 1:] in opp)
        out.append(GameEvent(player, f"{player}:{min(labels)}", tuple(labels), opp, members))
    return out


def game_events(g: ExtensiveGame) -> List[Tuple[str, frozenset, Tuple[str, ...]]]:
    """Every player's events, with equal sets merged across players.

    Each entry is ``(label, members, provenance)``; a merged event keeps the
    least of its labels and lists all of them as provenance.
    """
    merged: Dict[frozenset, List[str]] = {}
    for i in g.players:
        for e in conditioning_family(g, i):
            merged.setdefault(e.members, []).extend(f"{i}:{lab}" for lab in e.info_sets)
    return [(min(labs), members, tuple(labs)) for members, labs in merged.items()]


def game_space(g: ExtensiveGame) -> ConditionalSpace:
    """``Ξ`` with the players' conditioning events lifted into it."""
    return ConditionalSpace(xi_atoms(g), [(label, members) for label, members, _ in game_events(g)])


def xi_label(atom: tuple) -> str:
    return "|".join(f"{theta}:{'.'.join(s)}" for theta, s in atom)


def relabel_space(space: ConditionalSpace, name) -> ConditionalSpace:
    return ConditionalSpace([name(p) for p in space.points],
                            [(e.label, [name(p) for p in e.members]) for e in space.events])


@dataclass
class Substructure:
    structure: Optional[Coalgebra]
    inclusion: Optional[Dict[str, Dict]]
    kept: Dict[str, Tuple]

    @property
    def empty(self) -> bool:
        return self.structure is None


def belief_closed_substructure(structure: Coalgebra, types: Mapping[str, Iterable],
                               domains: Optional[Mapping[str, Iterable]] = None) -> Substructure:
    """Largest substructure inside `types` whose beliefs stay inside it.

    ``domains[i]``, when given, restricts the base points agent ``i`` may
    charge.  Types are pruned until nothing changes; if some agent loses
    every type the result is empty.
    """
    kept = {i: [t for t in structure.carriers[i] if t in set(types.get(i, ()))] for i in structure.agents}
    allowed_theta = {i: set(domains[i]) if domains and i in domains else None for i in structure.agents}
    changed = True
    while changed:
        changed = False
        live = {i: set(ts) for i, ts in kept.items()}
        for i in structure.agents:
            opp = structure.opponents(i)
            keep = []
            for t in kept[i]:
                nu = structure.beliefs[i][t]
                ok = all(
                    (allowed_theta[i] is None or theta in allowed_theta[i])
                    and all(u in live[j] for j, u in zip(opp, prof))
                    for m in nu.conditionals.values() for (theta, prof), w in m.items() if w)
                if ok:
                    keep.append(t)
            if len(keep) != len(kept[i]):
                kept[i] = keep
                changed = True
    if any(not ts for ts in kept.values()):
        return Substructure(None, None, {i: () for i in structure.agents})
    skeleton = Coalgebra(structure.base, kept, {}, check=False)
    beliefs = {i: {t: CPS(skeleton.belief_space(i), structure.beliefs[i][t].conditionals) for t in kept[i]}
               for i in structure.agents}
    sub = Coalgebra(structure.base, kept, beliefs)
    inclusion = {i: {t: t for t in kept[i]} for i in structure.agents}
    verdict = check_coalgebra_morphism(inclusion, sub, structure)
    if not verdict:
        raise AssertionError(f"inclusion is not a type morphism: {verdict.witness}")
    return Substructure(sub, inclusion, {i: tuple(ts) for i, ts in kept.items()})


def coalitions(players: Sequence[str]) -> List[Tuple[str, ...]]:
    """Nonempty subsets of `players`, by size and then player order."""
    return [c for r in range(1, len(players) + 1) for c in combinations(players, r)]


def coalition_label(coalition: Sequence[str]) -> str:
    return "+".join(coalition)


@dataclass
class CoalitionSpace:
    players: Tuple[str, ...]
    payoff_types: Mapping[str, Tuple[str, ...]]
    coalitions: Tuple[Tuple[str, ...], ...]
    base: ConditionalSpace
    space: ProductSpace


def coalition_space(players: Sequence[str], payoff_types: Mapping[str, Sequence[str]],
                    opponent_carrier: Sequence[Hashable], cap: int = 8) -> CoalitionSpace:
    """Coalitions × payoff profiles × a caller-supplied opponent carrier.

    The conditioning event of coalition ``J`` is ``{J} × Θ × carrier``.
    """
    players = tuple(players)
    if len(players) > cap:
        raise GameError(f"{len(players)} agents give {2 ** len(players) - 1} coalition events; "
                        f"the enumeration cap is {cap} agents")
    coals = coalitions(players)
    thetas = list(product(*(payoff_types[i] for i in players)))
    base = ConditionalSpace([(c, th) for c in coals for th in thetas],
                            [(coalition_label(c), [(c, th) for th in thetas]) for c in coals])
    return CoalitionSpace(players, {i: tuple(payoff_types[i]) for i in players}, tuple(coals),
                          base, lift_space(base, opponent_carrier))


def check_coalition_beliefs(cs: CoalitionSpace, player: str, beliefs: Mapping[Hashable, CPS]) -> Verdict:
    """Conditional on coalition ``J`` each type is sure of ``J`` and of one own payoff type.

    The own payoff type must be the same for every coalition.  The witness
    is ``(type, coalition label, reason)``.
    """
    k = cs.players.index(player)
    for t, nu in beliefs.items():
        own = None
        for c in cs.coalitions:
            label = coalition_label(c)
            m = nu.given(label)
            flat = ProbabilityMeasure(((j, th, x), w) for ((j, th), x), w in m.items())
            on_coalition = marginal(flat, 0)
            if on_coalition != ProbabilityMeasure.dirac(c):
                return Verdict(False, (t, label, "coalition marginal is not a Dirac at the coalition"))
            on_theta = marginal(ProbabilityMeasure(((th[k],), w) for (j, th, x), w in flat.items()), 0)
            if len(on_theta.support) != 1 or on_theta.total() != 1 or any(w < 0 for _, w in on_theta.items()):
                return Verdict(False, (t, label, "own payoff type marginal is not a Dirac"))
            (theta,) = on_theta.support
            if own is None:
                own = theta
            elif theta != own:
                return Verdict(False, (t, label, "own payoff type differs across coalitions"))
    return Verdict(True)


def dirac_corrected_belief(cs: CoalitionSpace, player: str, own_theta: str,
                           rest: Mapping[Tuple[tuple, Hashable], object]) -> CPS:
    """Belief that is sure of the coalition and of `own_theta`.

    `rest` is a prior over (other players' payoff types, carrier element);
    it is spread uniformly over coalitions, pinned to `own_theta`, and then
    conditioned on every coalition.
    """
    k = cs.players.index(player)
    rest = ProbabilityMeasure(rest)
    share = Fraction(1, len(cs.coalitions))
    prior = {}
    for c in cs.coalitions:
        for (others, x), w in rest.items():
            theta = others[:k] + (own_theta,) + others[k:]
            prior[((c, theta), x)] = share * w
    return cps_from_prior(cs.space, ProbabilityMeasure(prior))


class InclusiveStructure:
    """Beliefs over ``Θ × T`` including the believer's own coordinate."""

    def __init__(self, base: ConditionalSpace, carriers: Mapping, beliefs: Mapping):
        self.base = base
        self.agents = tuple(carriers)
        self.carriers = {i: tuple(ts) for i, ts in carriers.items()}
        self.beliefs = {i: dict(b) for i, b in beliefs.items()}
        self.space = lift_space(base, list(product(*(self.carriers[i] for i in self.agents))))


def lift_inclusive(structure: Coalgebra) -> InclusiveStructure:
    """Pair every belief with the Dirac measure on the believer's own type."""
    space = lift_space(structure.base, list(product(*(structure.carriers[i] for i in structure.agents))))
    beliefs = {}
    for k, i in enumerate(structure.agents):
        beliefs[i] = {}
        for t, nu in structure.beliefs[i].items():
            beliefs[i][t] = CPS(space, {
                label: m.pushforward(lambda a, t=t, k=k: (a[0], a[1][:k] + (t,) + a[1][k:]))
                for label, m in nu.conditionals.items()})
    return InclusiveStructure(structure.base, structure.carriers, beliefs)


def harsanyi_check(structure: InclusiveStructure) -> Verdict:
    """Every type is certain of itself under every conditioning event."""
    if not isinstance(structure, InclusiveStructure):
        raise TypeError("harsanyi_check needs beliefs over Θ × T (see lift_inclusive)")
    for k, i in enumerate(structure.agents):
        for t in structure.carriers[i]:
            nu = structure.beliefs[i][t]
            for label in structure.base.labels:
                m = nu.given(label)
                own = marginal(ProbabilityMeasure(((prof[k],), w) for (theta, prof), w in m.items()), 0)
                if own != ProbabilityMeasure.dirac(t):
                    return Verdict(False, (i, t, label))
    return Verdict(True)
