"""Finite conditional measurable spaces, exact measures and CPSs.

Every space is finite and carries the full power set, so events are plain
sets of atoms and measures are exact :class:`fractions.Fraction` weights.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Any, Callable, Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

Atom = Hashable
Rational = Union[Fraction, int, str]


class MeasureError(ValueError):
    pass


class StructureMismatch(MeasureError):
    """Inputs do not live on the spaces they claim to."""


class ZeroConditioningEvent(MeasureError):
    def __init__(self, label):
        super().__init__(f"conditioning event {label!r} has zero prior probability")
        self.label = label


class IncompatibleMap(MeasureError):
    def __init__(self, label, atom, image):
        super().__init__(
            f"map sends atom {atom!r} of event {label!r} to {image!r}, outside the matching event")
        self.label = label
        self.atom = atom
        self.image = image


class NotPiSystem(MeasureError):
    def __init__(self, first, second):
        super().__init__("generator family is not closed under intersection: "
                         f"{sorted(map(repr, first))} & {sorted(map(repr, second))}")
        self.pair = (first, second)


def as_fraction(value: Rational) -> Fraction:
    if isinstance(value, float):
        raise TypeError("floats are not accepted; use Fraction or 'p/q'")
    return Fraction(value)


@dataclass
class Verdict:
    """A boolean answer that carries a counterexample when it is negative."""
    ok: bool
    witness: Any = None

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class Event:
    label: str
    members: frozenset


class ConditionalSpace:
    """A finite set of atoms with a labelled family of conditioning events."""

    __slots__ = ("points", "events", "_index", "_by_label", "_hash")

    def __init__(self, points: Iterable[Atom], events: Iterable[Tuple[str, Iterable[Atom]]]):
        self.points = tuple(points)
        if not self.points:
            raise MeasureError("a space needs at least one point")
        self._index = {p: k for k, p in enumerate(self.points)}
        if len(self._index) != len(self.points):
            raise MeasureError("duplicate points")
        evs = []
        by_label = {}
        for item in events:
            label, members = (item.label, item.members) if isinstance(item, Event) else item
            members = frozenset(members)
            if label in by_label:
                raise MeasureError(f"duplicate conditioning-event label {label!r}")
            if not members:
                raise MeasureError(f"conditioning event {label!r} is empty")
            stray = [m for m in members if m not in self._index]
            if stray:
                raise MeasureError(f"conditioning event {label!r} contains unknown atoms {stray!r}")
            ev = Event(label, members)
            by_label[label] = ev
            evs.append(ev)
        if not evs:
            raise MeasureError("at least one conditioning event is required")
        self.events = tuple(evs)
        self._by_label = by_label
        self._hash = None

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(e.label for e in self.events)

    def event(self, label: str) -> Event:
        try:
            return self._by_label[label]
        except KeyError:
            raise StructureMismatch(f"unknown conditioning event {label!r}") from None

    def has_event(self, label) -> bool:
        return label in self._by_label

    def index(self, atom: Atom) -> int:
        return self._index[atom]

    def __contains__(self, atom) -> bool:
        return atom in self._index

    def ordered(self, atoms: Iterable[Atom]) -> Tuple[Atom, ...]:
        """`atoms` sorted by declaration order."""
        return tuple(sorted(atoms, key=self._index.__getitem__))

    def _key(self):
        return (self.points, self.events)

    def __eq__(self, other):
        if not isinstance(other, ConditionalSpace):
            return NotImplemented
        return self is other or self._key() == other._key()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __repr__(self):
        return f"{type(self).__name__}({len(self.points)} points, events={list(self.labels)})"


class ProductSpace(ConditionalSpace):
    """``base × factor`` with the lifted events ``C × factor``."""

    __slots__ = ("base", "factor")

    def __init__(self, base: ConditionalSpace, factor: Sequence[Atom]):
        factor = tuple(factor)
        if not factor:
            raise MeasureError("cannot lift along an empty factor: C × ∅ is empty")
        if len(set(factor)) != len(factor):
            raise MeasureError("duplicate factor elements")
        points = [(m, x) for m in base.points for x in factor]
        events = [(e.label, [(m, x) for m in base.ordered(e.members) for x in factor])
                  for e in base.events]
        super().__init__(points, events)
        self.base = base
        self.factor = factor


def lift_space(base: ConditionalSpace, factor: Iterable[Atom]) -> ProductSpace:
    return ProductSpace(base, factor)


class ProbabilityMeasure:
    """Exact atom weights; zero weights are not stored.

    Construction does not check that the weights form a probability
    measure (:meth:`problems` does), so that broken candidates can be
    represented and reported on.
    """

    __slots__ = ("_w", "_hash")

    def __init__(self, weights: Union[Mapping[Atom, Rational], Iterable[Tuple[Atom, Rational]]] = ()):
        items = weights.items() if isinstance(weights, Mapping) else weights
        w: Dict[Atom, Fraction] = {}
        for atom, value in items:
            value = as_fraction(value)
            if value:
                w[atom] = w.get(atom, Fraction(0)) + value
                if not w[atom]:
                    del w[atom]
        self._w = w
        self._hash = None

    @classmethod
    def dirac(cls, atom: Atom) -> "ProbabilityMeasure":
        return cls({atom: 1})

    @classmethod
    def uniform(cls, atoms: Iterable[Atom]) -> "ProbabilityMeasure":
        atoms = list(atoms)
        return cls({a: Fraction(1, len(atoms)) for a in atoms})

    def __getitem__(self, atom) -> Fraction:
        return self._w.get(atom, Fraction(0))

    def measure(self, event: Iterable[Atom]) -> Fraction:
        event = event if isinstance(event, (set, frozenset)) else set(event)
        if len(event) < len(self._w):
            return sum((self._w[a] for a in event if a in self._w), Fraction(0))
        return sum((v for a, v in self._w.items() if a in event), Fraction(0))

    def items(self):
        return self._w.items()

    @property
    def support(self) -> frozenset:
        return frozenset(a for a, v in self._w.items() if v > 0)

    def total(self) -> Fraction:
        return sum(self._w.values(), Fraction(0))

    def pushforward(self, f: Callable[[Atom], Atom]) -> "ProbabilityMeasure":
        out: Dict[Atom, Fraction] = {}
        for a, v in self._w.items():
            b = f(a)
            out[b] = out.get(b, Fraction(0)) + v
        return ProbabilityMeasure(out)

    def problems(self, atoms: Optional[Iterable[Atom]] = None) -> List[Tuple[str, Any]]:
        """Reasons this is not a probability measure on `atoms`."""
        out = []
        if atoms is not None:
            atoms = atoms if isinstance(atoms, (set, frozenset, dict)) else set(atoms)
            for a in self._w:
                if a not in atoms:
                    out.append(("foreign-atom", a))
        for a, v in self._w.items():
            if v < 0:
                out.append(("negative", a))
            elif v > 1:
                out.append(("above-one", a))
        if self.total() != 1:
            out.append(("total", self.total()))
        return out

    def __eq__(self, other):
        if not isinstance(other, ProbabilityMeasure):
            return NotImplemented
        return self._w == other._w

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._w.items()))
        return self._hash

    def __repr__(self):
        body = ", ".join(f"{a!r}: {v}" for a, v in self._w.items())
        return f"ProbabilityMeasure({{{body}}})"


class CPS:
    """A family of measures indexed by the conditioning events of `space`."""

    __slots__ = ("space", "conditionals", "_hash")

    def __init__(self, space: ConditionalSpace, conditionals: Mapping[str, Union[ProbabilityMeasure, Mapping]]):
        self.space = space
        self.conditionals: Dict[str, ProbabilityMeasure] = {
            label: m if isinstance(m, ProbabilityMeasure) else ProbabilityMeasure(m)
            for label, m in conditionals.items()}
        self._hash = None

    def __call__(self, event: Iterable[Atom], label: str) -> Fraction:
        return self.given(label).measure(event)

    def given(self, label: str) -> ProbabilityMeasure:
        try:
            return self.conditionals[label]
        except KeyError:
            raise StructureMismatch(f"no conditional for event {label!r}") from None

    def replace(self, label: str, measure) -> "CPS":
        conds = dict(self.conditionals)
        conds[label] = measure if isinstance(measure, ProbabilityMeasure) else ProbabilityMeasure(measure)
        return CPS(self.space, conds)

    def __eq__(self, other):
        if not isinstance(other, CPS):
            return NotImplemented
        return self.space == other.space and self.conditionals == other.conditionals

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.space, frozenset(self.conditionals.items())))
        return self._hash

    def __repr__(self):
        return f"CPS({self.conditionals!r})"


@dataclass(frozen=True)
class Violation:
    axiom: str          # "C1", "C2" or "C3"
    event: str
    witness: Any
    detail: str

    def __str__(self):
        return f"{self.axiom} event={self.event} witness={self.witness!r}: {self.detail}"


@dataclass
class ValidationReport:
    structural: List[str] = field(default_factory=list)
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.structural and not self.violations

    def lines(self) -> List[str]:
        return [f"structure: {s}" for s in self.structural] + [str(v) for v in self.violations]

    def extend(self, other: "ValidationReport", prefix: str = ""):
        self.structural += [prefix + s for s in other.structural]
        self.violations += other.violations


def validate_cps(space: ConditionalSpace, candidate: CPS) -> ValidationReport:
    """Check C1-C3 exactly.

    C3 is checked on singletons ``E = {a}``; since ``ν(E|C)`` is the sum of
    atom weights, the identity for any ``E ⊆ D`` is the sum of the
    singleton identities, so this is equivalent to checking every subset.
    """
    report = ValidationReport()
    if candidate.space != space:
        report.structural.append("candidate is defined on a different space")
        return report
    for label in candidate.conditionals:
        if not space.has_event(label):
            report.structural.append(f"conditional for unknown event {label!r}")
    for ev in space.events:
        if ev.label not in candidate.conditionals:
            report.structural.append(f"missing conditional for event {ev.label!r}")
    if report.structural:
        return report
    points = space._index
    for ev in space.events:
        for kind, what in candidate.conditionals[ev.label].problems(points):
            if kind == "foreign-atom":
                report.structural.append(f"event {ev.label!r}: atom {what!r} is not in the space")
            elif kind == "total":
                report.violations.append(Violation("C2", ev.label, None, f"weights sum to {what}"))
            else:
                report.violations.append(Violation("C2", ev.label, what, f"weight {kind}"))
    if report.structural:
        return report
    for ev in space.events:
        mass = candidate(ev.members, ev.label)
        if mass != 1:
            report.violations.append(Violation("C1", ev.label, ev.label, f"nu(C|C) = {mass}"))
    for c in space.events:
        nu_c = candidate.conditionals[c.label]
        for d in space.events:
            if d.label == c.label or not d.members <= c.members:
                continue
            nu_d = candidate.conditionals[d.label]
            d_mass = nu_c.measure(d.members)
            for a in space.ordered(d.members):
                if nu_c[a] != nu_d[a] * d_mass:
                    report.violations.append(Violation(
                        "C3", c.label, (frozenset([a]), d.label, c.label),
                        f"nu({{{a!r}}}|{c.label}) = {nu_c[a]} but nu({{{a!r}}}|{d.label})"
                        f"*nu({d.label}|{c.label}) = {nu_d[a] * d_mass}"))
                    break
    return report


def is_cps(space: ConditionalSpace, candidate: CPS) -> bool:
    return validate_cps(space, candidate).ok


def cps_from_prior(space: ConditionalSpace, prior: ProbabilityMeasure) -> CPS:
    """Condition `prior` on every conditioning event by Bayes' rule."""
    bad = prior.problems(space._index)
    if bad:
        raise MeasureError(f"prior is not a probability measure on the space: {bad[0]}")
    conds = {}
    for ev in space.events:
        mass = prior.measure(ev.members)
        if mass == 0:
            raise ZeroConditioningEvent(ev.label)
        conds[ev.label] = ProbabilityMeasure(
            (a, prior[a] / mass) for a in space.ordered(ev.members) if prior[a])
    return CPS(space, conds)


def _map_function(f) -> Callable[[Atom], Atom]:
    if callable(f):
        return f
    return f.__getitem__


def check_compatible(f, source: ConditionalSpace, target: ConditionalSpace) -> None:
    """Raise unless `f` maps each source event into the target event of the same label."""
    if isinstance(source, ProductSpace) and isinstance(target, ProductSpace):
        if source.base != target.base:
            raise StructureMismatch("source and target are lifted from different base spaces")
    if set(source.labels) != set(target.labels):
        raise StructureMismatch("source and target do not share their conditioning events")
    fn = _map_function(f)
    for a in source.points:
        try:
            b = fn(a)
        except KeyError:
            raise StructureMismatch(f"map is not defined on atom {a!r}") from None
        if b not in target:
            raise StructureMismatch(f"map sends {a!r} to {b!r}, which is not a target atom")
    for ev in source.events:
        tgt = target.event(ev.label).members
        for a in source.ordered(ev.members):
            if fn(a) not in tgt:
                raise IncompatibleMap(ev.label, a, fn(a))


def pushforward_cps(f, nu: CPS, target: ConditionalSpace, check: bool = True) -> CPS:
    """Image of `nu` under `f`: ``f̂_C(ν)(E) = ν(f⁻¹(E) | C)``.

    Compatibility keeps C1.  C3 is only guaranteed for maps of shape
    ``(id, g)`` between spaces lifted from one base; other compatible maps
    can pull a target event back to more than its source event.
    """
    if check:
        check_compatible(f, nu.space, target)
    fn = _map_function(f)
    return CPS(target, {label: m.pushforward(fn) for label, m in nu.conditionals.items()})


def marginal(mu: ProbabilityMeasure, onto: Union[int, str, Sequence[Union[int, str]]],
             names: Optional[Sequence[str]] = None) -> ProbabilityMeasure:
    """Sum out every coordinate of tuple atoms except `onto`.

    `onto` is a coordinate index, a factor name from `names`, or a sequence
    of those (giving tuple-valued atoms).
    """
    def resolve(sel):
        if isinstance(sel, int) and not isinstance(sel, bool):
            return sel
        if names is not None and sel in names:
            return list(names).index(sel)
        raise MeasureError(f"unknown factor selector {sel!r}")

    single = isinstance(onto, (int, str))
    idx = [resolve(onto)] if single else [resolve(s) for s in onto]
    width = len(names) if names is not None else None
    out: Dict[Atom, Fraction] = {}
    for atom, v in mu.items():
        if not isinstance(atom, tuple) or (width is not None and len(atom) != width):
            raise MeasureError(f"atom {atom!r} is not a point of the declared product")
        try:
            key = atom[idx[0]] if single else tuple(atom[k] for k in idx)
        except IndexError:
            raise MeasureError(f"unknown factor selector {onto!r}") from None
        out[key] = out.get(key, Fraction(0)) + v
    return ProbabilityMeasure(out)


def gamma_event(collection: Sequence[CPS], event: Iterable[Atom], label: str, p: Rational) -> List[CPS]:
    """The members ν of `collection` with ``ν(event | label) ≥ p``."""
    p = as_fraction(p)
    if not 0 <= p <= 1:
        raise MeasureError(f"level {p} is outside [0, 1]")
    event = frozenset(event)
    out = []
    for nu in collection:
        nu.space.event(label)
        if nu(event, label) >= p:
            out.append(nu)
    return out


def generated_sigma_algebra(points: Sequence[Atom], generators: Iterable[Iterable[Atom]]) -> List[frozenset]:
    """All sets of the σ-algebra on `points` generated by `generators`."""
    gens = [frozenset(g) for g in generators]
    blocks: Dict[Tuple[bool, ...], List[Atom]] = {}
    for p in points:
        blocks.setdefault(tuple(p in g for g in gens), []).append(p)
    atoms = [frozenset(b) for b in blocks.values()]
    out = []
    for r in range(len(atoms) + 1):
        for combo in combinations(atoms, r):
            out.append(frozenset().union(*combo))
    return out


def check_pi_system(generators: Sequence[frozenset]) -> None:
    family = set(generators)
    if not family:
        raise MeasureError("a π-system must be nonempty")
    for a in generators:
        for b in generators:
            if a & b not in family:
                raise NotPiSystem(a, b)


def agree_on_pi_system(nu1: CPS, nu2: CPS, generators: Iterable[Iterable[Atom]]) -> Verdict:
    """Compare two CPSs on an intersection-closed family, at every event.

    A positive answer is followed by an exhaustive comparison on the
    σ-algebra the family generates; a failure there would contradict the
    π-λ argument and is raised as an internal error.
    """
    if nu1.space != nu2.space:
        raise StructureMismatch("the two CPSs live on different spaces")
    space = nu1.space
    gens = list(dict.fromkeys(frozenset(g) for g in generators))
    check_pi_system(gens)
    for g in gens:
        if not g <= space._index.keys():
            raise StructureMismatch("generator contains atoms outside the space")
    for ev in space.events:
        for g in gens:
            if nu1(g, ev.label) != nu2(g, ev.label):
                return Verdict(False, (g, ev.label))
    for ev in space.events:
        for e in generated_sigma_algebra(space.points, gens):
            if nu1(e, ev.label) != nu2(e, ev.label):
                raise AssertionError(f"agreement on generators did not extend to {set(e)!r}")
    return Verdict(True)
