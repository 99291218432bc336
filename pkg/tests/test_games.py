import random
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from typecoalg import (CPS, Coalgebra, ProbabilityMeasure, build_fragment, compose, cps_from_prior, is_cps,
                       terminal_map)
from typecoalg.games import (ExtensiveGame, GameError, InclusiveStructure, UnreachableInformationSet,
                             allowing_set, belief_closed_substructure, check_coalition_beliefs, coalition_space,
                             conditioning_family, dirac_corrected_belief, game_events, game_space, harsanyi_check,
                             lift_inclusive, strategies, validate_game, xi_atoms)
from support import Q, g1, random_game, random_structure, simultaneous_game, theta_space, ts1


def brute_allowing(g, player, label):
    """Profiles whose play passes through the information set."""
    labels = {i: list(g.information_sets[i]) for i in g.players}
    owner = {i: {x: lab for lab, xs in g.information_sets[i].items() for x in xs} for i in g.players}
    target = set(g.information_sets[player][label])
    found = []
    for prof in product(*(strategies(g, i) for i in g.players)):
        x, hit = (), False
        while True:
            hit = hit or x in target
            kids = [y for y in g.histories if len(y) == len(x) + 1 and y[:-1] == x]
            if not kids:
                break
            step = tuple(prof[k][labels[i].index(owner[i][x])] if x in owner[i] else g.actions[x][i][0]
                         for k, i in enumerate(g.players))
            x = x + (step,)
        if hit:
            found.append(prof)
    return found


def test_g1_is_valid_with_hand_values():
    g = g1()
    assert validate_game(g).ok
    assert strategies(g, "1") == [("Out", "U"), ("Out", "D"), ("In", "U"), ("In", "D")]
    assert len(strategies(g, "2")) == 2
    s = allowing_set(g, "2", "in")
    assert s.slices["1"] == [("In", "U"), ("In", "D")]
    assert s.slices["2"] == strategies(g, "2")
    assert sorted(s.profiles) == sorted(brute_allowing(g, "2", "in"))
    assert len(allowing_set(g, "1", "root").profiles) == 8


def test_g1_conditioning_events():
    g = g1()
    fam2 = conditioning_family(g, "2")
    assert [e.info_sets for e in fam2] == [("root",), ("in",)]
    h_in = fam2[1]
    assert {s for (_, s), in h_in.opponent_profiles} == {("In", "U"), ("In", "D")}
    fam1 = conditioning_family(g, "1")
    assert len(fam1) == 1 and fam1[0].info_sets == ("root", "in")
    assert len(fam1) + len(fam2) == 3
    space = game_space(g)
    # the player-1 event and player 2's root event are both all of Ξ
    assert len(space.points) == 8 and space.labels == ("1:in", "2:in")
    assert dict((lab, prov) for lab, _, prov in game_events(g))["1:in"] == ("1:root", "1:in", "2:root")
    assert len(game_space(g1(theta1=("x", "z"))).points) == 16


def test_simultaneous_game_single_event():
    g = simultaneous_game()
    assert validate_game(g).ok
    for i in g.players:
        (ev,) = conditioning_family(g, i)
        assert ev.members == frozenset(xi_atoms(g))
    assert game_space(g).labels == ("1:r",)


def test_validation_witnesses():
    g = g1()
    orphan = (("In", "-"), ("U", "Z"), ("x", "y"))
    bad = ExtensiveGame(g.players, g.payoff_types, g.histories + (orphan,), g.actions, g.information_sets)
    kinds = {(k, w) for k, w, _ in validate_game(bad).issues}
    assert ("prefix", orphan) in kinds
    info = {"1": {"both": ((), (("In", "-"),))}, "2": g.information_sets["2"]}
    bad = ExtensiveGame(g.players, g.payoff_types, g.histories, g.actions, info)
    assert ("availability", "both") in {(k, w) for k, w, _ in validate_game(bad).issues}


def test_perfect_recall_violation():
    root = ()
    hs = [root] + [((a, "-"),) for a in "LR"] + [((a, "-"), (b, "-")) for a in "LR" for b in "lr"]
    actions = {root: {"1": ("L", "R"), "2": ("-",)}}
    actions.update({((a, "-"),): {"1": ("l", "r"), "2": ("-",)} for a in "LR"})
    info = {"1": {"r": (root,), "forgot": ((("L", "-"),), (("R", "-"),))}, "2": {}}
    g = ExtensiveGame(("1", "2"), {"1": ("x",), "2": ("y",)}, tuple(hs), actions, info)
    assert ("perfect-recall", "forgot") in {(k, w) for k, w, _ in validate_game(g).issues}


def test_forced_move_player_has_one_strategy():
    g = g1()
    info = {"1": g.information_sets["1"], "2": {"root": ((),)}}
    h = ExtensiveGame(g.players, g.payoff_types, g.histories, g.actions, info)
    assert not validate_game(h).ok   # player 2 is active after In but uncovered
    assert strategies(h, "2") == [("-",)]


def test_unknown_information_set():
    with pytest.raises(GameError):
        allowing_set(g1(), "2", "nope")


def test_unreachable_information_set_is_rejected_as_event():
    # player 1 forgets her own move, so the path L then R can never be played
    L, R = ("L", "-"), ("R", "-")
    late = (L, R)
    hs = [(), (L,), (R,), (L, L), late] + [late + (("-", m),) for m in "cd"]
    actions = {(): {"1": ("L", "R"), "2": ("-",)}, (L,): {"1": ("L", "R"), "2": ("-",)},
               late: {"1": ("-",), "2": ("c", "d")}}
    info = {"1": {"m": ((), (L,))}, "2": {"late": (late,)}}
    g = ExtensiveGame(("1", "2"), {"1": ("x",), "2": ("y",)}, tuple(hs), actions, info)
    assert ("perfect-recall", "m") in {(k, w) for k, w, _ in validate_game(g).issues}
    assert allowing_set(g, "2", "late").degenerate
    with pytest.raises(UnreachableInformationSet) as exc:
        conditioning_family(g, "2")
    assert exc.value.label == "late"


def test_relabelled_game_gives_isomorphic_space():
    g = g1()
    rename = {"Out": "O", "In": "I", "U": "up", "D": "dn", "L": "lf", "R": "rt", "-": "-"}
    rh = lambda x: tuple(tuple(rename[a] for a in p) for p in x)
    h = ExtensiveGame(g.players, g.payoff_types, tuple(rh(x) for x in g.histories),
                      {rh(x): {i: tuple(rename[a] for a in acts) for i, acts in per.items()}
                       for x, per in g.actions.items()},
                      {i: {lab: tuple(rh(x) for x in xs) for lab, xs in sets.items()}
                       for i, sets in g.information_sets.items()})
    a, b = game_space(g), game_space(h)
    bij = {x: tuple((th, tuple(rename[m] for m in s)) for th, s in x) for x in a.points}
    assert [bij[p] for p in a.points] == list(b.points)
    assert [frozenset(bij[p] for p in e.members) for e in a.events] == [e.members for e in b.events]


# --- belief-closed substructures ---------------------------------------

def cascade():
    base = theta_space(1)
    return Coalgebra.from_weights(base, {"1": ["a", "b"], "2": ["x", "y", "z"]}, {
        "1": {"a": {"Theta": {("th1", "x"): 1}}, "b": {"Theta": {("th1", "z"): 1}}},
        "2": {"x": {"Theta": {("th1", "a"): 1}}, "y": {"Theta": {("th1", "b"): 1}},
              "z": {"Theta": {("th1", "a"): 1}}}})


def test_substructure_identity():
    s = ts1()
    sub = belief_closed_substructure(s, s.carriers)
    assert sub.kept == s.carriers


def test_substructure_cascade():
    sub = belief_closed_substructure(cascade(), {"1": ["a", "b"], "2": ["x", "y"]})
    # hand enumeration: b charges z (removed), then y charges b, leaving a and x
    assert sub.kept == {"1": ("a",), "2": ("x",)}
    assert belief_closed_substructure(sub.structure, sub.structure.carriers).kept == sub.kept


def test_substructure_empty():
    sub = belief_closed_substructure(cascade(), {"1": ["a", "b"], "2": []})
    assert sub.empty and sub.structure is None


def test_substructure_domain_restriction():
    s = ts1()
    sub = belief_closed_substructure(s, s.carriers, domains={"1": ["th1"]})
    assert sub.empty


seeds = st.integers(min_value=0, max_value=2 ** 32)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_substructure_fixed_point_and_terminal_maps(seed):
    rng = random.Random(seed)
    s = random_structure(rng)
    keep = {i: [t for t in ts if rng.random() < 0.7] for i, ts in s.carriers.items()}
    sub = belief_closed_substructure(s, keep)
    if sub.empty:
        return
    again = belief_closed_substructure(sub.structure, sub.structure.carriers)
    assert again.kept == sub.kept
    frag = build_fragment([s])
    assert terminal_map(sub.structure, frag) == compose(terminal_map(s, frag), sub.inclusion)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_allowing_set_matches_play_out(seed):
    g = random_game(random.Random(seed), max_strategies=512)
    assert validate_game(g).ok
    for i in g.players:
        for lab in g.information_sets[i]:
            assert sorted(allowing_set(g, i, lab).profiles) == sorted(brute_allowing(g, i, lab))


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_conditioning_events_are_lifted_rectangles(seed):
    g = random_game(random.Random(seed), max_strategies=512)
    for i in g.players:
        k = g.index(i)
        try:
            fam = conditioning_family(g, i)
        except UnreachableInformationSet:
            continue
        for ev in fam:
            assert ev.members
            own = {a[k] for a in ev.members}
            assert own == set(product(g.payoff_types[i], strategies(g, i)))
            assert ev.members == {a for a in xi_atoms(g) if a[:k] + a[k + 1:] in ev.opponent_profiles}


# --- coalitions and the Harsanyi predicate ------------------------------

def coalition_beliefs(cs, player, rng):
    others = [j for j in cs.players if j != player]
    out = {}
    for n, theta in enumerate(cs.payoff_types[player]):
        rest = {}
        for combo in product(*(cs.payoff_types[j] for j in others)):
            for x in cs.space.factor:
                rest[(combo, x)] = rng.randint(0, 2)
        rest[next(iter(rest))] += 1
        total = sum(rest.values())
        out[f"t{n}"] = dirac_corrected_belief(cs, player, theta, {key: Fraction(v, total) for key, v in rest.items()})
    return out


def test_two_players_give_three_coalitions():
    cs = coalition_space(["1", "2"], {"1": ["a", "b"], "2": ["c"]}, ["o"])
    assert cs.base.labels == ("1", "2", "1+2")
    with pytest.raises(GameError):
        coalition_space([str(k) for k in range(9)], {str(k): ["a"] for k in range(9)}, ["o"], cap=8)


def test_mixed_own_type_is_caught():
    cs = coalition_space(["1", "2"], {"1": ["a", "b"], "2": ["c"]}, ["o"])
    prior = ProbabilityMeasure({((j, th), "o"): Fraction(1, 6) for j, th in cs.base.points})
    nu = cps_from_prior(cs.space, prior)
    v = check_coalition_beliefs(cs, "1", {"mixed": nu})
    assert not v and v.witness[:2] == ("mixed", "1")


def test_constructive_generator_passes_for_three_players():
    rng = random.Random(3)
    cs = coalition_space(["1", "2", "3"], {"1": ["a", "b"], "2": ["c"], "3": ["d", "e"]}, ["o", "p"])
    assert len(cs.base.events) == 7
    for i in cs.players:
        beliefs = coalition_beliefs(cs, i, rng)
        assert all(is_cps(cs.space, nu) for nu in beliefs.values())
        assert check_coalition_beliefs(cs, i, beliefs)


def test_harsanyi_examples():
    lifted = lift_inclusive(ts1())
    assert harsanyi_check(lifted)
    nu = lifted.beliefs["2"]["u"]
    spread = {(th, ("t", u)): Q for th in ("th1", "th2") for u in ("u", "u'")}
    broken = InclusiveStructure(lifted.base, lifted.carriers,
                                {**lifted.beliefs, "2": {**lifted.beliefs["2"], "u": CPS(nu.space, {"Theta": spread})}})
    v = harsanyi_check(broken)
    assert not v and v.witness == ("2", "u", "Theta")
    with pytest.raises(TypeError):
        harsanyi_check(ts1())
