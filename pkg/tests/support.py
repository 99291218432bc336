"""Shared fixtures and seeded random generators for the test-suite."""
from __future__ import annotations

import random
from fractions import Fraction
from itertools import product

from typecoalg import CPS, Coalgebra, ConditionalSpace, ProbabilityMeasure, cps_from_prior
from typecoalg.games import ExtensiveGame

H = Fraction(1, 2)
Q = Fraction(1, 4)


def f1_space():
    return ConditionalSpace("abc", [("C0", "abc"), ("C1", "ab")])


def f1_cps(c1=(Fraction(2, 3), Fraction(1, 3), 0)):
    sp = f1_space()
    return CPS(sp, {"C0": dict(zip("abc", (H, Q, Q))), "C1": dict(zip("abc", c1))})


def theta_space(n=2):
    pts = [f"th{k + 1}" for k in range(n)]
    return ConditionalSpace(pts, [("Theta", pts)])


def ts1():
    """Agent 1 has one type t; agent 2 has two indistinguishable types u, u'."""
    base = theta_space()
    w1 = {(th, u): Q for th in base.points for u in ("u", "u'")}
    w2 = {(th, "t"): H for th in base.points}
    return Coalgebra.from_weights(base, {"1": ["t"], "2": ["u", "u'"]},
                                  {"1": {"t": {"Theta": w1}}, "2": {"u": {"Theta": w2}, "u'": {"Theta": w2}}})


def dirac_example():
    """Agent 2's types are sure of different payoff states."""
    base = theta_space()
    return Coalgebra.from_weights(base, {"1": ["t"], "2": ["u", "u'"]}, {
        "1": {"t": {"Theta": {("th1", "u"): H, ("th2", "u'"): H}}},
        "2": {"u": {"Theta": {("th1", "t"): 1}}, "u'": {"Theta": {("th2", "t"): 1}}}})


def g1(theta1=("x",), theta2=("y",)):
    """Player 1 picks Out or In; after In, 1 picks U/D while 2 picks L/R.

    Player 2 also owns the root, where her only move is "-".
    """
    root, out, inn = (), (("Out", "-"),), (("In", "-"),)
    hs = [root, out, inn] + [inn + ((a, b),) for a in "UD" for b in "LR"]
    actions = {root: {"1": ("Out", "In"), "2": ("-",)}, inn: {"1": ("U", "D"), "2": ("L", "R")}}
    info = {"1": {"root": (root,), "in": (inn,)}, "2": {"root": (root,), "in": (inn,)}}
    return ExtensiveGame(("1", "2"), {"1": tuple(theta1), "2": tuple(theta2)}, tuple(hs), actions, info)


def simultaneous_game():
    root = ()
    hs = [root] + [((a, b),) for a in "TB" for b in "LR"]
    return ExtensiveGame(("1", "2"), {"1": ("x",), "2": ("y",)}, tuple(hs),
                         {root: {"1": ("T", "B"), "2": ("L", "R")}},
                         {"1": {"r": (root,)}, "2": {"r": (root,)}})


# --- random instances ----------------------------------------------------

def random_space(rng: random.Random, max_atoms=8, max_events=5, min_atoms=1):
    n = rng.randint(min_atoms, max_atoms)
    pts = [f"a{k}" for k in range(n)]
    events = [("E0", pts)]
    for k in range(1, rng.randint(1, max_events)):
        members = [p for p in pts if rng.random() < 0.5] or [rng.choice(pts)]
        events.append((f"E{k}", members))
    rng.shuffle(events)
    return ConditionalSpace(pts, events)


def random_prior(rng: random.Random, space: ConditionalSpace, zeros=0.4, top=4):
    """A prior charging every conditioning event, with many zero atoms."""
    w = {p: (0 if rng.random() < zeros else rng.randint(1, top)) for p in space.points}
    for ev in space.events:
        if not any(w[a] for a in ev.members):
            w[rng.choice(space.ordered(ev.members))] = rng.randint(1, top)
    total = sum(w.values())
    return ProbabilityMeasure({p: Fraction(v, total) for p, v in w.items()})


def random_cps(rng, space, **kw):
    return cps_from_prior(space, random_prior(rng, space, **kw))


def random_structure(rng: random.Random, agents=2, max_types=4, max_theta=3, max_events=3, copies=0.3,
                     base=None):
    """Random coalgebra; some types copy another's prior to create redundancy."""
    base = base or random_space(rng, max_theta, max_events)
    carriers = {str(i + 1): [f"t{i + 1}{k}" for k in range(rng.randint(1, max_types))] for i in range(agents)}
    skeleton = Coalgebra(base, carriers, {}, check=False)
    beliefs = {}
    for i in skeleton.agents:
        space = skeleton.belief_space(i)
        beliefs[i] = {}
        made = []
        for t in carriers[i]:
            if made and rng.random() < copies:
                beliefs[i][t] = CPS(space, rng.choice(made).conditionals)
            else:
                nu = random_cps(rng, space, zeros=0.5, top=2)
                made.append(nu)
                beliefs[i][t] = nu
    return Coalgebra(base, carriers, beliefs)


def random_game(rng: random.Random, max_strategies=4096):
    """Random simultaneous-move game with perfect recall."""
    while True:
        g = _random_game(rng)
        total = 1
        for i in g.players:
            for label in g.information_sets[i]:
                total *= len(g.available(i, label))
        if total <= max_strategies:
            return g


def _random_game(rng):
    n = rng.choice((2, 2, 3))
    players = tuple(str(k + 1) for k in range(n))
    depth = rng.randint(1, 3)
    histories = [()]
    actions = {}
    frontier = [()]
    for d in range(depth):
        nxt = []
        for x in frontier:
            if d > 0 and rng.random() < 0.3:
                continue
            acts = {}
            for i in players:
                k = rng.choice((1, 2, 2, 3)) if d < 2 else rng.choice((1, 2))
                acts[i] = tuple(f"{chr(97 + d)}{m}" for m in range(k))
            actions[x] = acts
            for prof in product(*(acts[i] for i in players)):
                y = x + (prof,)
                histories.append(y)
                nxt.append(y)
        frontier = nxt
    info = {i: {} for i in players}
    label_of = {i: {} for i in players}
    for d in range(depth):
        level = [x for x in histories if len(x) == d and x in actions]
        for k, i in enumerate(players):
            groups = {}
            for x in level:
                if len(actions[x][i]) < 2 and rng.random() < 0.7:
                    continue
                exp = tuple((label_of[i].get(x[:m]), x[m][k]) for m in range(len(x)) if x[:m] in label_of[i])
                groups.setdefault((exp, actions[x][i]), []).append(x)
            for g_hist in groups.values():
                rng.shuffle(g_hist)
                while g_hist:
                    cut = rng.randint(1, len(g_hist))
                    block, g_hist = g_hist[:cut], g_hist[cut:]
                    lab = f"h{len(info[i])}"
                    info[i][lab] = tuple(block)
                    for x in block:
                        label_of[i][x] = lab
    types = {i: tuple(f"th{m}" for m in range(rng.randint(1, 2))) for i in players}
    return ExtensiveGame(players, types, tuple(histories), actions, info)
