"""Random instances and independent reference computations for the tests."""

import math

import numpy as np

from multiuntil.ctmc import Ctmc
from multiuntil.formula import (FALSE, TRUE, And, Atom, Interval, MultiUntilQuery, Not, Or)

ATOMS = ("a", "b", "c")

FOUR_STATE_RATES = {(0, 1): 2.0, (1, 0): 1.0, (1, 2): 1.0, (2, 3): 2.0}
FOUR_STATE_LABELS = [{"a"}, {"b"}, {"c"}, set()]


def four_state():
    return Ctmc(4, FOUR_STATE_RATES, FOUR_STATE_LABELS)


def two_state():
    return Ctmc(2, {(0, 1): 1.0}, [{"a"}, {"b"}])


def random_chain(rng, max_states=6, max_rate=3.0, random_init=False):
    n = int(rng.integers(1, max_states + 1))
    rates = {}
    for s in range(n):
        for t in range(n):
            if s != t and rng.random() < 0.45:
                rates[(s, t)] = float(np.round(rng.uniform(0.1, max_rate), 3))
    labels = [{a for a in ATOMS if rng.random() < 0.5} for _ in range(n)]
    if random_init:
        w = rng.random(n)
        init = list(w / w.sum())
        init[-1] = 1.0 - math.fsum(init[:-1])
        init = [max(p, 0.0) for p in init]
    else:
        init = None
    return Ctmc(n, rates, labels, init, frozenset(ATOMS))


def random_formula(rng, depth=2):
    if depth == 0 or rng.random() < 0.4:
        r = rng.random()
        if r < 0.08:
            return TRUE
        if r < 0.12:
            return FALSE
        return Atom(ATOMS[int(rng.integers(len(ATOMS)))])
    kind = int(rng.integers(3))
    if kind == 0:
        return Not(random_formula(rng, depth - 1))
    cls = And if kind == 1 else Or
    return cls(random_formula(rng, depth - 1), random_formula(rng, depth - 1))


def random_intervals(rng, n_intervals, top=4.0, step=0.25):
    """Sorted, non-overlapping intervals on a grid; touching endpoints allowed."""
    while True:
        pts = np.sort(rng.integers(0, int(top / step) + 1, 2 * n_intervals)) * step
        ivs = [Interval(float(pts[2 * i]), float(pts[2 * i + 1])) for i in range(n_intervals)]
        # [0,0] as first interval would demand a switch at time 0, excluded (t1 > 0)
        if ivs[0].hi > 0:
            return ivs


def random_query(rng, max_layers=3, depth=2, top=4.0):
    n = int(rng.integers(2, max_layers + 1))
    layers = [random_formula(rng, depth) for _ in range(n)]
    return MultiUntilQuery(layers, random_intervals(rng, n - 1, top))


def taylor_expm(q, t, terms=30):
    """exp(q t) by scaling and squaring a plain Taylor series."""
    a = np.asarray(q, dtype=float) * t
    norm = np.abs(a).sum(axis=1).max()
    squarings = max(0, int(math.ceil(math.log2(norm / 0.25)))) if norm > 0 else 0
    a = a / 2 ** squarings
    result = np.eye(len(a))
    term = np.eye(len(a))
    for k in range(1, terms + 1):
        term = term @ a / k
        result = result + term
    for _ in range(squarings):
        result = result @ result
    return result


def mp_expm(q, t, dps=40):
    import mpmath
    with mpmath.workdps(dps):
        m = mpmath.matrix([[mpmath.mpf(x) * t for x in row] for row in np.asarray(q).tolist()])
        e = mpmath.expm(m)
        return np.array([[float(e[i, j]) for j in range(e.cols)] for i in range(e.rows)])
