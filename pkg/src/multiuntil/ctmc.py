"""Labelled CTMCs, the absorbing-state transformations and the selector matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ValidationError
from .formula import And, Not, atoms_of, evaluate


@dataclass(frozen=True, eq=False)
class Ctmc:
    """A labelled continuous-time Markov chain.

    States are ``0 .. n_states-1``.  ``rates`` maps ``(src, dst)`` to a strictly
    positive rate; a state without outgoing rates is absorbing.  ``atoms`` is
    the set of declared proposition names and defaults to the union of labels.
    """

    n_states: int
    rates: dict
    labels: tuple
    initial: tuple = None
    atoms: frozenset = None

    def __post_init__(self):
        n = self.n_states
        if n < 1:
            raise ValidationError("a chain needs at least one state")
        rates = {}
        for (s, t), r in sorted(self.rates.items()):
            if not (0 <= s < n and 0 <= t < n):
                raise ValidationError(f"transition {s}->{t} references an unknown state")
            if s == t:
                raise ValidationError(f"self-loop {s}->{t} is not allowed")
            r = float(r)
            if not (r > 0 and math.isfinite(r)):
                raise ValidationError(f"rate of {s}->{t} must be positive and finite, got {r}")
            rates[(int(s), int(t))] = r
        object.__setattr__(self, "rates", rates)

        labels = tuple(frozenset(ls) for ls in self.labels)
        if len(labels) != n:
            raise ValidationError(f"expected {n} label sets, got {len(labels)}")
        object.__setattr__(self, "labels", labels)

        atoms = frozenset().union(*labels) if self.atoms is None else frozenset(self.atoms)
        object.__setattr__(self, "atoms", atoms | frozenset().union(*labels))

        init = (1.0,) + (0.0,) * (n - 1) if self.initial is None else tuple(map(float, self.initial))
        if len(init) != n:
            raise ValidationError(f"initial distribution has {len(init)} entries for {n} states")
        if any(not 0.0 <= p <= 1.0 for p in init) or abs(math.fsum(init) - 1.0) > 1e-9:
            raise ValidationError("initial distribution must lie in [0,1] and sum to 1")
        object.__setattr__(self, "initial", init)

        out = [[] for _ in range(n)]
        for (s, _), r in rates.items():
            out[s].append(r)
        # fsum: exact rounding, independent of summation order
        object.__setattr__(self, "_exit", tuple(math.fsum(rs) for rs in out))

    def exit_rate(self, s):
        return self._exit[s]

    @property
    def exit_rates(self):
        return self._exit

    def is_absorbing(self, s):
        return self._exit[s] == 0.0

    def successors(self, s):
        return [(t, r) for (u, t), r in self.rates.items() if u == s]

    def predecessors(self, t):
        return [s for (s, u) in self.rates if u == t]

    def __eq__(self, other):
        if not isinstance(other, Ctmc):
            return NotImplemented
        return (self.n_states == other.n_states and self.rates == other.rates
                and self.labels == other.labels and self.initial == other.initial
                and self.atoms == other.atoms)

    def _replace_rates(self, rates):
        return Ctmc(self.n_states, rates, self.labels, self.initial, self.atoms)


def check_atoms(ctmc, f):
    unknown = atoms_of(f) - ctmc.atoms
    if unknown:
        raise ValidationError(f"unknown atomic proposition(s): {', '.join(sorted(unknown))}")


def satisfies(ctmc, state, f):
    if not 0 <= state < ctmc.n_states:
        raise ValidationError(f"state {state} out of range")
    check_atoms(ctmc, f)
    return evaluate(f, ctmc.labels[state])


def sat_vector(ctmc, f):
    """Boolean array: which states satisfy ``f``."""
    check_atoms(ctmc, f)
    return np.array([evaluate(f, ls) for ls in ctmc.labels], dtype=bool)


def restrict_absorbing(ctmc, keep):
    """Make every state not satisfying ``keep`` absorbing."""
    sat = sat_vector(ctmc, keep)
    return ctmc._replace_rates({(s, t): r for (s, t), r in ctmc.rates.items() if sat[s]})


def restrict_final_segment(ctmc, f_prev, f_last):
    """Only ``f_prev & !f_last`` states keep their transitions."""
    return restrict_absorbing(ctmc, And(f_prev, Not(f_last)))


@dataclass(frozen=True, eq=False)
class ExtendedChain:
    """A chain with primed copies appended after the original states.

    ``copy_map[s]`` is the index of ``s'`` or ``None``.
    """

    chain: Ctmc
    copy_map: tuple
    n_original: int
    f_i: object = None
    f_next: object = None
    _origin: tuple = field(default=(), repr=False)

    def primed(self, s) -> Optional[int]:
        return self.copy_map[s]

    def original_of(self, x):
        """Original state of extended index ``x``."""
        return self._origin[x]

    @property
    def n_states(self):
        return self.chain.n_states


def build_extended(ctmc, f_i, f_next):
    """Chain for the middle segment of layer ``i``.

    A primed copy ``s'`` stands for "the switch from ``f_i`` to ``f_next`` has
    definitely happened"; it exists for every ``f_i`` state with a direct
    ``f_next`` predecessor.
    """
    a = sat_vector(ctmc, f_i)
    b = sat_vector(ctmc, f_next)
    n = ctmc.n_states

    copy_map = [None] * n
    origin = list(range(n))
    for s in range(n):
        if a[s] and any(b[p] for p in ctmc.predecessors(s)):
            copy_map[s] = len(origin)
            origin.append(s)

    def primed_or_same(t):
        return t if copy_map[t] is None else copy_map[t]

    rates = {}
    for (s, t), lam in ctmc.rates.items():
        if a[s] and not b[s]:
            rates[(s, t)] = lam  # s' (if any) stays absorbing
        elif a[s] and b[s]:
            rates[(s, t)] = lam
            if copy_map[s] is not None:
                rates[(copy_map[s], primed_or_same(t))] = lam
        elif b[s]:
            rates[(s, primed_or_same(t))] = lam
        # neither: s is absorbing

    labels = ctmc.labels + tuple(ctmc.labels[s] for s in origin[n:])
    initial = ctmc.initial + (0.0,) * (len(origin) - n)
    chain = Ctmc(len(origin), rates, labels, initial, ctmc.atoms)
    return ExtendedChain(chain, tuple(copy_map), n, f_i, f_next, tuple(origin))


@dataclass(frozen=True)
class SelectorMatrix:
    matrix: np.ndarray
    role: str  # 'I', 'I_prime' or 'I_double_prime'


def selector(ctmc, f, role="I", extended=None):
    """0/1 matrices filtering by ``f`` and mapping to/from an extended chain.

    ``I``: diagonal on the ``f`` states of ``ctmc``.
    ``I_prime``: original -> extended, mass enters the unprimed copy of ``f`` states.
    ``I_double_prime``: extended -> original, ``s`` and ``s'`` both land on ``s``
    when ``s`` satisfies ``f``.
    """
    if isinstance(ctmc, ExtendedChain):
        ctmc = ctmc.chain
    sat = sat_vector(ctmc, f)
    n = ctmc.n_states
    if role == "I":
        return SelectorMatrix(np.diag(sat.astype(float)), role)
    if role not in ("I_prime", "I_double_prime"):
        raise ValidationError(f"unknown selector role {role!r}")
    if extended is None:
        raise ValidationError(f"{role} needs the extended chain")
    if extended.n_original != n:
        raise ValidationError(
            f"dimension mismatch: chain has {n} states, extended chain was built "
            f"from {extended.n_original}")
    m = extended.n_states
    if role == "I_prime":
        mat = np.zeros((n, m))
        mat[np.arange(n), np.arange(n)] = sat
    else:
        mat = np.zeros((m, n))
        for x in range(m):
            s = extended.original_of(x)
            if sat[s]:
                mat[x, s] = 1.0
    return SelectorMatrix(mat, role)

