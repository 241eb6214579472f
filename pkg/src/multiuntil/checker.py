"""Numerical probability of multi-until formulas as a product of matrices.

Three variants share one factor layout (``4n - 3`` factors for ``n`` layers):

``corrected``
    middle segments run on the extended chain with primed copies, the last
    segment makes ``f_n`` states absorbing.
``original``
    plain ``f_i | f_{i+1}`` restrictions everywhere, including the last
    segment.  Kept on purpose; it overcounts back-and-forth switching and
    undercounts paths leaving ``f_n`` early.  Do not trust its numbers.
``partial``
    ``original`` with only the last segment fixed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ctmc import (build_extended, check_atoms, restrict_absorbing,
                   restrict_final_segment, selector)
from .formula import And, MultiUntilQuery, Not, Or, ThresholdQuery, check_non_overlap, format_state_formula
from .transient import DEFAULT_EPSILON, generator_of, transient


class Variant(str, enum.Enum):
    CORRECTED = "corrected"
    ORIGINAL = "original"
    PARTIAL = "partial"


@dataclass(frozen=True)
class Factor:
    """One factor of the product, applied right-to-left to a column vector."""

    kind: str          # 'transient', 'selector' or 'ones'
    label: str
    matrix: Optional[np.ndarray]
    time: float = 0.0
    epsilon: float = 0.0

    @property
    def shape(self):
        return self.matrix.shape


@dataclass(frozen=True)
class ProbVector:
    values: np.ndarray     # one entry per original state
    variant: Variant
    error_bound: float
    initial: float         # dot product with the initial distribution

    def __getitem__(self, s):
        return self.values[s]


def _fmt(f):
    return format_state_formula(f)


def _p(ctmc, keep, t, epsilon, label):
    chain = restrict_absorbing(ctmc, keep)
    tm = transient(generator_of(chain), t, epsilon)
    return Factor("transient", f"P_{{{label}}}({t:g})", tm.matrix, t, epsilon)


def _sel(ctmc, f, role, label, extended=None):
    return Factor("selector", label, selector(ctmc, f, role, extended).matrix)


def explain_product(ctmc, q, variant=Variant.CORRECTED, epsilon=DEFAULT_EPSILON):
    """The ordered list of factors whose product gives the per-state probabilities."""
    variant = Variant(variant)
    if isinstance(q, ThresholdQuery):
        q = q.path
    for f in q.layers:
        check_atoms(ctmc, f)
    check_non_overlap(q.intervals)

    layers, ivs = q.layers, q.intervals
    n = len(layers)
    factors = []
    prev_hi = 0.0
    for i in range(n - 1):
        f, g = layers[i], layers[i + 1]
        a, b = ivs[i].lo, ivs[i].hi
        wait, span = a - prev_hi, b - a
        if wait < 0 or span < 0:
            raise ValueError("negative segment time")
        last = i == n - 2
        factors.append(_p(ctmc, f, wait, epsilon, _fmt(f)))
        if variant is Variant.CORRECTED and not last:
            ext = build_extended(ctmc, f, g)
            tm = transient(generator_of(ext.chain), span, epsilon)
            factors.append(_sel(ctmc, f, "I_prime", f"I'_{{{_fmt(f)}}}", ext))
            factors.append(Factor("transient", f"P'_{{{_fmt(Or(f, g))}}}({span:g})",
                                  tm.matrix, span, epsilon))
            factors.append(_sel(ctmc, g, "I_double_prime", f"I''_{{{_fmt(g)}}}", ext))
        else:
            factors.append(_sel(ctmc, f, "I", f"I_{{{_fmt(f)}}}"))
            if last and variant is not Variant.ORIGINAL:
                chain = restrict_final_segment(ctmc, f, g)
                label = f"P_{{{_fmt(And(f, Not(g)))}}}({span:g})"
            else:
                chain = restrict_absorbing(ctmc, Or(f, g))
                label = f"P_{{{_fmt(Or(f, g))}}}({span:g})"
            tm = transient(generator_of(chain), span, epsilon)
            factors.append(Factor("transient", label, tm.matrix, span, epsilon))
            factors.append(_sel(ctmc, g, "I", f"I_{{{_fmt(g)}}}"))
        prev_hi = b
    factors.append(Factor("ones", "1", np.ones(ctmc.n_states)))
    return factors


def evaluate_factors(factors):
    """Multiply the factors right to left, clamping after each step.

    Returns ``(vector, error_bound)``; the bound adds the truncation error of
    each transient factor and the mass removed by clamping.
    """
    vec = factors[-1].matrix.copy()
    bound = 0.0
    for factor in reversed(factors[:-1]):
        vec = factor.matrix @ vec
        clipped = np.clip(vec, 0.0, 1.0)
        bound += float(np.abs(clipped - vec).max(initial=0.0)) + factor.epsilon
        vec = clipped
    return vec, bound


def check(ctmc, q, variant=Variant.CORRECTED, epsilon=DEFAULT_EPSILON):
    """Probability, for every start state, that a path satisfies ``q``."""
    variant = Variant(variant)
    vec, bound = evaluate_factors(explain_product(ctmc, q, variant, epsilon))
    initial = float(np.dot(np.asarray(ctmc.initial), vec))
    return ProbVector(vec, variant, bound, min(max(initial, 0.0), 1.0))


@dataclass(frozen=True)
class ThresholdResult:
    verdicts: tuple       # per state
    initial_verdict: bool
    probabilities: ProbVector


def check_threshold(ctmc, q, variant=Variant.CORRECTED, epsilon=DEFAULT_EPSILON):
    """Compare each state's probability to the bound of ``q`` (no tolerance band)."""
    probs = check(ctmc, q.path, variant, epsilon)
    verdicts = tuple(bool(q.holds(float(p))) for p in probs.values)
    return ThresholdResult(verdicts, bool(q.holds(probs.initial)), probs)


def is_path_query(q):
    return isinstance(q, MultiUntilQuery)
