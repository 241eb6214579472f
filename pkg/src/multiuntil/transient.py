"""Transient probabilities P(t) = exp(Q t) by uniformization."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

DEFAULT_EPSILON = 1e-12


def generator_of(ctmc):
    """Dense generator: off-diagonals are rates, diagonal is minus the exit rate."""
    n = ctmc.n_states
    q = np.zeros((n, n))
    for (s, t), r in ctmc.rates.items():
        q[s, t] = r
    q[np.diag_indices(n)] = -np.array(ctmc.exit_rates)
    return q


def poisson_weights(lambda_t, epsilon=DEFAULT_EPSILON):
    """Poisson(``lambda_t``) probabilities on a window holding mass >= 1 - epsilon.

    Returns ``(left, weights)`` where ``weights[k]`` approximates
    ``exp(-lambda_t) lambda_t**(left+k) / (left+k)!``.  The window grows from
    the mode outwards, always taking the heavier neighbour, so it is the
    shortest window reaching the requested mass.  Starting from the mode in
    log space avoids underflow of ``exp(-lambda_t)``.
    """
    if not lambda_t >= 0 or not math.isfinite(lambda_t):
        raise ValidationError(f"lambda_t must be finite and nonnegative, got {lambda_t}")
    if not 0 < epsilon < 1:
        raise ValidationError(f"epsilon must lie in (0, 1), got {epsilon}")
    if lambda_t == 0:
        return 0, np.array([1.0])

    mode = int(math.floor(lambda_t))
    log_mode = -lambda_t + mode * math.log(lambda_t) - math.lgamma(mode + 1)
    w_mode = math.exp(log_mode)
    left_w, right_w = [], []
    lo, hi = mode, mode
    w_lo, w_hi = w_mode, w_mode
    total = w_mode
    target = 1.0 - epsilon / 2
    while total < target:
        nxt_lo = w_lo * lo / lambda_t if lo > 0 else 0.0
        nxt_hi = w_hi * lambda_t / (hi + 1)
        if nxt_lo == 0.0 and nxt_hi == 0.0:
            break
        if nxt_lo >= nxt_hi:
            lo -= 1
            w_lo = nxt_lo
            left_w.append(w_lo)
            total += w_lo
        else:
            hi += 1
            w_hi = nxt_hi
            right_w.append(w_hi)
            total += w_hi
    weights = np.array(left_w[::-1] + [w_mode] + right_w)
    s = math.fsum(weights)
    if s > 1.0:
        weights = weights / s
    return lo, weights


@dataclass(frozen=True)
class TransientMatrix:
    matrix: np.ndarray
    t: float
    epsilon: float


def transient(gen, t, epsilon=DEFAULT_EPSILON):
    """``exp(gen * t)`` with truncation error at most ``epsilon`` per row."""
    gen = np.asarray(gen, dtype=float)
    if t < 0:
        raise ValidationError(f"time must be nonnegative, got {t}")
    n = gen.shape[0]
    exits = -np.diag(gen)
    absorbing = exits == 0
    rate = float(exits.max()) if n else 0.0
    if t == 0 or rate == 0:
        return TransientMatrix(np.eye(n), float(t), epsilon)

    u = np.eye(n) + gen / rate
    left, weights = poisson_weights(rate * t, epsilon)
    result = np.zeros((n, n))
    power = np.eye(n)
    for k in range(left + len(weights)):
        if k >= left:
            result += weights[k - left] * power
        power = power @ u
    np.clip(result, 0.0, 1.0, out=result)
    # rows of absorbing states are exactly unit vectors
    result[absorbing] = 0.0
    result[absorbing, np.flatnonzero(absorbing)] = 1.0
    return TransientMatrix(result, float(t), epsilon)
