"""Monte Carlo estimate of multi-until probabilities straight from the path semantics.

A path satisfies ``f1 U[a1,b1] f2 ... U[a_{n-1},b_{n-1}] fn`` iff there are
switch times ``0 < t1 < ... < t_{n-1}`` with ``ti`` in ``[ai, bi]``, ``fi``
holding on ``[t_{i-1}, ti)`` (``t0 = 0``) and ``fn`` holding at ``t_{n-1}``.
Paths are right-continuous: at a jump time the path is in the entered state.

Sampling is done in fixed-size blocks, each with its own generator keyed by
``(seed, block index)``.  Sample ``k`` therefore depends only on ``(seed, k)``
and the estimate is the same for any number of workers.
"""

from __future__ import annotations

import bisect
import itertools
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .ctmc import sat_vector
from .errors import ValidationError
from .formula import ThresholdQuery

BLOCK_SIZE = 4096
THREADS_ENV = "MULTIUNTIL_THREADS"


@dataclass(frozen=True)
class TimedPath:
    states: tuple
    times: tuple      # entry times, times[0] == 0, strictly increasing
    horizon: float

    def __post_init__(self):
        if len(self.states) != len(self.times) or not self.states:
            raise ValidationError("a path needs one entry time per state")
        if self.times[0] != 0:
            raise ValidationError("the first entry time must be 0")
        if any(u >= v for u, v in zip(self.times, self.times[1:])):
            raise ValidationError("entry times must be strictly increasing")

    def state_at(self, t):
        return self.states[bisect.bisect_right(self.times, t) - 1]


@dataclass(frozen=True)
class Estimate:
    p_hat: float
    samples: int
    successes: int
    radius: float
    confidence: float
    seed: int

    @property
    def interval(self):
        return max(self.p_hat - self.radius, 0.0), min(self.p_hat + self.radius, 1.0)


# -- sampling ---------------------------------------------------------------

class _Sampler:
    """Vectorised CTMC simulation tables."""

    def __init__(self, ctmc):
        n = ctmc.n_states
        self.exit = np.array(ctmc.exit_rates)
        probs = np.zeros((n, n))
        for (s, t), r in ctmc.rates.items():
            probs[s, t] = r / self.exit[s]
        self.cum = np.cumsum(probs, axis=1)
        self.last = np.array([np.flatnonzero(row).max(initial=0) for row in probs])
        self.init_cum = np.cumsum(np.asarray(ctmc.initial))
        self.n = n

    def run(self, rng, horizon, count):
        """Simulate ``count`` paths up to ``horizon``; returns per-path lists."""
        u0 = rng.random(count)
        state = np.minimum(np.searchsorted(self.init_cum, u0, side="right"), self.n - 1)
        time = np.zeros(count)
        states_hist = [state.copy()]
        times_hist = [time.copy()]
        alive = self.exit[state] > 0
        while alive.any():
            idx = np.flatnonzero(alive)
            cur = state[idx]
            new_t = time[idx] + rng.exponential(1.0, idx.size) / self.exit[cur]
            u = rng.random(idx.size)
            rows = self.cum[cur]
            # cumulative sums can fall just short of 1
            nxt = np.minimum((u[:, None] >= rows).sum(axis=1), self.last[cur])
            jumped = new_t <= horizon
            step_state = np.full(count, -1)
            step_time = np.full(count, np.nan)
            j = idx[jumped]
            state[j] = nxt[jumped]
            time[j] = new_t[jumped]
            step_state[j] = state[j]
            step_time[j] = time[j]
            states_hist.append(step_state)
            times_hist.append(step_time)
            alive[idx[~jumped]] = False
            alive[j] = self.exit[state[j]] > 0
        st = np.stack(states_hist, axis=1).tolist()
        tm = np.stack(times_hist, axis=1).tolist()
        paths = []
        for srow, trow in zip(st, tm):
            k = len(srow)
            while srow[k - 1] < 0:
                k -= 1
            paths.append((srow[:k], trow[:k]))
        return paths


def sample_paths(ctmc, rng, horizon, count):
    """Timed paths: exponential sojourns, successor ``t`` with prob ``rate/exit``.

    Start states are drawn from the initial distribution; paths stop on
    absorption or at ``horizon``.
    """
    if horizon < 0:
        raise ValidationError("horizon must be nonnegative")
    return [TimedPath(tuple(states), tuple(times), float(horizon))
            for states, times in _Sampler(ctmc).run(rng, horizon, count)]


def sample_path(ctmc, rng, horizon):
    return sample_paths(ctmc, rng, horizon, 1)[0]


def block_rng(seed, block):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block])))


# -- path satisfaction ------------------------------------------------------

def _layer_sat(ctmc, q):
    return [sat_vector(ctmc, f).tolist() for f in q.layers]


def _satisfies_fast(states, times, sat, intervals):
    """Track, per run of the current layer, the earliest feasible switch time.

    Within one maximal run of ``f_i`` states the earliest reachable switch
    time dominates all later ones, so the feasible next switch times are
    ``(earliest, run_end]`` for each run that was reached.
    """
    m = len(states)
    first = sat[0]
    if not first[states[0]]:
        return False
    j = 1
    while j < m and first[states[j]]:
        j += 1
    reach = [(0.0, times[j] if j < m else math.inf)]
    last_layer = len(intervals) - 1
    for i, (a, b) in enumerate(intervals):
        nxt = sat[i + 1]
        earliest = {}  # segment index -> infimum of feasible switch times in it
        for e, r in reach:
            lo_cap = max(e, a)
            hi_cap = min(r, b)
            if lo_cap > hi_cap:
                continue
            k = bisect.bisect_right(times, lo_cap) - 1
            while k < m and times[k] <= hi_cap:
                if nxt[states[k]]:
                    start = times[k]
                    end = times[k + 1] if k + 1 < m else math.inf
                    lo = max(lo_cap, start)
                    lo_open = lo == e
                    hi = min(hi_cap, end)
                    hi_open = hi == end
                    if lo < hi or (lo == hi and not lo_open and not hi_open):
                        if k not in earliest or lo < earliest[k]:
                            earliest[k] = lo
                k += 1
        if not earliest:
            return False
        if i == last_layer:
            return True
        # group feasible segments into runs of f_{i+1} and take each run's minimum
        reach = []
        ks = sorted(earliest)
        idx = 0
        while idx < len(ks):
            k = ks[idx]
            best = earliest[k]
            end = k
            while end + 1 < m and nxt[states[end + 1]]:
                end += 1
                if end in earliest:
                    best = min(best, earliest[end])
            while idx < len(ks) and ks[idx] <= end:
                idx += 1
            reach.append((best, times[end + 1] if end + 1 < m else math.inf))
    return False


def _candidates(times, intervals, n_switch):
    crit = {0.0}
    for iv in intervals:
        crit.update((iv.lo, iv.hi))
    top = intervals[-1].hi
    crit.update(t for t in times if t <= top)
    crit = sorted(crit)
    out = list(crit)
    for x, y in zip(crit, crit[1:]):
        for k in range(1, n_switch + 1):
            p = x + (y - x) * k / (n_switch + 1)
            if x < p < y:
                out.append(p)
    return sorted(set(out))


def _satisfies_exhaustive(states, times, sat, intervals):
    """Try every increasing tuple of canonical switch times.

    All clauses only depend on which critical point or open gap between
    critical points each switch time falls in, plus their order, so a few
    interior points per gap represent every possible witness.
    """
    path = TimedPath(tuple(states), tuple(times), math.inf)
    n_switch = len(intervals)

    def holds_on(layer, lo, hi):
        # layer holds at every t' in [lo, hi)
        if not sat[layer][path.state_at(lo)]:
            return False
        return all(sat[layer][s] for s, t in zip(states, times) if lo < t < hi)

    for ts in itertools.combinations(_candidates(times, intervals, n_switch), n_switch):
        if ts[0] <= 0:
            continue
        prev = 0.0
        ok = True
        for i, (t, iv) in enumerate(zip(ts, intervals)):
            if not (iv.lo <= t <= iv.hi and holds_on(i, prev, t)):
                ok = False
                break
            prev = t
        if ok and sat[-1][path.state_at(ts[-1])]:
            return True
    return False


def _prepare(ctmc, path, q):
    if isinstance(q, ThresholdQuery):
        q = q.path
    if path.horizon < q.horizon:
        raise ValidationError(
            f"path horizon {path.horizon} is shorter than the formula horizon {q.horizon}")
    return q, list(path.states), list(path.times), _layer_sat(ctmc, q)


def path_satisfies(ctmc, path, q):
    """Whether the timed path satisfies the multi-until formula ``q``."""
    q, states, times, sat = _prepare(ctmc, path, q)
    return _satisfies_fast(states, times, sat, [(iv.lo, iv.hi) for iv in q.intervals])


def path_satisfies_exhaustive(ctmc, path, q):
    """Reference decision by full search over canonical witnesses (slow)."""
    q, states, times, sat = _prepare(ctmc, path, q)
    return _satisfies_exhaustive(states, times, sat, q.intervals)


# -- estimation -------------------------------------------------------------

def wilson_radius(successes, n, confidence):
    z = statistics.NormalDist().inv_cdf(0.5 + confidence / 2)
    p = successes / n
    denom = 1 + z * z / n
    return z / denom * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))


def _count_block(args):
    sampler, sat, intervals, horizon, seed, block, count = args
    rng = block_rng(seed, block)
    hits = 0
    for states, times in sampler.run(rng, horizon, count):
        if _satisfies_fast(states, times, sat, intervals):
            hits += 1
    return hits


def default_workers():
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        value = int(raw)
    except ValueError:
        raise ValidationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if value < 0:
        raise ValidationError(f"{THREADS_ENV} must be >= 0")
    return value or (os.cpu_count() or 1)


def estimate(ctmc, q, samples=100_000, seed=0, confidence=0.99, workers=None):
    """Fraction of sampled paths (started from the initial distribution) satisfying ``q``."""
    if samples < 1:
        raise ValidationError("samples must be at least 1")
    if not 0 < confidence < 1:
        raise ValidationError("confidence must lie in (0, 1)")
    if isinstance(q, ThresholdQuery):
        q = q.path
    sat = _layer_sat(ctmc, q)
    intervals = [(iv.lo, iv.hi) for iv in q.intervals]
    sampler = _Sampler(ctmc)
    jobs = []
    for block, start in enumerate(range(0, samples, BLOCK_SIZE)):
        count = min(BLOCK_SIZE, samples - start)
        jobs.append((sampler, sat, intervals, q.horizon, seed, block, count))
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(jobs) == 1:
        hits = sum(map(_count_block, jobs))
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            hits = sum(pool.map(_count_block, jobs))
    return Estimate(hits / samples, samples, hits,
                    wilson_radius(hits, samples, confidence), confidence, seed)
