"""Monte Carlo wealth-exchange simulation.

One transaction picks an ordered pair of distinct agents and moves
sqrt(intensity) * min(w_i, w_j) from one to the other on a fair coin.  The
loser's new wealth is derived from the pair total rather than by
subtracting the transfer, which keeps the pair total bitwise intact (a
Sterbenz argument when the shares are comparable, a half-ulp rounding
argument otherwise), so wealth conservation survives millions of
transactions unharmed.

Randomness discipline: one PCG64 stream per replica; draws happen in
chunks, each chunk drawing winner indices, then partner offsets, then
coins, in that order.  Identical seed and schedule give identical
trajectories on every backend.

Time scale: the mean-field equations advance one time unit per N/2
transactions (a tagged agent is party to a transaction with probability
2/N, and must accumulate one unit of exchange variance per unit time).
The conversion is exposed as ``time_scale`` because it is a modeling
convention, not a measurable; the default 1.0 is the derived value.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ValidationError
from .fields import Domain, LorenzCurve, MetricSeries

#: transactions drawn per RNG request; bounds memory, frozen for replay
TRANSACTION_CHUNK = 65536


def transact(w_i: float, w_j: float, intensity: float,
             coin: int) -> tuple[float, float]:
    """One exchange; returns the updated pair with its total preserved."""
    if not (w_i > 0 and w_j > 0):
        raise ValidationError("wealths must be positive")
    if not 0.0 < intensity < 1.0:
        raise ValidationError("intensity must lie strictly inside (0, 1)")
    if coin not in (-1, 1):
        raise ValidationError("coin must be -1 or +1")
    delta = math.sqrt(intensity) * min(w_i, w_j) * coin
    total = w_i + w_j
    new_i = w_i + delta
    new_j = total - new_i
    if new_i < 0.5 * total:
        # complement of the side holding at least half the total is exact
        # (Sterbenz), so rederive the smaller side from the larger one and
        # the pair sums to the total without any rounding
        new_i = total - new_j
    return new_i, new_j


def sample_gini(wealths: np.ndarray) -> float:
    """Exact Gini of a finite sample (sorted rank-weight formula).

    Zero wealth is admitted: deep condensation parks agents at exactly
    zero in floating point once the pair total rounds to the richer side.
    """
    w = np.sort(np.asarray(wealths, dtype=float))
    n = w.size
    if n < 2:
        return 0.0
    if np.any(w < 0) or not w[-1] > 0:
        raise ValidationError(
            "wealths must be nonnegative with a positive total")
    ranks = 2.0 * np.arange(1, n + 1) - n - 1.0
    return float(np.sum(ranks * w) / (n * np.sum(w)))


def empirical_lorenz(wealths: np.ndarray, time: float = 0.0) -> LorenzCurve:
    """Normalized Lorenz curve of a sample: share of total held by the
    poorest k agents, at f = k/N. Zero wealth is admitted (condensed
    limit); negatives are rejected."""
    w = np.sort(np.asarray(wealths, dtype=float))
    if w.size < 2:
        raise ValidationError("need at least 2 agents")
    if np.any(w < 0) or not w[-1] > 0:
        raise ValidationError(
            "wealths must be nonnegative with a positive total")
    n = w.size
    values = np.empty(n + 1)
    values[0] = 0.0
    np.cumsum(w, out=values[1:])
    total = values[-1]
    values /= total
    values[-1] = 1.0
    return LorenzCurve(np.linspace(0.0, 1.0, n + 1), values, time=time,
                       domain=Domain.POSITIVE)


@dataclass
class AgentPopulation:
    """Mutable simulation state of one replica.

    ``seed`` may be an integer or a SeedSequence (ensemble runners hand
    each replica a spawned child sequence).
    """

    wealths: np.ndarray
    intensity: float
    seed: int | np.random.SeedSequence = 0
    steps_done: int = 0
    _rng: np.random.Generator = field(init=False, repr=False)
    _sqrt_intensity: float = field(init=False, repr=False)
    _draw_cursor: int = field(init=False, repr=False)
    _draw_ii: np.ndarray = field(init=False, repr=False)
    _draw_jj: np.ndarray = field(init=False, repr=False)
    _draw_coins: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        w = np.array(self.wealths, dtype=float)
        if w.ndim != 1 or w.size < 2:
            raise ValidationError("wealths must be a 1-D array of at least 2")
        if not np.all(w > 0):
            raise ValidationError("wealths must be positive")
        if not 0.0 < self.intensity < 1.0:
            raise ValidationError("intensity must lie strictly inside (0, 1)")
        self.wealths = w
        seed = self.seed
        if not isinstance(seed, np.random.SeedSequence):
            seed = np.random.SeedSequence(int(seed))
        self._rng = np.random.Generator(np.random.PCG64(seed))
        self._sqrt_intensity = math.sqrt(self.intensity)
        self._draw_cursor = TRANSACTION_CHUNK  # empty buffer

    @property
    def size(self) -> int:
        return self.wealths.size

    def total(self) -> float:
        return float(np.sum(self.wealths))

    def _refill_draws(self) -> None:
        n = self.size
        m = TRANSACTION_CHUNK
        self._draw_ii = self._rng.integers(0, n, size=m)
        jj = self._rng.integers(0, n - 1, size=m)
        jj += jj >= self._draw_ii  # uniform over the other n - 1 agents
        self._draw_jj = jj
        self._draw_coins = self._rng.integers(0, 2, size=m) * 2.0 - 1.0
        self._draw_cursor = 0

    def advance(self, steps: int) -> None:
        """Apply ``steps`` transactions.

        Draws are buffered in fixed-size blocks, so the trajectory of a
        given seed does not depend on how the steps are split across
        calls (recording cadence must not change the physics).
        """
        if steps < 0:
            raise ValidationError("steps must be nonnegative")
        remaining = steps
        while remaining > 0:
            if self._draw_cursor == TRANSACTION_CHUNK:
                self._refill_draws()
            m = min(remaining, TRANSACTION_CHUNK - self._draw_cursor)
            sl = slice(self._draw_cursor, self._draw_cursor + m)
            _kernels.transaction_sweep(self.wealths, self._draw_ii[sl],
                                       self._draw_jj[sl],
                                       self._draw_coins[sl],
                                       self._sqrt_intensity)
            self._draw_cursor += m
            remaining -= m
        self.steps_done += steps


def run_agents(n_agents: int, steps: int, intensity: float, seed,
               initial_wealths: np.ndarray | None = None,
               record_every: int | None = None,
               time_scale: float = 1.0,
               ) -> tuple[list[np.ndarray], MetricSeries]:
    """Simulate one replica, recording snapshots and metrics at the cadence.

    Returns wealth snapshots (copies) and a MetricSeries whose times are
    mean-field units: steps / (time_scale * n_agents / 2).
    """
    if n_agents < 2:
        raise ValidationError("need at least 2 agents")
    if steps < 0:
        raise ValidationError("steps must be nonnegative")
    if not time_scale > 0:
        raise ValidationError("time_scale must be positive")
    if initial_wealths is None:
        initial_wealths = np.ones(n_agents)
    elif len(initial_wealths) != n_agents:
        raise ValidationError("initial_wealths length must equal n_agents")
    pop = AgentPopulation(initial_wealths, intensity, seed)
    if record_every is None:
        record_every = max(1, steps // 10)
    steps_per_unit = time_scale * n_agents / 2.0
    total0 = pop.total()

    def record() -> tuple[np.ndarray, dict]:
        w = pop.wealths.copy()
        return w, {
            "time": pop.steps_done / steps_per_unit,
            "gini": sample_gini(w),
            "mean": float(np.mean(w)),
            "std": float(np.std(w)),
            "mass_error": abs(pop.total() - total0) / total0,
        }

    snap, row = record()
    snapshots, rows = [snap], [row]
    done = 0
    while done < steps:
        batch = min(record_every, steps - done)
        pop.advance(batch)
        done += batch
        snap, row = record()
        snapshots.append(snap)
        rows.append(row)
    return snapshots, MetricSeries.from_rows(rows)


def replica_seed_sequences(base_seed: int,
                           count: int) -> list[np.random.SeedSequence]:
    """Independent child sequences for an ensemble, derived from one seed."""
    if count < 1:
        raise ValidationError("count must be positive")
    return np.random.SeedSequence(int(base_seed)).spawn(count)


def run_ensemble(n_replicas: int, n_agents: int, steps: int, intensity: float,
                 base_seed: int,
                 initial_wealths: np.ndarray | None = None,
                 record_every: int | None = None,
                 time_scale: float = 1.0,
                 threads: int = 1,
                 ) -> list[MetricSeries]:
    """Run independent replicas; returns one MetricSeries per replica.

    Replica order in the result is the seed-spawn order regardless of
    thread scheduling, so aggregation is deterministic.
    """
    if n_replicas < 1:
        raise ValidationError("n_replicas must be positive")
    seeds = replica_seed_sequences(base_seed, n_replicas)

    def one(seq: np.random.SeedSequence) -> MetricSeries:
        _, series = run_agents(n_agents, steps, intensity, seq,
                               initial_wealths=initial_wealths,
                               record_every=record_every,
                               time_scale=time_scale)
        return series

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, seeds))
    return [one(s) for s in seeds]


def ensemble_gini(replicas: list[MetricSeries]
                  ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pointwise mean and standard error of the replica Gini trajectories.

    All replicas must share record times.  The standard error is the
    replica-to-replica deviation of the mean, s / sqrt(R).
    """
    if not replicas:
        raise ValidationError("need at least one replica")
    times = replicas[0].times
    for series in replicas[1:]:
        if not np.allclose(series.times, times, rtol=0.0, atol=1e-12):
            raise ValidationError("replica record times disagree")
    stack = np.vstack([series.gini for series in replicas])
    mean = stack.mean(axis=0)
    if stack.shape[0] > 1:
        se = stack.std(axis=0, ddof=1) / math.sqrt(stack.shape[0])
    else:
        se = np.zeros_like(mean)
    return times, mean, se
