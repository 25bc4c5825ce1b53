"""Monte-Carlo Shapley estimators: simple sampling, K-block ergodic sampling and
the budgeted paired pipeline that learns its own involution."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from ._stats import correlation
from .analysis import improvement_ratio, pair_count
from .exceptions import BudgetError, InputError
from .game_core import Game, PositionPermutation, RngLike, as_generator, random_positions
from .greedy_matching import MatchingResult, learn_transformation

CHUNK = 1 << 15
METHODS = ("simple", "ergodic", "optk2")
THREADS_ENV = "ERGODIC_SHAPLEY_THREADS"


@dataclass(frozen=True)
class EstimateReport:
    method: str
    player: int
    estimate: float
    m: int
    std_error: float
    sigma_hat: float
    m1: Optional[int] = None
    m2: Optional[int] = None
    K: Optional[int] = None
    rho_hat: Optional[float] = None
    matching: Optional[MatchingResult] = field(default=None, compare=False, repr=False)

    @property
    def predicted_ratio(self) -> float:
        """Expected std of this estimator relative to simple sampling at budget m."""
        if self.method == "simple":
            return 1.0
        if self.method == "optk2":
            return improvement_ratio(self.m, self.m2, self.rho_hat)
        if self.sigma_hat == 0.0:
            return 0.0
        return self.std_error * math.sqrt(self.m) / self.sigma_hat


def _blocks(game: Game, idx: int, table: Optional[np.ndarray], K: int, L: int, rng) -> np.ndarray:
    """(L, K) marginal contributions: column k holds the k-fold transformed seed orders."""
    out = np.empty((L, K))
    for lo in range(0, L, CHUNK):
        hi = min(L, lo + CHUNK)
        pos = random_positions(rng, hi - lo, game.n)
        out[lo:hi, 0] = game._marginal(pos, idx)
        for k in range(1, K):
            pos = table[pos]
            out[lo:hi, k] = game._marginal(pos, idx)
    return out


def block_samples(
    game: Game, player: int, t: PositionPermutation, K: int, L: int, rng: RngLike
) -> np.ndarray:
    """Raw (L, K) marginal contributions of L seed orders and their K-1 transforms."""
    idx = game.player_index(player)
    if t.n != game.n:
        raise InputError(f"transformation acts on {t.n} positions, game has {game.n}")
    if int(K) < 1 or int(L) < 1:
        raise InputError(f"need K >= 1 and L >= 1, got K={K}, L={L}")
    return _blocks(game, idx, t.to_array(), int(K), int(L), as_generator(rng))


def _std(values: np.ndarray) -> float:
    return float(values.std(ddof=1)) if values.size > 1 else math.nan


def simple_mc(game: Game, player: int, m: int, rng: RngLike) -> EstimateReport:
    """Mean marginal contribution over m independent uniform orders."""
    idx = game.player_index(player)
    if int(m) < 2:
        raise InputError(f"sample size m must be at least 2, got {m}")
    x = _blocks(game, idx, None, 1, int(m), as_generator(rng))[:, 0]
    sigma = _std(x)
    return EstimateReport(
        method="simple",
        player=player,
        estimate=float(x.mean()),
        m=int(m),
        std_error=sigma / math.sqrt(m),
        sigma_hat=sigma,
    )


def ergodic_estimate(
    game: Game, player: int, t: PositionPermutation, K: int, m: int, rng: RngLike
) -> EstimateReport:
    """Grand mean over m/K blocks of a seed order and its K-1 successive transforms.

    The standard error treats block means as the independent unit; ``rho_hat``
    is the correlation between consecutive members of a block.
    """
    idx = game.player_index(player)
    if t.n != game.n:
        raise InputError(f"transformation acts on {t.n} positions, game has {game.n}")
    if int(K) < 2:
        raise InputError(f"block length K must be at least 2, got {K}")
    if int(m) % int(K):
        raise InputError(f"K={K} does not divide m={m}")
    K, m = int(K), int(m)
    L = m // K
    y = _blocks(game, idx, t.to_array(), K, L, as_generator(rng))
    block_means = y.mean(axis=1)
    return EstimateReport(
        method="ergodic",
        player=player,
        estimate=float(y.sum() / m),
        m=m,
        std_error=_std(block_means) / math.sqrt(L),
        sigma_hat=_std(y.ravel()),
        K=K,
        rho_hat=correlation(y[:, :-1].ravel(), y[:, 1:].ravel()),
    )


def optk2_estimate(game: Game, player: int, m: int, m1: int, rng: RngLike) -> EstimateReport:
    """Spend m1 n^2/6 of the budget learning an involution, the rest on pairs.

    The learning orders are not reused; the m2 paired seed orders are fresh.
    """
    game.player_index(player)
    if int(m1) < 2:
        raise InputError(f"learning sample size m1 must be at least 2, got {m1}")
    m2 = pair_count(m, m1, game.n)
    if m2 < 1:
        bound = 6 * int(m) / game.n**2
        raise BudgetError(
            f"budget m={m} leaves no pairs after learning with m1={m1}; need m1 <= 6m/n^2 = {bound:.4g}"
        )
    rng = as_generator(rng)
    matching = learn_transformation(game, player, m1, rng)
    paired = ergodic_estimate(game, player, matching.involution, 2, 2 * m2, rng)
    return EstimateReport(
        method="optk2",
        player=player,
        estimate=paired.estimate,
        m=int(m),
        std_error=paired.std_error,
        sigma_hat=paired.sigma_hat,
        m1=int(m1),
        m2=m2,
        K=2,
        rho_hat=paired.rho_hat,
        matching=matching,
    )


@dataclass(frozen=True)
class EstimatorConfig:
    """One estimator setting, validated before any sampling starts."""

    game: Game
    player: int
    method: str
    m: int
    m1: Optional[int] = None
    K: Optional[int] = None
    transformation: Optional[PositionPermutation] = None

    def __post_init__(self):
        self.game.player_index(self.player)
        if self.method not in METHODS:
            raise InputError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if self.method == "simple" and self.m < 2:
            raise InputError(f"sample size m must be at least 2, got {self.m}")
        if self.method == "ergodic":
            if self.K is None or self.transformation is None:
                raise InputError("ergodic sampling needs a block length K and a transformation")
            if self.K < 2:
                raise InputError(f"block length K must be at least 2, got {self.K}")
            if self.m % self.K:
                raise InputError(f"K={self.K} does not divide m={self.m}")
            if self.transformation.n != self.game.n:
                raise InputError("transformation size does not match the game")
        if self.method == "optk2":
            if self.m1 is None:
                raise InputError("optk2 needs a learning sample size m1")
            if self.m1 < 2:
                raise InputError(f"learning sample size m1 must be at least 2, got {self.m1}")
            if pair_count(self.m, self.m1, self.game.n) < 1:
                raise BudgetError(
                    f"budget m={self.m} leaves no pairs with m1={self.m1}; "
                    f"need m1 <= 6m/n^2 = {6 * self.m / self.game.n**2:.4g}"
                )

    def run(self, rng: RngLike) -> EstimateReport:
        if self.method == "simple":
            return simple_mc(self.game, self.player, self.m, rng)
        if self.method == "ergodic":
            return ergodic_estimate(self.game, self.player, self.transformation, self.K, self.m, rng)
        return optk2_estimate(self.game, self.player, self.m, self.m1, rng)


@dataclass(frozen=True)
class ReplicationSummary:
    config: EstimatorConfig
    estimates: np.ndarray
    sigma_E: float
    mean_rho_hat: Optional[float]
    sigma: float
    reports: tuple[EstimateReport, ...] = field(repr=False, compare=False, default=())

    @property
    def sigma_S(self) -> float:
        """Analytic std of simple sampling with the same budget."""
        return self.sigma / math.sqrt(self.config.m)

    @property
    def ratio(self) -> float:
        return self.sigma_E / self.sigma_S if self.sigma_S > 0 else math.nan

    @property
    def mean(self) -> float:
        return float(self.estimates.mean())


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def marginal_std(game: Game, player: int, size: int, rng: RngLike) -> float:
    """Sample std of the marginal contribution over ``size`` uniform orders."""
    return simple_mc(game, player, size, rng).sigma_hat


def _run(job):
    config, seed = job
    return config.run(np.random.default_rng(seed))


def run_parallel(fn, jobs: list, threads: int) -> list:
    """Map ``fn`` over jobs in order, in worker processes when threads > 1."""
    if threads <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, jobs))


def replicate(
    config: EstimatorConfig,
    R: int,
    seed: Union[int, Sequence[int], None] = None,
    *,
    sigma: Optional[float] = None,
    sigma_samples: int = 200_000,
    threads: int = 1,
) -> ReplicationSummary:
    """Run the estimator R times on independent streams.

    A single ``seed`` is split into R replication streams plus one stream for
    the reference sample that estimates the marginal-contribution std (used
    for sigma_S unless ``sigma`` is given).
    """
    if int(R) < 2:
        raise InputError(f"need at least 2 replications, got {R}")
    if isinstance(seed, Sequence) and not isinstance(seed, str):
        if len(seed) != R:
            raise InputError(f"got {len(seed)} seeds for {R} replications")
        streams = [np.random.SeedSequence(s) for s in seed]
        reference = np.random.SeedSequence(list(seed))
    else:
        children = np.random.SeedSequence(seed).spawn(R + 1)
        streams, reference = children[:R], children[R]
    reports = run_parallel(_run, [(config, s) for s in streams], threads)
    estimates = np.array([r.estimate for r in reports])
    rhos = [r.rho_hat for r in reports if r.rho_hat is not None]
    if sigma is None:
        sigma = marginal_std(config.game, config.player, sigma_samples, np.random.default_rng(reference))
    return ReplicationSummary(
        config=config,
        estimates=estimates,
        sigma_E=float(estimates.std(ddof=1)),
        mean_rho_hat=float(np.mean(rhos)) if rhos else None,
        sigma=float(sigma),
        reports=tuple(reports),
    )
