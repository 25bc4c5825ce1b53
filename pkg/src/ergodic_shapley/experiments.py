"""Replication studies and correlation sweeps behind the CLI tables."""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .estimators import EstimatorConfig, ergodic_estimate, marginal_std, replicate, run_parallel
from .games import make_game
from .greedy_matching import learn_transformation

CORRELATION_GRID = (2, 15, 40, 100, 250, 610, 1525, 3800, 9500)


def _stream(seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))


def _game_key(game_id: str) -> int:
    return zlib.crc32(game_id.encode())


@dataclass(frozen=True)
class Setting:
    m: int
    m1: Optional[int] = None


def replication_table(
    game_id: str,
    player: int,
    method: str,
    settings: Sequence[Setting],
    R: int,
    seed: int,
    *,
    scale: Optional[int] = None,
    K: Optional[int] = None,
    transformation=None,
    sigma_samples: int = 200_000,
    threads: int = 1,
) -> list[dict]:
    """One row per setting with the analytic sigma_S, empirical sigma_E and their ratio.

    sigma_S uses a single reference estimate of the marginal-contribution std
    shared by all settings.
    """
    game = make_game(game_id, scale)
    configs = [
        EstimatorConfig(game, player, method, s.m, m1=s.m1, K=K, transformation=transformation)
        for s in settings
    ]
    sigma = marginal_std(game, player, sigma_samples, np.random.default_rng(_stream(seed, 0)))
    rows = []
    for i, config in enumerate(configs, start=1):
        summary = replicate(config, R, _stream(seed, i).generate_state(1)[0].item(), sigma=sigma, threads=threads)
        m2 = summary.reports[0].m2
        rows.append(
            {
                "game": game_id,
                "player": player,
                "m": config.m,
                "m1": config.m1,
                "m2": m2,
                "sigma_S": summary.sigma_S,
                "sigma_E": summary.sigma_E,
                "ratio": summary.ratio,
            }
        )
    rows.sort(key=lambda r: (r["m1"] or 0, r["m"]))
    return rows


def _sweep_cell(job) -> tuple[float, float]:
    game_id, scale, player, m1, pairs, seq = job
    game = make_game(game_id, scale)
    learn_seq, pair_seq = seq.spawn(2)
    matching = learn_transformation(game, player, m1, np.random.default_rng(learn_seq))
    check = ergodic_estimate(game, player, matching.involution, 2, 2 * pairs, np.random.default_rng(pair_seq))
    return check.rho_hat, matching.rho_hat_learning


def correlation_sweep(
    game_ids: Sequence[str],
    players: Sequence[int],
    m1_grid: Sequence[int] = CORRELATION_GRID,
    seeds: int = 20,
    seed: int = 0,
    *,
    pairs: int = 20_000,
    scale: Optional[int] = None,
    threads: int = 1,
) -> list[dict]:
    """Mean pair correlation achieved by the learned involution per (game, m1).

    ``rho_hat`` is measured on ``pairs`` fresh paired orders, as the estimator
    would see it; ``rho_hat_learning`` is the in-sample value on the learning
    orders.
    """
    cells = [(g, p, m1) for g, p in zip(game_ids, players) for m1 in m1_grid]
    jobs = [
        (g, scale, p, m1, pairs, _stream(seed, _game_key(g), m1, s))
        for g, p, m1 in cells
        for s in range(seeds)
    ]
    results = run_parallel(_sweep_cell, jobs, threads)
    rows = []
    for c, (g, p, m1) in enumerate(cells):
        chunk = results[c * seeds : (c + 1) * seeds]
        rows.append(
            {
                "game": g,
                "player": p,
                "m1": m1,
                "seeds": seeds,
                "rho_hat": float(np.mean([r[0] for r in chunk])),
                "rho_hat_learning": float(np.mean([r[1] for r in chunk])),
            }
        )
    return rows
