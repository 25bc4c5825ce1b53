"""Learning a pairing transformation from transposition covariances.

For every pair of positions (r, s), including loops r == s, the learning sample
estimates the covariance between a player's marginal contribution in an order
and in the same order with positions r and s swapped.  A greedy scan over
these weights builds a matching of positions; the product of its
transpositions is the involution used to pair samples.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np

from ._stats import correlation
from .exceptions import InputError
from .game_core import Game, PositionPermutation, RngLike, as_generator, random_positions

# upper bound on the boolean scratch matrix built per batch of swapped orders
_SCRATCH_BYTES = 1 << 25


@dataclass(frozen=True)
class CovarianceTable:
    """Symmetric table of covariances between the plain and swapped streams."""

    n: int
    beta: np.ndarray
    m1: int
    evaluations: int

    def __post_init__(self):
        self.beta.setflags(write=False)

    def __getitem__(self, rs: tuple[int, int]) -> float:
        r, s = rs
        if not (1 <= r <= self.n and 1 <= s <= self.n):
            raise InputError(f"cell ({r}, {s}) outside 1..{self.n}")
        return float(self.beta[r - 1, s - 1])

    @property
    def triples(self) -> int:
        """Number of (r <= s, order) combinations covered by the table."""
        return self.m1 * self.n * (self.n + 1) // 2

    @property
    def evaluated_fraction(self) -> float:
        return self.evaluations / self.triples


@dataclass(frozen=True)
class MatchingResult:
    edges: tuple[tuple[int, int], ...]
    involution: PositionPermutation
    rho_hat_learning: Optional[float] = None
    m1: Optional[int] = None
    seed: Optional[int] = None
    table: Optional[CovarianceTable] = field(default=None, compare=False, repr=False)

    @property
    def n(self) -> int:
        return self.involution.n

    def to_json(self) -> str:
        doc = {
            "n": self.n,
            "edges": [list(e) for e in self.edges],
            "rho_hat_learning": self.rho_hat_learning,
            "m1": self.m1,
            "seed": self.seed,
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> MatchingResult:
        doc = json.loads(text)
        n = int(doc["n"])
        edges = tuple((int(a), int(b)) for a, b in doc["edges"])
        return cls(
            edges=edges,
            involution=involution_from_edges(edges, n),
            rho_hat_learning=doc.get("rho_hat_learning"),
            m1=doc.get("m1"),
            seed=doc.get("seed"),
        )

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> MatchingResult:
        return cls.from_json(Path(path).read_text())


def involution_from_edges(edges, n: int) -> PositionPermutation:
    img = list(range(1, n + 1))
    seen: set[int] = set()
    for a, b in edges:
        if not (1 <= a <= n and 1 <= b <= n):
            raise InputError(f"edge ({a}, {b}) outside 1..{n}")
        if a in seen or b in seen:
            raise InputError(f"edges do not form a matching at ({a}, {b})")
        seen.update((a, b))
        img[a - 1], img[b - 1] = b, a
    return PositionPermutation(tuple(img))


@lru_cache(maxsize=None)
def _cell_index(n: int) -> np.ndarray:
    r, s = np.triu_indices(n)
    idx = np.empty((n, n), dtype=np.intp)
    idx[r, s] = np.arange(r.size)
    idx[s, r] = np.arange(r.size)
    idx.setflags(write=False)
    return idx


@lru_cache(maxsize=512)
def _straddling_swaps(n: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Predecessor position masks for the swaps that change the predecessor set of
    a player at 0-based position k, with the table cell of each swap.

    Swaps with both positions on the same side of k leave the predecessors as
    they were and are omitted.
    """
    pos = np.arange(n)
    cells = _cell_index(n)
    # r < k < s: the player stays, the occupant of r leaves and that of s joins
    rr, ss = (a.ravel() for a in np.meshgrid(np.arange(k), np.arange(k + 1, n), indexing="ij"))
    middle = np.broadcast_to(pos < k, (rr.size, n)).copy()
    middle[np.arange(rr.size), rr] = False
    middle[np.arange(rr.size), ss] = True
    # (k, s): the player moves back to s
    s2 = np.arange(k + 1, n)
    later = pos[None, :] <= s2[:, None]
    later[:, k] = False
    # (r, k): the player moves forward to r
    r3 = np.arange(k)
    earlier = pos[None, :] < r3[:, None]
    masks = np.concatenate([middle, later, earlier])
    idx = np.concatenate([cells[rr, ss], cells[k, s2], cells[r3, k]])
    masks.setflags(write=False)
    idx.setflags(write=False)
    return masks, idx


def _all_swaps(n: int) -> tuple[np.ndarray, np.ndarray]:
    r, s = np.triu_indices(n)
    tables = np.broadcast_to(np.arange(n), (r.size, n)).copy()
    tables[np.arange(r.size), r] = s
    tables[np.arange(r.size), s] = r
    return tables, _cell_index(n)[r, s]


def _covariances(
    game: Game, idx: int, positions: np.ndarray, skip_unchanged: bool
) -> tuple[np.ndarray, np.ndarray, int]:
    """Returns (beta, X, evaluations) for the learning orders ``positions``."""
    n = game.n
    m1 = positions.shape[0]
    x = game._marginal(positions, idx)
    xc = x - x.mean()
    ncells = n * (n + 1) // 2
    # Sums over the learning sample of Y and (X - mean X) * Y per cell; swaps that
    # leave the marginal contribution unchanged contribute X itself.
    sum_y = np.full(ncells, float(x.sum()))
    sum_xcy = np.full(ncells, float(xc @ x))
    evaluations = 0
    ks = positions[:, idx].astype(np.intp)
    by_k = np.argsort(ks, kind="stable")
    bounds = np.searchsorted(ks[by_k], np.arange(n + 1))
    if not skip_unchanged:
        tables, all_cells = _all_swaps(n)
    for k in range(n):
        group = by_k[bounds[k] : bounds[k + 1]]
        if group.size == 0:
            continue
        if skip_unchanged:
            masks, cells = _straddling_swaps(n, k)
        else:
            cells = all_cells
        nv = cells.size
        if nv == 0:
            continue
        step = max(1, _SCRATCH_BYTES // (nv * n))
        for lo in range(0, group.size, step):
            rows = group[lo : lo + step]
            if skip_unchanged:
                # pre[j, v, p] = masks[v, positions[j, p]]
                pre = masks[:, positions[rows]].transpose(1, 0, 2)
            else:
                swapped = tables[:, positions[rows]].transpose(1, 0, 2)
                pre = swapped < swapped[:, :, idx : idx + 1]
            y = game._marginal_from_pre(pre.reshape(-1, n), idx).reshape(rows.size, nv)
            delta = y - x[rows, None]
            flat_cells = np.tile(cells, rows.size)
            np.add.at(sum_y, flat_cells, delta.ravel())
            np.add.at(sum_xcy, flat_cells, (xc[rows, None] * delta).ravel())
            evaluations += rows.size * nv
    cov = (sum_xcy - sum_y / m1 * float(xc.sum())) / (m1 - 1)
    beta = np.empty((n, n))
    r, s = np.triu_indices(n)
    beta[r, s] = cov
    beta[s, r] = cov
    return beta, x, evaluations


def _learning_sample(game: Game, m1: int, rng: np.random.Generator) -> np.ndarray:
    if int(m1) < 2:
        raise InputError(f"learning sample size m1 must be at least 2, got {m1}")
    return random_positions(rng, int(m1), game.n)


def covariance_table(
    game: Game, player: int, m1: int, rng: RngLike, *, skip_unchanged: bool = True
) -> CovarianceTable:
    """Covariances beta[r, s] = Cov(X, Y^(r,s)) on m1 fresh uniform orders.

    With ``skip_unchanged`` the game is only re-evaluated for swaps that move
    the player's predecessor set; the result is bit-identical either way.
    """
    idx = game.player_index(player)
    positions = _learning_sample(game, m1, as_generator(rng))
    beta, _, evaluations = _covariances(game, idx, positions, skip_unchanged)
    return CovarianceTable(game.n, beta, int(m1), evaluations)


def greedy_min_matching(table: CovarianceTable, *, prefer_loops: bool = True) -> MatchingResult:
    """Scan cells by ascending covariance and keep every edge whose endpoints are
    still free, until all positions are covered.

    Equal weights put loops first (``prefer_loops=False`` reverses that), then
    lexicographic order of (r, s).
    """
    n = table.n
    r, s = np.triu_indices(n)
    weights = table.beta[r, s]
    loop_key = (r != s) if prefer_loops else (r == s)
    order = np.lexsort((s, r, loop_key, weights))
    used = np.zeros(n, dtype=bool)
    edges = []
    covered = 0
    for e in order:
        a, b = int(r[e]), int(s[e])
        if used[a] or used[b]:
            continue
        used[a] = used[b] = True
        edges.append((a + 1, b + 1))
        covered += 1 if a == b else 2
        if covered == n:
            break
    edges = tuple(edges)
    return MatchingResult(edges, involution_from_edges(edges, n), m1=table.m1, table=table)


def learn_transformation(
    game: Game, player: int, m1: int, rng: RngLike, *, prefer_loops: bool = True
) -> MatchingResult:
    """Learn a pairing involution for ``player`` from ``m1`` uniform orders.

    The reported ``rho_hat_learning`` is the correlation between the plain and
    transformed marginal contributions over the learning orders themselves.
    """
    idx = game.player_index(player)
    seed = int(rng) if isinstance(rng, (int, np.integer)) and not isinstance(rng, bool) else None
    positions = _learning_sample(game, m1, as_generator(rng))
    beta, x, evaluations = _covariances(game, idx, positions, True)
    table = CovarianceTable(game.n, beta, int(m1), evaluations)
    result = greedy_min_matching(table, prefer_loops=prefer_loops)
    paired = game._marginal(result.involution.to_array()[positions], idx)
    return MatchingResult(
        result.edges,
        result.involution,
        rho_hat_learning=correlation(x, paired),
        m1=int(m1),
        seed=seed,
        table=table,
    )
