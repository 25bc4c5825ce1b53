"""The eight benchmark games and their known Shapley values.

Every game takes an optional reduced player count so that small instances can
be checked against brute-force enumeration:

* symmetric games (voting-sym, shoes, square, pair) shrink directly;
* airport and bankruptcy keep the first ``n`` costs/liabilities, and the
  bankruptcy estate becomes half their sum rounded half-up;
* mst uses an ``n``-cycle whose hub edges weigh ``n + 1``;
* voting-ns exists only at its full size of 51 players.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Optional, Sequence

import numpy as np

from .exceptions import InputError
from .game_core import Coalition, Game

NON_SYMMETRIC_WEIGHTS = (
    (45, 41, 27, 26, 26, 25, 21, 17, 17, 14, 13, 13, 12, 12, 12, 11)
    + (10,) * 4 + (9,) * 4 + (8, 8) + (7,) * 4 + (6,) * 4 + (5,) + (4,) * 9 + (3,) * 7
)
NON_SYMMETRIC_QUOTA = 269

# multiplicity of each cost level 1..10
AIRPORT_COST_COUNTS = (8, 12, 6, 14, 8, 9, 13, 10, 10, 10)
AIRPORT_COSTS = tuple(c for c, k in enumerate(AIRPORT_COST_COUNTS, start=1) for _ in range(k))
BANKRUPTCY_ESTATE = 200


def _as_int_ratio(values: Sequence) -> Optional[tuple[np.ndarray, int]]:
    fracs = []
    for v in values:
        if isinstance(v, (int, np.integer, Fraction)):
            fracs.append(Fraction(v))
        else:
            return None
    scale = lcm(*(f.denominator for f in fracs))
    return np.array([int(f * scale) for f in fracs], dtype=np.float64), scale


class VotingGame(Game):
    """v(S) = 1 if the weight of S strictly exceeds the quota, else 0.

    Integer or ``Fraction`` parameters are rescaled to integers so that the
    comparison with the quota is exact.
    """

    def __init__(self, weights: Sequence, quota):
        super().__init__(len(weights))
        self.weights = tuple(weights)
        self.quota = quota
        exact = _as_int_ratio(list(weights) + [quota])
        if exact is None:
            self._w = np.asarray(weights, dtype=np.float64)
            self._q = float(quota)
        else:
            scaled, _ = exact
            self._w, self._q = scaled[:-1], float(scaled[-1])

    def _worth(self, members):
        return (members @ self._w > self._q).astype(np.float64)

    def _marginal_from_pre(self, pre, idx):
        s = pre @ self._w
        return (s + self._w[idx] > self._q).astype(np.float64) - (s > self._q)


class ShoesGame(Game):
    """v(S) = min(|S ∩ left|, |S ∩ right|) with left = first half of the players."""

    def __init__(self, n: int = 100):
        if n < 2 or n % 2:
            raise InputError(f"shoes game needs an even player count, got {n}")
        super().__init__(n)
        self.half = n // 2

    def _worth(self, members):
        left = members[:, : self.half].sum(axis=1)
        right = members[:, self.half :].sum(axis=1)
        return np.minimum(left, right).astype(np.float64)

    def _marginal_from_pre(self, pre, idx):
        left = pre[:, : self.half].sum(axis=1)
        right = pre[:, self.half :].sum(axis=1)
        own, other = (left, right) if idx < self.half else (right, left)
        return (own < other).astype(np.float64)


class AirportGame(Game):
    """v(S) = max cost over S (0 for the empty coalition); costs are nonnegative."""

    def __init__(self, costs: Sequence[float]):
        super().__init__(len(costs))
        self.costs = tuple(costs)
        self._c = np.asarray(costs, dtype=np.float64)
        if (self._c < 0).any():
            raise InputError("airport costs must be nonnegative")

    def _worth(self, members):
        return np.where(members, self._c, 0.0).max(axis=1)

    def _marginal_from_pre(self, pre, idx):
        top = np.where(pre, self._c, 0.0).max(axis=1)
        return np.maximum(top, self._c[idx]) - top


class MstGame(Game):
    """Cost of the minimum spanning tree of S ∪ {hub} on a cycle with a hub node.

    Players sit on an n-cycle with unit edges (including the edge n-1); every
    player is joined to the hub by an edge of weight ``hub_weight``.  Defaults
    to n=100 with hub weight n+1.
    """

    def __init__(self, n: int = 100, hub_weight: Optional[float] = None):
        if n < 3:
            raise InputError(f"mst game needs at least 3 players, got {n}")
        super().__init__(n)
        self.hub_weight = float(n + 1 if hub_weight is None else hub_weight)

    def _worth(self, members):
        size = members.sum(axis=1)
        runs = (members & ~np.roll(members, 1, axis=1)).sum(axis=1)
        runs = np.where(size == self.n, 1, runs)
        return (size - runs) + self.hub_weight * runs

    def _from_neighbours(self, before: np.ndarray, last: np.ndarray) -> np.ndarray:
        h = self.hub_weight
        out = np.where(before == 0, h, np.where(before == 1, 1.0, 2.0 - h))
        return np.where(last, 1.0, out)

    def _marginal_from_pre(self, pre, idx):
        before = pre[:, (idx - 1) % self.n].astype(np.int8) + pre[:, (idx + 1) % self.n]
        return self._from_neighbours(before, pre.sum(axis=1) == self.n - 1)

    def _marginal(self, positions, idx):
        k = positions[:, idx]
        before = (positions[:, (idx - 1) % self.n] < k).astype(np.int8) + (
            positions[:, (idx + 1) % self.n] < k
        )
        return self._from_neighbours(before, k == self.n - 1)


def mst_value(coalition: Coalition, hub_weight: Optional[float] = None) -> float:
    """MST cost via run counting: each run of consecutive cycle members costs
    one hub edge plus unit edges inside the run."""
    n = coalition.n
    hub = float(n + 1 if hub_weight is None else hub_weight)
    size = len(coalition)
    if size == 0:
        return 0.0
    if size == n:
        runs = 1
    else:
        runs = sum(1 for p in coalition.members if (p - 2) % n + 1 not in coalition)
    return (size - runs) + hub * runs


class BankruptcyGame(Game):
    """v(S) = max(0, estate - total liabilities of the players outside S)."""

    def __init__(self, estate: float, liabilities: Sequence[float]):
        super().__init__(len(liabilities))
        self.estate = estate
        self.liabilities = tuple(liabilities)
        self._l = np.asarray(liabilities, dtype=np.float64)
        self._shift = float(estate) - float(self._l.sum())

    def _worth(self, members):
        return np.maximum(0.0, self._shift + members @ self._l)

    def _marginal_from_pre(self, pre, idx):
        base = self._shift + pre @ self._l
        return np.maximum(0.0, base + self._l[idx]) - np.maximum(0.0, base)


class SquareGame(Game):
    """v(S) = |S|^2."""

    def _worth(self, members):
        return members.sum(axis=1).astype(np.float64) ** 2

    def _marginal_from_pre(self, pre, idx):
        return 2.0 * pre.sum(axis=1) + 1.0

    def _marginal(self, positions, idx):
        return 2.0 * positions[:, idx] + 1.0


class PairGame(Game):
    """v(S) = floor(|S| / 2)."""

    def _worth(self, members):
        return (members.sum(axis=1) // 2).astype(np.float64)

    def _marginal_from_pre(self, pre, idx):
        return (pre.sum(axis=1) % 2).astype(np.float64)

    def _marginal(self, positions, idx):
        return (positions[:, idx] % 2).astype(np.float64)


GAME_IDS = ("voting-ns", "voting-sym", "shoes", "airport", "mst", "bankruptcy", "square", "pair")
FULL_SIZE = {gid: 100 for gid in GAME_IDS} | {"voting-ns": 51}
# Player studied in the benchmark tables for each game.
DEFAULT_PLAYER = {gid: 1 for gid in GAME_IDS} | {"airport": 100, "bankruptcy": 100}


def _check_id(game_id: str) -> None:
    if game_id not in GAME_IDS:
        raise InputError(f"unknown game {game_id!r}; choose from {', '.join(GAME_IDS)}")


def make_game(game_id: str, n: Optional[int] = None) -> Game:
    """Build a benchmark game, optionally at a reduced player count ``n``."""
    _check_id(game_id)
    full = FULL_SIZE[game_id]
    n = full if n is None else int(n)
    if n < 1:
        raise InputError(f"player count must be positive, got {n}")
    if game_id == "voting-ns":
        if n != full:
            raise InputError("voting-ns is only defined for its full size of 51 players")
        return VotingGame(NON_SYMMETRIC_WEIGHTS, NON_SYMMETRIC_QUOTA)
    if n > full:
        raise InputError(f"{game_id} supports at most {full} players, got {n}")
    if game_id == "voting-sym":
        return VotingGame([Fraction(1, n)] * n, Fraction(1, 2))
    if game_id == "shoes":
        return ShoesGame(n)
    if game_id == "airport":
        return AirportGame(AIRPORT_COSTS[:n])
    if game_id == "mst":
        return MstGame(n)
    if game_id == "bankruptcy":
        liabilities = AIRPORT_COSTS[:n]
        estate = BANKRUPTCY_ESTATE if n == full else int(Fraction(sum(liabilities), 2) + Fraction(1, 2))
        return BankruptcyGame(estate, liabilities)
    if game_id == "square":
        return SquareGame(n)
    return PairGame(n)


def airport_shapley(costs: Sequence[float]) -> list[float]:
    """Closed-form airport cost sharing: each cost increment is split equally
    among the players whose requirement reaches it."""
    order = sorted(range(len(costs)), key=lambda i: costs[i])
    shares = [0.0] * len(costs)
    acc, prev = 0.0, 0.0
    for rank, i in enumerate(order):
        acc += (costs[i] - prev) / (len(costs) - rank)
        prev = costs[i]
        shares[i] = acc
    return shares


def exact_shapley(game_id: str, player: int, n: Optional[int] = None) -> Optional[float]:
    """Known Shapley value of a benchmark game, or None where it is unknown."""
    game = make_game(game_id, n)
    idx = game.player_index(player)
    if game_id in ("voting-ns", "bankruptcy"):
        return None
    if game_id == "airport":
        return airport_shapley(AIRPORT_COSTS[: game.n])[idx]
    # symmetric games split the grand coalition equally
    return game.value(Coalition.grand(game.n)) / game.n
