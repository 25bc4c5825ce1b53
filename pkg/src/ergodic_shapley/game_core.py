"""Coalitions, player orders, position permutations and marginal contributions.

Players and positions are 1-based at every public interface.  Hot paths work on
batches of orders stored as integer arrays of 0-based positions, one order per
row: ``positions[j, p]`` is the position of player ``p + 1`` in order ``j``.
"""

from __future__ import annotations

import itertools
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Iterable, Union

import numpy as np

from ._kernels import position_dtype, shuffled_rows
from .exceptions import CapacityError, InputError

BRUTE_FORCE_MAX_PLAYERS = 10

RngLike = Union[np.random.Generator, np.random.SeedSequence, int, None]


def as_generator(rng: RngLike) -> np.random.Generator:
    return np.random.default_rng(rng)


@dataclass(frozen=True)
class Coalition:
    """A subset of {1..n} stored as an integer bitset (bit p-1 <=> player p)."""

    n: int
    mask: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise InputError(f"player count must be positive, got {self.n}")
        if self.mask < 0 or self.mask >> self.n:
            raise InputError(f"mask {self.mask:#x} has members outside 1..{self.n}")

    @classmethod
    def of(cls, members: Iterable[int], n: int) -> Coalition:
        mask = 0
        for p in members:
            p = int(p)
            if not 1 <= p <= n:
                raise InputError(f"player {p} outside 1..{n}")
            bit = 1 << (p - 1)
            if mask & bit:
                raise InputError(f"duplicate player {p}")
            mask |= bit
        return cls(n, mask)

    @classmethod
    def grand(cls, n: int) -> Coalition:
        return cls(n, (1 << n) - 1)

    @classmethod
    def from_array(cls, members: np.ndarray) -> Coalition:
        members = np.asarray(members, dtype=bool)
        return cls.of((np.flatnonzero(members) + 1).tolist(), members.size)

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(p + 1 for p in range(self.n) if self.mask >> p & 1)

    def with_player(self, player: int) -> Coalition:
        if not 1 <= player <= self.n:
            raise InputError(f"player {player} outside 1..{self.n}")
        return Coalition(self.n, self.mask | 1 << (player - 1))

    def to_array(self) -> np.ndarray:
        bits = np.array([self.mask >> p & 1 for p in range(self.n)], dtype=bool)
        return bits

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __contains__(self, player: object) -> bool:
        return isinstance(player, int) and 1 <= player <= self.n and bool(self.mask >> (player - 1) & 1)

    def __iter__(self):
        return iter(self.members)


CoalitionLike = Union[Coalition, Iterable[int]]


class Game(ABC):
    """A TU game on players 1..n.

    Subclasses implement ``_worth`` on a boolean membership matrix (one coalition
    per row).  They may override ``_marginal_from_pre`` / ``_marginal`` with an
    incremental evaluation; the defaults evaluate the characteristic function
    twice per marginal contribution.
    """

    def __init__(self, n: int):
        if int(n) < 1:
            raise InputError(f"player count must be positive, got {n}")
        self._n = int(n)

    @property
    def n(self) -> int:
        return self._n

    def value(self, coalition: CoalitionLike) -> float:
        members = self._members_row(coalition)
        return float(self._worth(members[None, :])[0])

    def _members_row(self, coalition: CoalitionLike) -> np.ndarray:
        if isinstance(coalition, Coalition):
            if coalition.n != self.n:
                raise InputError(f"coalition over {coalition.n} players, game has {self.n}")
            return coalition.to_array()
        return Coalition.of(coalition, self.n).to_array()

    @abstractmethod
    def _worth(self, members: np.ndarray) -> np.ndarray:
        """v(S) for each row S of a (B, n) boolean matrix."""

    def _marginal_from_pre(self, pre: np.ndarray, idx: int) -> np.ndarray:
        """Marginal contribution of 0-based player ``idx`` joining each row of ``pre``."""
        joined = pre.copy()
        joined[:, idx] = True
        return self._worth(joined) - self._worth(pre)

    def _marginal(self, positions: np.ndarray, idx: int) -> np.ndarray:
        """Marginal contribution of 0-based player ``idx`` in each order row."""
        pre = positions < positions[:, idx : idx + 1]
        return self._marginal_from_pre(pre, idx)

    def player_index(self, player: int) -> int:
        if isinstance(player, bool) or not isinstance(player, (int, np.integer)):
            raise InputError(f"player must be an integer, got {player!r}")
        if not 1 <= player <= self.n:
            raise InputError(f"player {player} outside 1..{self.n}")
        return int(player) - 1


class FunctionGame(Game):
    """Wraps an arbitrary ``Coalition -> float`` function; values are memoised."""

    def __init__(self, n: int, fn: Callable[[Coalition], float]):
        super().__init__(n)
        self._fn = fn
        self._cache: dict[int, float] = {}
        if self.value(()) != 0:
            raise InputError("characteristic function must vanish on the empty coalition")

    def _worth_mask(self, mask: int) -> float:
        try:
            return self._cache[mask]
        except KeyError:
            val = float(self._fn(Coalition(self.n, mask)))
            self._cache[mask] = val
            return val

    def _worth(self, members: np.ndarray) -> np.ndarray:
        weights = 1 << np.arange(self.n, dtype=object)
        out = np.empty(members.shape[0])
        for b, row in enumerate(members):
            out[b] = self._worth_mask(int(weights[row].sum()) if row.any() else 0)
        return out


@dataclass(frozen=True)
class PlayerOrder:
    """An arrival order: ``positions[i - 1]`` is the position of player i."""

    positions: tuple[int, ...]

    def __post_init__(self):
        pos = tuple(int(p) for p in self.positions)
        object.__setattr__(self, "positions", pos)
        if sorted(pos) != list(range(1, len(pos) + 1)):
            raise InputError(f"{pos} is not a bijection onto 1..{len(pos)}")

    @classmethod
    def from_sequence(cls, players: Iterable[int]) -> PlayerOrder:
        """Build from the players listed in arrival order."""
        players = [int(p) for p in players]
        pos = [0] * len(players)
        for k, p in enumerate(players, start=1):
            if not 1 <= p <= len(players) or pos[p - 1]:
                raise InputError(f"{players} is not a permutation of 1..{len(players)}")
            pos[p - 1] = k
        return cls(tuple(pos))

    @property
    def n(self) -> int:
        return len(self.positions)

    @property
    def sequence(self) -> tuple[int, ...]:
        seq = [0] * self.n
        for player, k in enumerate(self.positions, start=1):
            seq[k - 1] = player
        return tuple(seq)

    def position(self, player: int) -> int:
        if not 1 <= player <= self.n:
            raise InputError(f"player {player} outside 1..{self.n}")
        return self.positions[player - 1]

    def predecessors(self, player: int) -> Coalition:
        k = self.position(player)
        return Coalition.of((j for j, p in enumerate(self.positions, start=1) if p < k), self.n)

    def to_array(self) -> np.ndarray:
        return np.asarray(self.positions, dtype=position_dtype(self.n)) - 1


@dataclass(frozen=True)
class PositionPermutation:
    """A bijection on positions; ``map[p - 1]`` is the image of position p."""

    map: tuple[int, ...]

    def __post_init__(self):
        img = tuple(int(p) for p in self.map)
        object.__setattr__(self, "map", img)
        if sorted(img) != list(range(1, len(img) + 1)):
            raise InputError(f"{img} is not a bijection onto 1..{len(img)}")

    @classmethod
    def identity(cls, n: int) -> PositionPermutation:
        return cls(tuple(range(1, n + 1)))

    @property
    def n(self) -> int:
        return len(self.map)

    def __call__(self, p: int) -> int:
        return self.map[p - 1]

    def compose(self, other: PositionPermutation) -> PositionPermutation:
        """``self ∘ other``: apply ``other`` first."""
        if other.n != self.n:
            raise InputError(f"size mismatch: {self.n} vs {other.n}")
        return PositionPermutation(tuple(self.map[q - 1] for q in other.map))

    def power(self, k: int) -> PositionPermutation:
        out = PositionPermutation.identity(self.n)
        for _ in range(k):
            out = self.compose(out)
        return out

    def inverse(self) -> PositionPermutation:
        inv = [0] * self.n
        for p, q in enumerate(self.map, start=1):
            inv[q - 1] = p
        return PositionPermutation(tuple(inv))

    def is_identity(self) -> bool:
        return self.map == tuple(range(1, self.n + 1))

    def is_involution(self) -> bool:
        return all(self.map[q - 1] == p for p, q in enumerate(self.map, start=1))

    def to_array(self) -> np.ndarray:
        """0-based lookup table usable as ``table[positions]`` on order batches."""
        return np.asarray(self.map, dtype=position_dtype(self.n)) - 1


def marginal_contribution(game: Game, order: PlayerOrder, player: int) -> float:
    """v(Pre(player) ∪ {player}) - v(Pre(player)) for one order."""
    if order.n != game.n:
        raise InputError(f"order has {order.n} players, game has {game.n}")
    game.player_index(player)
    pre = order.predecessors(player)
    return game.value(pre.with_player(player)) - game.value(pre)


def apply_transformation(perm: PositionPermutation, order: PlayerOrder) -> PlayerOrder:
    """The order ``perm ∘ order``: every player moves to the image of its position."""
    if perm.n != order.n:
        raise InputError(f"size mismatch: permutation on {perm.n}, order of {order.n}")
    return PlayerOrder(tuple(perm.map[k - 1] for k in order.positions))


def transposition(a: int, b: int, n: int) -> PositionPermutation:
    if not (1 <= a <= n and 1 <= b <= n):
        raise InputError(f"positions ({a}, {b}) outside 1..{n}")
    img = list(range(1, n + 1))
    img[a - 1], img[b - 1] = b, a
    return PositionPermutation(tuple(img))


def cyclic_shift(s: int, n: int) -> PositionPermutation:
    """Position p moves to ((p - 1 + s) mod n) + 1."""
    if not 0 <= s < n:
        raise InputError(f"shift {s} outside 0..{n - 1}")
    return PositionPermutation(tuple((p - 1 + s) % n + 1 for p in range(1, n + 1)))


def reversal(n: int) -> PositionPermutation:
    """Position p moves to n + 1 - p (the mirror image of the order)."""
    return PositionPermutation(tuple(range(n, 0, -1)))


def random_positions(rng: np.random.Generator, size: int, n: int) -> np.ndarray:
    """A (size, n) batch of independent uniform orders as 0-based positions."""
    return shuffled_rows(rng, size, n)


def random_order(n: int, rng: RngLike) -> PlayerOrder:
    if n < 1:
        raise InputError(f"player count must be positive, got {n}")
    row = random_positions(as_generator(rng), 1, n)[0]
    return PlayerOrder(tuple(int(p) + 1 for p in row))


def brute_force_shapley(game: Game, player: int) -> float:
    """Exact Shapley value as the mean marginal contribution over all n! orders."""
    if game.n > BRUTE_FORCE_MAX_PLAYERS:
        raise CapacityError(
            f"brute force limited to n <= {BRUTE_FORCE_MAX_PLAYERS} players, game has {game.n}"
        )
    idx = game.player_index(player)
    perms = itertools.permutations(range(game.n))
    total = []
    while True:
        chunk = np.array(list(itertools.islice(perms, 40320)), dtype=position_dtype(game.n))
        if chunk.size == 0:
            break
        total.append(math.fsum(game._marginal(chunk, idx).tolist()))
    return math.fsum(total) / math.factorial(game.n)
