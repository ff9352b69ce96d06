"""Two-player normal-form games and their equilibria.

Payoff tables are stored as an ``(m, n, 2)`` array: ``payoffs[r, c] ==
(row_payoff, col_payoff)``. The row player picks ``r``, the column player
picks ``c``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np

from .errors import DegenerateGame, DimensionMismatch, ValidationError

Owner = Literal["row", "col"]

_PROB_ATOL = 1e-12


@dataclass(frozen=True)
class StrategySet:
    labels: tuple[str, ...]

    def __init__(self, labels: Iterable[str]):
        labels = tuple(str(x) for x in labels)
        if not labels:
            raise ValidationError("a strategy set needs at least one strategy")
        if len(set(labels)) != len(labels):
            raise ValidationError(f"duplicate strategy labels in {labels!r}")
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __getitem__(self, i: int) -> str:
        return self.labels[i]

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValidationError(f"unknown strategy {label!r}; expected one of {self.labels}") from None


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BimatrixGame:
    row_strategies: StrategySet
    col_strategies: StrategySet
    payoffs: np.ndarray

    def __post_init__(self):
        p = np.array(self.payoffs, dtype=float)
        shape = (len(self.row_strategies), len(self.col_strategies), 2)
        if p.shape != shape:
            raise DimensionMismatch(f"payoff table has shape {p.shape}, expected {shape}")
        if not np.all(np.isfinite(p)):
            raise ValidationError("payoffs must be finite reals")
        object.__setattr__(self, "payoffs", _frozen(p))

    @classmethod
    def from_tables(cls, row_payoffs, col_payoffs, row_labels=None, col_labels=None) -> BimatrixGame:
        row_payoffs = np.asarray(row_payoffs, dtype=float)
        col_payoffs = np.asarray(col_payoffs, dtype=float)
        if row_payoffs.shape != col_payoffs.shape or row_payoffs.ndim != 2:
            raise DimensionMismatch("row and column payoff tables must be 2-D and of equal shape")
        m, n = row_payoffs.shape
        rows = StrategySet(row_labels or [f"s{i + 1}" for i in range(m)])
        cols = StrategySet(col_labels or [f"s{j + 1}" for j in range(n)])
        return cls(rows, cols, np.stack([row_payoffs, col_payoffs], axis=-1))

    @property
    def shape(self) -> tuple[int, int]:
        return self.payoffs.shape[0], self.payoffs.shape[1]

    @property
    def row_payoffs(self) -> np.ndarray:
        return self.payoffs[..., 0]

    @property
    def col_payoffs(self) -> np.ndarray:
        return self.payoffs[..., 1]

    def __eq__(self, other):
        if not isinstance(other, BimatrixGame):
            return NotImplemented
        return (
            self.row_strategies == other.row_strategies
            and self.col_strategies == other.col_strategies
            and np.array_equal(self.payoffs, other.payoffs)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class MixedStrategy:
    owner: Owner
    probabilities: np.ndarray

    def __post_init__(self):
        if self.owner not in ("row", "col"):
            raise ValidationError(f"owner must be 'row' or 'col', got {self.owner!r}")
        p = np.array(self.probabilities, dtype=float).ravel()
        if p.size == 0 or np.any(p < 0) or np.any(p > 1):
            raise ValidationError(f"probabilities must lie in [0, 1]: {p}")
        if abs(p.sum() - 1.0) > _PROB_ATOL:
            raise ValidationError(f"probabilities sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "probabilities", _frozen(p))

    @classmethod
    def pure(cls, owner: Owner, index: int, size: int) -> MixedStrategy:
        p = np.zeros(size)
        p[index] = 1.0
        return cls(owner, p)

    def __len__(self) -> int:
        return self.probabilities.size

    def __eq__(self, other):
        if not isinstance(other, MixedStrategy):
            return NotImplemented
        return self.owner == other.owner and np.array_equal(self.probabilities, other.probabilities)

    __hash__ = None


@dataclass(frozen=True)
class EquilibriumProfile:
    row: MixedStrategy
    col: MixedStrategy
    row_value: float
    col_value: float
    kind: Literal["pure", "mixed"]


def pure_nash_equilibria(game: BimatrixGame) -> list[tuple[int, int]]:
    """All weak pure equilibria, row-major.

    A cell qualifies when its row payoff is maximal within its column and its
    column payoff is maximal within its row.
    """
    R, C = game.row_payoffs, game.col_payoffs
    row_best = R >= R.max(axis=0, keepdims=True)
    col_best = C >= C.max(axis=1, keepdims=True)
    return [(int(r), int(c)) for r, c in zip(*np.nonzero(row_best & col_best))]


def expected_payoffs(game: BimatrixGame, row: MixedStrategy, col: MixedStrategy) -> tuple[float, float]:
    m, n = game.shape
    if len(row) != m or len(col) != n:
        raise DimensionMismatch(f"mixes of sizes ({len(row)}, {len(col)}) do not fit a {m}x{n} game")
    p, q = row.probabilities, col.probabilities
    return float(p @ game.row_payoffs @ q), float(p @ game.col_payoffs @ q)


def _indifference_mix(a: float, b: float, c: float, d: float) -> float | None:
    # Solve x*a + (1-x)*b == x*c + (1-x)*d for x.
    denom = (a - b) - (c - d)
    if denom == 0.0:
        return None
    return (d - b) / denom


def mixed_equilibrium_2x2(game: BimatrixGame) -> EquilibriumProfile:
    """Equilibrium of a 2x2 game, preferring the completely mixed one.

    Falls back to the first pure equilibrium (row-major) when no interior
    solution exists.
    """
    if game.shape != (2, 2):
        raise DimensionMismatch(f"mixed_equilibrium_2x2 needs a 2x2 game, got {game.shape}")
    R, C = game.row_payoffs, game.col_payoffs
    # row mix p (prob. of row 0) leaves the column player indifferent
    p = _indifference_mix(C[0, 0], C[1, 0], C[0, 1], C[1, 1])
    # column mix q (prob. of col 0) leaves the row player indifferent
    q = _indifference_mix(R[0, 0], R[0, 1], R[1, 0], R[1, 1])

    if p is not None and q is not None and 0.0 < p < 1.0 and 0.0 < q < 1.0:
        row = MixedStrategy("row", [p, 1.0 - p])
        col = MixedStrategy("col", [q, 1.0 - q])
        kind = "mixed"
    else:
        pure = pure_nash_equilibria(game)
        if not pure:
            raise DegenerateGame(
                f"no interior solution (p={p}, q={q}) and no pure equilibrium"
            )
        r, c = pure[0]
        row = MixedStrategy.pure("row", r, 2)
        col = MixedStrategy.pure("col", c, 2)
        kind = "pure"
    rv, cv = expected_payoffs(game, row, col)
    return EquilibriumProfile(row, col, rv, cv, kind)


def deviation_gains(game: BimatrixGame, row: MixedStrategy, col: MixedStrategy) -> tuple[float, float]:
    """Largest payoff improvement each player gets from a unilateral pure deviation."""
    rv, cv = expected_payoffs(game, row, col)
    row_dev = game.row_payoffs @ col.probabilities
    col_dev = row.probabilities @ game.col_payoffs
    return float(row_dev.max() - rv), float(col_dev.max() - cv)


def game_from_dict(data: dict) -> BimatrixGame:
    try:
        rows = StrategySet(data["row_strategies"])
        cols = StrategySet(data["col_strategies"])
        flat = np.asarray(data["payoffs"], dtype=float)
    except KeyError as e:
        raise ValidationError(f"game object is missing key {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        raise ValidationError(f"malformed payoffs: {e}") from None
    if flat.shape != (len(rows) * len(cols), 2):
        raise DimensionMismatch(
            f"'payoffs' must hold {len(rows) * len(cols)} [row, col] pairs, got shape {flat.shape}"
        )
    return BimatrixGame(rows, cols, flat.reshape(len(rows), len(cols), 2))


def game_to_dict(game: BimatrixGame) -> dict:
    return {
        "row_strategies": list(game.row_strategies),
        "col_strategies": list(game.col_strategies),
        "payoffs": game.payoffs.reshape(-1, 2).tolist(),
    }
