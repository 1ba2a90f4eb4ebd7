"""Game-and-learning kernel for the three-option ultimatum game.

Two players split a unit pie. The proposer offers one of three shares
(low / half / high), the responder holds one of three acceptance
thresholds at the same levels, and a deal succeeds when the offer meets
the threshold. Each player learns with tabular Q-learning over the nine
states formed by the previous round's joint action.

Everything in this module is role-symmetric and scheduling-free: payoff
rules, epsilon-greedy selection, the Q-value update, and table
initialization. Engines drive these functions; they never do I/O.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

N_LEVELS = 3
N_STATES = 9


class Level(IntEnum):
    """The three action levels, ordered by pie share: l < m < h."""

    L = 0
    M = 1
    H = 2


class Role(IntEnum):
    PROPOSER = 0
    RESPONDER = 1


@dataclass(frozen=True)
class GameParams:
    """Offer/threshold levels. The middle level is pinned at half the pie.

    A level is read as an offer when the actor proposes and as an
    acceptance threshold when it responds; the numeric values are shared.
    """

    l: float = 0.3
    h: float = 0.8
    m: float = field(default=0.5, init=False)

    def __post_init__(self) -> None:
        if not (0.0 < self.l < 0.5):
            raise ValueError(f"l must lie in (0, 0.5), got {self.l}")
        if not (0.5 < self.h < 1.0):
            raise ValueError(f"h must lie in (0.5, 1), got {self.h}")

    def values(self) -> np.ndarray:
        """Level values indexed by ``Level``, shape (3,)."""
        return np.array([self.l, self.m, self.h], dtype=np.float64)

    def proposer_payoffs(self) -> np.ndarray:
        """Proposer reward per own level on a successful deal."""
        return 1.0 - self.values()

    def responder_payoffs(self) -> np.ndarray:
        """Responder reward per *proposer* level on a successful deal."""
        return self.values()


@dataclass(frozen=True)
class LearningParams:
    alpha: float = 0.1
    gamma: float = 0.9
    epsilon: float = 0.01

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not (0.0 <= self.gamma < 1.0):
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        if not (0.0 <= self.epsilon <= 1.0):
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")


@dataclass(frozen=True)
class SimState:
    """Joint action pair of the previous round, shared by both players.

    States enumerate as s1..s9 in proposer-major order:
    index = 3 * proposer_level + responder_level (0-based).
    """

    proposer_action: Level
    responder_action: Level

    @property
    def index(self) -> int:
        return 3 * int(self.proposer_action) + int(self.responder_action)

    @property
    def name(self) -> str:
        return f"s{self.index + 1}"

    @classmethod
    def from_index(cls, index: int) -> "SimState":
        if not 0 <= index < N_STATES:
            raise ValueError(f"state index out of range: {index}")
        return cls(Level(index // 3), Level(index % 3))


ALL_STATES = tuple(SimState.from_index(i) for i in range(N_STATES))


@dataclass
class QTable:
    """9-state x 3-action value table for one role of one player."""

    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (N_STATES, N_LEVELS):
            raise ValueError(f"Q-table must be 9x3, got {self.values.shape}")

    def row(self, state: SimState) -> np.ndarray:
        return self.values[state.index]

    def copy(self) -> "QTable":
        return QTable(self.values.copy())


@dataclass
class Agent:
    """One player: a Q-table per role."""

    proposer_table: QTable
    responder_table: QTable

    def table(self, role: Role) -> QTable:
        return self.proposer_table if role == Role.PROPOSER else self.responder_table


def deal_succeeds(proposer_action: Level, responder_action: Level) -> bool:
    """A deal closes iff the offer meets the threshold (equality accepts).

    Level values are ordered l < m < h, so comparing level indices is
    identical to comparing the underlying shares.
    """
    return int(proposer_action) >= int(responder_action)


def payoff(
    role: Role,
    own_action: Level,
    opponent_action: Level,
    params: GameParams,
) -> float:
    """Reward for one side of a round.

    On success the proposer keeps ``1 - offer`` and the responder
    receives ``offer``; a failed deal pays both sides zero.
    """
    if role == Role.PROPOSER:
        p, q = own_action, opponent_action
    else:
        p, q = opponent_action, own_action
    if not deal_succeeds(p, q):
        return 0.0
    values = params.values()
    return 1.0 - values[int(p)] if role == Role.PROPOSER else float(values[int(p)])


def select_level(row: np.ndarray, epsilon: float, u_explore: float, u_pick: float) -> Level:
    """Epsilon-greedy choice driven by two externally supplied uniforms.

    ``u_explore < epsilon`` triggers a uniform draw over all three levels
    (the greedy level included); otherwise the row argmax wins, with exact
    ties broken uniformly among the maximizers via ``u_pick``. Keeping the
    uniforms explicit fixes the random-stream layout so that independent
    implementations of the round loop reproduce each other bit for bit.
    """
    if u_explore < epsilon:
        return Level(min(int(u_pick * N_LEVELS), N_LEVELS - 1))
    best = row[0]
    if row[1] > best:
        best = row[1]
    if row[2] > best:
        best = row[2]
    ties = [a for a in range(N_LEVELS) if row[a] == best]
    return Level(ties[min(int(u_pick * len(ties)), len(ties) - 1)])


def select_action(
    table: QTable,
    state: SimState,
    epsilon: float,
    rng: np.random.Generator,
) -> Level:
    """Epsilon-greedy action for ``state``; consumes exactly two uniforms."""
    u = rng.random(2)
    return select_level(table.values[state.index], epsilon, u[0], u[1])


def q_update(
    table: QTable,
    state: SimState,
    action: Level,
    reward: float,
    next_state: SimState,
    learn: LearningParams,
) -> None:
    """Bellman update of the single cell (state, action), in place.

    new = (1 - alpha) * old + alpha * (reward + gamma * max_a' Q[next, a'])

    The bootstrap max runs over the same table (same role) at the next
    state and reads pre-update values.
    """
    q = table.values
    row = q[next_state.index]
    mx = row[0]
    if row[1] > mx:
        mx = row[1]
    if row[2] > mx:
        mx = row[2]
    s, a = state.index, int(action)
    q[s, a] = (1.0 - learn.alpha) * q[s, a] + learn.alpha * (reward + learn.gamma * mx)


def init_qtable(rng: np.random.Generator) -> QTable:
    """Fresh table with 27 i.i.d. uniform draws on the open interval (0, 1)."""
    values = rng.random((N_STATES, N_LEVELS))
    # rng.random() is half-open [0, 1); redraw the measure-zero exact zeros.
    while True:
        zeros = values == 0.0
        if not zeros.any():
            break
        values[zeros] = rng.random(int(zeros.sum()))
    return QTable(values)

