"""Observables over round streams.

Every observable here reduces to counts of discrete events: which
options were played, whether the deal closed, which joint states
followed each other, and which action tops each Q-table row. All
accumulators therefore store integers (tie-split preference masses use
units of one sixth), which makes the merge law exact by construction:
merging two accumulators equals accumulating the concatenated stream,
bit for bit, regardless of split or order. Payoff sums are reconstructed
from success counts at readout, since each (role, option, opponent
option) combination pays a fixed amount.

Two interfaces coexist: record-level operations mirroring the engine's
:class:`~ugsim.two_player.RoundRecord` stream, and chunk consumers that
plug into the engines' fast path. The tests assert they agree exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import Agent, GameParams, Level, Role, SimState
from .two_player import RoundRecord

N_STATES = 9
N_LEVELS = 3
_TIE_UNIT = 6  # masses are stored in sixths: 6/k per maximizer among k ties


# ---------------------------------------------------------------------------
# option / state fractions


@dataclass(frozen=True)
class FractionPoint:
    """One round's contribution to the fraction series (all one-hots)."""

    f_p: np.ndarray  # (3,) proposer option indicator
    f_q: np.ndarray  # (3,) responder option indicator
    f_s: np.ndarray  # (9,) indicator of the state the round produced


def fractions(record: RoundRecord) -> FractionPoint:
    """Per-round fractions, normalized per role-instance.

    The two-player game fields one proposer and one responder per round,
    so the indicators are the fractions; time- and ensemble-averaging
    happen downstream. The state component marks ``state_after``.
    """
    f_p = np.zeros(N_LEVELS)
    f_q = np.zeros(N_LEVELS)
    f_s = np.zeros(N_STATES)
    f_p[int(record.proposer_action)] = 1.0
    f_q[int(record.responder_action)] = 1.0
    f_s[record.state_after.index] = 1.0
    return FractionPoint(f_p, f_q, f_s)


def ensemble_average(values: Sequence[float]) -> float:
    """Arithmetic mean over realizations; exact (fsum) and merge-safe."""
    if len(values) == 0:
        raise ValueError("ensemble_average needs at least one value")
    return math.fsum(values) / len(values)


class EnsembleAverage:
    """Mean (and variance) over per-realization window means.

    Stores the raw values so that merging commutes exactly with
    accumulation: the mean is always the correctly rounded sum of the
    full value set divided by its count.
    """

    def __init__(self, values: Iterable[float] = ()) -> None:
        self.values: list[float] = list(values)

    def add(self, value: float) -> None:
        self.values.append(value)

    def merge(self, other: "EnsembleAverage") -> "EnsembleAverage":
        self.values.extend(other.values)
        return self

    @property
    def count(self) -> int:
        return len(self.values)

    @property
    def mean(self) -> float:
        return ensemble_average(self.values)

    @property
    def variance(self) -> float:
        """Population variance of the stored values."""
        m = self.mean
        return math.fsum((v - m) ** 2 for v in self.values) / len(self.values)


# ---------------------------------------------------------------------------
# state-transition statistics


class TransitionStats:
    """Counts over consecutive state pairs within a window."""

    def __init__(self, counts: np.ndarray | None = None) -> None:
        self.counts = (
            np.zeros((N_STATES, N_STATES), dtype=np.int64) if counts is None else counts
        )

    @classmethod
    def from_states(cls, states: Sequence[int]) -> "TransitionStats":
        """Count the pairs (s_t, s_{t+1}) of a state-index sequence."""
        stats = cls()
        arr = np.asarray(states, dtype=np.int64)
        if arr.size >= 2:
            codes = N_STATES * arr[:-1] + arr[1:]
            stats.counts += np.bincount(codes, minlength=N_STATES * N_STATES).reshape(
                N_STATES, N_STATES
            )
        return stats

    def update(self, state: SimState, next_state: SimState) -> None:
        self.counts[state.index, next_state.index] += 1

    def merge(self, other: "TransitionStats") -> "TransitionStats":
        self.counts += other.counts
        return self

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def joint_probabilities(stats: TransitionStats) -> np.ndarray:
    """P[i, j] = P(s_t = s_{i+1}, s_{t+1} = s_{j+1}); entries sum to one."""
    total = stats.total
    if total < 1:
        raise ValueError("no transitions observed in the window")
    return stats.counts / total


def net_flow(joint: np.ndarray) -> np.ndarray:
    """Antisymmetric flow matrix: joint minus its transpose."""
    joint = np.asarray(joint, dtype=np.float64)
    return joint - joint.T


@dataclass(frozen=True)
class TransitionNetwork:
    """Thresholded conditional-probability graph over the nine states.

    ``edges`` holds (from_state, to_state, p(to|from)) for every retained
    edge, 0-based and sorted; ``occupancy`` is the marginal distribution
    of the window's source states. The threshold is a display filter
    only; rebuild from the unfiltered :class:`TransitionStats` for raw
    matrices.
    """

    edges: tuple[tuple[int, int, float], ...]
    occupancy: np.ndarray


def conditional_probabilities(stats: TransitionStats) -> np.ndarray:
    """p(s'|s) per row; rows without outgoing counts are all-NaN."""
    row_sums = stats.counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore"):
        return np.where(row_sums > 0, stats.counts / row_sums, np.nan)


def transition_network(stats: TransitionStats, threshold: float = 0.05) -> TransitionNetwork:
    cond = conditional_probabilities(stats)
    total = stats.total
    if total < 1:
        raise ValueError("no transitions observed in the window")
    occupancy = stats.counts.sum(axis=1) / total
    edges = []
    for i in range(N_STATES):
        for j in range(N_STATES):
            p = cond[i, j]
            if not np.isnan(p) and p >= threshold:
                edges.append((i, j, float(p)))
    return TransitionNetwork(edges=tuple(edges), occupancy=occupancy)


# ---------------------------------------------------------------------------
# deal statistics


class DealStats:
    """Per role and option: attempts, successes, and implied payoffs.

    The success matrix is indexed (proposer option, responder option);
    every payoff in the game is a function of that cell, so payoff means
    are exact derived quantities of the integer counts.
    """

    def __init__(self, game: GameParams) -> None:
        self.game = game
        self.attempts_p = np.zeros(N_LEVELS, dtype=np.int64)
        self.attempts_q = np.zeros(N_LEVELS, dtype=np.int64)
        self.successes = np.zeros((N_LEVELS, N_LEVELS), dtype=np.int64)

    def update(self, record: RoundRecord) -> None:
        p, q = int(record.proposer_action), int(record.responder_action)
        self.attempts_p[p] += 1
        self.attempts_q[q] += 1
        if record.success:
            self.successes[p, q] += 1

    def merge(self, other: "DealStats") -> "DealStats":
        self.attempts_p += other.attempts_p
        self.attempts_q += other.attempts_q
        self.successes += other.successes
        return self

    def _success_count(self, role: Role, option: Level) -> int:
        if role == Role.PROPOSER:
            return int(self.successes[int(option), :].sum())
        return int(self.successes[:, int(option)].sum())

    def attempts(self, role: Role, option: Level) -> int:
        arr = self.attempts_p if role == Role.PROPOSER else self.attempts_q
        return int(arr[int(option)])

    def success_rate(self, role: Role, option: Level) -> float:
        n = self.attempts(role, option)
        return self._success_count(role, option) / n if n else math.nan

    def payoff_sum(self, role: Role, option: Level) -> float:
        values = self.game.values()
        o = int(option)
        if role == Role.PROPOSER:
            return float(self.successes[o, :].sum() * (1.0 - values[o]))
        return float((self.successes[:, o] * values).sum())

    def mean_payoff(self, role: Role, option: Level) -> float:
        n = self.attempts(role, option)
        return self.payoff_sum(role, option) / n if n else math.nan


def deal_stats_update(stats: DealStats, record: RoundRecord) -> DealStats:
    """Fold one round into the deal statistics (returns ``stats``)."""
    stats.update(record)
    return stats


# ---------------------------------------------------------------------------
# Q-table preference statistics


def _row_units(row: np.ndarray, out: np.ndarray) -> None:
    best = row.max()
    ties = row == best
    out[ties] += _TIE_UNIT // int(ties.sum())


def table_argmax_units(values: np.ndarray) -> np.ndarray:
    """Per-state tie-split argmax mass of one table, in sixths."""
    units = np.zeros((N_STATES, N_LEVELS), dtype=np.int64)
    for s in range(N_STATES):
        _row_units(values[s], units[s])
    return units


def preference_snapshot(agents: Sequence[Agent], role: Role) -> np.ndarray:
    """Argmax-action mass per state for one role, averaged over agents.

    Each table contributes mass one per state, split uniformly over the
    actions attaining the row maximum; rows of the result sum to one.
    """
    if not agents:
        raise ValueError("need at least one agent")
    units = np.zeros((N_STATES, N_LEVELS), dtype=np.int64)
    for agent in agents:
        units += table_argmax_units(agent.table(role).values)
    return units / (_TIE_UNIT * len(agents))


class PreferenceStats:
    """Accumulated argmax-preference masses per role and state."""

    def __init__(self) -> None:
        self.units = np.zeros((2, N_STATES, N_LEVELS), dtype=np.int64)
        self.tables = np.zeros(2, dtype=np.int64)

    def add_table(self, role: Role, values: np.ndarray) -> None:
        self.units[int(role)] += table_argmax_units(values)
        self.tables[int(role)] += 1

    def merge(self, other: "PreferenceStats") -> "PreferenceStats":
        self.units += other.units
        self.tables += other.tables
        return self

    def masses(self, role: Role) -> np.ndarray:
        n = int(self.tables[int(role)])
        if n == 0:
            raise ValueError("no tables accumulated for this role")
        return self.units[int(role)] / (_TIE_UNIT * n)


# ---------------------------------------------------------------------------
# chunk consumers for the engines' fast path


def _pair_codes(a_p: np.ndarray, a_q: np.ndarray) -> np.ndarray:
    return N_LEVELS * a_p.astype(np.int64) + a_q


class WindowCounts:
    """Counts of action pairs over a round window.

    The state a round produces is exactly its action pair, so the nine
    pair counts double as produced-state counts; every window observable
    (option fractions, state fractions, deal and payoff statistics)
    derives from them.
    """

    def __init__(self, start: int, end: int) -> None:
        if not 0 <= start < end:
            raise ValueError(f"bad window [{start}, {end})")
        self.start = start
        self.end = end
        self.pairs = np.zeros(N_LEVELS * N_LEVELS, dtype=np.int64)
        self.rounds = 0

    def consume(self, start, states_before, a_p, a_q, proposer_id, explored_p, explored_q):
        lo = max(self.start - start, 0)
        hi = min(self.end - start, len(a_p))
        if lo >= hi:
            return
        codes = _pair_codes(a_p[lo:hi], a_q[lo:hi])
        self.pairs += np.bincount(codes, minlength=N_LEVELS * N_LEVELS)
        self.rounds += hi - lo

    def merge(self, other: "WindowCounts") -> "WindowCounts":
        self.pairs += other.pairs
        self.rounds += other.rounds
        return self

    @property
    def pair_matrix(self) -> np.ndarray:
        return self.pairs.reshape(N_LEVELS, N_LEVELS)

    def f_p(self) -> np.ndarray:
        return self.pair_matrix.sum(axis=1) / self.rounds

    def f_q(self) -> np.ndarray:
        return self.pair_matrix.sum(axis=0) / self.rounds

    def f_s(self) -> np.ndarray:
        return self.pairs / self.rounds


class BlockSeries:
    """Block-resolved pair and state counts across a whole run.

    Block b covers rounds [b*block, (b+1)*block); the final block may be
    short. All time-series columns derive from these counts.
    """

    def __init__(self, total_rounds: int, block: int) -> None:
        if block < 1:
            raise ValueError(f"block must be >= 1, got {block}")
        self.block = block
        self.total_rounds = total_rounds
        n_blocks = max((total_rounds + block - 1) // block, 1)
        self.pairs = np.zeros((n_blocks, N_LEVELS * N_LEVELS), dtype=np.int64)

    @property
    def n_blocks(self) -> int:
        return self.pairs.shape[0]

    def block_rounds(self, b: int) -> int:
        lo = b * self.block
        hi = min(lo + self.block, self.total_rounds)
        return max(hi - lo, 0)

    def consume(self, start, states_before, a_p, a_q, proposer_id, explored_p, explored_q):
        n = len(a_p)
        if n == 0:
            return
        codes = _pair_codes(a_p, a_q)
        blocks = (start + np.arange(n, dtype=np.int64)) // self.block
        b0 = int(blocks[0])
        local = blocks - b0
        nb = int(local[-1]) + 1
        combined = local * (N_LEVELS * N_LEVELS) + codes
        self.pairs[b0 : b0 + nb] += np.bincount(
            combined, minlength=nb * N_LEVELS * N_LEVELS
        ).reshape(nb, N_LEVELS * N_LEVELS)

    def merge(self, other: "BlockSeries") -> "BlockSeries":
        if other.block != self.block or other.total_rounds != self.total_rounds:
            raise ValueError("can only merge block series of identical shape")
        self.pairs += other.pairs
        return self


class TransitionWindows:
    """9x9 transition counts for each configured round window.

    Counts the pairs (s_t, s_{t+1}) for t in [start, end - 1), so a
    window of w rounds yields w - 1 pairs and the final in-window state
    is only a pair target. Only meaningful for a single-chain stream
    (the two-player engine).
    """

    def __init__(self, windows: Sequence[tuple[int, int]]) -> None:
        for start, end in windows:
            if not 0 <= start < end:
                raise ValueError(f"bad window [{start}, {end})")
        self.windows = [(int(s), int(e)) for s, e in windows]
        self.stats = [TransitionStats() for _ in self.windows]

    def consume(self, start, states_before, a_p, a_q, proposer_id, explored_p, explored_q):
        n = len(a_p)
        if n == 0:
            return
        next_states = _pair_codes(a_p, a_q)
        for (w0, w1), stats in zip(self.windows, self.stats):
            lo = max(w0 - start, 0)
            hi = min((w1 - 1) - start, n)
            if lo >= hi:
                continue
            codes = N_STATES * states_before[lo:hi] + next_states[lo:hi]
            stats.counts += np.bincount(
                codes, minlength=N_STATES * N_STATES
            ).reshape(N_STATES, N_STATES)

    def merge(self, other: "TransitionWindows") -> "TransitionWindows":
        if other.windows != self.windows:
            raise ValueError("can only merge identical window sets")
        for mine, theirs in zip(self.stats, other.stats):
            mine.merge(theirs)
        return self


class PreferenceSnapshots:
    """Table snapshotter recording argmax masses at decimated rounds.

    Tracks the unconditional masses of every (role, state) row plus a
    conditional variant restricted to the realization's current state,
    each in exact sixth-units.
    """

    def __init__(self, interval: int = 1_000) -> None:
        if interval < 1:
            raise ValueError(f"snapshot interval must be >= 1, got {interval}")
        self.interval = interval
        self.rounds: list[int] = []
        self.units: list[np.ndarray] = []  # (2, 9, 3) per snapshot
        self.cond_units: list[np.ndarray] = []  # (2, 9, 3) per snapshot
        self.cond_counts: list[np.ndarray] = []  # (9,) realizations in each state
        self.tables_per_role = 0
        self.agents_per_realization = 0

    def take(self, completed_rounds: int, tables: np.ndarray, state: int) -> None:
        n_agents = tables.shape[0]
        units = np.zeros((2, N_STATES, N_LEVELS), dtype=np.int64)
        cond = np.zeros((2, N_STATES, N_LEVELS), dtype=np.int64)
        occ = np.zeros(N_STATES, dtype=np.int64)
        occ[state] = 1
        for agent in range(n_agents):
            for role in range(2):
                u = table_argmax_units(tables[agent, role])
                units[role] += u
                cond[role, state] += u[state]
        self.rounds.append(completed_rounds)
        self.units.append(units)
        self.cond_units.append(cond)
        self.cond_counts.append(occ)
        self.tables_per_role = n_agents
        self.agents_per_realization = n_agents

    def merge(self, other: "PreferenceSnapshots") -> "PreferenceSnapshots":
        if other.rounds != self.rounds:
            raise ValueError("can only merge snapshot sets at identical rounds")
        if other.agents_per_realization != self.agents_per_realization:
            raise ValueError("snapshot sets come from differently sized runs")
        for i in range(len(self.rounds)):
            self.units[i] += other.units[i]
            self.cond_units[i] += other.cond_units[i]
            self.cond_counts[i] += other.cond_counts[i]
        self.tables_per_role += other.tables_per_role
        return self

    def masses(self, index: int, conditional: bool = False) -> np.ndarray:
        """(2, 9, 3) mass array for snapshot ``index``; NaN rows when the
        conditional variant saw no realization in a state."""
        if conditional:
            counts = self.cond_counts[index].astype(np.float64)
            denom = _TIE_UNIT * self.agents_per_realization * counts
            with np.errstate(divide="ignore", invalid="ignore"):
                out = self.cond_units[index] / denom[None, :, None]
            return np.where(counts[None, :, None] > 0, out, np.nan)
        return self.units[index] / (_TIE_UNIT * self.tables_per_role)
