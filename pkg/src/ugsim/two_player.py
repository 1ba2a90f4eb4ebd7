"""Two-agent repeated ultimatum game.

Drives role assignment, simultaneous action selection, payoff, learning,
and the shared-state advance, producing a per-round event stream.

Learning state lives in one proposer-seat table and one responder-seat
table: whichever agent occupies a seat in a given round plays from, and
updates, that seat's table. The role scheme (rotating, random, fixed)
therefore decides only which agent id gets credited with each seat in
the round records; the learning dynamics are identical across schemes,
and under fixed roles the seats coincide with the agents outright. In
the API each ``Agent`` of the returned pair holds references to the same
two seat tables. This is the reading of role alternation that reproduces
the published phase behavior: giving each agent private per-role tables
instead lets rotation trap a sizable share of realizations in a
self-stabilizing high-offer/high-threshold lock-in that the published
dynamics rule out.

Two interchangeable execution paths exist: a pure-Python reference that
works round by round through :mod:`ugsim.core`, and a numba kernel that
consumes the identical uniform stream in chunks. Both yield bit-identical
trajectories; the tests enforce it.

Random-stream layout per realization (Philox, see :mod:`ugsim.rng`):
27 uniforms for the proposer-seat table, 27 for the responder-seat
table, one draw for the initial state (floor(9 u)), then five draws per
round as documented in :data:`ugsim.rng.DRAWS_PER_ROUND`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Protocol, Sequence

import numpy as np

from . import _kernels
from .core import (
    Agent,
    GameParams,
    LearningParams,
    Level,
    QTable,
    Role,
    SimState,
    deal_succeeds,
    init_qtable,
    payoff,
    q_update,
    select_level,
)
from .rng import DRAWS_PER_ROUND, make_generator

_CHUNK_ROUNDS = 1 << 18


class RoleScheme(str, Enum):
    """How agents are assigned to the proposer seat each round.

    Rotating alternates deterministically (agent 0 proposes in round 0),
    random draws the proposer uniformly every round, fixed keeps agent 0
    as the proposer forever.
    """

    ROTATING = "rotating"
    RANDOM = "random"
    FIXED = "fixed"

    @property
    def kernel_code(self) -> int:
        return {
            RoleScheme.ROTATING: _kernels.SCHEME_ROTATING,
            RoleScheme.RANDOM: _kernels.SCHEME_RANDOM,
            RoleScheme.FIXED: _kernels.SCHEME_FIXED,
        }[self]


@dataclass(frozen=True)
class RunConfig:
    game: GameParams = field(default_factory=GameParams)
    learn: LearningParams = field(default_factory=LearningParams)
    scheme: RoleScheme = RoleScheme.ROTATING
    steps: int = 2_001_000
    transient: int = 2_000_000
    window: int = 1_000
    seed: int = 1

    def __post_init__(self) -> None:
        if self.steps < 0:
            raise ValueError(f"steps must be >= 0, got {self.steps}")
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        if self.transient < 0:
            raise ValueError(f"transient must be >= 0, got {self.transient}")
        # steps == 0 is the degenerate empty run; otherwise the measurement
        # window must fit after the transient
        if self.steps > 0 and self.transient + self.window > self.steps:
            raise ValueError(
                f"transient + window must not exceed steps "
                f"({self.transient} + {self.window} > {self.steps})"
            )


@dataclass(frozen=True)
class RoundRecord:
    """Everything observable about one round."""

    round: int
    proposer_id: int
    responder_id: int
    proposer_action: Level
    responder_action: Level
    success: bool
    proposer_payoff: float
    responder_payoff: float
    state_before: SimState
    state_after: SimState
    explored: tuple[bool, bool]


class ChunkConsumer(Protocol):
    """Streaming sink for contiguous blocks of rounds.

    ``consume`` is called with equal-length arrays covering rounds
    ``start .. start + n - 1`` in order: the state observed in each round,
    both action levels, the proposing agent, and the two exploration
    flags. Chunk boundaries are arbitrary; implementations must not rely
    on any alignment.
    """

    def consume(
        self,
        start: int,
        states_before: np.ndarray,
        a_p: np.ndarray,
        a_q: np.ndarray,
        proposer_id: np.ndarray,
        explored_p: np.ndarray,
        explored_q: np.ndarray,
    ) -> None: ...


class TableSnapshotter(Protocol):
    """Receives the seat Q-tables at decimated round counts.

    ``take(completed_rounds, tables, state)`` gets a (sets, 2, 9, 3)
    array (table set, role, state, action) plus the current state index;
    implementations must copy what they keep.
    """

    interval: int

    def take(self, completed_rounds: int, tables: np.ndarray, state: int) -> None: ...


@dataclass
class RunResult:
    config: RunConfig
    initial_state: SimState
    final_state: SimState
    agents: tuple[Agent, Agent]
    records: list[RoundRecord] | None = None


def _assign_seat(scheme: RoleScheme, round_index: int, u_role: float) -> int:
    if scheme == RoleScheme.ROTATING:
        return round_index & 1
    if scheme == RoleScheme.RANDOM:
        return 0 if u_role < 0.5 else 1
    return 0


def step(
    agents: tuple[Agent, Agent],
    state: SimState,
    scheme: RoleScheme,
    config: RunConfig,
    rng: np.random.Generator,
    round_index: int,
) -> tuple[SimState, RoundRecord]:
    """One round of the reference path; consumes exactly five uniforms.

    Each seat picks from its role's table at the shared state, the deal
    resolves, and both seats run the Bellman update on the cell they just
    played with the new joint action pair as the next state.
    """
    u = rng.random(DRAWS_PER_ROUND)
    prop_id = _assign_seat(scheme, round_index, u[0])
    resp_id = 1 - prop_id
    proposer, responder = agents[prop_id], agents[resp_id]

    eps = config.learn.epsilon
    a_p = select_level(proposer.proposer_table.values[state.index], eps, u[1], u[2])
    a_q = select_level(responder.responder_table.values[state.index], eps, u[3], u[4])

    success = deal_succeeds(a_p, a_q)
    pay_p = payoff(Role.PROPOSER, a_p, a_q, config.game)
    pay_q = payoff(Role.RESPONDER, a_q, a_p, config.game)
    next_state = SimState(a_p, a_q)

    q_update(proposer.proposer_table, state, a_p, pay_p, next_state, config.learn)
    q_update(responder.responder_table, state, a_q, pay_q, next_state, config.learn)

    record = RoundRecord(
        round=round_index,
        proposer_id=prop_id,
        responder_id=resp_id,
        proposer_action=a_p,
        responder_action=a_q,
        success=success,
        proposer_payoff=pay_p,
        responder_payoff=pay_q,
        state_before=state,
        state_after=next_state,
        explored=(bool(u[1] < eps), bool(u[3] < eps)),
    )
    return next_state, record


def make_agents(rng: np.random.Generator) -> tuple[Agent, Agent]:
    """The agent pair: two views onto one fresh pair of seat tables.

    Draws the proposer-seat table first, then the responder seat.
    """
    seat_p = init_qtable(rng)
    seat_q = init_qtable(rng)
    shared = Agent(proposer_table=seat_p, responder_table=seat_q)
    return (shared, Agent(proposer_table=seat_p, responder_table=seat_q))


def _initial_setup(config: RunConfig) -> tuple[np.random.Generator, np.ndarray, int]:
    """Seed the generator, draw the two seat tables, then the initial state."""
    gen = make_generator(config.seed)
    tables = np.empty((2, 9, 3), dtype=np.float64)
    tables[0] = init_qtable(gen).values
    tables[1] = init_qtable(gen).values
    state0 = min(int(gen.random() * 9), 8)
    return gen, tables, state0


def _agents_from_array(tables: np.ndarray) -> tuple[Agent, Agent]:
    seat_p = QTable(tables[0].copy())
    seat_q = QTable(tables[1].copy())
    return (Agent(seat_p, seat_q), Agent(seat_p, seat_q))


class _RecordCollector:
    """Chunk consumer that materializes RoundRecords (small runs only)."""

    def __init__(self, game: GameParams) -> None:
        self.game = game
        self.records: list[RoundRecord] = []

    def consume(self, start, states_before, a_p, a_q, proposer_id, explored_p, explored_q):
        for i in range(len(a_p)):
            ap = Level(int(a_p[i]))
            aq = Level(int(a_q[i]))
            pid = int(proposer_id[i])
            self.records.append(
                RoundRecord(
                    round=start + i,
                    proposer_id=pid,
                    responder_id=1 - pid,
                    proposer_action=ap,
                    responder_action=aq,
                    success=deal_succeeds(ap, aq),
                    proposer_payoff=payoff(Role.PROPOSER, ap, aq, self.game),
                    responder_payoff=payoff(Role.RESPONDER, aq, ap, self.game),
                    state_before=SimState.from_index(int(states_before[i])),
                    state_after=SimState(ap, aq),
                    explored=(bool(explored_p[i]), bool(explored_q[i])),
                )
            )


def run(
    config: RunConfig,
    consumers: Sequence[ChunkConsumer] = (),
    snapshotter: TableSnapshotter | None = None,
    collect_records: bool = False,
    use_kernel: bool = True,
) -> RunResult:
    """Simulate one realization, streaming rounds to the consumers.

    Deterministic in ``config.seed``: the kernel and reference paths
    produce identical trajectories, final tables, and record streams.
    """
    collector = _RecordCollector(config.game) if collect_records else None
    all_consumers: list[ChunkConsumer] = list(consumers)
    if collector is not None:
        all_consumers.append(collector)

    gen, tables, state = _initial_setup(config)
    state0 = state

    if snapshotter is not None and snapshotter.interval < 1:
        raise ValueError("snapshot interval must be >= 1")
    if snapshotter is not None:
        snapshotter.take(0, tables[None], state)

    vals = config.game.values()
    pay_p = 1.0 - vals
    pay_q = vals.copy()
    learn = config.learn

    done = 0
    while done < config.steps:
        n = min(_CHUNK_ROUNDS, config.steps - done)
        if snapshotter is not None:
            n = min(n, snapshotter.interval - (done % snapshotter.interval))
        u = gen.random((n, DRAWS_PER_ROUND))
        a_p = np.empty(n, dtype=np.int8)
        a_q = np.empty(n, dtype=np.int8)
        prop_id = np.empty(n, dtype=np.int8)
        expl_p = np.empty(n, dtype=np.uint8)
        expl_q = np.empty(n, dtype=np.uint8)
        states_before = np.empty(n, dtype=np.int64)

        if use_kernel:
            states_before[0] = state
            state = int(
                _kernels.two_player_chunk(
                    tables,
                    state,
                    pay_p,
                    pay_q,
                    learn.alpha,
                    learn.gamma,
                    learn.epsilon,
                    config.scheme.kernel_code,
                    done,
                    u,
                    a_p,
                    a_q,
                    prop_id,
                    expl_p,
                    expl_q,
                )
            )
            codes = 3 * a_p.astype(np.int64) + a_q
            states_before[1:] = codes[:-1]
        else:
            s = state
            eps = learn.epsilon
            for i in range(n):
                row = u[i]
                pid = _assign_seat(config.scheme, done + i, row[0])
                ap = int(select_level(tables[0, s], eps, row[1], row[2]))
                aq = int(select_level(tables[1, s], eps, row[3], row[4]))
                success = ap >= aq
                pp = pay_p[ap] if success else 0.0
                pq = pay_q[ap] if success else 0.0
                s2 = 3 * ap + aq
                for role, act, rew in ((0, ap, pp), (1, aq, pq)):
                    qrow = tables[role, s2]
                    mx = qrow[0]
                    if qrow[1] > mx:
                        mx = qrow[1]
                    if qrow[2] > mx:
                        mx = qrow[2]
                    tables[role, s, act] = (1.0 - learn.alpha) * tables[
                        role, s, act
                    ] + learn.alpha * (rew + learn.gamma * mx)
                a_p[i] = ap
                a_q[i] = aq
                prop_id[i] = pid
                expl_p[i] = 1 if row[1] < eps else 0
                expl_q[i] = 1 if row[3] < eps else 0
                states_before[i] = s
                s = s2
            state = s

        for consumer in all_consumers:
            consumer.consume(done, states_before, a_p, a_q, prop_id, expl_p, expl_q)
        done += n
        if snapshotter is not None and done % snapshotter.interval == 0:
            snapshotter.take(done, tables[None], state)

    if snapshotter is not None and config.steps % snapshotter.interval != 0:
        snapshotter.take(config.steps, tables[None], state)

    return RunResult(
        config=config,
        initial_state=SimState.from_index(state0),
        final_state=SimState.from_index(state),
        agents=_agents_from_array(tables),
        records=collector.records if collector is not None else None,
    )


def run_reference(
    config: RunConfig,
    rng: np.random.Generator | None = None,
) -> Iterator[RoundRecord]:
    """Round-by-round generator built directly on :func:`step`.

    Consumes the same stream as :func:`run`; used as the executable
    contract in tests. Supply ``rng`` to continue an existing stream.
    """
    if rng is None:
        rng = make_generator(config.seed)
    agents = make_agents(rng)
    state = SimState.from_index(min(int(rng.random() * 9), 8))
    for t in range(config.steps):
        state, record = step(agents, state, config.scheme, config, rng, t)
        yield record
