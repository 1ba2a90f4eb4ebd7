"""Ring population of Q-learning ultimatum players.

N agents sit on a 1-D ring; every agent plays the game with both nearest
neighbors through an independent per-edge channel holding its own shared
state. All edges play synchronously once per step, processed in
edge-index order with no cross-edge information flow inside a step.

As in the two-player engine, each edge learns through one proposer-seat
and one responder-seat table; which endpoint occupies the proposer seat
alternates by round parity (the lower-numbered agent proposes on even
rounds), which only affects how records attribute agent ids. Both
endpoints of an edge therefore reference the same two tables.

Random-stream layout per realization: for each edge in index order, 27
uniforms for the proposer-seat table then 27 for the responder seat;
then one initial-state draw per edge; then four draws per edge per step
(see :data:`ugsim.rng.DRAWS_PER_EDGE_STEP`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .core import (
    GameParams,
    LearningParams,
    QTable,
    Role,
    SimState,
    deal_succeeds,
    init_qtable,
    payoff,
    q_update,
    select_level,
)
from .rng import DRAWS_PER_EDGE_STEP, make_generator
from .two_player import ChunkConsumer, RoundRecord

_CHUNK_STEPS = 4096


@dataclass(frozen=True)
class LatticeConfig:
    n: int = 50
    k: int = 2
    game: GameParams = field(default_factory=GameParams)
    learn: LearningParams = field(default_factory=LearningParams)
    steps: int = 2_001_000
    transient: int = 2_000_000
    window: int = 1_000
    seed: int = 1

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ValueError(f"lattice needs n >= 3, got {self.n}")
        if self.k != 2:
            raise ValueError(f"only k=2 nearest neighbors supported, got {self.k}")
        if self.steps < 0:
            raise ValueError(f"steps must be >= 0, got {self.steps}")
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        if self.transient + self.window > self.steps:
            raise ValueError(
                f"transient + window must not exceed steps "
                f"({self.transient} + {self.window} > {self.steps})"
            )


def ring_edges(n: int) -> list[tuple[int, int]]:
    """Edges of the n-ring in processing order: edge e joins e and (e+1) mod n."""
    return [(e, (e + 1) % n) for e in range(n)]


@dataclass
class EdgeContext:
    """One playing channel: the agent pair, its state, and its seat tables."""

    agents: tuple[int, int]
    state: SimState
    proposer_table: QTable
    responder_table: QTable

    @property
    def lower_endpoint(self) -> int:
        return 0 if self.agents[0] < self.agents[1] else 1

    def proposer_agent(self, round_index: int) -> int:
        """The agent in the proposer seat: lower id on even rounds."""
        lo = self.lower_endpoint
        return self.agents[lo if round_index % 2 == 0 else 1 - lo]


def init_edges(config: LatticeConfig, rng: np.random.Generator) -> list[EdgeContext]:
    """All edge channels with fresh uniform tables and uniform states."""
    contexts = []
    for pair in ring_edges(config.n):
        contexts.append(
            EdgeContext(
                agents=pair,
                state=SimState.from_index(0),
                proposer_table=init_qtable(rng),
                responder_table=init_qtable(rng),
            )
        )
    for ctx in contexts:
        ctx.state = SimState.from_index(min(int(rng.random() * 9), 8))
    return contexts


def lattice_step(
    contexts: Sequence[EdgeContext],
    config: LatticeConfig,
    rng: np.random.Generator,
    round_index: int,
) -> list[RoundRecord]:
    """Play one synchronous step on every edge; reference path.

    Returns one record per edge, in edge order, with agent ids in the
    proposer/responder fields. Consumes four uniforms per edge.
    """
    records = []
    eps = config.learn.epsilon
    for ctx in contexts:
        u = rng.random(DRAWS_PER_EDGE_STEP)
        state = ctx.state
        prop_agent = ctx.proposer_agent(round_index)
        resp_agent = ctx.agents[0] + ctx.agents[1] - prop_agent

        a_p = select_level(ctx.proposer_table.values[state.index], eps, u[0], u[1])
        a_q = select_level(ctx.responder_table.values[state.index], eps, u[2], u[3])
        nxt = SimState(a_p, a_q)
        pay_p = payoff(Role.PROPOSER, a_p, a_q, config.game)
        pay_q = payoff(Role.RESPONDER, a_q, a_p, config.game)

        q_update(ctx.proposer_table, state, a_p, pay_p, nxt, config.learn)
        q_update(ctx.responder_table, state, a_q, pay_q, nxt, config.learn)

        records.append(
            RoundRecord(
                round=round_index,
                proposer_id=prop_agent,
                responder_id=resp_agent,
                proposer_action=a_p,
                responder_action=a_q,
                success=deal_succeeds(a_p, a_q),
                proposer_payoff=pay_p,
                responder_payoff=pay_q,
                state_before=state,
                state_after=nxt,
                explored=(bool(u[0] < eps), bool(u[2] < eps)),
            )
        )
        ctx.state = nxt
    return records


def lattice_fractions(records: Sequence[RoundRecord]) -> tuple[np.ndarray, np.ndarray]:
    """Option fractions over one step's edge records.

    Normalized per role-instance: each edge fields exactly one proposer
    and one responder, so each triple sums to one.
    """
    if not records:
        raise ValueError("need at least one edge record")
    f_p = np.zeros(3)
    f_q = np.zeros(3)
    for rec in records:
        f_p[int(rec.proposer_action)] += 1.0
        f_q[int(rec.responder_action)] += 1.0
    return f_p / len(records), f_q / len(records)


@dataclass
class LatticeRunResult:
    config: LatticeConfig
    final_states: np.ndarray  # (n_edges,) state indices
    tables: np.ndarray  # (n_edges, 2, 9, 3)


def run_lattice(
    config: LatticeConfig,
    consumers: Sequence[ChunkConsumer] = (),
    use_kernel: bool = True,
) -> LatticeRunResult:
    """Simulate one lattice realization, streaming flattened edge-rounds.

    Consumers see the same interface as the two-player engine with
    chunks of length ``n_steps * n_edges``, edge-fastest: the entry for
    step t and edge e sits at ``t * n_edges + e`` and ``start`` counts
    edge-rounds. Proposer ids report the proposing agent.
    """
    gen = make_generator(config.seed)
    n = config.n
    contexts = init_edges(config, gen)
    tables = np.empty((n, 2, 9, 3), dtype=np.float64)
    states = np.empty(n, dtype=np.int64)
    agents_arr = np.empty((n, 2), dtype=np.int64)
    lo = np.empty(n, dtype=np.int64)
    for e, ctx in enumerate(contexts):
        tables[e, 0] = ctx.proposer_table.values
        tables[e, 1] = ctx.responder_table.values
        states[e] = ctx.state.index
        agents_arr[e] = ctx.agents
        lo[e] = ctx.lower_endpoint

    vals = config.game.values()
    pay_p = 1.0 - vals
    pay_q = vals.copy()
    learn = config.learn

    done = 0
    while done < config.steps:
        n_steps = min(_CHUNK_STEPS, config.steps - done)
        u = gen.random((n_steps, n, DRAWS_PER_EDGE_STEP))
        a_p = np.empty((n_steps, n), dtype=np.int8)
        a_q = np.empty((n_steps, n), dtype=np.int8)
        states_before = np.empty((n_steps, n), dtype=np.int64)
        expl_p = u[:, :, 0] < learn.epsilon
        expl_q = u[:, :, 2] < learn.epsilon

        if use_kernel:
            states_before[0] = states
            _kernels.lattice_chunk(
                tables,
                states,
                pay_p,
                pay_q,
                learn.alpha,
                learn.gamma,
                learn.epsilon,
                u,
                a_p,
                a_q,
            )
            if n_steps > 1:
                states_before[1:] = 3 * a_p[:-1].astype(np.int64) + a_q[:-1]
        else:
            eps = learn.epsilon
            for t in range(n_steps):
                states_before[t] = states
                for e in range(n):
                    s = int(states[e])
                    ap = int(select_level(tables[e, 0, s], eps, u[t, e, 0], u[t, e, 1]))
                    aq = int(select_level(tables[e, 1, s], eps, u[t, e, 2], u[t, e, 3]))
                    success = ap >= aq
                    pp = pay_p[ap] if success else 0.0
                    pq = pay_q[ap] if success else 0.0
                    s2 = 3 * ap + aq
                    for role, act, rew in ((0, ap, pp), (1, aq, pq)):
                        qrow = tables[e, role, s2]
                        mx = qrow[0]
                        if qrow[1] > mx:
                            mx = qrow[1]
                        if qrow[2] > mx:
                            mx = qrow[2]
                        tables[e, role, s, act] = (1.0 - learn.alpha) * tables[
                            e, role, s, act
                        ] + learn.alpha * (rew + learn.gamma * mx)
                    a_p[t, e] = ap
                    a_q[t, e] = aq
                    states[e] = s2

        rounds_even = ((done + np.arange(n_steps)) % 2 == 0)[:, None]
        ep_idx = np.where(rounds_even, lo[None, :], 1 - lo[None, :])
        prop_agent = agents_arr[np.arange(n)[None, :], ep_idx]
        for consumer in consumers:
            consumer.consume(
                done * n,
                states_before.reshape(-1),
                a_p.reshape(-1),
                a_q.reshape(-1),
                prop_agent.reshape(-1),
                expl_p.reshape(-1).astype(np.uint8),
                expl_q.reshape(-1).astype(np.uint8),
            )
        done += n_steps

    return LatticeRunResult(config=config, final_states=states.copy(), tables=tables)
