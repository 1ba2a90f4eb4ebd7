"""Numba-compiled round loops.

These kernels are the fast path behind the engines. They consume
pre-generated uniform blocks laid out exactly as documented in
:mod:`ugsim.rng` and replicate, float-op for float-op, the arithmetic of
the pure-Python reference path in :mod:`ugsim.core`; the test suite
asserts bitwise agreement between the two. No fastmath: IEEE semantics
are part of the determinism contract.
"""

from __future__ import annotations

import numpy as np
from numba import njit

SCHEME_ROTATING = 0
SCHEME_RANDOM = 1
SCHEME_FIXED = 2


@njit(cache=True, nogil=True)
def _pick(row, eps, u_explore, u_pick):  # pragma: no cover - exercised via engines
    if u_explore < eps:
        a = int(u_pick * 3.0)
        return 2 if a > 2 else a
    best = row[0]
    if row[1] > best:
        best = row[1]
    if row[2] > best:
        best = row[2]
    k = 0
    if row[0] == best:
        k += 1
    if row[1] == best:
        k += 1
    if row[2] == best:
        k += 1
    pick = int(u_pick * k)
    if pick > k - 1:
        pick = k - 1
    for a in range(3):
        if row[a] == best:
            if pick == 0:
                return a
            pick -= 1
    return 2


@njit(cache=True, nogil=True)
def two_player_chunk(
    q,  # (2 roles, 9, 3) float64, mutated: the proposer-seat and responder-seat tables
    state,  # int64 current state index
    pay_p,  # (3,) proposer reward per proposer level on success
    pay_q,  # (3,) responder reward per proposer level on success
    alpha,
    gamma,
    eps,
    scheme,  # 0 rotating / 1 random / 2 fixed; affects only proposer attribution
    round0,  # global index of the chunk's first round
    u,  # (n, 5) uniforms
    a_p,  # (n,) int8 out: proposer level
    a_q,  # (n,) int8 out: responder level
    prop_id,  # (n,) int8 out: proposing agent
    expl_p,  # (n,) uint8 out: proposer explored
    expl_q,  # (n,) uint8 out: responder explored
):  # pragma: no cover - exercised via engines
    """Advance the two-player game by ``n`` rounds; returns the new state."""
    n = u.shape[0]
    s = state
    for t in range(n):
        rnd = round0 + t
        if scheme == SCHEME_ROTATING:
            prop = rnd & 1
        elif scheme == SCHEME_RANDOM:
            prop = 0 if u[t, 0] < 0.5 else 1
        else:
            prop = 0

        ap = _pick(q[0, s], eps, u[t, 1], u[t, 2])
        aq = _pick(q[1, s], eps, u[t, 3], u[t, 4])

        success = ap >= aq
        pp = pay_p[ap] if success else 0.0
        pq = pay_q[ap] if success else 0.0
        s2 = 3 * ap + aq

        row = q[0, s2]
        mx = row[0]
        if row[1] > mx:
            mx = row[1]
        if row[2] > mx:
            mx = row[2]
        q[0, s, ap] = (1.0 - alpha) * q[0, s, ap] + alpha * (pp + gamma * mx)

        row = q[1, s2]
        mx = row[0]
        if row[1] > mx:
            mx = row[1]
        if row[2] > mx:
            mx = row[2]
        q[1, s, aq] = (1.0 - alpha) * q[1, s, aq] + alpha * (pq + gamma * mx)

        a_p[t] = ap
        a_q[t] = aq
        prop_id[t] = prop
        expl_p[t] = 1 if u[t, 1] < eps else 0
        expl_q[t] = 1 if u[t, 3] < eps else 0
        s = s2
    return s


@njit(cache=True, nogil=True)
def lattice_chunk(
    q,  # (n_edges, 2 roles, 9, 3) float64, mutated: per-edge seat tables
    states,  # (n_edges,) int64, mutated in place
    pay_p,
    pay_q,
    alpha,
    gamma,
    eps,
    u,  # (n_steps, n_edges, 4) uniforms
    a_p,  # (n_steps, n_edges) int8 out
    a_q,  # (n_steps, n_edges) int8 out
):  # pragma: no cover - exercised via engines
    """Advance every edge of the ring by ``n_steps`` synchronous steps.

    Edges are processed in index order with no cross-edge data flow
    within a step. Which agent occupies which seat rotates by round
    parity; that is pure attribution and never enters the dynamics.
    """
    n_steps = u.shape[0]
    n_edges = states.shape[0]
    for t in range(n_steps):
        for e in range(n_edges):
            s = states[e]

            ap = _pick(q[e, 0, s], eps, u[t, e, 0], u[t, e, 1])
            aq = _pick(q[e, 1, s], eps, u[t, e, 2], u[t, e, 3])

            success = ap >= aq
            pp = pay_p[ap] if success else 0.0
            pq = pay_q[ap] if success else 0.0
            s2 = 3 * ap + aq

            row = q[e, 0, s2]
            mx = row[0]
            if row[1] > mx:
                mx = row[1]
            if row[2] > mx:
                mx = row[2]
            q[e, 0, s, ap] = (1.0 - alpha) * q[e, 0, s, ap] + alpha * (pp + gamma * mx)

            row = q[e, 1, s2]
            mx = row[0]
            if row[1] > mx:
                mx = row[1]
            if row[2] > mx:
                mx = row[2]
            q[e, 1, s, aq] = (1.0 - alpha) * q[e, 1, s, aq] + alpha * (pq + gamma * mx)

            a_p[t, e] = ap
            a_q[t, e] = aq
            states[e] = s2
