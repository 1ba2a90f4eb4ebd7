"""Closed-form stationary Q-values and the learning-rate boundary.

When the two-player game settles, the surviving pathways pin the updated
cells to fixed points of the Bellman recursion. For the fair self-loop
(state s5, mid offer) the stationary value is the geometric sum
pi / (1 - gamma) of the repeated half-pie reward; feeding that loop from
s1 adds one discounted step. Balancing the rational self-loop value of
the low offer against the value of switching pathways after the opponent
probes the mid threshold yields a critical learning rate as a function
of the discount factor: above it the rational pathway is abandoned.

These formulas double as the oracle for the simulation acceptance tests;
the iteration-based cross-check lives with the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GameParams


@dataclass(frozen=True)
class FixedPointReport:
    """Stationary proposer-table values on the surviving pathways."""

    game: GameParams
    gamma: float
    q_s5_pm: float  # fair self-loop: play m at s5 forever
    q_s1_pm: float  # one fair step from s1 into the s5 loop
    q_s2_pm: float  # one fair step from s2 into the s5 loop
    q_s1_pl: float  # rational self-loop: play l at s1 forever


@dataclass(frozen=True)
class BoundaryCurve:
    """Sampled (gamma, critical alpha) pairs; None marks out-of-range."""

    game: GameParams
    gammas: tuple[float, ...]
    alphas: tuple[float | None, ...]


def _check_gamma(gamma: float) -> None:
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must lie in [0, 1), got {gamma}")


def fixed_points(game: GameParams, gamma: float) -> FixedPointReport:
    """Stationary values of the fair and rational proposer pathways."""
    _check_gamma(gamma)
    pi_fair = game.m  # proposer reward of the accepted mid offer
    pi_rational = 1.0 - game.l  # proposer reward of the accepted low offer
    q_s5 = pi_fair / (1.0 - gamma)
    q_feed = gamma * pi_fair / (1.0 - gamma) + pi_fair
    return FixedPointReport(
        game=game,
        gamma=gamma,
        q_s5_pm=q_s5,
        q_s1_pm=q_feed,
        q_s2_pm=q_feed,
        q_s1_pl=pi_rational / (1.0 - gamma),
    )


def boundary_alpha(game: GameParams, gamma: float) -> float | None:
    """Critical learning rate separating the proposer's pathway choices.

    alpha* = (pi_ll - pi_mm) / (pi_ll - gamma * pi_mm) with pi_ll = 1 - l
    and pi_mm = 1/2; the failed-deal reward of probing the low offer
    against the mid threshold enters as zero. Values outside (0, 1] are
    reported as None (no boundary in the physical range) rather than
    clamped. Requires l < 1/2 so the low offer strictly beats the fair
    one for the proposer.
    """
    _check_gamma(gamma)
    pi_rational = 1.0 - game.l
    pi_fair = game.m
    if pi_rational <= pi_fair:
        raise ValueError(f"boundary needs l < 0.5, got l={game.l}")
    alpha = (pi_rational - pi_fair) / (pi_rational - gamma * pi_fair)
    if not 0.0 < alpha <= 1.0:
        return None
    return alpha


def boundary_curve(game: GameParams, gamma_grid: np.ndarray) -> BoundaryCurve:
    """Pointwise boundary over a gamma grid; monotone in gamma for l < 1/2."""
    gammas = tuple(float(g) for g in np.asarray(gamma_grid, dtype=np.float64))
    alphas = tuple(boundary_alpha(game, g) for g in gammas)
    return BoundaryCurve(game=game, gammas=gammas, alphas=alphas)
