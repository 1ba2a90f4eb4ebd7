"""Command-line entry point.

One experiment per invocation: a subcommand picks the mode, ``--config``
optionally seeds the options from a flat key=value file, and explicit
flags override it. Prints a JSON summary of the written files.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Sequence

from .experiments import (
    ConfigError,
    parse_config,
    parse_grid,
    parse_windows,
    run_experiment,
)
from .two_player import RoleScheme


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="flat key=value config file")
    parser.add_argument("--alpha", type=float, help="learning rate in (0,1]")
    parser.add_argument("--gamma", type=float, help="discount factor in [0,1)")
    parser.add_argument("--epsilon", type=float, help="exploration probability in [0,1]")
    parser.add_argument("--l", type=float, help="low offer/threshold level in (0,0.5)")
    parser.add_argument("--h", type=float, help="high offer/threshold level in (0.5,1)")
    parser.add_argument(
        "--scheme",
        choices=[s.value for s in RoleScheme],
        help="role assignment (default rotating)",
    )
    parser.add_argument("--steps", type=int, help="rounds per realization (default transient+window)")
    parser.add_argument("--transient", type=int, help="rounds discarded before the window")
    parser.add_argument("--window", type=int, help="measurement window in rounds")
    parser.add_argument("--seed", type=int, help="master seed (64-bit)")
    parser.add_argument("--ensemble", type=int, help="independent realizations to average")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--record-every", dest="record_every", type=int,
                        help="time-series block size in rounds")
    parser.add_argument("--jobs", type=int, help="parallel worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ugsim",
        description="Q-learning ultimatum-game simulator and experiment runner",
    )
    sub = parser.add_subparsers(dest="mode", required=True)

    p = sub.add_parser("run", help="time series (and preferences) for one parameter point")
    _add_common(p)
    p.add_argument("--snapshot-every", dest="snapshot_every", type=int,
                   help="rounds between Q-table preference snapshots")
    p.add_argument("--preferences-conditional", dest="preferences_conditional",
                   action="store_const", const=True,
                   help="restrict preference masses to the currently occupied state")

    p = sub.add_parser("scan-learning", help="stationary fractions over an (alpha,gamma) grid")
    _add_common(p)
    p.add_argument("--alpha-grid", dest="alpha_grid", help="a0:a1:n or comma list")
    p.add_argument("--gamma-grid", dest="gamma_grid", help="g0:g1:n or comma list")

    p = sub.add_parser("scan-game", help="stationary fractions over an (l,h) grid")
    _add_common(p)
    p.add_argument("--l-grid", dest="l_grid", help="l0:l1:n or comma list")
    p.add_argument("--h-grid", dest="h_grid", help="h0:h1:n or comma list")

    p = sub.add_parser("transitions", help="joint/conditional/net-flow state statistics")
    _add_common(p)
    p.add_argument("--windows", help="round windows start:end[,start:end...]")

    p = sub.add_parser("lattice", help="ring-population run")
    _add_common(p)
    p.add_argument("--n", type=int, help="population size (ring), >= 3")

    p = sub.add_parser("theory-boundary", help="closed-form alpha(gamma) boundary curve")
    _add_common(p)
    p.add_argument("--gamma-grid", dest="gamma_grid", help="g0:g1:n or comma list")

    return parser


_GRID_KEYS = ("alpha_grid", "gamma_grid", "l_grid", "h_grid")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    config_path = args.pop("config", None)
    overrides: dict[str, Any] = {}
    for key, value in args.items():
        if value is None:
            continue
        if key in _GRID_KEYS and isinstance(value, str):
            value = parse_grid(value)
        elif key == "windows" and isinstance(value, str):
            value = parse_windows(value)
        elif key == "scheme":
            value = RoleScheme(value)
        overrides[key] = value
    try:
        spec = parse_config(config_path, overrides)
        summary = run_experiment(spec)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(json.dumps(summary, sort_keys=True))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
