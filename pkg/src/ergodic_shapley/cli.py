"""Command-line front end.

    ergodic-shapley games list
    ergodic-shapley estimate --game square --method simple --m 500000 --seed 7
    ergodic-shapley learn --game pair --m1 1000 --seed 3 --output pair.json
    ergodic-shapley replicate --game square --method optk2 --m 1850000 --m1 100 1000 --R 200
    ergodic-shapley sweep --games mst square --m1 100 610 --seeds 20
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from .estimators import EstimatorConfig, default_threads
from .exceptions import InputError
from .experiments import CORRELATION_GRID, Setting, correlation_sweep, replication_table
from .game_core import cyclic_shift, reversal
from .games import DEFAULT_PLAYER, FULL_SIZE, GAME_IDS, exact_shapley, make_game
from .greedy_matching import MatchingResult, learn_transformation

ESTIMATE_FIELDS = (
    "game", "player", "method", "m", "m1", "m2", "K", "seed", "estimate", "std_error", "rho_hat", "ratio",
)
REPLICATE_FIELDS = ("game", "player", "m", "m1", "m2", "sigma_S", "sigma_E", "ratio")
SWEEP_FIELDS = ("game", "player", "m1", "seeds", "rho_hat", "rho_hat_learning")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def render(rows: Sequence[dict], fields: Sequence[str], fmt: str) -> str:
    if fmt == "json":
        doc = [{f: _json_value(row.get(f)) for f in fields} for row in rows]
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_cell(row.get(f)) for f in fields])
    return buf.getvalue()


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _player(args) -> int:
    return DEFAULT_PLAYER[args.game] if args.player is None else args.player


def _transformation(args, n: int):
    sources = [args.shift is not None, args.reverse, args.transform is not None]
    if sum(sources) > 1:
        raise InputError("give only one of --shift, --reverse, --transform")
    if args.shift is not None:
        return cyclic_shift(args.shift, n)
    if args.reverse:
        return reversal(n)
    if args.transform is not None:
        return MatchingResult.load(args.transform).involution
    return None


def cmd_games(args) -> None:
    rows = []
    for gid in GAME_IDS:
        value = exact_shapley(gid, DEFAULT_PLAYER[gid])
        rows.append(
            {
                "game": gid,
                "n": FULL_SIZE[gid],
                "player": DEFAULT_PLAYER[gid],
                "exact_shapley": "unknown" if value is None else value,
            }
        )
    _emit(render(rows, ("game", "n", "player", "exact_shapley"), args.format), args.output)


def cmd_estimate(args) -> None:
    game = make_game(args.game, args.scale)
    player = _player(args)
    config = EstimatorConfig(
        game, player, args.method, args.m, m1=args.m1, K=args.K, transformation=_transformation(args, game.n)
    )
    report = config.run(args.seed)
    row = {
        "game": args.game,
        "player": player,
        "method": report.method,
        "m": report.m,
        "m1": report.m1,
        "m2": report.m2,
        "K": report.K,
        "seed": args.seed,
        "estimate": report.estimate,
        "std_error": report.std_error,
        "rho_hat": report.rho_hat,
        "ratio": report.predicted_ratio,
    }
    _emit(render([row], ESTIMATE_FIELDS, args.format), args.output)


def cmd_learn(args) -> None:
    game = make_game(args.game, args.scale)
    result = learn_transformation(game, _player(args), args.m1, args.seed)
    if args.output:
        result.save(args.output)
        print(f"rho_hat_learning={_cell(result.rho_hat_learning)}")
    else:
        sys.stdout.write(result.to_json() + "\n")
        print(f"rho_hat_learning={_cell(result.rho_hat_learning)}", file=sys.stderr)


def cmd_replicate(args) -> None:
    player = _player(args)
    game = make_game(args.game, args.scale)
    m1s = args.m1 if args.m1 else [None]
    settings = [Setting(m, m1) for m in args.m for m1 in m1s]
    rows = replication_table(
        args.game,
        player,
        args.method,
        settings,
        args.R,
        args.seed,
        scale=args.scale,
        K=args.K,
        transformation=_transformation(args, game.n),
        sigma_samples=args.sigma_samples,
        threads=args.threads,
    )
    _emit(render(rows, REPLICATE_FIELDS, args.format), args.output)


def cmd_sweep(args) -> None:
    players = [DEFAULT_PLAYER[g] for g in args.games]
    rows = correlation_sweep(
        args.games, players, args.m1, args.seeds, args.seed, pairs=args.pairs, scale=args.scale, threads=args.threads
    )
    if args.layout == "long":
        _emit(render(rows, SWEEP_FIELDS, args.format), args.output)
        return
    fields = ["game", "player"] + [f"m1={m1}" for m1 in args.m1]
    wide = {}
    for row in rows:
        out = wide.setdefault(row["game"], {"game": row["game"], "player": row["player"]})
        out[f"m1={row['m1']}"] = row["rho_hat"]
    _emit(render(list(wide.values()), fields, args.format), args.output)


def _common(p: argparse.ArgumentParser, game: bool = True) -> None:
    if game:
        p.add_argument("--game", required=True, choices=GAME_IDS)
        p.add_argument("--player", type=int, help="1-based player (default: the benchmark player)")
    p.add_argument("--scale", type=int, help="reduced player count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _transform_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--K", type=int, help="block length for ergodic sampling")
    p.add_argument("--shift", type=int, help="cyclic shift of positions as the transformation")
    p.add_argument("--reverse", action="store_true", help="mirror the order as the transformation")
    p.add_argument("--transform", help="learned transformation JSON as the transformation")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ergodic-shapley", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    games = sub.add_parser("games", help="list the benchmark games")
    games.add_argument("action", choices=("list",))
    games.add_argument("--format", choices=("csv", "json"), default="csv")
    games.add_argument("--output")
    games.set_defaults(func=cmd_games)

    est = sub.add_parser("estimate", help="run one estimate")
    _common(est)
    est.add_argument("--method", choices=("simple", "ergodic", "optk2"), required=True)
    est.add_argument("--m", type=int, required=True)
    est.add_argument("--m1", type=int)
    _transform_flags(est)
    est.set_defaults(func=cmd_estimate)

    learn = sub.add_parser("learn", help="learn a pairing transformation")
    _common(learn)
    learn.add_argument("--m1", type=int, required=True)
    learn.set_defaults(func=cmd_learn)

    rep = sub.add_parser("replicate", help="replication study (one row per setting)")
    _common(rep)
    rep.add_argument("--method", choices=("simple", "ergodic", "optk2"), default="optk2")
    rep.add_argument("--m", type=int, nargs="+", required=True)
    rep.add_argument("--m1", type=int, nargs="+")
    rep.add_argument("--R", type=int, default=100)
    rep.add_argument("--sigma-samples", type=int, default=200_000)
    rep.add_argument("--threads", type=int, default=None)
    _transform_flags(rep)
    rep.set_defaults(func=cmd_replicate)

    sweep = sub.add_parser("sweep", help="learned pair correlation per game and m1")
    _common(sweep, game=False)
    sweep.add_argument("--games", nargs="+", choices=GAME_IDS, default=list(GAME_IDS))
    sweep.add_argument("--m1", type=int, nargs="+", default=list(CORRELATION_GRID))
    sweep.add_argument("--seeds", type=int, default=20)
    sweep.add_argument("--pairs", type=int, default=20_000)
    sweep.add_argument("--threads", type=int, default=None)
    sweep.add_argument("--layout", choices=("wide", "long"), default="wide")
    sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", 0) is None:
        args.threads = default_threads()
    try:
        args.func(args)
    except (InputError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
