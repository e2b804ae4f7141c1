"""Reproducible experiment driver.

Subcommands::

    params show                       evaluate and print a parameter ladder
    feas run                          memory-metered solver vs hard instance
    game probing|osg|osg-simple|kernel|depth|rand-feas|adapted-osg
    rmt sweep                         smallest-singular-value band sweep
    conc suite                        scalar concentration Monte-Carlo suite

One master seed per invocation (flag ``--seed``, falling back to the
ORACLE_ARENA_SEED environment variable, then 0); per-trial streams are derived
from (master, trial index, experiment tag), so trial-level parallelism with
``--jobs`` does not change any emitted value.  Every row of every result file
embeds the resolved configuration and tool version in its ``extra_json``
column; ``wall_ms`` is excluded from reproducibility guarantees.

Exit codes: 0 success, 1 runtime failure, 2 configuration error (the violated
assumption is named on stderr).
"""

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .games import (
    run_adapted_osg,
    run_depth_p_feasibility_game,
    run_kernel_discovery,
    run_orthogonal_subspace_game,
    run_probing_game,
    run_randomized_feasibility_game,
    run_simplified_osg,
)
from .oracle_det import DetOracle, InscribedBallError
from .oracle_rand import RandOracle
from .params import (
    AssumptionViolation,
    deterministic_params,
    randomized_params,
    validate,
)
from .players import (
    ComplementKernelPlayer,
    EncodeComplementOSGPlayer,
    FullInfoDepthCheater,
    FullInfoRandFeasCheater,
    GreedyOrthogonalProbingPlayer,
    NullDepthPlayer,
    RandomOSGPlayer,
    RandomProbingPlayer,
    RandomRandFeasPlayer,
    UniformSphereKernelPlayer,
)
from .rmt import TriangularEnsembleSpec, concentration_suite, tail_experiment
from .solvers import ellipsoid_solver, run_feasibility, subgradient_solver
from .streams import child_seed, stream

CSV_HEADER = ["trial", "seed", "kind", "d", "P", "k", "alpha", "mode", "M_bits",
              "solver_or_player", "queries", "success", "wall_ms", "extra_json"]


class ConfigError(ValueError):
    pass


def emit_results(rows, path):
    """Append rows to the CSV at ``path`` (header written once), trial order."""
    rows = sorted(rows, key=lambda r: r["trial"])
    fresh = not (os.path.exists(path) and os.path.getsize(path) > 0)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_HEADER)
        if fresh:
            writer.writeheader()
        for row in rows:
            missing = set(CSV_HEADER) - set(row)
            if missing:
                raise ConfigError(f"row missing fields {sorted(missing)}")
            writer.writerow(row)


def _row(trial, seed, kind, config, *, queries=0, success="", player="-",
         wall_ms=0.0, extra=None):
    extra = dict(extra or {})
    # jobs is execution machinery (like wall_ms): not part of the replay surface
    extra["config"] = {k: v for k, v in config.items() if k != "jobs"}
    extra["version"] = __version__
    return {
        "trial": trial, "seed": seed, "kind": kind,
        "d": config.get("d", 0), "P": config.get("P", 0),
        "k": config.get("k", 0), "alpha": config.get("alpha", 0.0),
        "mode": config.get("mode", "-"), "M_bits": config.get("M_bits", 0),
        "solver_or_player": player, "queries": queries, "success": success,
        "wall_ms": round(wall_ms, 3),
        "extra_json": json.dumps(extra, sort_keys=True),
    }


def _resolve_params(config):
    """Build the parameter ladder a config describes (det or rand family)."""
    family = config.get("oracle", "det")
    mode = config["mode"]
    overrides = None
    if mode == "lab":
        overrides = {}
        if config.get("l") is not None:
            overrides["l"] = config["l"]
        if config.get("lP") is not None:
            overrides["l_P"] = config["lP"]
        if family == "det" and config.get("eps") is not None:
            # lab ladder anchored at the requested accuracy: delta_1 = 2 eps
            overrides.setdefault("l", 2)
            overrides.setdefault("l_P", overrides["l"])
            overrides["delta"] = [2.0 * config["eps"] * 10.0 ** (p - 1)
                                  for p in range(1, config["P"] + 1)]
    if family == "det":
        return deterministic_params(
            config["d"], config["P"], config["k"], alpha=config["alpha"],
            l_P=config.get("lP"), mode=mode, overrides=overrides)
    return randomized_params(
        config["d"], config["P"], config["k"], l_P=config.get("lP"),
        constants={"C": config.get("C_rand", 1.0)}, mode=mode,
        overrides=overrides)


# -- trial workers (top-level: picklable for --jobs) --------------------------


def _feas_trial(payload):
    config, trial = payload
    seed = child_seed(config["seed"], trial, "feas")
    params = _resolve_params(config)
    if config.get("oracle", "det") == "det":
        oracle = DetOracle(params, seed, record_events=False)
    else:
        oracle = RandOracle(params, seed, record_events=False)
    d = config["d"]
    eps = config.get("eps") or params.eps
    if config["solver"] == "subgradient":
        radius = min(params.delta[0] if config.get("oracle", "det") == "det"
                     else params.delta[0][0], 1.0 / 40.0) / 2.0
        # classical no-knowledge schedule; exhibits the many-queries corner
        alg = subgradient_solver(d, lambda t: 2.0 / math.sqrt(t))
        t_max = config.get("tmax") or int(math.ceil(6.0 / radius ** 2))
    elif config["solver"] == "ellipsoid":
        alg = ellipsoid_solver(d)
        radius = min(params.delta[0] if config.get("oracle", "det") == "det"
                     else params.delta[0][0], 1.0 / 40.0) / 2.0
        t_max = config.get("tmax") or int(math.ceil(8.0 * d * d * math.log(1.0 / radius)))
    else:
        raise ConfigError(f"unknown solver {config['solver']!r}")
    rng = stream(seed, "feas", "alg")
    t0 = time.perf_counter()
    try:
        trace = run_feasibility(oracle, alg, t_max, rng)
    except InscribedBallError as err:
        return _row(trial, seed, "feas", config, player=alg.name,
                    success="discarded", extra={"error": str(err)})
    wall = (time.perf_counter() - t0) * 1e3
    extra = {"max_memory_bits": trace.max_memory_bits,
             "depth_hist": {str(k): v for k, v in trace.depth_hist.items()},
             "eps": eps,
             "params": json.loads(params.to_json()),
             "proper_flag_rates": oracle.proper_flag_rates()
             if hasattr(oracle, "proper_flag_rates") else None}
    if hasattr(oracle, "leak_rate"):
        extra["leak_rate"] = oracle.leak_rate()
    return _row(trial, seed, "feas", config, queries=trace.queries,
                success=str(trace.success).lower(), player=alg.name,
                wall_ms=wall, extra=extra)


def _game_trial(payload):
    config, trial = payload
    game = config["game"]
    seed = child_seed(config["seed"], trial, "game", game)
    rng = stream(seed, "game")
    prng = stream(seed, "player")
    d = config["d"]
    player = config["player"]
    t0 = time.perf_counter()
    if game == "probing":
        strategies = {
            "random": RandomProbingPlayer(d, prng),
            "greedy": GreedyOrthogonalProbingPlayer(d, prng),
        }
        transcript = run_probing_game(strategies[player], d, config["l"],
                                      config["k"], config["rho"], rng)
    elif game in ("osg", "osg-simple", "adapted-osg"):
        if player == "encode":
            strategy = EncodeComplementOSGPlayer(d, config["dtilde"], config["k"])
        else:
            strategy = RandomOSGPlayer(d, config["k"], prng)
        if game == "osg":
            transcript = run_orthogonal_subspace_game(
                strategy, d, config["dtilde"], config["M_bits"], config["k"],
                config["m"], config["beta"], config["gamma"], rng)
        elif game == "osg-simple":
            transcript = run_simplified_osg(
                strategy, d, config["dtilde"], config["M_bits"], config["k"],
                config["beta"], config["gamma"], rng)
        else:
            transcript = run_adapted_osg(
                strategy, d, config["dtilde"], config["M_bits"], config["k"],
                config["m"], config["beta"], config["gamma"], config["J"], rng)
    elif game == "kernel":
        strategies = {
            "complement": ComplementKernelPlayer(d, prng),
            "uniform": UniformSphereKernelPlayer(d, prng),
        }
        transcript = run_kernel_discovery(strategies[player], d,
                                          config["dtilde"], config["m"], rng)
    elif game == "depth":
        params = _resolve_params(config)
        strategies = {
            "fullinfo": FullInfoDepthCheater(params, prng, m_bits=config["M_bits"]),
            "random": NullDepthPlayer(params, prng, m_bits=config["M_bits"]),
        }
        transcript = run_depth_p_feasibility_game(
            strategies[player], params, config["p"], config["tmax"], rng)
    elif game == "rand-feas":
        params = _resolve_params(config)
        strategies = {
            "fullinfo": FullInfoRandFeasCheater(params, prng, m_bits=config["M_bits"]),
            "random": RandomRandFeasPlayer(params, prng, m_bits=config["M_bits"]),
        }
        transcript = run_randomized_feasibility_game(
            strategies[player], params, config["J"], rng)
    else:
        raise ConfigError(f"unknown game {game!r}")
    wall = (time.perf_counter() - t0) * 1e3
    diag = {k: v for k, v in transcript.diagnostics.items()
            if isinstance(v, (int, float, str, bool, list))}
    extra = {"diagnostics": diag}
    if game in ("depth", "rand-feas"):
        extra["params"] = json.loads(params.to_json())
    return _row(trial, seed, f"game-{game}", config,
                queries=len(transcript.steps),
                success=str(transcript.verdict).lower(), player=player,
                wall_ms=wall, extra=extra)


def _rmt_trial(payload):
    config, trial = payload
    C = config["C_list"][trial % len(config["C_list"])]
    rep = trial // len(config["C_list"])
    seed = child_seed(config["seed"], "rmt", C, rep)
    rng = stream(seed, "rmt")
    spec = TriangularEnsembleSpec(n=config["n"], C=C, alpha=config["alpha"])
    t0 = time.perf_counter()
    report = tail_experiment(spec, 1, rng)
    wall = (time.perf_counter() - t0) * 1e3
    extra = {"n": config["n"], "C": C, "sigma_min": report.min_sigma,
             "threshold": report.threshold,
             "below_flag": bool(report.min_sigma < report.threshold)}
    return _row(trial, seed, "rmt", config, queries=1,
                success=str(not extra["below_flag"]).lower(),
                wall_ms=wall, extra=extra)


def _conc_trial(payload):
    config, trial = payload
    seed = child_seed(config["seed"], trial, "conc")
    rng = stream(seed, "conc")
    t0 = time.perf_counter()
    report = concentration_suite(config["d"], config["r"], config["s"],
                                 config["t_grid"], config["trials_inner"], rng)
    wall = (time.perf_counter() - t0) * 1e3
    return _row(trial, seed, "conc", config, queries=config["trials_inner"],
                success=str(report["all_ok"]).lower(), wall_ms=wall,
                extra={"report": {k: v for k, v in report.items() if k != "all_ok"}})


_WORKERS = {"feas": _feas_trial, "game": _game_trial, "rmt": _rmt_trial,
            "conc": _conc_trial}


def _fan_out(worker_key, config, n_trials, jobs):
    payloads = [(config, t) for t in range(n_trials)]
    worker = _WORKERS[worker_key]
    if jobs <= 1:
        return [worker(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, payloads))


# -- argument plumbing ---------------------------------------------------------


def _add_common(parser):
    parser.add_argument("--d", type=int, default=80)
    parser.add_argument("--P", type=int, default=2)
    parser.add_argument("--k", type=int, default=3)
    parser.add_argument("--alpha", type=float, default=1.0)
    parser.add_argument("--lP", type=int, default=None)
    parser.add_argument("--l", type=int, default=None)
    parser.add_argument("--M-bits", dest="M_bits", type=int, default=0)
    parser.add_argument("--solver", choices=["subgradient", "ellipsoid"],
                        default="ellipsoid")
    parser.add_argument("--eps", type=float, default=None)
    parser.add_argument("--trials", type=int, default=1)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--mode", choices=["strict", "lab"], default="lab")
    parser.add_argument("--out", type=str, default=None)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--oracle", choices=["det", "rand"], default="det")
    parser.add_argument("--tmax", type=int, default=None)
    parser.add_argument("--C-rand", dest="C_rand", type=float, default=1.0)
    parser.add_argument("--config", type=str, default=None,
                        help="JSON config file; explicit flags take precedence")
    parser.add_argument("--dump-config", dest="dump_config", type=str,
                        default=None, help="write the resolved config as JSON")


def build_parser():
    parser = argparse.ArgumentParser(prog="oracle-arena", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_params = sub.add_parser("params", help="parameter ladders")
    sp = p_params.add_subparsers(dest="subcommand", required=True)
    p_show = sp.add_parser("show", help="evaluate and print a ladder as JSON")
    _add_common(p_show)
    p_show.add_argument("--family", choices=["det", "rand"], default="det")

    p_feas = sub.add_parser("feas", help="feasibility runs")
    spf = p_feas.add_subparsers(dest="subcommand", required=True)
    p_run = spf.add_parser("run", help="drive a solver against a hard instance")
    _add_common(p_run)

    p_game = sub.add_parser("game", help="analysis games")
    spg = p_game.add_subparsers(dest="subcommand", required=True)
    for name in ["probing", "osg", "osg-simple", "kernel", "depth",
                 "rand-feas", "adapted-osg"]:
        g = spg.add_parser(name)
        _add_common(g)
        g.add_argument("--player", type=str, default=None)
        g.add_argument("--dtilde", type=int, default=None)
        g.add_argument("--m", type=int, default=0)
        g.add_argument("--rho", type=float, default=None)
        g.add_argument("--beta", type=float, default=None)
        g.add_argument("--gamma", type=float, default=None)
        g.add_argument("--J", type=int, default=1)
        g.add_argument("--p", type=int, default=None)

    p_rmt = sub.add_parser("rmt", help="random-matrix experiments")
    spr = p_rmt.add_subparsers(dest="subcommand", required=True)
    p_sweep = spr.add_parser("sweep", help="smallest-singular-value band sweep")
    _add_common(p_sweep)
    p_sweep.add_argument("--n", type=int, default=50)
    p_sweep.add_argument("--C-list", dest="C_list", type=str, default="4,8,16,32,64")

    p_conc = sub.add_parser("conc", help="concentration suites")
    spc = p_conc.add_subparsers(dest="subcommand", required=True)
    p_suite = spc.add_parser("suite")
    _add_common(p_suite)
    p_suite.add_argument("--r", type=int, default=50)
    p_suite.add_argument("--s", type=int, default=5)
    p_suite.add_argument("--t-grid", dest="t_grid", type=str, default="0.25,0.5,1.0")
    p_suite.add_argument("--trials-inner", dest="trials_inner", type=int, default=10000)

    return parser


def _resolve_seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("ORACLE_ARENA_SEED")
    return int(env) if env else 0


def _config_from(args, **extras):
    config = {
        "d": args.d, "P": args.P, "k": args.k, "alpha": args.alpha,
        "lP": args.lP, "l": args.l, "M_bits": args.M_bits,
        "solver": args.solver, "eps": args.eps, "trials": args.trials,
        "seed": _resolve_seed(args), "mode": args.mode, "jobs": args.jobs,
        "oracle": args.oracle, "tmax": args.tmax, "C_rand": args.C_rand,
    }
    config.update(extras)
    if getattr(args, "config", None):
        with open(args.config) as fh:
            loaded = json.load(fh)
        unknown = set(loaded) - set(config)
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        # file values fill in wherever the flag was left at its default
        defaults = _config_from_defaults(extras)
        for key, value in loaded.items():
            if config.get(key) == defaults.get(key):
                config[key] = value
    if getattr(args, "dump_config", None):
        with open(args.dump_config, "w") as fh:
            json.dump({k: v for k, v in config.items() if k != "jobs"},
                      fh, indent=2, sort_keys=True)
    return config


def _config_from_defaults(extras):
    parser = argparse.ArgumentParser()
    _add_common(parser)
    args = parser.parse_args([])
    base = {
        "d": args.d, "P": args.P, "k": args.k, "alpha": args.alpha,
        "lP": args.lP, "l": args.l, "M_bits": args.M_bits,
        "solver": args.solver, "eps": args.eps, "trials": args.trials,
        "seed": 0, "mode": args.mode, "jobs": args.jobs,
        "oracle": args.oracle, "tmax": args.tmax, "C_rand": args.C_rand,
    }
    base.update(extras)
    return base


_GAME_DEFAULTS = {
    "probing": {"player": "greedy"},
    "osg": {"player": "random"},
    "osg-simple": {"player": "random"},
    "adapted-osg": {"player": "random"},
    "kernel": {"player": "complement"},
    "depth": {"player": "fullinfo"},
    "rand-feas": {"player": "fullinfo"},
}


def run_command(args):
    if args.command == "params":
        config = _config_from(args)
        config["oracle"] = "det" if args.family == "det" else "rand"
        params = _resolve_params(config)
        warnings = validate(params)
        doc = json.loads(params.to_json())
        doc["warnings"] = warnings
        print(json.dumps(doc, indent=2, sort_keys=True))
        return 0

    if args.command == "feas":
        config = _config_from(args)
        _resolve_params(config)  # fail fast on bad configs
        rows = _fan_out("feas", config, args.trials, args.jobs)
        if args.out:
            emit_results(rows, args.out)
        done = sum(1 for r in rows if r["success"] == "true")
        print(f"feas run: {done}/{len(rows)} successful; "
              f"queries {[r['queries'] for r in rows[:10]]}")
        return 0

    if args.command == "game":
        game = args.subcommand
        config = _config_from(args, game=game)
        config["player"] = args.player or _GAME_DEFAULTS[game]["player"]
        config["dtilde"] = args.dtilde or max(1, args.d // (2 * args.P))
        config["m"] = args.m
        config["J"] = args.J
        config["p"] = args.p or args.P
        config["tmax"] = args.tmax or 4 * args.k
        if game == "probing":
            config["l"] = args.l or 9
            config["rho"] = args.rho if args.rho is not None else 0.00442
        if game in ("osg", "osg-simple", "adapted-osg"):
            config["beta"] = args.beta if args.beta is not None else 0.01
            config["gamma"] = args.gamma if args.gamma is not None else 0.9
        rows = _fan_out("game", config, args.trials, args.jobs)
        if args.out:
            emit_results(rows, args.out)
        wins = sum(1 for r in rows if r["success"] == "true")
        print(f"game {game}: {wins}/{len(rows)} wins (player={config['player']})")
        return 0

    if args.command == "rmt":
        c_list = [int(v) for v in args.C_list.split(",") if v]
        config = _config_from(args, n=args.n, C_list=c_list)
        n_rows = args.trials * len(c_list)
        rows = _fan_out("rmt", config, n_rows, args.jobs)
        if args.out:
            emit_results(rows, args.out)
        by_c = {}
        for row in rows:
            extra = json.loads(row["extra_json"])
            by_c.setdefault(extra["C"], []).append(extra["sigma_min"])
        for C in sorted(by_c):
            print(f"rmt sweep: C={C:4d} min sigma_1 = {min(by_c[C]):.5f} "
                  f"over {len(by_c[C])} trials")
        return 0

    if args.command == "conc":
        t_grid = [float(v) for v in args.t_grid.split(",") if v]
        config = _config_from(args, r=args.r, s=args.s, t_grid=t_grid,
                              trials_inner=args.trials_inner)
        rows = _fan_out("conc", config, args.trials, args.jobs)
        if args.out:
            emit_results(rows, args.out)
        ok = sum(1 for r in rows if r["success"] == "true")
        print(f"conc suite: {ok}/{len(rows)} suites within bounds")
        return 0

    raise ConfigError(f"unknown command {args.command!r}")


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:   # argparse exits 2 on usage errors already
        return exc.code
    try:
        return run_command(args)
    except (AssumptionViolation, ConfigError, ValueError) as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {type(err).__name__}: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
