"""Command-line surface.

One binary with subcommands: collect | condense | fit | predict | evaluate |
suite | visualize. Every command is deterministic given its flags and seed;
all randomness flows from explicit seeds, with the BCMER_SEED environment
variable supplying the default when --seed is omitted. Exit status is 0
exactly when the requested artifact was fully written.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import condensation
from . import evaluate as evaluate_mod
from . import neighbors, trees, viz
from .envs import ENV_NAMES, make_env
from .errors import NearboundError
from .evaluate import RunConfig
from .experience import ExperiencePool, read_pool, write_pool
from .teachers import collect
from .trees import TREE_HEADER

SEED_ENV_VAR = "BCMER_SEED"


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None


def _add_seed(parser):
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help=f"random seed (default: ${SEED_ENV_VAR} or 0)",
    )


def _seed_of(args) -> int:
    return args.seed if args.seed is not None else default_seed()


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_collect(args) -> int:
    teacher = evaluate_mod.resolve_teacher(args.teacher, args.env, _seed_of(args))
    try:
        env = make_env(args.env)
        pool, stats = collect(env, teacher, args.n, seed=_seed_of(args))
    finally:
        close = getattr(teacher, "close", None)
        if close is not None:
            close()
    write_pool(pool, args.out)
    print(f"collected {stats.raw_count} raw pairs, {stats.deduped_count} after dedup")
    print(f"wrote {args.out}")
    return 0


def _minmax_scaled(pool: ExperiencePool) -> ExperiencePool:
    lo = pool.states.min(axis=0)
    hi = pool.states.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return ExperiencePool(
        pool.dim, pool.action_count, (pool.states - lo) / span, pool.actions
    )


def cmd_condense(args) -> int:
    pool = read_pool(args.pool)
    pool.require_nonempty("input pool")
    if np.unique(pool.actions).size < 2:
        print(
            "warning: pool has a single action; no point has an enemy, "
            "everything is retained",
            file=sys.stderr,
        )
    metric_pool = _minmax_scaled(pool) if args.scale else pool
    _, result = condensation.condense(metric_pool)
    retained = pool.take(list(result.boundary_indices))
    write_pool(retained, args.out_pool)
    condensation.write_condensation(result, args.out_result)
    print(
        f"retained {len(result.boundary_indices)} of {result.total} points "
        f"(fraction {result.retained_fraction:.4f})"
    )
    print(f"wrote {args.out_pool} and {args.out_result}")
    return 0


def cmd_fit(args) -> int:
    pool = read_pool(args.pool)
    if args.tree is not None:
        criterion, _, depth = args.tree.partition(":")
        model = trees.fit_tree(pool, criterion, int(depth))
        trees.write_tree(model, args.out)
        print(f"fit {criterion} tree, depth {model.depth()}, {model.n_nodes()} nodes")
    else:
        model = neighbors.fit(pool, args.backend)
        neighbors.write_model(model, args.out)
        print(f"fit nearest-boundary model, backend {args.backend}, {len(pool)} points")
    print(f"wrote {args.out}")
    return 0


def _sniff_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
    if first.startswith(TREE_HEADER):
        return trees.read_tree(path)
    return neighbors.read_model(path)


def cmd_predict(args) -> int:
    model = _sniff_model(args.model)
    state = np.array([float(v) for v in args.state.split(",")], dtype=np.float64)
    if isinstance(model, trees.DecisionTreeModel):
        print(f"action {trees.predict_tree(model, state)}")
    else:
        action, expl = neighbors.predict(model, state)
        support = model.pool.states[expl.nearest_index]
        print(f"action {action}")
        print(
            f"nearest experience: index {expl.nearest_index}, state "
            f"({', '.join(repr(float(v)) for v in support)}), "
            f"distance {expl.nearest_distance!r}"
        )
    return 0


def cmd_evaluate(args) -> int:
    seed = _seed_of(args)
    teacher = evaluate_mod.resolve_teacher(args.teacher, args.env, seed)
    try:
        student = teacher if args.student == "self" else _sniff_model(args.student)
        env = make_env(args.env)
        report, _ = evaluate_mod.similarity_eval(
            teacher, student, env, args.episodes, seed
        )
        t_ret, _ = evaluate_mod.rollout_return(
            teacher, make_env(args.env), args.episodes, seed
        )
        s_ret, _ = evaluate_mod.rollout_return(
            student, make_env(args.env), args.episodes, seed
        )
    finally:
        close = getattr(teacher, "close", None)
        if close is not None:
            close()
    lines = [
        f"env={args.env} episodes={args.episodes} seed={seed}",
        f"decisions={report.n_decisions}",
        f"acc={report.acc!r}",
        f"mae={report.mae!r}",
        f"rmsd={report.rmsd!r}",
        f"teacher_return={t_ret!r}",
        f"student_return={s_ret!r}",
    ]
    print("\n".join(lines))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("#evaluation\n" + "\n".join(lines) + "\n")
        print(f"wrote {args.out}")
    return 0


def _parse_config_file(path) -> dict:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    known = {"envs", "sizes", "teacher", "backends", "baselines", "seeds", "episodes", "outdir"}
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return values


def _build_run_config(args) -> RunConfig:
    config = RunConfig()
    if args.config:
        raw = _parse_config_file(args.config)
        if "envs" in raw:
            config.envs = [e.strip() for e in raw["envs"].split(",")]
        if "sizes" in raw:
            config.sizes = [int(s) for s in raw["sizes"].split(",")]
        if "teacher" in raw:
            config.teacher = raw["teacher"]
        if "backends" in raw:
            config.backends = [b.strip() for b in raw["backends"].split(",")]
        if "baselines" in raw:
            config.baselines = [b.strip() for b in raw["baselines"].split(",")]
        if "seeds" in raw:
            config.seeds = [int(s) for s in raw["seeds"].split(",")]
        if "episodes" in raw:
            config.episodes = int(raw["episodes"])
        if "outdir" in raw:
            config.outdir = raw["outdir"]
    if args.envs:
        config.envs = [e.strip() for e in args.envs.split(",")]
    if args.sizes:
        config.sizes = [int(s) for s in args.sizes.split(",")]
    if args.teacher:
        config.teacher = args.teacher
    if args.seed is not None:
        config.seeds = [args.seed]
    if args.episodes is not None:
        config.episodes = args.episodes
    if args.outdir:
        config.outdir = args.outdir
    for short in config.backends:
        if short not in evaluate_mod.PROPOSAL_MODELS:
            raise ValueError(f"unknown backend {short!r}")
    for name in config.baselines:
        if name not in evaluate_mod.BASELINE_MODELS:
            raise ValueError(f"unknown baseline {name!r}")
    return config


def cmd_suite(args) -> int:
    config = _build_run_config(args)
    os.makedirs(config.outdir, exist_ok=True)
    reports = evaluate_mod.run_experiment_suite(config)
    csv_path = os.path.join(config.outdir, "report.csv")
    evaluate_mod.write_csv_report(reports, csv_path)
    evaluate_mod.write_summary(reports, os.path.join(config.outdir, "summary.txt"))
    from .figures import render_report_figures

    figure_paths = render_report_figures(reports, config.outdir)
    n_err = sum(1 for r in reports if r.error is not None)
    print(f"wrote {csv_path} ({len(reports)} rows, {n_err} failed cells)")
    for p in figure_paths:
        print(f"wrote {p}")
    return 0


def cmd_visualize(args) -> int:
    wrote_any = False
    if args.out_scatter:
        if not args.pool:
            raise ValueError("--out-scatter requires --pool")
        pool = read_pool(args.pool)
        result = (
            condensation.read_condensation(args.condensation)
            if args.condensation
            else None
        )
        viz.scatter_svg(pool, args.out_scatter, condensation=result, title=args.title)
        print(f"wrote {args.out_scatter}")
        wrote_any = True
    if args.out_region:
        if not args.model:
            raise ValueError("--out-region requires --model")
        model = neighbors.read_model(args.model)
        bounds = None
        if args.bounds:
            parts = [float(v) for v in args.bounds.split(",")]
            if len(parts) != 4:
                raise ValueError("--bounds needs x_min,x_max,y_min,y_max")
            bounds = tuple(parts)
        width, _, height = (args.grid or "400x400").partition("x")
        viz.region_ppm(
            model, args.out_region, bounds=bounds, width=int(width), height=int(height)
        )
        print(f"wrote {args.out_region}")
        wrote_any = True
    if not wrote_any:
        raise ValueError("nothing to do: pass --out-scatter and/or --out-region")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nearbound",
        description=(
            "Collect teacher experience, condense it to boundary points, fit "
            "nearest-boundary students and tree baselines, and evaluate them."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("collect", help="record teacher experience into a pool file")
    p.add_argument("--env", required=True, choices=ENV_NAMES)
    p.add_argument("--teacher", default="scripted",
                   help="scripted | qlearn[:k=v,...] | external:<command>")
    p.add_argument("--n", type=int, required=True, help="raw pairs to record")
    p.add_argument("--out", required=True)
    _add_seed(p)
    p.set_defaults(func=cmd_collect)

    p = sub.add_parser("condense", help="keep only the boundary points of a pool")
    p.add_argument("--pool", required=True)
    p.add_argument("--out-pool", required=True)
    p.add_argument("--out-result", required=True)
    p.add_argument("--scale", action="store_true",
                   help="min-max scale each state dimension for the distance test")
    p.set_defaults(func=cmd_condense)

    p = sub.add_parser("fit", help="fit a student model from a pool file")
    p.add_argument("--pool", required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--backend", choices=neighbors.BACKENDS, default="brute")
    group.add_argument("--tree", metavar="CRITERION:DEPTH",
                       help="fit a decision tree instead, e.g. gini:5")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="query a fitted model")
    p.add_argument("--model", required=True)
    p.add_argument("--state", required=True, help="comma-separated coordinates")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="similarity and returns of a student vs teacher")
    p.add_argument("--env", required=True, choices=ENV_NAMES)
    p.add_argument("--teacher", default="scripted")
    p.add_argument("--student", required=True, help="model file, or 'self'")
    p.add_argument("--episodes", type=int, default=200)
    p.add_argument("--out", default=None)
    _add_seed(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("suite", help="run the full experiment grid")
    p.add_argument("--config", default=None, help="key=value config file")
    p.add_argument("--envs", default=None)
    p.add_argument("--sizes", default=None)
    p.add_argument("--teacher", default=None)
    p.add_argument("--episodes", type=int, default=None)
    p.add_argument("--outdir", default=None)
    _add_seed(p)
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("visualize", help="emit scatter SVG and/or region raster")
    p.add_argument("--pool", default=None)
    p.add_argument("--condensation", default=None)
    p.add_argument("--out-scatter", default=None)
    p.add_argument("--model", default=None)
    p.add_argument("--out-region", default=None)
    p.add_argument("--bounds", default=None, help="x_min,x_max,y_min,y_max")
    p.add_argument("--grid", default=None, help="WxH cells, default 400x400")
    p.add_argument("--title", default=None)
    p.set_defaults(func=cmd_visualize)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (NearboundError, NameError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
