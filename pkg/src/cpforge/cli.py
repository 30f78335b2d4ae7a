"""Command-line entry point.

Subcommands mirror the pipeline stages:

    sample     draw a dataset of random segments
    cluster    cluster a dataset and write the report
    annotate   run the labeling loop (--oracle) or start the HTTP
               annotation service (--serve)
    train      fit the quality model from a labeled set
    gen-cps    generate-and-test a CP set with a trained model
    gen-level  assemble a level from a CP set under control bands
    adapt      run the adaptive difficulty loop with a simulated player
    validate   re-check the invariants of any artifact file

Exit codes: 0 success, 1 domain error (name and message on stderr),
2 usage error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import active, clustering, dda, levels, pipeline, sampler, validate
from .config import Config
from .errors import DomainError
from .quality import Hyper, load_model, save_model, train
from .segments import ControlParams


def _band(text: str) -> tuple[float, float]:
    try:
        lo, hi = text.split(":")
        band = (float(lo), float(hi))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}")
    if band[0] > band[1]:
        raise argparse.ArgumentTypeError(f"band lo > hi: {text!r}")
    return band


def _add_sampler_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gap-prob", type=float, default=None)
    p.add_argument("--max-gap", type=int, default=None)
    p.add_argument("--enemy-rate", type=float, default=None)
    p.add_argument("--coin-rate", type=float, default=None)
    p.add_argument("--pipe-prob", type=float, default=None)
    p.add_argument("--elev-step-prob", type=float, default=None)
    p.add_argument("--base-elev", type=int, default=None)


def _sampler_params(args, seed: int) -> sampler.SamplerParams:
    overrides = {
        "gap_prob": args.gap_prob,
        "max_gap": args.max_gap,
        "enemy_rate": args.enemy_rate,
        "coin_rate": args.coin_rate,
        "pipe_prob": args.pipe_prob,
        "elev_step_prob": args.elev_step_prob,
        "base_elev": args.base_elev,
    }
    kwargs = {k: v for k, v in overrides.items() if v is not None}
    return sampler.SamplerParams(seed=seed, **kwargs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cpforge",
        description="Learn quality segments for a tile platformer, "
        "assemble levels, and adapt difficulty to a player.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw a dataset of random segments")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_sampler_flags(p)

    p = sub.add_parser("cluster", help="cluster a dataset, write the report")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=None, help="fix k instead of selecting")
    p.add_argument("--k-min", type=int, default=clustering.DEFAULT_K_RANGE[0])
    p.add_argument("--k-max", type=int, default=clustering.DEFAULT_K_RANGE[1])

    p = sub.add_parser("annotate", help="label segments (oracle loop or HTTP service)")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--oracle", action="store_true")
    mode.add_argument("--serve", action="store_true")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--clusters", required=True)
    p.add_argument("--budget", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--holdout-frac", type=float, default=0.2)
    p.add_argument("--out", help="labeled-set file (oracle mode)")
    p.add_argument("--curve", help="learning-curve file (oracle mode)")
    p.add_argument("--model-out", help="also save the final model (oracle mode)")
    p.add_argument("--port", type=int, default=None, help="serve mode")
    p.add_argument("--ui-dir", default=None, help="serve mode: static console dir")
    p.add_argument("--out-dir", default=".", help="serve mode: artifact directory")

    p = sub.add_parser("train", help="fit the quality model from a labeled set")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--l2", type=float, default=Hyper.l2)
    p.add_argument("--lr", type=float, default=Hyper.lr)
    p.add_argument("--epochs", type=int, default=Hyper.epochs)

    p = sub.add_parser("gen-cps", help="generate-and-test a CP set")
    p.add_argument("--model", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--max-attempts", type=int, default=None)
    p.add_argument("--out", required=True)
    _add_sampler_flags(p)

    p = sub.add_parser("gen-level", help="assemble a level from a CP set")
    p.add_argument("--cps", required=True)
    p.add_argument("--length", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--enemy-density", type=_band, default=None, metavar="LO:HI")
    p.add_argument("--gap-frequency", type=_band, default=None, metavar="LO:HI")
    p.add_argument("--difficulty", type=_band, default=None, metavar="LO:HI")
    p.add_argument("--out", required=True)

    p = sub.add_parser("adapt", help="adaptive difficulty against a simulated player")
    p.add_argument("--cps", required=True)
    p.add_argument("--player", type=float, required=True, help="skill in [0,1]")
    p.add_argument("--episodes", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--persistence", type=int, default=3)
    p.add_argument("--out", required=True, help="trace CSV")
    p.add_argument("--summary", default=None, help="tail-statistics JSON")
    p.add_argument("--tail", type=int, default=100)

    p = sub.add_parser("validate", help="re-check the invariants of an artifact")
    p.add_argument("path")
    p.add_argument("--model", default=None, help="re-verify probabilities against it")

    return parser


def _cmd_sample(args) -> int:
    records = sampler.sample_dataset(args.count, _sampler_params(args, args.seed))
    sampler.write_dataset(records, args.out)
    print(f"wrote {len(records)} segments to {args.out}")
    return 0


def _cmd_cluster(args) -> int:
    from .config import require_file

    records = sampler.read_dataset(require_file(args.infile))
    X_raw = np.array([r.features.to_vector() for r in records])
    std = clustering.Standardization.fit(X_raw)
    X = std.apply(X_raw)
    if args.k is not None:
        assignments, centroids = clustering.kmeans(X, args.k, args.seed)
        result = clustering.ClusterResult(
            k=args.k,
            assignments=assignments,
            centroids=centroids,
            medoid_ids=clustering.medoids(X, assignments),
            silhouette=clustering.silhouette(X, assignments),
        )
    else:
        result = clustering.select_k(X, (args.k_min, args.k_max), args.seed)
    clustering.write_cluster_report(result, args.out)
    print(f"k={result.k} silhouette={result.silhouette:.4f} -> {args.out}")
    return 0


def _cmd_annotate(args) -> int:
    from .config import require_file

    if args.serve:
        from .server import serve_annotation

        config = Config(
            dataset_path=str(require_file(args.infile)),
            clusters_path=str(require_file(args.clusters)),
            out_dir=args.out_dir,
            ui_dir=args.ui_dir,
            budget=args.budget,
            seed=args.seed,
            holdout_frac=args.holdout_frac,
        )
        server = serve_annotation(config, port=args.port)
        host, port = server.server_address
        print(f"annotation service on http://{host}:{port} (Ctrl-C stops)")
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            server.shutdown()
        return 0

    records = sampler.read_dataset(require_file(args.infile))
    report = clustering.read_cluster_report(require_file(args.clusters))
    model, curve, session = active.run_with_oracle(
        records,
        [int(i) for i in report["medoid_ids"]],
        budget=args.budget,
        seed=args.seed,
        holdout_frac=args.holdout_frac,
    )
    if args.out:
        active.write_labeled_set(session, args.out, source="oracle")
    if args.curve:
        active.write_curve(curve, args.curve)
    if args.model_out:
        save_model(model, args.model_out)
    print(
        f"labeled {session.queries_made} segments, "
        f"holdout accuracy {session.holdout_accuracy:.4f}"
    )
    return 0


def _cmd_train(args) -> int:
    from .config import require_file

    labeled = active.read_labeled_set(require_file(args.infile))
    model = train(
        [(rec.features, label) for rec, label in labeled],
        Hyper(l2=args.l2, lr=args.lr, epochs=args.epochs),
    )
    save_model(model, args.out)
    print(f"trained on {len(labeled)} examples -> {args.out}")
    return 0


def _cmd_gen_cps(args) -> int:
    from .config import require_file

    model = load_model(require_file(args.model))
    cpset = pipeline.generate_cps(
        model,
        args.count,
        _sampler_params(args, args.seed),
        theta=args.theta,
        max_attempts=args.max_attempts,
    )
    pipeline.write_cpset(cpset, args.out)
    rate = cpset.stats["acceptance_rate"]
    print(f"kept {len(cpset.cps)} CPs (acceptance {rate:.3f}) -> {args.out}")
    return 0


def _cmd_gen_level(args) -> int:
    from .config import require_file

    cpset = pipeline.read_cpset(require_file(args.cps))
    control = ControlParams(
        enemy_density_band=args.enemy_density,
        gap_frequency_band=args.gap_frequency,
        difficulty_band=args.difficulty,
    )
    level = levels.generate_level(cpset, args.length, control, seed=args.seed)
    levels.write_level(level, args.out)
    print(f"assembled {args.length} segments -> {args.out}")
    return 0


def _cmd_adapt(args) -> int:
    from .config import require_file

    cpset = pipeline.read_cpset(require_file(args.cps))
    player = dda.PlayerSim(
        skill=args.player, persistence=args.persistence, seed=args.seed
    )
    trace = dda.run_adaptive(cpset, player, args.episodes, seed=args.seed)
    dda.write_trace(trace, args.out)
    tail = min(args.tail, len(trace))
    summary = dda.tail_summary(trace, tail)
    if args.summary:
        dda.write_summary(summary, args.summary)
    print(
        f"{args.episodes} episodes; tail-{tail} mean perf "
        f"{summary['tail_mean_perf']:.3f}, mean difficulty "
        f"{summary['tail_mean_difficulty']:.3f} -> {args.out}"
    )
    return 0


def _cmd_validate(args) -> int:
    problems, kind = validate.validate_path(args.path, args.model)
    if problems:
        for problem in problems:
            print(f"{args.path}: {problem}", file=sys.stderr)
        print(f"{kind} file has {len(problems)} violation(s)", file=sys.stderr)
        return 1
    print(f"{args.path}: clean {kind} file")
    return 0


_COMMANDS = {
    "sample": _cmd_sample,
    "cluster": _cmd_cluster,
    "annotate": _cmd_annotate,
    "train": _cmd_train,
    "gen-cps": _cmd_gen_cps,
    "gen-level": _cmd_gen_level,
    "adapt": _cmd_adapt,
    "validate": _cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except DomainError as exc:
        print(f"{exc.name}: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"FileNotFound: {exc.filename}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"ValueError: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
