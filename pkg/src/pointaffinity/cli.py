"""Command-line interface wrapping every pipeline.

Every run logs its resolved seed and configuration; reruns with identical
flags produce byte-identical delimited outputs.  Exit codes: 0 success,
2 usage error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .csvio import (
    read_affinity_csv,
    read_labels_csv,
    read_points_csv,
    read_weights_csv,
    write_affinity_csv,
    write_labels_csv,
    write_points_csv,
    write_report_csv,
)
from .data import ClusterModel, Dataset, Partition
from .embeddings import embed, fit_fourier_embedding, fit_span_projection, project_dataset, project_model
from .errors import ParseError, ValidationError
from .exact import exact_affinity_2d
from .field import DEFAULT_LEVELS, GridSpec, evaluate_affinity_field, write_contours_svg, write_field_csv, write_heatmap_pgm
from .harness import active_cluster, consensus_report, incremental_init, incremental_update, majority_vote
from .kmeans import clustering_cost, kmeans_fit
from .measures import measure_by_name, squared_euclidean
from .sampling import SamplerConfig, make_rng
from .scores import affinity_batch, cluster_size_weights, default_box, required_samples

log = logging.getLogger("pointaffinity")


class UsageError(Exception):
    pass


def _seed_default() -> int:
    return int(os.environ.get("AFFINITY_SEED", "0"))


def _add_data_flags(p: argparse.ArgumentParser, need_labels: bool = False) -> None:
    p.add_argument("--points", required=True, help="CSV of points, one row per point")
    p.add_argument("--labels", required=need_labels, help="CSV of integer labels, one per row")
    p.add_argument("--centers", help="CSV of cluster centers; overrides label centroids")


def _add_weight_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--weights-rule", choices=("none", "cluster-size", "file"),
                   default="none", help="cluster importance weights")
    p.add_argument("--weights-file", help="CSV of k weights (rule 'file')")


def _add_measure_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--measure", choices=("sqeuclidean", "kl", "itakura-saito"),
                   default="sqeuclidean")
    p.add_argument("--kernel", choices=("rbf",), help="lift data through an RBF feature map")
    p.add_argument("--sigma", type=float, default=1.0, help="RBF bandwidth")
    p.add_argument("--rff", type=int, default=500, help="feature-map dimension")
    p.add_argument("--no-project", action="store_true",
                   help="disable automatic span projection for d > k")


def _add_sampler_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--m", type=int, default=1000, help="samples per query point")
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--pilot", type=int, default=None,
                   help="whitening pilot steps (default max(200, 10 d); 0 disables)")
    p.add_argument("--eps", type=float, default=0.04)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=None,
                   help="64-bit seed (default: AFFINITY_SEED env var or 0)")
    p.add_argument("--box-inflation", type=float, default=2.0)
    p.add_argument("--threads", type=int, default=1)


def _sampler_config(args) -> SamplerConfig:
    seed = args.seed if args.seed is not None else _seed_default()
    return SamplerConfig(m=args.m, burn_in=args.burn_in, pilot_steps=args.pilot,
                         seed=seed, epsilon=args.eps, delta=args.delta,
                         box_inflation=args.box_inflation)


def _log_config(name: str, args, config: SamplerConfig | None = None) -> None:
    payload = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    if config is not None:
        payload["resolved_seed"] = config.seed
    log.info("%s config %s", name, json.dumps(payload, sort_keys=True, default=str))


def _load_inputs(args):
    """Points, optional labels, and a cluster model per the shared flags."""
    data = read_points_csv(args.points)
    labels = read_labels_csv(args.labels) if args.labels else None
    if labels is not None and labels.n != data.n:
        raise UsageError(f"--labels has {labels.n} rows for {data.n} points")
    if getattr(args, "kernel", None):
        fe = fit_fourier_embedding(data.d, args.rff, args.sigma,
                                   seed=args.seed if args.seed is not None else _seed_default())
        data = Dataset(embed(fe, data.points))
    if args.centers:
        centers = read_points_csv(args.centers).points
        if getattr(args, "kernel", None):
            centers = embed(fe, centers)
        model = ClusterModel(centers, labels=labels.labels if labels else None)
    elif labels is not None:
        model = ClusterModel.from_labels(data, labels)
    else:
        raise UsageError("provide --labels or --centers to define the clustering")
    if model.d != data.d:
        raise UsageError(f"--centers dimension {model.d} != points dimension {data.d}")
    return data, labels, model


def _apply_weights(args, model: ClusterModel, n: int):
    """Returns (model, weighting mode for batch, query weight for single calls)."""
    rule = getattr(args, "weights_rule", "none")
    if rule == "none":
        return model, "none", 0.0
    if rule == "cluster-size":
        if model.labels is None:
            raise UsageError("--weights-rule cluster-size needs --labels")
        w = cluster_size_weights(model.labels, model.k, n)
        from dataclasses import replace
        return replace(model, weights=w), "cluster-size", 1.0 / n
    if not args.weights_file:
        raise UsageError("--weights-rule file needs --weights-file")
    w = read_weights_csv(args.weights_file, model.k)
    from dataclasses import replace
    return replace(model, weights=w), "none", 0.0


def _maybe_project(args, data: Dataset, model: ClusterModel):
    """Span projection for high-dimensional Euclidean runs (d > k)."""
    if getattr(args, "no_project", False) or args.measure != "sqeuclidean":
        return data, model
    if data.d <= model.k:
        return data, model
    proj = fit_span_projection(model)
    log.info("projecting d=%d onto the %d-dimensional span of the centers",
             data.d, proj.rank)
    return project_dataset(proj, data), project_model(proj, model)


def _cmd_affinity(args) -> int:
    config = _sampler_config(args)
    _log_config("affinity", args, config)
    data, _, model = _load_inputs(args)
    model, weighting, _ = _apply_weights(args, model, data.n)
    data, model = _maybe_project(args, data, model)
    measure = measure_by_name(args.measure)
    results = affinity_batch(data, model, measure, config,
                             weighting=weighting, threads=args.threads)
    write_affinity_csv(args.out, results, model.k)
    failed = sum(1 for r in results if r is None)
    if failed:
        log.warning("%d of %d points failed; rows carry nan", failed, data.n)
    if args.png:
        from .figures import save_partition_figure
        scores = [r.score if r else float("nan") for r in results]
        stable = [bool(r.stable) if r else False for r in results]
        save_partition_figure(data.points[:, :2],
                              model.labels if model.labels is not None else np.zeros(data.n),
                              args.png, centers=model.representatives[:, :2],
                              stable=stable, title="affinity scores")
        log.info("wrote %s", args.png)
    log.info("wrote %s", args.out)
    return 0


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        nx, ny = (int(t) for t in text.lower().split("x"))
        return nx, ny
    except ValueError:
        raise UsageError(f"--grid expects NXxNY, got {text!r}") from None


def _parse_bounds(text: str) -> tuple[float, float, float, float]:
    try:
        x0, y0, x1, y1 = (float(t) for t in text.split(","))
        return x0, y0, x1, y1
    except ValueError:
        raise UsageError(f"--bounds expects x0,y0,x1,y1, got {text!r}") from None


def _cmd_field(args) -> int:
    config = _sampler_config(args)
    _log_config("field", args, config)
    data, _, model = _load_inputs(args)
    model, _, x_weight = _apply_weights(args, model, data.n)
    data, model = _maybe_project(args, data, model)
    if model.d != 2:
        raise UsageError(f"field rendering needs 2D data after projection, have d={model.d}")
    nx, ny = _parse_grid(args.grid)
    if args.bounds:
        x0, y0, x1, y1 = _parse_bounds(args.bounds)
    else:
        (x0, y0), (x1, y1) = data.points.min(axis=0), data.points.max(axis=0)
    spec = GridSpec(nx, ny, x0, y0, x1, y1)
    measure = measure_by_name(args.measure)
    levels = ([float(t) for t in args.levels.split(",")]
              if args.levels else list(DEFAULT_LEVELS))
    grid = evaluate_affinity_field(model, measure, config, spec,
                                   x_weight=x_weight, exact=args.exact)
    wrote = []
    if args.heatmap:
        write_heatmap_pgm(grid, args.heatmap)
        wrote.append(args.heatmap)
    if args.contours:
        write_contours_svg(grid, levels, args.contours)
        wrote.append(args.contours)
    if args.csv:
        write_field_csv(grid, args.csv)
        wrote.append(args.csv)
    if args.png:
        from .figures import save_field_figure
        save_field_figure(grid, args.png, centers=model.representatives,
                          levels=levels, title="affinity field")
        wrote.append(args.png)
    if not wrote:
        raise UsageError("nothing to write; pass --heatmap, --contours, --csv or --png")
    for path in wrote:
        log.info("wrote %s", path)
    return 0


def _cmd_exact2d(args) -> int:
    config = _sampler_config(args)
    _log_config("exact2d", args, config)
    data, _, model = _load_inputs(args)
    model, weighting, x_weight = _apply_weights(args, model, data.n)
    if data.d != 2:
        raise UsageError("exact2d needs 2D data")
    ids, _, _, alphas, _ = read_affinity_csv(args.check)
    if alphas.shape != (data.n, model.k):
        raise UsageError(
            f"--check shape {alphas.shape} does not match n={data.n}, k={model.k}")
    box = default_box(model, data.points, config.box_inflation)
    sizes = np.bincount(model.labels, minlength=model.k).astype(float) \
        if weighting == "cluster-size" else None
    worst = 0.0
    worst_id = -1
    for i in range(data.n):
        if not np.all(np.isfinite(alphas[i])):
            continue
        point_model = model
        if sizes is not None:
            from dataclasses import replace
            w = sizes.copy()
            w[model.labels[i]] -= 1.0
            point_model = replace(model, weights=w / data.n)
        vec = exact_affinity_2d(data.points[i], point_model, box, x_weight=x_weight)
        dev = float(np.max(np.abs(vec.alphas - alphas[i])))
        if dev > worst:
            worst, worst_id = dev, int(ids[i])
    ok = worst <= args.eps
    print(f"max per-point alpha deviation {worst:.6f} (point {worst_id}), "
          f"tolerance {args.eps:g}: {'PASS' if ok else 'FAIL'}")
    if args.report:
        write_report_csv(args.report, [("max_deviation", worst),
                                       ("tolerance", args.eps),
                                       ("passed", int(ok))])
        log.info("wrote %s", args.report)
    return 0 if ok else 1


def _cmd_kmeans(args) -> int:
    _log_config("kmeans", args)
    data = read_points_csv(args.points)
    seed = args.seed if args.seed is not None else _seed_default()
    model = kmeans_fit(data, args.k, seed=seed, max_iters=args.iters)
    cost = clustering_cost(data.points, model.representatives, model.labels)
    print(f"k-means cost {cost:.6g}")
    if args.out_centers:
        write_points_csv(args.out_centers, model.representatives)
        log.info("wrote %s", args.out_centers)
    if args.out_labels:
        write_labels_csv(args.out_labels, model.labels)
        log.info("wrote %s", args.out_labels)
    if args.png:
        from .figures import save_partition_figure
        save_partition_figure(data.points[:, :2], model.labels, args.png,
                              centers=model.representatives[:, :2], title="k-means")
        log.info("wrote %s", args.png)
    return 0


def _cmd_active(args) -> int:
    config = _sampler_config(args)
    _log_config("active", args, config)
    data = read_points_csv(args.points)
    rng = make_rng(config.seed)
    run = active_cluster(data, args.k, args.alpha, config, rng)
    rows = [("n", data.n), ("k", args.k), ("alpha", args.alpha)] + run.rows()
    rows.append(("cost", clustering_cost(data.points, run.model.representatives,
                                         run.model.labels)))
    write_report_csv(args.report, rows)
    log.info("wrote %s", args.report)
    if args.out_labels:
        write_labels_csv(args.out_labels, run.model.labels)
        log.info("wrote %s", args.out_labels)
    if args.png:
        from .figures import save_partition_figure
        save_partition_figure(data.points[:, :2], run.model.labels, args.png,
                              centers=run.model.representatives[:, :2],
                              title="active clustering")
        log.info("wrote %s", args.png)
    return 0


def _cmd_stream(args) -> int:
    config = _sampler_config(args)
    _log_config("stream", args, config)
    data = read_points_csv(args.points)
    if args.batches < 1 or args.batches > data.n:
        raise UsageError("--batches must lie in [1, n]")
    pieces = np.array_split(data.points, args.batches)
    state = incremental_init(Dataset(pieces[0]), args.k, config, seed=config.seed)
    for piece in pieces[1:]:
        state = incremental_update(state, Dataset(piece), config)
    rows = []
    for rep in state.reports:
        rows.extend(rep.rows())
    rows.append(("final_pool", state.pool.shape[0]))
    rows.append(("total_seen", state.total_seen))
    write_report_csv(args.report, rows)
    log.info("wrote %s", args.report)
    if args.out_centers:
        write_points_csv(args.out_centers, state.centers)
        log.info("wrote %s", args.out_centers)
    if args.png:
        from .figures import save_stream_figure
        save_stream_figure(state.reports, args.png, title="incremental clustering")
        log.info("wrote %s", args.png)
    return 0


def _cmd_consensus_eval(args) -> int:
    config = _sampler_config(args)
    _log_config("consensus-eval", args, config)
    data = read_points_csv(args.points)
    bases = [read_labels_csv(p) for p in args.partitions]
    for i, p in enumerate(bases):
        if p.n != data.n:
            raise UsageError(f"partition {args.partitions[i]} covers {p.n} points, not {data.n}")
    if args.consensus:
        consensus = read_labels_csv(args.consensus)
    elif args.majority_vote:
        consensus = majority_vote(bases)
    else:
        raise UsageError("pass --consensus FILE or --majority-vote")
    reference = read_labels_csv(args.reference)
    rep = consensus_report(bases, consensus, reference, data, config, exact=args.exact)
    write_report_csv(args.report, rep.rows())
    log.info("wrote %s", args.report)
    if args.png:
        from .figures import save_metric_bars
        names = [f"base_{i}" for i in range(len(bases))] + ["consensus"]
        values = list(rep.base_unstable_pct) + [rep.consensus_unstable_pct]
        save_metric_bars(names, values, args.png, ylabel="% unstable",
                         title="consensus stability")
        log.info("wrote %s", args.png)
    return 0


def _cmd_samplesize(args) -> int:
    print(required_samples(args.eps, args.delta, args.k))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pointaffinity",
        description="Per-point affinity scores and stability labels for clusterings.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("affinity", help="score every point of a clustering")
    _add_data_flags(p)
    _add_weight_flags(p)
    _add_measure_flags(p)
    _add_sampler_flags(p)
    p.add_argument("--out", required=True, help="output affinity CSV")
    p.add_argument("--png", help="optional scatter figure")
    p.set_defaults(func=_cmd_affinity)

    p = sub.add_parser("field", help="evaluate the affinity scalar field on a grid")
    _add_data_flags(p)
    _add_weight_flags(p)
    _add_measure_flags(p)
    _add_sampler_flags(p)
    p.add_argument("--grid", default="200x200", help="NXxNY nodes")
    p.add_argument("--bounds", help="x0,y0,x1,y1 (default: data bounding box)")
    p.add_argument("--levels", help="comma-separated contour levels in (0,1)")
    p.add_argument("--exact", action="store_true",
                   help="use the exact 2D oracle instead of sampling")
    p.add_argument("--heatmap", help="output PGM path")
    p.add_argument("--contours", help="output SVG path")
    p.add_argument("--csv", help="output x,y,score CSV path")
    p.add_argument("--png", help="output matplotlib figure path")
    p.set_defaults(func=_cmd_field)

    p = sub.add_parser("exact2d", help="check sampled scores against the exact 2D oracle")
    _add_data_flags(p)
    _add_weight_flags(p)
    p.add_argument("--check", required=True, help="affinity CSV to verify")
    p.add_argument("--eps", type=float, default=0.04, help="max allowed alpha deviation")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--box-inflation", type=float, default=2.0)
    p.add_argument("--report", help="optional metric,value report")
    # sampler defaults so _sampler_config can build the shared box convention
    p.set_defaults(func=_cmd_exact2d, m=1000, burn_in=1000, pilot=None, delta=0.05)

    p = sub.add_parser("kmeans", help="k-means++ seeding plus Lloyd iterations")
    p.add_argument("--points", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--iters", type=int, default=50)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-centers")
    p.add_argument("--out-labels")
    p.add_argument("--png")
    p.set_defaults(func=_cmd_kmeans)

    p = sub.add_parser("active", help="affinity-guided active clustering")
    p.add_argument("--points", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.6,
                   help="fraction of the sample drawn from the stable pool")
    _add_sampler_flags(p)
    p.add_argument("--report", required=True)
    p.add_argument("--out-labels")
    p.add_argument("--png")
    p.set_defaults(func=_cmd_active)

    p = sub.add_parser("stream", help="incremental clustering over batches")
    p.add_argument("--points", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--batches", type=int, default=5)
    _add_sampler_flags(p)
    p.add_argument("--report", required=True)
    p.add_argument("--out-centers")
    p.add_argument("--png")
    p.set_defaults(func=_cmd_stream)

    p = sub.add_parser("consensus-eval", help="stability audit of a consensus clustering")
    p.add_argument("--points", required=True)
    p.add_argument("--partitions", nargs="+", required=True,
                   help="base partition label files")
    p.add_argument("--consensus", help="consensus partition label file")
    p.add_argument("--majority-vote", action="store_true",
                   help="build the consensus by aligned majority vote")
    p.add_argument("--reference", required=True, help="reference partition label file")
    p.add_argument("--exact", action="store_true",
                   help="audit stability with the exact 2D oracle")
    _add_sampler_flags(p)
    p.add_argument("--report", required=True)
    p.add_argument("--png")
    p.set_defaults(func=_cmd_consensus_eval)

    p = sub.add_parser("samplesize", help="samples needed for an (eps, delta) guarantee")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=_cmd_samplesize)

    return parser


def run(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s",
                        stream=sys.stderr, force=True)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, ParseError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
