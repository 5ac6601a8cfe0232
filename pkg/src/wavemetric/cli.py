"""Command-line surface: generate, echo, verify-theorem, embed, compare.

Every run writes a key=value manifest capturing the parameters, seeds and
input hashes needed to reproduce its outputs byte for byte.  Exit codes:
0 success, 1 check failed, 2 validation error, 3 numerical failure.
"""

import argparse
import os
import sys

import numpy as np

from . import datasets, embedding, graphs, metric, pipeline, spectral
from .errors import NumericalError, ValidationError
from .graphs import AffinityConfig, LaplacianSpec
from .metric import DistanceMatrix, NormSpec

_VARIANTS = {"unnorm": "unnormalized", "sym": "symmetric", "rw": "random_walk"}


def _add_input_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--points", help="point-cloud CSV (x0,x1,...[,label])")
    p.add_argument("--edges", help="edge-list file (u v [w] per line)")
    p.add_argument("--epsilon", type=float, help="Gaussian kernel bandwidth (default: auto)")
    p.add_argument("--knn", type=int, help="keep k nearest neighbours per point")
    p.add_argument("--config", help="key=value file; flags override its entries")


def _add_echo_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--laplacian", choices=sorted(_VARIANTS), help="Laplacian variant (default sym)")
    p.add_argument("--symbol", choices=["wave", "heat", "airy", "schrodinger"])
    p.add_argument("--epsilon-atten", type=float, help="wave attenuation (default 1/lambda_1)")
    p.add_argument("--horizon", type=float, help="time horizon T (default 1/lambda_1)")
    p.add_argument("--samples", type=int, help="time samples M (default 100)")
    p.add_argument("--norm-x", choices=["l1", "l2"])
    p.add_argument("--norm-y", choices=["l1", "l2"])
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--rule", choices=["min", "mean"], help="synthesis rule (required)")
    p.add_argument("--n-eigs", type=int)
    p.add_argument("--k-sources", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--full-period", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--drop-constant-mode", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--zero-self-weight", action=argparse.BooleanOptionalAction, default=None)


class _Options:
    """Flag > config-file > default resolution for one parsed command."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = {}
        if getattr(args, "config", None):
            self.config = pipeline.read_manifest(args.config)

    def get(self, name: str, default=None, cast=None):
        val = getattr(self.args, name.replace("-", "_"), None)
        if val is None and name in self.config:
            raw = self.config[name]
            if cast is bool:
                val = raw.lower() in ("1", "true", "yes")
            elif cast is not None:
                val = cast(raw)
            else:
                val = raw
        return default if val is None else val

    def require(self, name: str, cast=None):
        val = self.get(name, cast=cast)
        if val is None:
            raise ValidationError(f"--{name} is required (flag or config file)")
        return val


def _load_graph(opts: _Options):
    """Graph plus optional (cloud, labels) from --points or --edges."""
    points = opts.get("points")
    edges = opts.get("edges")
    if (points is None) == (edges is None):
        raise ValidationError("exactly one of --points or --edges is required")
    if edges is not None:
        return graphs.read_edge_list(edges), None
    cloud = graphs.read_point_csv(points)
    eps = opts.get("epsilon", cast=float)
    if eps is None:
        eps = graphs.auto_bandwidth(cloud.points)
    k_nn = opts.get("knn", cast=int)
    if k_nn is None and cloud.n > 3000:
        k_nn = 50  # keep eigensolves tractable on large clouds
    graph = graphs.build_affinity(cloud, AffinityConfig(epsilon=eps, k_nn=k_nn))
    return graph, cloud


def _echo_kwargs(opts: _Options) -> dict:
    return dict(
        rule=opts.require("rule"),
        n_eigs=opts.get("n-eigs", 50, int),
        k_sources=opts.get("k-sources", 10, int),
        symbol=opts.get("symbol", "wave"),
        attenuation=opts.get("epsilon-atten", cast=float),
        horizon=opts.get("horizon", cast=float),
        samples=opts.get("samples", 100, int),
        norms=NormSpec(
            x_norm=opts.get("norm-x", "l1"),
            y_norm=opts.get("norm-y", "l1"),
            alpha=opts.get("alpha", 1.0, float),
            beta=opts.get("beta", 1.0, float),
        ),
        variant=_VARIANTS[opts.get("laplacian", "sym")],
        seed=opts.get("seed", 0, int),
        drop_constant_mode=opts.get("drop-constant-mode", False, bool),
        zero_self_weight=opts.get("zero-self-weight", False, bool),
        full_period=opts.get("full-period", False, bool),
    )


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------

def _write_dumbbell_csv(path, cloud, targets) -> None:
    with open(path, "w") as fh:
        fh.write("x0,x1,label,target\n")
        for i in range(cloud.n):
            fh.write(
                f"{float(cloud.points[i, 0])!r},{float(cloud.points[i, 1])!r},"
                f"{int(cloud.labels[i])},{float(targets[i])!r}\n"
            )


def cmd_generate(args: argparse.Namespace) -> int:
    opts = _Options(args)
    out = args.out
    os.makedirs(out, exist_ok=True)
    seed = opts.get("seed", 0, int)
    manifest = {"dataset": args.kind, "seed": seed}

    if args.kind == "two-disks":
        n_per = opts.get("n-per", 1000, int)
        separation = opts.get("separation", 6.0, float)
        cross_rate = opts.get("cross-rate", 0.04, float)
        cloud, graph = datasets.gen_two_disks(
            n_per,
            separation=separation,
            cross_rate=cross_rate,
            seed=seed,
            epsilon=opts.get("epsilon", 0.3, float),
            k_nn=opts.get("knn", cast=int),
            cross_weight=opts.get("cross-weight", cast=float),
        )
        graphs.write_point_csv(os.path.join(out, "points.csv"), cloud)
        graphs.write_edge_list(os.path.join(out, "graph.edges"), graph)
        manifest.update(
            n_per=n_per, separation=separation, cross_rate=cross_rate,
            files="points.csv,graph.edges",
        )
    elif args.kind == "dumbbell":
        n = opts.get("n", 2000, int)
        neck = opts.get("neck-width", 0.1, float)
        cloud, targets = datasets.gen_dumbbell(n, neck_width=neck, seed=seed)
        _write_dumbbell_csv(os.path.join(out, "points.csv"), cloud, targets)
        manifest.update(n=n, neck_width=neck, files="points.csv")
    elif args.kind == "spheres-bridge":
        params = dict(
            dim_a=opts.get("dim-a", 6, int),
            dim_b=opts.get("dim-b", 6, int),
            n_a=opts.get("n-a", 300, int),
            n_b=opts.get("n-b", 300, int),
            n_bridge=opts.get("n-bridge", 60, int),
            bridge_dim=opts.get("bridge-dim", 1, int),
            separation=opts.get("separation", 4.0, float),
        )
        cloud = datasets.gen_spheres_bridge(seed=seed, **params)
        graphs.write_point_csv(os.path.join(out, "points.csv"), cloud)
        manifest.update(files="points.csv", **params)
    elif args.kind == "plane-holes":
        n = opts.get("n", 1000, int)
        holes_arg = opts.get("holes", "")
        holes = []
        if holes_arg:
            for part in holes_arg.split(";"):
                cx, cy, r = (float(v) for v in part.split(","))
                holes.append(((cx, cy), r))
        cloud = datasets.gen_plane_with_holes(n, holes, seed=seed)
        graphs.write_point_csv(os.path.join(out, "points.csv"), cloud)
        manifest.update(n=n, holes=holes_arg, files="points.csv")
    else:
        raise ValidationError(f"unknown dataset kind {args.kind!r}")

    pipeline.write_manifest(os.path.join(out, "dataset.manifest"), manifest)
    print(f"wrote {args.kind} dataset to {out}")
    return 0


# ---------------------------------------------------------------------------
# echo
# ---------------------------------------------------------------------------

def cmd_echo(args: argparse.Namespace) -> int:
    opts = _Options(args)
    graph, _ = _load_graph(opts)
    result = pipeline.echolocate(graph, **_echo_kwargs(opts))

    out = args.out
    os.makedirs(out, exist_ok=True)
    d = result.distance.d
    metric.write_matrix_csv(os.path.join(out, "distance.csv"), d)
    metric.write_matrix_binary(os.path.join(out, "distance.bin"), d)
    eps_w = opts.get("epsilon-w", 1.0, float)
    aff = metric.affinity_from_distance(result.distance, eps_w)
    metric.write_matrix_csv(os.path.join(out, "affinity.csv"), aff.matrix)
    metric.write_matrix_binary(os.path.join(out, "affinity.bin"), aff.matrix)
    with open(os.path.join(out, "sources.txt"), "w") as fh:
        for v in result.sources:
            fh.write(f"{int(v)}\n")
    manifest = dict(result.params)
    manifest["epsilon_w"] = repr(float(eps_w))
    manifest["outputs"] = "distance.csv,distance.bin,affinity.csv,affinity.bin,sources.txt"
    pipeline.write_manifest(os.path.join(out, "run.manifest"), manifest)
    print(f"lambda1={result.lambda1!r}")
    print(f"wrote refined distance ({graph.n}x{graph.n}) to {out}")
    return 0


# ---------------------------------------------------------------------------
# verify-theorem
# ---------------------------------------------------------------------------

def cmd_verify_theorem(args: argparse.Namespace) -> int:
    opts = _Options(args)
    graph, _ = _load_graph(opts)
    variant = _VARIANTS[opts.get("laplacian", "unnorm")]
    n_eigs = min(opts.get("n-eigs", 50, int), graph.n)
    basis = spectral.compute_basis(graphs.laplacian(graph, LaplacianSpec(variant)), n_eigs)
    factor = opts.get("horizon-factor", 1000.0, float)
    samples = opts.get("samples", 100_000, int)
    n_pairs = opts.get("pairs", 3, int)
    tol = opts.get("tolerance", 0.05, float)
    rng = np.random.default_rng(pipeline.derive_seed(opts.get("seed", 0, int), "verify-pairs"))

    positive = basis.lam[basis.lam > spectral.GAP_TOL]
    horizon = factor / (float(positive[0]) if positive.size else 1.0)

    try:
        spectral.spectral_gap(basis)
        connected = True
    except ValidationError as exc:
        connected = False
        print(f"disconnected: {exc}")

    failed = False
    for _ in range(n_pairs):
        x0, y0 = (int(v) for v in rng.integers(0, graph.n, size=2))
        if x0 == y0:
            print(f"pair=({x0},{y0}) trivial pair, skipped")
            continue
        if connected:
            avg, target = metric.verify_theorem(basis, x0, y0, horizon, samples)
            ratio = avg / target if target > 0 else 1.0
            print(f"pair=({x0},{y0}) time_average={avg!r} target={target!r} ratio={ratio!r}")
            if abs(ratio - 1.0) > tol:
                failed = True
        else:
            avg, lower, upper = metric.disconnected_bound(basis, x0, y0, horizon, samples)
            # the bracket holds in the T -> infinity limit; same-component
            # pairs sit exactly on its lower edge, so allow the finite-horizon
            # oscillation as relative slack
            inside = lower * (1 - tol) <= avg <= upper * (1 + tol)
            print(
                f"pair=({x0},{y0}) time_average={avg!r} "
                f"bound=[{lower!r},{upper!r}] within_bound={inside}"
            )
            if not inside:
                failed = True
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# embed
# ---------------------------------------------------------------------------

def _read_distance(path) -> DistanceMatrix:
    if path.endswith(".csv"):
        return DistanceMatrix(metric.read_matrix_csv(path))
    return DistanceMatrix(metric.read_matrix_binary(path))


def cmd_embed(args: argparse.Namespace) -> int:
    opts = _Options(args)
    m = opts.get("m", 2, int)
    variant = LaplacianSpec(_VARIANTS[opts.get("laplacian", "sym")])
    labels = None
    if args.distance:
        emb = embedding.refined_embedding(
            _read_distance(args.distance),
            m,
            epsilon_w=opts.get("epsilon-w", 1.0, float),
            spec=variant,
            normalize=opts.get("normalize-distance", "median"),
        )
    else:
        graph, cloud = _load_graph(opts)
        emb = embedding.eigenmap(graph, m, variant)
        labels = cloud.labels if cloud is not None else None
    if args.labels_csv:
        labels = graphs.read_point_csv(args.labels_csv).labels

    embedding.write_embedding_csv(args.out, emb)
    print(f"zero_multiplicity={emb.zero_multiplicity}")
    if labels is not None:
        k = opts.get("k", int(np.unique(labels).size), int)
        acc = embedding.clustering_accuracy(emb, labels, k, seed=opts.get("seed", 0, int))
        print(f"accuracy={acc!r}")
    print(f"wrote embedding ({emb.n}x{emb.dim}) to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------

def _box_variances(values: np.ndarray, labels: np.ndarray) -> tuple[float, float]:
    return (
        float(np.var(values[labels == -1])),
        float(np.var(values[labels == 1])),
    )


def cmd_compare(args: argparse.Namespace) -> int:
    opts = _Options(args)
    if args.circles:
        return _compare_circles(args, opts)

    manifest = pipeline.read_manifest(os.path.join(args.dataset_dir, "dataset.manifest"))
    kind = manifest["dataset"]
    points_path = os.path.join(args.dataset_dir, "points.csv")
    cloud = graphs.read_point_csv(points_path)
    seed = opts.get("seed", 0, int)
    m = opts.get("m", 2, int)

    if kind == "two-disks":
        graph = graphs.read_edge_list(os.path.join(args.dataset_dir, "graph.edges"))
        result = pipeline.echolocate(graph, **_echo_kwargs(opts))
        raw = embedding.eigenmap(graph, m)
        refined = embedding.refined_embedding(result.distance, m)
        acc_raw = embedding.clustering_accuracy(raw, cloud.labels, 2, seed=seed)
        acc_ref = embedding.clustering_accuracy(refined, cloud.labels, 2, seed=seed)
        print(f"accuracy_raw={acc_raw!r}")
        print(f"accuracy_refined={acc_ref!r}")
        return 0

    eps = opts.get("epsilon", cast=float)
    if eps is None:
        eps = graphs.auto_bandwidth(cloud.points)
    graph = graphs.build_affinity(cloud, AffinityConfig(epsilon=eps, k_nn=opts.get("knn", cast=int)))

    if kind == "dumbbell":
        result = pipeline.echolocate(graph, **_echo_kwargs(opts))
        raw = embedding.eigenmap(graph, 1)
        refined = embedding.refined_embedding(result.distance, 1)
        fit_raw = embedding.step_fit_score(raw.coords[:, 0], cloud)
        fit_ref = embedding.step_fit_score(refined.coords[:, 0], cloud)
        var_raw = _box_variances(raw.coords[:, 0], cloud.labels)
        var_ref = _box_variances(refined.coords[:, 0], cloud.labels)
        print(f"step_fit_raw={fit_raw!r}")
        print(f"step_fit_refined={fit_ref!r}")
        print(f"box_variance_raw={var_raw[0]!r},{var_raw[1]!r}")
        print(f"box_variance_refined={var_ref[0]!r},{var_ref[1]!r}")
        return 0

    if kind == "spheres-bridge":
        result = pipeline.echolocate(graph, **_echo_kwargs(opts))
        raw_d = metric.spectral_distance_matrix(result.basis).d
        ref_d = result.distance.d
        labels = cloud.labels
        bridge = labels == 2
        sphere = ~bridge

        def _gap(dmat):
            off = dmat[~np.eye(dmat.shape[0], dtype=bool)]
            med = np.median(off)
            return float(np.mean(dmat[np.ix_(bridge, sphere)]) / med)

        print(f"bridge_gap_raw={_gap(raw_d)!r}")
        print(f"bridge_gap_refined={_gap(ref_d)!r}")
        return 0

    raise ValidationError(f"compare does not support dataset kind {kind!r}")


def _compare_circles(args: argparse.Namespace, opts: _Options) -> int:
    """Circle-density comparison: original graph vs heat- and wave-thresholded."""
    if not args.edges:
        raise ValidationError("--circles needs --edges")
    net = datasets.load_snap_circles(args.edges, args.circles)
    graph = net.graph
    counts = embedding.circle_edge_counts(graph, net.circles)
    print(f"median_circle_edges_original={int(np.median(counts))}")
    kwargs = _echo_kwargs(opts)
    for symbol in ("heat", "wave"):
        kwargs["symbol"] = symbol
        result = pipeline.echolocate(graph, **kwargs)
        d = result.distance.d
        med = float(np.median(d[~np.eye(d.shape[0], dtype=bool)]))
        scaled = DistanceMatrix(d / med if med > 0 else d)
        aff = metric.affinity_from_distance(scaled, opts.get("epsilon-w", 1.0, float))
        thresholded = metric.threshold_graph(aff, opts.get("factor", 10.0, float))
        counts_t = embedding.circle_edge_counts(thresholded, net.circles)
        print(f"median_circle_edges_{symbol}={int(np.median(counts_t))}")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavemetric",
        description="Refined graph metrics from spectrally simulated PDE dynamics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic dataset")
    g.add_argument("kind", choices=["two-disks", "dumbbell", "spheres-bridge", "plane-holes"])
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int)
    g.add_argument("--config")
    g.add_argument("--n-per", type=int)
    g.add_argument("--separation", type=float)
    g.add_argument("--cross-rate", type=float)
    g.add_argument("--cross-weight", type=float)
    g.add_argument("--epsilon", type=float)
    g.add_argument("--knn", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--neck-width", type=float)
    g.add_argument("--dim-a", type=int)
    g.add_argument("--dim-b", type=int)
    g.add_argument("--n-a", type=int)
    g.add_argument("--n-b", type=int)
    g.add_argument("--n-bridge", type=int)
    g.add_argument("--bridge-dim", type=int)
    g.add_argument("--holes", help="semicolon-separated cx,cy,r triples")
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("echo", help="run the full metric-refinement pipeline")
    _add_input_options(e)
    _add_echo_options(e)
    e.add_argument("--epsilon-w", type=float, help="bandwidth of the exported affinity")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_echo)

    v = sub.add_parser("verify-theorem", help="check wave recovery of the spectral distance")
    _add_input_options(v)
    v.add_argument("--laplacian", choices=sorted(_VARIANTS))
    v.add_argument("--n-eigs", type=int)
    v.add_argument("--horizon-factor", type=float, help="T = factor / lambda_1 (default 1000)")
    v.add_argument("--samples", type=int)
    v.add_argument("--pairs", type=int)
    v.add_argument("--seed", type=int)
    v.add_argument("--tolerance", type=float)
    v.set_defaults(func=cmd_verify_theorem)

    em = sub.add_parser("embed", help="embed a graph or a refined distance matrix")
    _add_input_options(em)
    em.add_argument("--distance", help="distance matrix (.bin or .csv) from echo")
    em.add_argument("--laplacian", choices=sorted(_VARIANTS))
    em.add_argument("--m", type=int, help="embedding dimensions (default 2)")
    em.add_argument("--epsilon-w", type=float)
    em.add_argument("--normalize-distance", choices=["median", "none"])
    em.add_argument("--labels-csv", help="points CSV providing a label column")
    em.add_argument("--k", type=int, help="clusters for the accuracy readout")
    em.add_argument("--seed", type=int)
    em.add_argument("--out", required=True)
    em.set_defaults(func=cmd_embed)

    c = sub.add_parser("compare", help="raw eigenmap vs refined metric, side by side")
    _add_input_options(c)
    _add_echo_options(c)
    c.add_argument("--dataset-dir", help="directory written by generate")
    c.add_argument("--m", type=int)
    c.add_argument("--circles", help="SNAP circles file (with --edges)")
    c.add_argument("--epsilon-w", type=float)
    c.add_argument("--factor", type=float, help="times-closer-than-chance threshold (default 10)")
    c.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
