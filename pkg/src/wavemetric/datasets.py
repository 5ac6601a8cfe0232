"""Synthetic experiment geometries and SNAP-style network ingestion.

Every generator is deterministic for a fixed seed: strata (each disk, each
sphere, the bridge, ...) draw from independently seeded generators so the
output is reproducible bitwise no matter how strata are evaluated.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .graphs import AffinityConfig, PointCloud, WeightedGraph, auto_bandwidth, build_affinity


def _rng(seed: int, stratum: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(stratum)])


def _uniform_disk(rng: np.random.Generator, n: int, center) -> np.ndarray:
    """Uniform points in a unit disk, by rejection from the bounding square."""
    out = np.empty((0, 2))
    while out.shape[0] < n:
        cand = rng.uniform(-1.0, 1.0, size=(2 * max(n, 8), 2))
        keep = cand[(cand**2).sum(axis=1) <= 1.0]
        out = np.vstack([out, keep])
    return out[:n] + np.asarray(center)[None, :]


def gen_two_disks(
    n_per: int,
    separation: float = 6.0,
    cross_rate: float = 0.04,
    seed: int = 0,
    epsilon: float = 0.3,
    k_nn: int | None = None,
    cross_weight: float | None = None,
) -> tuple[PointCloud, WeightedGraph]:
    """Two well-separated unit disks with random erroneous cross edges.

    ``n_per`` points per disk, centers ``separation`` apart (far enough that
    genuine cross affinities are below 1e-6 at the default bandwidth, so the
    injected edges are the only pathway between clusters).  The affinity
    graph uses the dense Gaussian kernel; ``epsilon`` is sized to the unit
    disks so each cluster acts as one tightly coupled blob.  Every cross pair
    is then added independently with probability ``cross_rate``, carrying
    ``cross_weight`` -- by default the median intra-cluster affinity, so
    noise edges are as plausible as genuine ones without dominating them.
    Labels are 0 for the first disk and 1 for the second.
    """
    if n_per < 1:
        raise ValidationError(f"n_per must be >= 1, got {n_per}")
    if not 0 <= cross_rate <= 1:
        raise ValidationError(f"cross_rate must be in [0, 1], got {cross_rate}")
    pts_a = _uniform_disk(_rng(seed, 0), n_per, (0.0, 0.0))
    pts_b = _uniform_disk(_rng(seed, 1), n_per, (separation, 0.0))
    points = np.vstack([pts_a, pts_b])
    labels = np.repeat([0, 1], n_per)
    cloud = PointCloud(points, labels)

    graph = build_affinity(cloud, AffinityConfig(epsilon=epsilon, k_nn=k_nn))

    if cross_rate > 0:
        if cross_weight is None:
            intra = graph.weights[:n_per, :n_per]
            vals = intra[intra > 0]
            cross_weight = float(np.median(vals)) if vals.size else 1.0
        mask = _rng(seed, 2).random((n_per, n_per)) < cross_rate
        w = graph.weights.copy()
        block = w[:n_per, n_per:]
        block[mask] += cross_weight
        w[:n_per, n_per:] = block
        w[n_per:, :n_per] = block.T
        graph = WeightedGraph(w)
    return cloud, graph


def dumbbell_target(points: np.ndarray) -> np.ndarray:
    """Piecewise step-and-ramp target: -1 left of -0.5, 2*x1 in between, +1 right."""
    x1 = np.asarray(points)[:, 0]
    return np.clip(2.0 * x1, -1.0, 1.0)


def gen_dumbbell(n: int, neck_width: float = 0.1, seed: int = 0) -> tuple[PointCloud, np.ndarray]:
    """Two unit boxes joined by a thin neck, with the piecewise target values.

    Left box [-1.5, -0.5] x [-0.5, 0.5], right box mirrored, neck
    [-0.5, 0.5] x [-w/2, w/2].  Counts are proportional to area.  Labels are
    -1 (left), 0 (neck), +1 (right).  Returns ``(cloud, targets)``.
    """
    if n < 3:
        raise ValidationError(f"need n >= 3, got {n}")
    if not 0 < neck_width <= 1.0:
        raise ValidationError(f"neck_width must be in (0, 1], got {neck_width}")
    frac = 1.0 / (2.0 + neck_width)
    n_left = max(1, round(n * frac))
    n_right = n_left
    n_neck = n - n_left - n_right
    if n_neck < 1:
        n_neck = 1
        n_right = n - n_left - n_neck

    left = _rng(seed, 0).uniform([-1.5, -0.5], [-0.5, 0.5], size=(n_left, 2))
    right = _rng(seed, 1).uniform([0.5, -0.5], [1.5, 0.5], size=(n_right, 2))
    hw = neck_width / 2.0
    neck = _rng(seed, 2).uniform([-0.5, -hw], [0.5, hw], size=(n_neck, 2))
    points = np.vstack([left, neck, right])
    labels = np.concatenate([
        np.full(n_left, -1, dtype=np.int64),
        np.zeros(n_neck, dtype=np.int64),
        np.ones(n_right, dtype=np.int64),
    ])
    cloud = PointCloud(points, labels)
    return cloud, dumbbell_target(points)


def _uniform_sphere(rng: np.random.Generator, n: int, dim: int, ambient: int) -> np.ndarray:
    """Uniform points on the unit sphere S^dim, zero-padded to ambient coords."""
    g = rng.standard_normal((n, dim + 1))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    out = np.zeros((n, ambient))
    out[:, : dim + 1] = g
    return out


def gen_spheres_bridge(
    dim_a: int = 6,
    dim_b: int = 6,
    n_a: int = 300,
    n_b: int = 300,
    n_bridge: int = 60,
    seed: int = 0,
    bridge_dim: int = 1,
    separation: float = 4.0,
    bridge_width: float = 0.4,
) -> PointCloud:
    """Two unit spheres joined by a thin bridge between their nearest points.

    Spheres of dimensions ``dim_a`` and ``dim_b`` sit with centers
    ``separation`` apart along the first axis of a
    ``max(dim_a, dim_b) + 1``-dimensional ambient space.  The bridge is a
    segment (``bridge_dim=1``) or a flat strip (``bridge_dim=2``) spanning
    the gap.  Labels: 0 sphere A, 1 sphere B, 2 bridge.
    """
    if dim_a < 1 or dim_b < 1:
        raise ValidationError("sphere dimensions must be >= 1")
    if bridge_dim not in (1, 2):
        raise ValidationError(f"bridge_dim must be 1 or 2, got {bridge_dim}")
    if separation <= 2.0:
        raise ValidationError("separation must exceed 2 (spheres would overlap)")
    ambient = max(dim_a, dim_b) + 1
    sph_a = _uniform_sphere(_rng(seed, 0), n_a, dim_a, ambient)
    sph_b = _uniform_sphere(_rng(seed, 1), n_b, dim_b, ambient)
    sph_b[:, 0] += separation

    rngb = _rng(seed, 2)
    bridge = np.zeros((n_bridge, ambient))
    if n_bridge:
        bridge[:, 0] = rngb.uniform(1.0, separation - 1.0, size=n_bridge)
        if bridge_dim == 2:
            bridge[:, 1] = rngb.uniform(-bridge_width / 2, bridge_width / 2, size=n_bridge)

    points = np.vstack([sph_a, sph_b, bridge])
    labels = np.concatenate([
        np.zeros(n_a, dtype=np.int64),
        np.ones(n_b, dtype=np.int64),
        np.full(n_bridge, 2, dtype=np.int64),
    ])
    return PointCloud(points, labels)


def gen_plane_with_holes(n: int, holes, seed: int = 0) -> PointCloud:
    """Uniform samples on the unit square with the given disks removed.

    ``holes`` is a sequence of ``((cx, cy), r)``.  Rejection-sampled; raises
    "empty support" when a large candidate batch is entirely rejected.
    """
    if n < 2:
        raise ValidationError(f"need n >= 2, got {n}")
    holes = [(np.asarray(c, dtype=np.float64), float(r)) for c, r in holes]
    rng = _rng(seed, 0)
    out = np.empty((0, 2))
    batch = max(4 * n, 1000)
    while out.shape[0] < n:
        cand = rng.uniform(0.0, 1.0, size=(batch, 2))
        keep = np.ones(batch, dtype=bool)
        for center, r in holes:
            keep &= ((cand - center[None, :]) ** 2).sum(axis=1) > r**2
        accepted = cand[keep]
        if accepted.shape[0] == 0:
            raise ValidationError("empty support: holes reject every candidate sample")
        out = np.vstack([out, accepted])
    return PointCloud(out[:n])


# ---------------------------------------------------------------------------
# SNAP ego-network ingestion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SnapNetwork:
    """Unit-weight graph with ground-truth circles, ids compacted to 0..n-1."""

    graph: WeightedGraph
    circles: list
    vertex_ids: np.ndarray  # compact index -> original id


def load_snap_circles(edge_file, circles_file) -> SnapNetwork:
    """Read a SNAP edge list plus a circles file (``name\\tv1\\tv2...``).

    Vertex ids are compacted to 0..n-1 in ascending original order; circle
    members that never appear in the edge list are dropped (they have no
    edges), and circles come back sorted by size, largest first.
    """
    edges = []
    ids = set()
    with open(edge_file) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) < 2:
                raise ValidationError(f"{edge_file}:{lineno}: expected 'u v', got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise ValidationError(f"{edge_file}:{lineno}: {exc}") from exc
            ids.add(u)
            ids.add(v)
            if u != v:
                edges.append((u, v))
    if len(ids) < 2:
        raise ValidationError(f"{edge_file}: fewer than 2 vertices")
    vertex_ids = np.asarray(sorted(ids), dtype=np.int64)
    index = {int(orig): i for i, orig in enumerate(vertex_ids)}
    n = len(vertex_ids)
    weights = np.zeros((n, n))
    for u, v in edges:
        weights[index[u], index[v]] = 1.0
        weights[index[v], index[u]] = 1.0
    graph = WeightedGraph(weights, allow_isolated=True)

    circles = []
    with open(circles_file) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) < 2:
                raise ValidationError(
                    f"{circles_file}:{lineno}: expected 'name v1 [v2 ...]', got {line!r}"
                )
            try:
                members = [int(p) for p in parts[1:]]
            except ValueError as exc:
                raise ValidationError(f"{circles_file}:{lineno}: {exc}") from exc
            compact = [index[m] for m in members if m in index]
            if compact:
                circles.append(compact)
    order = sorted(range(len(circles)), key=lambda i: (-len(circles[i]), i))
    circles = [circles[i] for i in order]
    return SnapNetwork(graph=graph, circles=circles, vertex_ids=vertex_ids)
