"""Weighted graphs from point clouds or edge lists, and their Laplacians.

A graph is stored as a dense symmetric affinity matrix with zero diagonal.
Affinities between points use the Gaussian kernel ``exp(-|x_i - x_j|^2 / eps)``;
row-stochastic normalisation is never baked in, normalised Laplacians are
derived on demand.
"""

import io
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import IsolatedVertexError, ValidationError

LAPLACIAN_VARIANTS = ("unnormalized", "symmetric", "random_walk")


@dataclass(frozen=True)
class PointCloud:
    """Points in d-dimensional Euclidean space with optional integer labels."""

    points: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2:
            raise ValidationError(f"points must be a 2-d array, got shape {pts.shape}")
        n, d = pts.shape
        if n < 2:
            raise ValidationError(f"need at least 2 points, got {n}")
        if d < 1:
            raise ValidationError("points must have dimension >= 1")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("points contain non-finite values")
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            lab = np.asarray(self.labels, dtype=np.int64)
            if lab.shape != (n,):
                raise ValidationError(
                    f"labels must have shape ({n},), got {lab.shape}"
                )
            object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class AffinityConfig:
    """Gaussian kernel parameters: bandwidth plus optional truncation.

    Truncation keeps, per row, either the ``k_nn`` nearest neighbours or all
    neighbours within ``radius``.  After truncation an edge survives if either
    endpoint kept it (``symmetrization="union"``, the default, which preserves
    bridges) or only if both did (``"mutual"``).
    """

    epsilon: float
    k_nn: int | None = None
    radius: float | None = None
    symmetrization: str = "union"
    allow_isolated: bool = False

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValidationError(f"epsilon must be positive, got {self.epsilon}")
        if self.k_nn is not None and self.k_nn < 1:
            raise ValidationError(f"k_nn must be >= 1, got {self.k_nn}")
        if self.radius is not None and not self.radius > 0:
            raise ValidationError(f"radius must be positive, got {self.radius}")
        if self.symmetrization not in ("union", "mutual"):
            raise ValidationError(
                f"symmetrization must be 'union' or 'mutual', got {self.symmetrization!r}"
            )


@dataclass(frozen=True)
class LaplacianSpec:
    """Which Laplacian to derive from the affinity matrix."""

    variant: str = "symmetric"

    def __post_init__(self):
        if self.variant not in LAPLACIAN_VARIANTS:
            raise ValidationError(
                f"variant must be one of {LAPLACIAN_VARIANTS}, got {self.variant!r}"
            )


@dataclass(frozen=True)
class WeightedGraph:
    """Symmetric non-negative affinity matrix with zero diagonal."""

    weights: np.ndarray
    allow_isolated: bool = field(default=False, compare=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValidationError(f"weights must be square, got shape {w.shape}")
        if not np.array_equal(w, w.T):
            raise ValidationError("weights must be exactly symmetric")
        if not np.all(np.isfinite(w)):
            raise ValidationError("weights contain non-finite values")
        if np.any(w < 0):
            raise ValidationError("weights must be non-negative")
        if np.any(np.diag(w) != 0):
            raise ValidationError("diagonal must be zero (no self-loops)")
        if not self.allow_isolated:
            deg = w.sum(axis=1)
            if np.any(deg == 0):
                idx = int(np.argmax(deg == 0))
                raise IsolatedVertexError(
                    f"isolated vertex {idx}; pass allow_isolated=True to permit"
                )
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def degrees(self) -> np.ndarray:
        return self.weights.sum(axis=1)


def auto_bandwidth(points: np.ndarray, k: int = 10) -> float:
    """Median squared distance to the k-th nearest neighbour.

    A scale-free default for the Gaussian kernel bandwidth.
    """
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    k = min(k, n - 1)
    d2 = cdist(pts, pts, "sqeuclidean")
    np.fill_diagonal(d2, np.inf)
    kth = np.partition(d2, k - 1, axis=1)[:, k - 1]
    return float(np.median(kth))


def _truncation_mask(d2: np.ndarray, config: AffinityConfig) -> np.ndarray | None:
    """Boolean keep-mask from kNN or radius truncation, before symmetrization."""
    if config.k_nn is None and config.radius is None:
        return None
    n = d2.shape[0]
    keep = np.ones((n, n), dtype=bool)
    if config.k_nn is not None:
        k = min(config.k_nn, n - 1)
        d2_off = d2.copy()
        np.fill_diagonal(d2_off, np.inf)
        # argpartition is deterministic for ties (stable on index order)
        nn = np.argpartition(d2_off, k - 1, axis=1)[:, :k]
        keep = np.zeros((n, n), dtype=bool)
        keep[np.arange(n)[:, None], nn] = True
    if config.radius is not None:
        keep &= d2 <= config.radius**2
    if config.symmetrization == "union":
        keep |= keep.T
    else:
        keep &= keep.T
    return keep


def build_affinity(cloud: PointCloud, config: AffinityConfig) -> WeightedGraph:
    """Gaussian affinity graph ``w_ij = exp(-|x_i - x_j|^2 / eps)``.

    Truncation and symmetrization follow ``config``; the diagonal is zeroed.
    Duplicate points get weight 1.  Raises :class:`IsolatedVertexError` if
    truncation leaves a vertex with no edges (unless allowed).
    """
    d2 = cdist(cloud.points, cloud.points, "sqeuclidean")
    # enforce exact symmetry: cdist can differ in the last ulp across the diagonal
    d2 = np.minimum(d2, d2.T)
    w = np.exp(-d2 / config.epsilon)
    mask = _truncation_mask(d2, config)
    if mask is not None:
        w = np.where(mask, w, 0.0)
    np.fill_diagonal(w, 0.0)
    return WeightedGraph(w, allow_isolated=config.allow_isolated)


def add_noise_edges(
    graph: WeightedGraph, cross_pairs, weight: float
) -> WeightedGraph:
    """Return a copy of ``graph`` with ``weight`` added at each given pair.

    Pairs are undirected; both matrix entries change.  Self-pairs are
    rejected (the diagonal stays zero).
    """
    if not weight > 0:
        raise ValidationError(f"noise-edge weight must be positive, got {weight}")
    w = graph.weights.copy()
    n = graph.n
    for i, j in cross_pairs:
        if not (0 <= i < n and 0 <= j < n):
            raise IndexError(f"pair ({i}, {j}) out of range for {n} vertices")
        if i == j:
            raise ValidationError(f"self-pair ({i}, {i}) not allowed")
        w[i, j] += weight
        w[j, i] = w[i, j]
    return WeightedGraph(w, allow_isolated=graph.allow_isolated)


def laplacian(graph: WeightedGraph, spec: LaplacianSpec = LaplacianSpec()) -> np.ndarray:
    """Graph Laplacian of the requested variant.

    ``unnormalized``: D - W.  ``symmetric``: I - D^{-1/2} W D^{-1/2}.
    ``random_walk``: I - D^{-1} W (not symmetric).  Normalised variants
    require every degree to be positive.
    """
    w = graph.weights
    deg = w.sum(axis=1)
    if spec.variant == "unnormalized":
        return np.diag(deg) - w
    if np.any(deg <= 0):
        idx = int(np.argmax(deg <= 0))
        raise ValidationError(f"zero degree at vertex {idx} under {spec.variant} variant")
    n = graph.n
    if spec.variant == "symmetric":
        inv_sqrt = 1.0 / np.sqrt(deg)
        lap = -(inv_sqrt[:, None] * w * inv_sqrt[None, :])
        lap[np.arange(n), np.arange(n)] += 1.0
        # exact symmetry despite floating-point scaling order
        lap = 0.5 * (lap + lap.T)
        return lap
    # random_walk
    lap = -(w / deg[:, None])
    lap[np.arange(n), np.arange(n)] += 1.0
    return lap


# ---------------------------------------------------------------------------
# On-disk formats: point-cloud CSV and SNAP-style edge lists
# ---------------------------------------------------------------------------

def write_point_csv(path, cloud: PointCloud) -> None:
    """CSV with header ``x0,x1,...[,label]``, one point per row."""
    d = cloud.dim
    cols = [f"x{i}" for i in range(d)]
    if cloud.labels is not None:
        cols.append("label")
    buf = io.StringIO()
    buf.write(",".join(cols) + "\n")
    for i in range(cloud.n):
        row = [repr(float(v)) for v in cloud.points[i]]
        if cloud.labels is not None:
            row.append(str(int(cloud.labels[i])))
        buf.write(",".join(row) + "\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def read_point_csv(path) -> PointCloud:
    """Read the CSV format written by :func:`write_point_csv`.

    Columns named ``x0, x1, ...`` are coordinates and ``label`` (when present)
    gives integer tags; any other columns are ignored.
    """
    with open(path) as fh:
        header = fh.readline().strip()
        names = header.split(",")
        coord_idx = [i for i, name in enumerate(names) if name.startswith("x")]
        label_idx = names.index("label") if "label" in names else None
        if not coord_idx:
            raise ValidationError(f"{path}: no coordinate columns (x0, x1, ...) in header")
        rows = []
        labels = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(names):
                raise ValidationError(
                    f"{path}:{lineno}: expected {len(names)} columns, got {len(parts)}"
                )
            rows.append([float(parts[i]) for i in coord_idx])
            if label_idx is not None:
                labels.append(int(parts[label_idx]))
    pts = np.asarray(rows, dtype=np.float64)
    return PointCloud(pts, np.asarray(labels, dtype=np.int64) if label_idx is not None else None)


def read_edge_list(path, allow_isolated: bool = False) -> WeightedGraph:
    """Whitespace-separated ``u v [w]`` lines, 0-based ids, default weight 1.

    Self-loops are stripped.  When an edge repeats with different weights the
    maximum wins (deterministic and symmetric).
    """
    entries = []
    n = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise ValidationError(f"{path}:{lineno}: expected 'u v [w]', got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
            if u < 0 or v < 0:
                raise ValidationError(f"{path}:{lineno}: negative vertex id")
            n = max(n, u + 1, v + 1)
            if u != v:
                entries.append((u, v, w))
    if n < 2:
        raise ValidationError(f"{path}: fewer than 2 vertices")
    weights = np.zeros((n, n))
    for u, v, w in entries:
        weights[u, v] = max(weights[u, v], w)
        weights[v, u] = weights[u, v]
    return WeightedGraph(weights, allow_isolated=allow_isolated)


def write_edge_list(path, graph: WeightedGraph) -> None:
    """Upper-triangle nonzero entries as ``u v w`` lines."""
    iu, jv = np.nonzero(np.triu(graph.weights, k=1))
    with open(path, "w") as fh:
        for u, v in zip(iu.tolist(), jv.tolist()):
            fh.write(f"{u} {v} {float(graph.weights[u, v])!r}\n")
