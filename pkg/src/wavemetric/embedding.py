"""Spectral embeddings of raw or refined affinities, and their scores.

The raw route embeds a graph by its leading nontrivial Laplacian
eigenvectors.  The refined route turns a synthesized distance matrix into a
Gaussian affinity first, then embeds that; by default distances are scaled
by their median so the affinity is well conditioned regardless of the
distance's absolute scale.
"""

import io
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.cluster import KMeans

from .datasets import dumbbell_target
from .errors import ValidationError
from .graphs import LaplacianSpec, PointCloud, WeightedGraph, laplacian
from .metric import DistanceMatrix, affinity_from_distance
from .spectral import compute_basis

# squared-frequency threshold matching the spectral-gap tolerance on lam
_ZERO_MU = 1e-12


@dataclass(frozen=True)
class Embedding:
    """Vertex coordinates from low-frequency eigenvectors.

    ``zero_multiplicity`` counts (numerically) zero Laplacian eigenvalues
    among the computed modes; a value above 1 flags a disconnected graph.
    """

    coords: np.ndarray
    source: str
    zero_multiplicity: int = 1

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]


def eigenmap(
    weights, m: int, spec: LaplacianSpec = LaplacianSpec(), source: str = "raw_eigenmap"
) -> Embedding:
    """First ``m`` nontrivial Laplacian eigenvectors as coordinates.

    ``weights`` is a symmetric non-negative matrix or a
    :class:`WeightedGraph`; any diagonal is stripped.  Random-walk
    coordinates are recovered from the symmetric-normalized eigenvectors by
    ``D^{-1/2}`` scaling.  Disconnected graphs still return coordinates; the
    zero-eigenvalue multiplicity is reported on the embedding.
    """
    if isinstance(weights, WeightedGraph):
        graph = weights
    else:
        w = np.asarray(weights, dtype=np.float64).copy()
        np.fill_diagonal(w, 0.0)
        graph = WeightedGraph(w, allow_isolated=True)
    if not m >= 1:
        raise ValidationError(f"embedding dimension must be >= 1, got {m}")
    if m >= graph.n:
        raise ValidationError(f"embedding dimension {m} must be below n={graph.n}")

    if spec.variant == "random_walk":
        basis = compute_basis(laplacian(graph, LaplacianSpec("symmetric")), m + 1)
        scale = 1.0 / np.sqrt(graph.degrees())
        coords = basis.phi[:, 1 : m + 1] * scale[:, None]
    else:
        basis = compute_basis(laplacian(graph, spec), m + 1)
        coords = basis.phi[:, 1 : m + 1]
    zero_mult = int(np.sum(basis.mu <= _ZERO_MU))
    return Embedding(coords=coords, source=source, zero_multiplicity=max(zero_mult, 1))


def refined_embedding(
    dist: DistanceMatrix,
    m: int,
    epsilon_w: float = 1.0,
    spec: LaplacianSpec = LaplacianSpec(),
    normalize: str = "median",
) -> Embedding:
    """Embed a refined distance matrix via its Gaussian affinity.

    With ``normalize="median"`` (default) distances are divided by their
    median off-diagonal value before the kernel, making ``epsilon_w`` a
    relative bandwidth; pass ``normalize="none"`` for the raw scale.
    """
    if normalize not in ("median", "none"):
        raise ValidationError(f"normalize must be 'median' or 'none', got {normalize!r}")
    d = dist.d
    if normalize == "median":
        off = d[~np.eye(dist.n, dtype=bool)]
        med = float(np.median(off))
        if med > 0:
            d = d / med
    aff = affinity_from_distance(DistanceMatrix(d), epsilon_w)
    return eigenmap(aff.matrix, m, spec, source="refined_metric")


def clustering_accuracy(emb: Embedding, labels, k: int, seed: int = 0) -> float:
    """Best-permutation accuracy of seeded k-means on the embedding.

    k-means runs 20 restarts with greedy k-means++ initialization; predicted
    clusters are matched to true labels by Hungarian assignment.
    """
    labels = np.asarray(labels)
    if k > emb.n:
        raise ValidationError(f"k={k} exceeds number of points {emb.n}")
    distinct = np.unique(labels)
    if k != distinct.size:
        raise ValidationError(f"k={k} does not match {distinct.size} distinct labels")
    km = KMeans(n_clusters=k, n_init=20, random_state=seed)
    pred = km.fit_predict(emb.coords)
    contingency = np.zeros((k, k), dtype=np.int64)
    for ci, li in zip(pred, np.searchsorted(distinct, labels)):
        contingency[ci, li] += 1
    rows, cols = linear_sum_assignment(-contingency)
    return float(contingency[rows, cols].sum() / labels.size)


def affine_fit_rms(values, target) -> float:
    """RMS residual of the best least-squares affine map of values onto target."""
    v = np.asarray(values, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    design = np.column_stack([v, np.ones_like(v)])
    coef, *_ = np.linalg.lstsq(design, t, rcond=None)
    resid = design @ coef - t
    return float(np.sqrt(np.mean(resid**2)))


def step_fit_score(values, cloud: PointCloud) -> float:
    """How well values reproduce the dumbbell step-ramp target, affine-invariantly.

    Lower is better; exact (up to any affine map) reproductions score 0.
    """
    return affine_fit_rms(values, dumbbell_target(cloud.points))


def circle_edge_counts(graph: WeightedGraph, circles, top: int = 100) -> list:
    """Induced edge counts of the ``top`` largest circles (largest first)."""
    order = sorted(range(len(circles)), key=lambda i: (-len(circles[i]), i))[:top]
    counts = []
    for i in order:
        members = np.asarray(circles[i], dtype=np.int64)
        sub = graph.weights[np.ix_(members, members)]
        counts.append(int(np.count_nonzero(np.triu(sub, k=1))))
    return counts


def write_embedding_csv(path, emb: Embedding) -> None:
    """One row per vertex, columns e0..e{m-1}."""
    buf = io.StringIO()
    buf.write(",".join(f"e{j}" for j in range(emb.dim)) + "\n")
    for row in emb.coords:
        buf.write(",".join(repr(float(v)) for v in row) + "\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())
