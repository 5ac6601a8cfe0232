"""Distances synthesized from simulated fields, and the spectral-distance check.

A field observed at two vertices gives two time series; their difference,
measured in an integral norm of position plus one of velocity, is a per-source
distance.  Distances from several sources combine by entrywise min or mean.
The module also provides the classical spectral distance and the brute-force
time-average that recovers it from wave dynamics.
"""

import io
import struct
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform

from .dynamics import TimeGrid, WaveField
from .errors import ValidationError
from .graphs import WeightedGraph
from .spectral import EigenBasis, spectral_gap

SYNTHESIS_RULES = ("min", "mean")
TIME_NORMS = ("l1", "l2")


@dataclass(frozen=True)
class NormSpec:
    """Norms and exponents of the two-term distance.

    The position term is ``|u(., v1) - u(., v2)|_X ** alpha`` and the velocity
    term ``|u_t(., v1) - u_t(., v2)|_Y ** beta``; ``beta = 0`` drops the
    velocity term entirely.
    """

    x_norm: str = "l1"
    y_norm: str = "l1"
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.x_norm not in TIME_NORMS or self.y_norm not in TIME_NORMS:
            raise ValidationError(f"norms must be one of {TIME_NORMS}")
        if not self.alpha > 0:
            raise ValidationError(f"alpha must be positive, got {self.alpha}")
        if self.beta < 0:
            raise ValidationError(f"beta must be >= 0, got {self.beta}")


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric non-negative matrix with zero diagonal (not a metric in general)."""

    d: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValidationError(f"distance matrix must be square, got {d.shape}")
        if not np.array_equal(d, d.T):
            raise ValidationError("distance matrix must be exactly symmetric")
        if not np.all(np.isfinite(d)):
            raise ValidationError("distance matrix has non-finite entries")
        if np.any(d < 0):
            raise ValidationError("distance matrix has negative entries")
        if np.any(np.diag(d) != 0):
            raise ValidationError("distance matrix diagonal must be zero")
        object.__setattr__(self, "d", d)

    @property
    def n(self) -> int:
        return self.d.shape[0]


@dataclass(frozen=True)
class AffinityFromDistance:
    """Gaussian affinity of a distance matrix: ``exp(-d^2 / epsilon_w)``."""

    epsilon_w: float
    matrix: np.ndarray


def affinity_from_distance(dist: DistanceMatrix, epsilon_w: float = 1.0) -> AffinityFromDistance:
    if not epsilon_w > 0:
        raise ValidationError(f"epsilon_w must be positive, got {epsilon_w}")
    w = np.exp(-dist.d**2 / epsilon_w)
    np.fill_diagonal(w, 1.0)
    return AffinityFromDistance(epsilon_w=epsilon_w, matrix=w)


def _pairwise_time_norm(field_values: np.ndarray, norm: str, weights: np.ndarray) -> np.ndarray:
    """All-pairs time-norm of ``|F(., v1) - F(., v2)|`` with quadrature weights.

    Complex differences are reduced by modulus per time sample before the
    scalar norm.  Real fields and the complex l2 case go through fast cdist
    paths; complex l1 falls back to a loop over time samples.
    """
    f = field_values
    is_real = not np.any(f.imag)
    if is_real:
        x = np.ascontiguousarray(f.real.T)  # (n, M)
        if norm == "l1":
            # sum_m w_m |a_m - b_m| == cityblock distance of w-scaled series
            d = cdist(x * weights[None, :], x * weights[None, :], "cityblock")
        else:
            d = cdist(x * np.sqrt(weights)[None, :], x * np.sqrt(weights)[None, :], "euclidean")
    elif norm == "l2":
        # sum_m w_m |a_m - b_m|^2 splits into real and imaginary parts
        sw = np.sqrt(weights)
        x = np.concatenate([f.real.T * sw[None, :], f.imag.T * sw[None, :]], axis=1)
        d = cdist(np.ascontiguousarray(x), np.ascontiguousarray(x), "euclidean")
    else:
        n = f.shape[1]
        d = np.zeros((n, n))
        for m in range(f.shape[0]):
            col = f[m]
            d += weights[m] * np.abs(col[:, None] - col[None, :])
    d = np.minimum(d, d.T)
    np.fill_diagonal(d, 0.0)
    return d


def per_source_distance(field: WaveField, norms: NormSpec, grid: TimeGrid) -> DistanceMatrix:
    """Two-term distance between all vertex pairs for one source's field.

    Time norms use trapezoid quadrature weights on the grid.
    """
    if field.samples != grid.samples:
        raise ValidationError(
            f"field has {field.samples} samples but grid has {grid.samples}"
        )
    w = grid.trapezoid_weights()
    d = _pairwise_time_norm(field.u, norms.x_norm, w)
    if norms.alpha != 1.0:
        d = d**norms.alpha
    if norms.beta > 0:
        dy = _pairwise_time_norm(field.ut, norms.y_norm, w)
        if norms.beta != 1.0:
            dy = dy**norms.beta
        d = d + dy
    return DistanceMatrix(d)


def synthesize(distances, rule: str) -> DistanceMatrix:
    """Entrywise min or mean of per-source distance matrices."""
    if rule not in SYNTHESIS_RULES:
        raise ValidationError(f"rule must be one of {SYNTHESIS_RULES}, got {rule!r}")
    mats = [dm.d for dm in distances]
    if not mats:
        raise ValidationError("need at least one distance matrix")
    n = mats[0].shape[0]
    if any(m.shape != (n, n) for m in mats):
        raise ValidationError("distance matrices have inconsistent sizes")
    if rule == "min":
        out = np.minimum.reduce(mats)
    else:
        out = np.mean(mats, axis=0)
    return DistanceMatrix(out)


def spectral_distance(basis: EigenBasis, x0: int, y0: int) -> float:
    """Euclidean distance of the eigenvector embeddings, constant mode excluded.

    ``sqrt(sum_n (phi_n(x0) - phi_n(y0))^2)`` over stored modes 1..N-1.
    """
    if not (0 <= x0 < basis.n and 0 <= y0 < basis.n):
        raise ValidationError(f"vertices ({x0}, {y0}) out of range for n={basis.n}")
    diff = basis.phi[x0, 1:] - basis.phi[y0, 1:]
    return float(np.sqrt(np.dot(diff, diff)))


def spectral_distance_matrix(basis: EigenBasis) -> DistanceMatrix:
    """All-pairs spectral distance over modes 1..N-1."""
    return DistanceMatrix(squareform(pdist(basis.phi[:, 1:], "euclidean")))


def _difference_time_average(basis: EigenBasis, x0: int, y0: int, horizon: float, samples: int) -> float:
    """Trapezoid time average of the squared spatial norm of u_x0 - u_y0.

    Point masses at x0 and y0 evolve under the undamped wave equation; the
    constant mode is dropped from the difference (it cancels identically on
    connected graphs).  The field is summed over vertices explicitly at every
    sample -- the brute-force route the spectral-distance target is checked
    against -- in time chunks so large sample counts stay in bounded memory.
    """
    grid = TimeGrid(horizon=horizon, samples=samples)
    coeff = basis.phi[x0] - basis.phi[y0]
    coeff = coeff.copy()
    coeff[0] = 0.0
    times = grid.times
    weights = grid.trapezoid_weights()
    total = 0.0
    chunk = 32768
    for start in range(0, samples, chunk):
        t = times[start : start + chunk]
        modal = np.cos(t[:, None] * basis.lam[None, :]) * coeff[None, :]
        u = modal @ basis.phi.T
        total += weights[start : start + chunk] @ np.einsum("ij,ij->i", u, u)
    return float(total / horizon)


def verify_theorem(
    basis: EigenBasis, x0: int, y0: int, horizon: float, samples: int
) -> tuple[float, float]:
    """Time-averaged squared wave distance vs half the squared spectral distance.

    Returns ``(time_average, target)``; their ratio tends to 1 as the horizon
    grows, at rate O(1 / (lam_1 T)).  Requires a connected graph (raises
    :class:`DisconnectedGraphError` otherwise).
    """
    spectral_gap(basis)
    if not (0 <= x0 < basis.n and 0 <= y0 < basis.n):
        raise ValidationError(f"vertices ({x0}, {y0}) out of range for n={basis.n}")
    target = 0.5 * spectral_distance(basis, x0, y0) ** 2
    if x0 == y0:
        return 0.0, 0.0
    return _difference_time_average(basis, x0, y0, horizon, samples), target


def disconnected_bound(
    basis: EigenBasis, x0: int, y0: int, horizon: float, samples: int
) -> tuple[float, float, float]:
    """Two-sided bound check for graphs with several components.

    Returns ``(time_average, lower, upper)`` where the bracket is
    ``[d_N^2 / 2, d_N^2]``; the time average stays inside it because zero-
    frequency modes never decay to their half-average.
    """
    if not (0 <= x0 < basis.n and 0 <= y0 < basis.n):
        raise ValidationError(f"vertices ({x0}, {y0}) out of range for n={basis.n}")
    d2 = spectral_distance(basis, x0, y0) ** 2
    if x0 == y0:
        return 0.0, 0.0, 0.0
    avg = _difference_time_average(basis, x0, y0, horizon, samples)
    return avg, 0.5 * d2, d2


def threshold_graph(
    aff: AffinityFromDistance, factor: float, include_diagonal: bool = False
) -> WeightedGraph:
    """0/1 graph of pairs whose affinity beats ``factor`` times the chance level.

    Chance is the mean affinity over unordered off-diagonal pairs; including
    the diagonal (all-ones) is available behind a flag but inflates the mean.
    """
    if not factor > 0:
        raise ValidationError(f"factor must be positive, got {factor}")
    w = aff.matrix
    n = w.shape[0]
    if include_diagonal:
        chance = float(np.mean(w))
    else:
        off = ~np.eye(n, dtype=bool)
        chance = float(np.mean(w[off]))
    edges = (w > factor * chance).astype(np.float64)
    edges = np.minimum(edges, edges.T)
    np.fill_diagonal(edges, 0.0)
    return WeightedGraph(edges, allow_isolated=True)


# ---------------------------------------------------------------------------
# Matrix export: dense CSV with a header row, and binary (n int64, then
# row-major float64)
# ---------------------------------------------------------------------------

def write_matrix_csv(path, matrix: np.ndarray) -> None:
    m = np.asarray(matrix, dtype=np.float64)
    buf = io.StringIO()
    buf.write(",".join(f"v{j}" for j in range(m.shape[1])) + "\n")
    for row in m:
        buf.write(",".join(repr(float(v)) for v in row) + "\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def read_matrix_csv(path) -> np.ndarray:
    with open(path) as fh:
        fh.readline()  # header
        rows = [[float(v) for v in line.strip().split(",")] for line in fh if line.strip()]
    return np.asarray(rows, dtype=np.float64)


def write_matrix_binary(path, matrix: np.ndarray) -> None:
    m = np.asarray(matrix, dtype=np.float64)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<q", m.shape[0]))
        fh.write(np.ascontiguousarray(m, dtype="<f8").tobytes())


def read_matrix_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        (n,) = struct.unpack("<q", fh.read(8))
        data = np.frombuffer(fh.read(), dtype="<f8")
    return data.reshape(n, -1).copy()
