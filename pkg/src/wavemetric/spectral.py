"""Low end of the Laplacian spectrum: eigenpairs and oscillation frequencies.

Graph eigenvalues ``mu_n`` are the squared frequencies of the dynamics; the
solvers here return them ascending together with ``lam_n = sqrt(mu_n)`` and
orthonormal eigenvectors.  Dense graphs up to a few thousand vertices go
through LAPACK; larger ones through ARPACK shift-invert with a fixed start
vector so results are reproducible.
"""

import hashlib
import struct
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .errors import DisconnectedGraphError, EigenSolverError, ValidationError

# below this vertex count the dense LAPACK path is used
DENSE_LIMIT = 3000

ZERO_CLAMP = 1e-10
RESIDUAL_TOL = 1e-8
ORTHO_TOL = 1e-10
GAP_TOL = 1e-6


@dataclass(frozen=True)
class EigenBasis:
    """First N Laplacian eigenpairs, ascending.

    ``mu`` are the graph eigenvalues (clamped to 0 within tolerance), ``lam``
    the frequencies ``sqrt(mu)``, and ``phi`` the n-by-N matrix of orthonormal
    eigenvectors.  Each column's largest-magnitude entry is positive, ties
    broken by lowest index, so repeated runs agree bitwise.
    """

    mu: np.ndarray
    lam: np.ndarray
    phi: np.ndarray

    @property
    def N(self) -> int:
        return self.mu.shape[0]

    @property
    def n(self) -> int:
        return self.phi.shape[0]


def _fix_signs(phi: np.ndarray) -> np.ndarray:
    """Make each column's largest-magnitude entry positive (ties: lowest index)."""
    idx = np.argmax(np.abs(phi), axis=0)
    signs = np.sign(phi[idx, np.arange(phi.shape[1])])
    signs[signs == 0] = 1.0
    return phi * signs[None, :]


def _check_symmetric(L, tol: float = 1e-12) -> None:
    if scipy.sparse.issparse(L):
        diff = abs(L - L.T).max()
        scale = max(1.0, abs(L).max())
    else:
        diff = np.max(np.abs(L - L.T)) if L.size else 0.0
        scale = max(1.0, float(np.max(np.abs(L)))) if L.size else 1.0
    if diff > tol * scale:
        raise ValidationError(f"operator is not symmetric: max asymmetry {diff:.3e}")


def compute_basis(L, N: int, method: str = "auto") -> EigenBasis:
    """First ``N`` eigenpairs of a symmetric Laplacian matrix.

    ``L`` may be a dense array or a scipy sparse matrix.  ``method`` is
    ``"auto"`` (dense below :data:`DENSE_LIMIT` vertices, iterative above),
    ``"dense"`` or ``"iterative"``.  The result satisfies the residual and
    orthonormality tolerances or :class:`EigenSolverError` is raised.
    """
    n = L.shape[0]
    if L.shape[0] != L.shape[1]:
        raise ValidationError(f"operator must be square, got shape {L.shape}")
    if not 1 <= N <= n:
        raise ValidationError(f"need 1 <= N <= n, got N={N}, n={n}")
    _check_symmetric(L)

    if method == "auto":
        method = "dense" if n <= DENSE_LIMIT else "iterative"
    if method == "dense":
        dense = L.toarray() if scipy.sparse.issparse(L) else np.asarray(L, dtype=np.float64)
        dense = 0.5 * (dense + dense.T)
        mu, phi = scipy.linalg.eigh(dense, subset_by_index=[0, N - 1])
    elif method == "iterative":
        if N >= n - 1:
            raise ValidationError("iterative solver needs N < n - 1; use dense")
        sparse = scipy.sparse.csc_matrix(L)
        # shift-invert about a small negative sigma: (L - sigma I) is SPD even
        # though L itself is singular, and smallest eigenvalues converge fast
        v0 = np.full(n, 1.0 / np.sqrt(n))
        mu, phi = scipy.sparse.linalg.eigsh(sparse, k=N, sigma=-1e-3, which="LM", v0=v0)
        order = np.argsort(mu, kind="stable")
        mu, phi = mu[order], phi[:, order]
    else:
        raise ValidationError(f"unknown method {method!r}")

    if np.any(mu < -ZERO_CLAMP):
        raise EigenSolverError(f"negative eigenvalue {mu.min():.3e} beyond clamp tolerance")
    mu = np.where(np.abs(mu) <= ZERO_CLAMP, 0.0, mu)
    phi = _fix_signs(phi)
    lam = np.sqrt(np.maximum(mu, 0.0))

    resid = L @ phi - phi * mu[None, :]
    resid_norm = np.linalg.norm(resid, axis=0)
    bound = RESIDUAL_TOL * np.maximum(1.0, mu)
    if np.any(resid_norm > bound):
        worst = int(np.argmax(resid_norm - bound))
        raise EigenSolverError(
            f"residual {resid_norm[worst]:.3e} exceeds {bound[worst]:.3e} at mode {worst}"
        )
    gram = phi.T @ phi
    ortho_err = np.max(np.abs(gram - np.eye(N)))
    if ortho_err > ORTHO_TOL:
        raise EigenSolverError(f"orthonormality error {ortho_err:.3e} exceeds {ORTHO_TOL}")

    return EigenBasis(mu=mu, lam=lam, phi=phi)


def spectral_gap(basis: EigenBasis) -> float:
    """First nonzero frequency ``lam_1``; raises if the graph is disconnected."""
    if basis.N < 2:
        raise ValidationError("spectral gap needs at least 2 eigenpairs")
    lam1 = float(basis.lam[1])
    if lam1 <= GAP_TOL:
        raise DisconnectedGraphError(
            f"spectral gap lam_1 = {lam1:.3e} <= {GAP_TOL}: graph is disconnected"
        )
    return lam1


# ---------------------------------------------------------------------------
# Binary cache: header (n, N int64 LE), mu, then phi column-major float64
# ---------------------------------------------------------------------------

def basis_cache_key(L, N: int, variant: str) -> str:
    """Content hash identifying (operator, N, variant) for cache filenames."""
    h = hashlib.sha256()
    dense = L.toarray() if scipy.sparse.issparse(L) else np.asarray(L, dtype=np.float64)
    h.update(np.ascontiguousarray(dense).tobytes())
    h.update(struct.pack("<q", N))
    h.update(variant.encode())
    return h.hexdigest()


def save_basis(path, basis: EigenBasis) -> None:
    with open(path, "wb") as fh:
        fh.write(struct.pack("<qq", basis.n, basis.N))
        fh.write(basis.mu.astype("<f8").tobytes())
        fh.write(np.asfortranarray(basis.phi.astype("<f8")).tobytes(order="F"))


def load_basis(path) -> EigenBasis:
    with open(path, "rb") as fh:
        n, N = struct.unpack("<qq", fh.read(16))
        mu = np.frombuffer(fh.read(8 * N), dtype="<f8").copy()
        phi = np.frombuffer(fh.read(8 * n * N), dtype="<f8").reshape((n, N), order="F").copy()
    lam = np.sqrt(np.maximum(mu, 0.0))
    return EigenBasis(mu=mu, lam=lam, phi=phi)
