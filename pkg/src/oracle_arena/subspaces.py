"""Dense linear-algebra substrate: subspaces, projections, residuals.

A :class:`Subspace` is an explicit orthonormal basis of a k-dimensional linear
subspace of R^d.  The basis representation (rather than a d x d projector) keeps
projections at O(dk) and makes containment tests exact.  Sampling is uniform
with respect to the rotation-invariant (Haar) measure on k-dimensional
subspaces, realized by orthonormalizing a Gaussian matrix.

All operations are pure given their inputs and an explicit random generator;
``Subspace`` values are immutable and safe to share across threads.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

#: max-entry tolerance for orthonormality and rank decisions.
ORTHO_TOL = 1e-10


class DimensionError(ValueError):
    """Raised when dimensions are out of range or do not match."""


class DegenerateInputError(ValueError):
    """Raised when an input matrix has lower rank than the request needs."""

    def __init__(self, message, effective_rank):
        super().__init__(f"{message} (effective rank {effective_rank})")
        self.effective_rank = effective_rank


def orthonormalize(A, tol=ORTHO_TOL):
    """Orthonormal basis of the column span of ``A``.

    Column-pivoted QR followed by a re-orthogonalization pass; columns whose
    pivoted R-diagonal falls below ``tol`` (relative to the leading one) are
    treated as dependent and dropped.  Returns a (d, rank) matrix.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise DimensionError("expected a 2-d array of column vectors")
    if A.shape[1] == 0:
        return np.zeros((A.shape[0], 0))
    Q, R, _ = scipy.linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] <= tol:
        return np.zeros((A.shape[0], 0))
    rank = int(np.count_nonzero(diag > tol * diag[0]))
    Q = np.ascontiguousarray(Q[:, :rank])
    # second pass tightens orthonormality lost to pivoted-QR roundoff
    Q = np.linalg.qr(Q)[0]
    return Q


@dataclass(frozen=True)
class Subspace:
    """A k-dimensional linear subspace of R^d, stored as an orthonormal basis.

    ``basis`` has shape (d, k) with orthonormal columns (max-entry deviation
    from B^T B = I at most 1e-10) and 1 <= k <= d.
    """

    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=float)
        if basis.ndim != 2:
            raise DimensionError("basis must be a (d, k) matrix")
        d, k = basis.shape
        if not 1 <= k <= d:
            raise DimensionError(f"subspace dimension k={k} must satisfy 1 <= k <= d={d}")
        gram_err = np.max(np.abs(basis.T @ basis - np.eye(k)))
        if gram_err > ORTHO_TOL:
            raise DimensionError(f"basis columns are not orthonormal (error {gram_err:.3e})")
        basis = basis.copy()
        basis.flags.writeable = False
        object.__setattr__(self, "basis", basis)

    @property
    def ambient_dim(self):
        return self.basis.shape[0]

    @property
    def dim(self):
        return self.basis.shape[1]

    def project(self, x):
        """Orthogonal projection of ``x`` (shape (d,) or (n, d)) onto the subspace."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.ambient_dim:
            raise DimensionError(
                f"vector dimension {x.shape[-1]} != ambient dimension {self.ambient_dim}"
            )
        return (x @ self.basis) @ self.basis.T

    def proj_norm(self, x):
        """Euclidean norm of the projection; ``proj_norm(x) <= ||x||``."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.ambient_dim:
            raise DimensionError(
                f"vector dimension {x.shape[-1]} != ambient dimension {self.ambient_dim}"
            )
        return np.linalg.norm(x @ self.basis, axis=-1)

    def projector(self):
        """The d x d projector matrix (derived on demand)."""
        return self.basis @ self.basis.T


def sample_uniform_subspace(d, k, rng):
    """Haar-uniform k-dimensional subspace of R^d.

    Realized as the column span of a d x k matrix of independent standard
    Gaussians; rotation invariance of the Gaussian ensemble makes the span
    uniform on the set of k-dimensional subspaces.
    """
    if not 1 <= k <= d:
        raise DimensionError(f"need 1 <= k <= d, got k={k}, d={d}")
    G = rng.standard_normal((d, k))
    Q = orthonormalize(G)
    while Q.shape[1] < k:  # probability-zero rank loss; resample defensively
        G = rng.standard_normal((d, k))
        Q = orthonormalize(G)
    return Subspace(Q)


def sample_subspace_within(parent, l, rng):
    """Haar-uniform l-dimensional subspace of ``parent``.

    Every basis column lies in the parent's span exactly (it is a linear
    combination of the parent's basis columns).
    """
    if not 1 <= l <= parent.dim:
        raise DimensionError(f"need 1 <= l <= dim(parent)={parent.dim}, got l={l}")
    coeff = rng.standard_normal((parent.dim, l))
    Q = orthonormalize(coeff)
    while Q.shape[1] < l:
        coeff = rng.standard_normal((parent.dim, l))
        Q = orthonormalize(coeff)
    return Subspace(parent.basis @ Q)


def project(S, x):
    return S.project(x)


def proj_norm(S, x):
    return S.proj_norm(x)


def _as_matrix(vectors, ambient_dim=None):
    """Stack a vector list into a (d, n) column matrix (n may be 0)."""
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        M = np.asarray(vectors, dtype=float)
    else:
        vectors = list(vectors)
        if not vectors:
            if ambient_dim is None:
                raise DimensionError("ambient dimension unknown for an empty vector list")
            return np.zeros((ambient_dim, 0))
        M = np.column_stack([np.asarray(v, dtype=float) for v in vectors])
    if ambient_dim is not None and M.shape[0] != ambient_dim:
        raise DimensionError(f"vectors have dimension {M.shape[0]}, expected {ambient_dim}")
    return M


def residual(vectors, x):
    """Component of ``x`` orthogonal to span(vectors); equals ``x`` for an empty list."""
    x = np.asarray(x, dtype=float)
    M = _as_matrix(vectors, ambient_dim=x.shape[0])
    if M.shape[1] == 0:
        return x.copy()
    B = orthonormalize(M)
    r = x - B @ (B.T @ x)
    r -= B @ (B.T @ r)  # second pass for orthogonality to working precision
    return r


def residual_norm(vectors, x):
    """``||Proj_{span(vectors)^perp}(x)||``; the robust-independence functional."""
    return float(np.linalg.norm(residual(vectors, x)))


def top_singular_vectors(Y, count):
    """Left singular vectors of ``[y_1, ..., y_r]`` for the ``count`` largest values.

    ``Y`` is a (d, r) matrix (or list) of unit-norm columns, ``count <= r``.
    The output columns are orthonormal.  Raises :class:`DegenerateInputError`
    when the effective rank of ``Y`` is below ``count``.
    """
    M = _as_matrix(Y)
    d, r = M.shape
    if not 1 <= count <= r:
        raise DimensionError(f"need 1 <= count <= r={r}, got count={count}")
    if r > d:
        raise DimensionError(f"more vectors ({r}) than ambient dimension ({d})")
    norms = np.linalg.norm(M, axis=0)
    if np.any(np.abs(norms - 1.0) > 1e-6):
        raise ValueError("columns must have unit norm")
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    rank = int(np.count_nonzero(s > ORTHO_TOL * s[0]))
    if rank < count:
        raise DegenerateInputError("input spans fewer directions than requested", rank)
    return np.ascontiguousarray(U[:, :count])


def gram_schmidt_residuals(vectors):
    """Sequential residual norms ||Proj_{span(y_j, j<i)^perp}(y_i)|| for i = 1..n."""
    M = _as_matrix(vectors)
    out = []
    for i in range(M.shape[1]):
        out.append(residual_norm(M[:, :i], M[:, i]))
    return np.array(out)
