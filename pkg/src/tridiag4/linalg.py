"""Dense complex linear algebra kernels for fixed small sizes (n, m <= 7).

Everything here is a pure function of its inputs.  Matrices are plain
``numpy.ndarray`` of dtype complex128; rank decisions are always made
relative to the largest singular value.
"""

from __future__ import annotations

import warnings

import numpy as np

from .errors import ConvergenceFailure, DependentInput, RepeatedEigenvalueWarning

#: Default relative tolerance for rank/dependence decisions.
DEFAULT_TOL = 1e-10

#: A coordinate below this (relative) threshold counts as zero when picking
#: the phase-fixing coordinate of a projective representative.
PHASE_TOL = 1e-12

MAX_DIM = 7


def as_matrix(m) -> np.ndarray:
    """Validate and convert to a complex matrix with finite entries."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got array of ndim {a.ndim}")
    if a.shape[0] > MAX_DIM or a.shape[1] > MAX_DIM:
        raise ValueError(f"matrix dimensions {a.shape} exceed the supported size {MAX_DIM}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def as_vector(v) -> np.ndarray:
    a = np.asarray(v, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(a)):
        raise ValueError("vector entries must be finite")
    return a


def adjoint(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose.  An involution: adjoint(adjoint(m)) == m."""
    return np.conj(np.asarray(m, dtype=complex)).T.copy()


def matrix_norm(m) -> float:
    """Spectral norm (largest singular value)."""
    return float(np.linalg.norm(np.asarray(m, dtype=complex), 2))


def eigen(m, tol: float = 1e-8):
    """Eigenpairs of a square matrix with n <= 4.

    Returns a list of ``(eigenvalue, unit eigenvector)`` sorted by
    (real, imag) of the eigenvalue.  Repeated eigenvalues appear with
    their multiplicity; when eigenvalues cluster within ``1e-7`` of the
    matrix scale a :class:`RepeatedEigenvalueWarning` is issued, since
    multiplicity read off floating point is an estimate.

    Eigenvectors are recomputed as the smallest right singular vector of
    ``m - lam*I``, which keeps the residual ``||m v - lam v||`` tiny even
    for defective eigenvalues.

    Raises
    ------
    ConvergenceFailure
        If the underlying QR iteration fails or a residual exceeds
        ``tol * ||m||``.
    """
    a = as_matrix(m)
    n = a.shape[0]
    if a.shape[0] != a.shape[1] or n > 4:
        raise ValueError("eigen expects a square matrix with n <= 4")
    try:
        values = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails at n <= 4
        raise ConvergenceFailure(f"eigenvalue iteration failed: {exc}") from exc
    order = np.lexsort((values.imag, values.real))
    values = values[order]

    scale = matrix_norm(a)
    gap_scale = max(scale, 1e-300)
    repeated = False
    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= 1e-7 * gap_scale:
                repeated = True
    if repeated:
        warnings.warn(
            "matrix has (numerically) repeated eigenvalues; multiplicities are estimates",
            RepeatedEigenvalueWarning,
            stacklevel=2,
        )

    pairs = []
    eye = np.eye(n)
    for lam in values:
        _, sev, vh = np.linalg.svd(a - lam * eye)
        vec = np.conj(vh[-1])
        residual = float(sev[-1])
        if residual > tol * gap_scale:
            raise ConvergenceFailure(
                f"eigenpair residual {residual:.3e} exceeds {tol:.1e} * ||m||"
            )
        pairs.append((complex(lam), vec))
    return pairs


def rank_svd(m, tol: float = DEFAULT_TOL):
    """Numerical rank and singular values.

    Rank counts singular values above ``tol * sigma_max``; the zero
    matrix has rank 0.  Singular values come back nonincreasing.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = as_matrix(m)
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0, s
    return int(np.sum(s > tol * s[0])), s


def nullspace(m, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical nullspace."""
    a = as_matrix(m)
    _, s, vh = np.linalg.svd(a)
    cutoff = tol * (s[0] if s.size and s[0] > 0 else 1.0)
    rank = int(np.sum(s > cutoff))
    return np.conj(vh[rank:]).T.copy()


def orthonormalize(vectors, tol: float = DEFAULT_TOL):
    """Gram-Schmidt with re-orthogonalization.

    Preserves the span of every prefix of the input list.  Raises
    :class:`DependentInput` when a vector's residual after projection is
    below ``tol`` relative to its original norm.
    """
    out: list[np.ndarray] = []
    for k, v in enumerate(vectors):
        u = as_vector(v)
        norm0 = np.linalg.norm(u)
        if norm0 == 0.0:
            raise DependentInput(f"vector {k} is zero")
        # two projection passes: classical Gram-Schmidt loses orthogonality
        # for nearly dependent inputs, twice is enough at these sizes
        for _ in range(2):
            for q in out:
                u = u - np.vdot(q, u) * q
        norm1 = np.linalg.norm(u)
        if norm1 <= tol * norm0:
            raise DependentInput(f"vector {k} is dependent on its predecessors (residual {norm1:.2e})")
        out.append(u / norm1)
    return out


def det(m) -> complex:
    """Determinant via LU; exact degree behaviour for n <= 4."""
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValueError("det expects a square matrix")
    return complex(np.linalg.det(a))


def canonical_projective(v) -> np.ndarray:
    """Canonical representative of a projective point.

    Unit norm, and the first coordinate with ``|coord| > 1e-12 * norm``
    is rotated to be real positive.  This makes the representation
    unique and point deduplication deterministic.
    """
    a = as_vector(v)
    norm = np.linalg.norm(a)
    if norm == 0.0:
        raise ValueError("projective point must be nonzero")
    a = a / norm
    for x in a:
        if abs(x) > PHASE_TOL:
            a = a * (np.conj(x) / abs(x))
            break
    return a


def projective_distance(u, v) -> float:
    """sin of the angle between the lines spanned by u and v (Fubini-Study)."""
    a = as_vector(u)
    b = as_vector(v)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("projective points must be nonzero")
    c = abs(np.vdot(a, b)) / (na * nb)
    return float(np.sqrt(max(0.0, 1.0 - min(1.0, c) ** 2)))


def _power_traces(m: np.ndarray, n: int):
    traces = []
    p = m
    for _ in range(n):
        traces.append(np.trace(p))
        p = p @ m
    return traces


def charpoly_elementary(m: np.ndarray):
    """Elementary symmetric functions e_1..e_n of the eigenvalues.

    Computed from power traces by Newton's identities, so that
    ``det(lam*I - m) = lam^n - e1 lam^(n-1) + e2 lam^(n-2) - ...``.
    """
    a = np.asarray(m, dtype=complex)
    n = a.shape[0]
    p = _power_traces(a, n)
    e = [1.0 + 0j]
    for k in range(1, n + 1):
        acc = 0.0 + 0j
        for i in range(1, k + 1):
            acc += (-1) ** (i - 1) * e[k - i] * p[i - 1]
        e.append(acc / k)
    return e[1:]


_EYE4 = np.eye(4, dtype=complex)


def _adj4(a: np.ndarray):
    """Unvalidated 4x4 adjugate via Cayley-Hamilton.

    Returns ``(adj, a2, stats)`` where ``stats = (p1, p2, e1, e2)`` feeds
    the directional derivative.  ``a @ adj == det(a) * I`` identically,
    so at a rank-3 point the adjugate has rank one and spans the kernel.
    """
    a2 = a @ a
    a3 = a2 @ a
    p1 = a.trace()
    p2 = a2.trace()
    p3 = a3.trace()
    e1 = p1
    e2 = (e1 * p1 - p2) / 2.0
    e3 = (e2 * p1 - e1 * p2 + p3) / 3.0
    adj = -a3 + e1 * a2 - e2 * a + e3 * _EYE4
    return adj, a2, (p1, p2, e1, e2)


def _adj4_dir(a: np.ndarray, a2: np.ndarray, stats, b: np.ndarray) -> np.ndarray:
    """Directional derivative of the 4x4 adjugate at ``a`` along ``b``.

    Differentiates the Cayley-Hamilton expression exactly via
    d tr(a^k) = k tr(a^(k-1) b); valid at singular ``a`` as well.
    """
    p1, p2, e1, e2 = stats
    dp1 = b.trace()
    dp2 = 2.0 * (a * b.T).sum()
    dp3 = 3.0 * (a2 * b.T).sum()
    de1 = dp1
    de2 = (de1 * p1 + e1 * dp1 - dp2) / 2.0
    de3 = (de2 * p1 + e2 * dp1 - de1 * p2 - e1 * dp2 + dp3) / 3.0
    da2 = a @ b + b @ a
    da3 = a @ da2 + b @ a2
    return -da3 + de1 * a2 + e1 * da2 - de2 * a - e2 * b + de3 * _EYE4


def adjugate(m) -> np.ndarray:
    """Adjugate of a square matrix, n <= 4, via Cayley-Hamilton.

    Satisfies ``m @ adjugate(m) == det(m) * I`` identically, so at a
    rank ``n-1`` point the adjugate has rank one and its columns span
    the kernel of ``m``.
    """
    a = as_matrix(m)
    n = a.shape[0]
    if a.shape[0] != a.shape[1] or n > 4:
        raise ValueError("adjugate expects a square matrix with n <= 4")
    if n == 1:
        return np.eye(1, dtype=complex)
    if n == 4:
        return _adj4(a)[0]
    e = charpoly_elementary(a)
    eye = np.eye(n)
    if n == 2:
        return e[0] * eye - a
    return a @ a - e[0] * a + e[1] * eye


def adjugate_directional(m, b) -> np.ndarray:
    """Directional derivative of the 4x4 adjugate at ``m`` along ``b``."""
    a = as_matrix(m)
    d = as_matrix(b)
    if a.shape != (4, 4) or d.shape != (4, 4):
        raise ValueError("adjugate_directional is implemented for 4x4 matrices")
    _, a2, stats = _adj4(a)
    return _adj4_dir(a, a2, stats, d)
