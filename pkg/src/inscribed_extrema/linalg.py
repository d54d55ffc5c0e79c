"""Dense symmetric/orthogonal kernels for small n (n <= ~16).

Everything operates on plain float64 ndarrays. Validation helpers return the
cleaned-up array so callers can chain them.
"""

import numpy as np

from .errors import DimensionMismatch, NotPositiveDefinite

ORTHO_TOL = 1e-10
SPD_REL_TOL = 1e-12


def as_square(a):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def sym_matrix(a):
    """Symmetrize a square array: (A + A^T)/2. Round-off hygiene, not validation."""
    a = as_square(a)
    return 0.5 * (a + a.T)


def spd_matrix(a, rel_tol=SPD_REL_TOL):
    """Symmetrize and verify positive definiteness.

    Raises NotPositiveDefinite when the smallest eigenvalue is not above
    rel_tol times the largest.
    """
    s = sym_matrix(a)
    w = np.linalg.eigvalsh(s)
    if w[-1] <= 0 or w[0] <= rel_tol * w[-1]:
        raise NotPositiveDefinite(
            f"matrix is not positive definite (eigenvalues {w.min():.3e}..{w.max():.3e})"
        )
    return s


def eigh(s):
    """Eigendecomposition of a symmetric matrix, eigenvalues ascending."""
    s = sym_matrix(s)
    w, q = np.linalg.eigh(s)
    return w, q


def spd_sqrt(a):
    """Positive square root of an SPD matrix."""
    a = spd_matrix(a)
    w, q = np.linalg.eigh(a)
    return sym_matrix((q * np.sqrt(w)) @ q.T)


def spd_inverse(a):
    """Inverse of an SPD matrix through its eigendecomposition."""
    a = spd_matrix(a)
    w, q = np.linalg.eigh(a)
    return sym_matrix((q / w) @ q.T)


def orthogonality_defect(u):
    u = np.asarray(u, dtype=float)
    n = u.shape[0]
    return float(np.max(np.abs(u.T @ u - np.eye(n))))


def require_orthogonal(u, tol=ORTHO_TOL, name="U"):
    u = as_square(u)
    d = orthogonality_defect(u)
    if d > tol:
        raise DimensionMismatch(f"{name} is not orthogonal (defect {d:.3e} > {tol:.1e})")
    return u


def unit_vector(y, tol=ORTHO_TOL):
    y = np.asarray(y, dtype=float).ravel()
    nrm = float(np.linalg.norm(y))
    if abs(nrm - 1.0) > tol:
        raise DimensionMismatch(f"vector norm {nrm} is not 1 within {tol:.1e}")
    return y


def householder_to(a, b):
    """Orthogonal W with W a = b, for unit vectors a, b.

    Reflection through (a - b) composed with the reflection through a; the
    composition has determinant +1 and fixes nothing spurious. Returns the
    identity when a and b agree to within 1e-14.
    """
    a = unit_vector(a)
    b = unit_vector(b)
    if a.shape != b.shape:
        raise DimensionMismatch("a and b must have the same length")
    n = a.size
    v = a - b
    nv = np.linalg.norm(v)
    if nv < 1e-14:
        return np.eye(n)
    v = v / nv
    h = np.eye(n) - 2.0 * np.outer(v, v)       # swaps a and b
    r = 2.0 * np.outer(a, a) - np.eye(n)       # fixes a, reverses a-perp
    return h @ r


def random_orthogonal(n, seed):
    """Haar-distributed orthogonal matrix, deterministic given the seed.

    seed may be an int or an already-constructed numpy Generator (the oracle
    feeds counter-based per-trial generators through here).
    """
    if n < 1:
        raise DimensionMismatch("n must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    g = rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    # sign fix: make the QR factor unique, which is what makes Q Haar
    q = q * np.where(np.diag(r) < 0.0, -1.0, 1.0)
    return q
