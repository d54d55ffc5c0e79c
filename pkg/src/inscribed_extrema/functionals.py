"""Total edge length L, total facet area S, their sharp bounds, and the
auxiliary inequality quantities used by the property suites.

For an orthotope (U, lambda) on the unit sphere mapped into E by B:
    L = 2^(n-1) * sum_i lambda_i * sqrt(u_i^T A u_i)
    S = 2 * sum_i sqrt(det G_{-i,-i})      (Gram route, G = V^T V)
      = 2 * sqrt(det A) * prod(lambda) * sum_i sqrt((U^T C U)_ii) / lambda_i

The sampling helpers (phi, beta_product_sum, maclaurin_gap) accept either a
single vector or a batch with vectors along the last axis.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConstraintViolated,
    DimensionMismatch,
    NonPositiveInput,
    SingularGram,
    WrongDimension,
)

CONSTRAINT_TOL = 1e-10


@dataclass(frozen=True)
class FunctionalValue:
    value: float
    functional_kind: str  # "edge_length" | "facet_area"
    condition: float      # max edge length / min edge length

    def __float__(self):
        return float(self.value)


def diag_quadratic(u, m):
    """diag(U^T M U) without forming the full product."""
    return np.einsum("ji,jk,ki->i", u, m, u)


def edge_length_total(e, q):
    if e.n != q.n:
        raise DimensionMismatch("ellipsoid and orthotope dimensions differ")
    g = diag_quadratic(q.U, e.A)
    value = 2.0 ** (e.n - 1) * float(np.sum(q.lam * np.sqrt(g)))
    cond = float(q.lam.max() / q.lam.min())
    return FunctionalValue(value, "edge_length", cond)


def facet_area_total_gram(p):
    """S from principal minors of the Gram matrix (the primary evaluator)."""
    g = p.gram()
    n = p.n
    idx = np.arange(n)
    total = 0.0
    for i in range(n):
        keep = idx != i
        minor = np.linalg.det(g[np.ix_(keep, keep)])
        if minor <= 0.0:
            raise SingularGram(f"principal minor {i} is not positive ({minor:.3e})")
        total += np.sqrt(minor)
    lens = np.linalg.norm(p.V, axis=0)
    return FunctionalValue(float(2.0 * total), "facet_area", float(lens.max() / lens.min()))


def facet_area_total_factored(e, q):
    """S via the factored identity; kept as a cross-check of the Gram route."""
    if e.n != q.n:
        raise DimensionMismatch("ellipsoid and orthotope dimensions differ")
    gc = diag_quadratic(q.U, e.C)
    det_a = float(np.prod(e.eigenvalues))
    value = 2.0 * np.sqrt(det_a) * float(np.prod(q.lam)) * float(
        np.sum(np.sqrt(gc) / q.lam)
    )
    cond = float(q.lam.max() / q.lam.min())
    return FunctionalValue(value, "facet_area", cond)


def bound_L_max(e):
    """Sharp upper bound 2^n sqrt(tr A) for the total edge length."""
    return 2.0**e.n * float(np.sqrt(np.trace(e.A)))


def bound_S_max(e):
    """Sharp upper bound 2^n n^(-(n-2)/2) sqrt(det A) sqrt(tr A^-1)."""
    n = e.n
    det_a = float(np.prod(e.eigenvalues))
    tr_c = float(np.sum(1.0 / e.eigenvalues))
    return 2.0**n * n ** (-(n - 2) / 2.0) * np.sqrt(det_a) * np.sqrt(tr_c)


def phi(lam):
    """Phi(lambda) = prod(lambda) * sqrt(sum(lambda^-2)).

    Maximized at lambda_i = 2/sqrt(n) subject to sum(lambda^2) = 4, where it
    equals 2^(n-1) n^((2-n)/2). Batch-aware along the last axis.
    """
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0.0):
        raise NonPositiveInput("phi requires strictly positive entries")
    return np.prod(lam, axis=-1) * np.sqrt(np.sum(lam**-2.0, axis=-1))


def phi_max(n):
    return 2.0 ** (n - 1) * n ** ((2 - n) / 2.0)


def beta_product_sum(beta):
    """(prod beta) * (sum 1/beta) for beta on the unit sphere, all entries positive.

    The caller asserts the bound n^((3-n)/2). Batch-aware along the last axis.
    """
    beta = np.asarray(beta, dtype=float)
    if np.any(beta <= 0.0):
        raise ConstraintViolated("beta entries must be positive")
    s = np.sum(beta**2, axis=-1)
    if np.any(np.abs(s - 1.0) > CONSTRAINT_TOL):
        raise ConstraintViolated("sum(beta^2) must equal 1")
    return np.prod(beta, axis=-1) * np.sum(1.0 / beta, axis=-1)


def maclaurin_gap(x):
    """prod(x) - mean(x) for positive x with mean(1/x) = 1; nonnegative.

    Batch-aware along the last axis.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ConstraintViolated("entries must be positive")
    hm = np.mean(1.0 / x, axis=-1)
    if np.any(np.abs(hm - 1.0) > CONSTRAINT_TOL):
        raise ConstraintViolated("mean(1/x) must equal 1")
    return np.prod(x, axis=-1) - np.mean(x, axis=-1)


def planar_identity_check(a):
    """For 2x2 SPD A return (det A * tr A^-1, tr A); the two agree identically."""
    a = np.asarray(a, dtype=float)
    if a.shape != (2, 2):
        raise WrongDimension("identity holds for n=2 only")
    det = float(np.linalg.det(a))
    tr_inv = float(np.trace(np.linalg.inv(a)))
    return det * tr_inv, float(np.trace(a))
