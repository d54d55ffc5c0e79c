"""Ellipsoid / parallelepiped data model and the spherical reduction.

An ellipsoid is E = {x : x^T A^{-1} x = 1} for SPD A. Writing B = A^{1/2},
E is the image of the unit sphere under B, and centered parallelepipeds
inscribed in E correspond exactly to orthotopes Q = B^{-1}P inscribed in the
sphere, whose edge lengths satisfy sum(lambda_i^2) = 4.
"""

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    DegenerateParallelepiped,
    DimensionMismatch,
    DimensionTooLarge,
    NotInscribed,
    NotOrthotope,
)

LAMBDA_SUM_TOL = 1e-10
VERTEX_ENUM_CAP = 20
DET_REL_FLOOR = 1e-12


class Ellipsoid:
    """SPD matrix A with cached square root B and inverse C."""

    def __init__(self, a):
        self.A = linalg.spd_matrix(a)
        self.n = self.A.shape[0]
        w, q = np.linalg.eigh(self.A)
        self.eigenvalues = w
        self.eigenvectors = q
        self.B = linalg.sym_matrix((q * np.sqrt(w)) @ q.T)
        self.Binv = linalg.sym_matrix((q / np.sqrt(w)) @ q.T)
        self.C = linalg.sym_matrix((q / w) @ q.T)

    def boundary_residual(self, x):
        """|x^T C x - 1| for a single point."""
        x = np.asarray(x, dtype=float).ravel()
        return float(abs(x @ self.C @ x - 1.0))

    @classmethod
    def ball(cls, n, radius=1.0):
        return cls(np.eye(n) * radius**2)


class SphereOrthotope:
    """Orthonormal frame U (columns) and positive edge lengths lambda.

    Canonical data of a parallelepiped inscribed in the unit sphere:
    edges w_i = lambda_i u_i, constraint sum(lambda_i^2) = 4.
    """

    def __init__(self, u, lam, ortho_tol=linalg.ORTHO_TOL):
        self.U = linalg.require_orthogonal(np.asarray(u, dtype=float), tol=ortho_tol)
        self.lam = np.asarray(lam, dtype=float).ravel()
        if self.lam.size != self.U.shape[0]:
            raise DimensionMismatch("lambda length must match frame dimension")
        if np.any(self.lam <= 0.0):
            raise DegenerateParallelepiped("all edge lengths must be positive")
        s = float(np.sum(self.lam**2))
        if abs(s - 4.0) > LAMBDA_SUM_TOL:
            raise NotInscribed(f"sum(lambda^2) = {s!r}, expected 4")
        self.n = self.lam.size

    def to_dict(self):
        return {"U": self.U.tolist(), "lambda": self.lam.tolist()}


class Parallelepiped:
    """Edge vectors as the columns of V; centered at the origin."""

    def __init__(self, v):
        self.V = linalg.as_square(np.asarray(v, dtype=float))
        self.n = self.V.shape[0]
        scale = float(np.linalg.norm(self.V, 2))
        if abs(np.linalg.det(self.V)) <= DET_REL_FLOOR * scale**self.n:
            raise DegenerateParallelepiped("edge vectors are numerically dependent")

    def gram(self):
        return self.V.T @ self.V

    def to_dict(self):
        # JSON rows are edge vectors
        return {"n": self.n, "edges": self.V.T.tolist()}

    @classmethod
    def from_dict(cls, d):
        v = np.asarray(d["edges"], dtype=float).T
        if "n" in d and v.shape != (d["n"], d["n"]):
            raise DimensionMismatch("edge list inconsistent with declared n")
        return cls(v)


@dataclass(frozen=True)
class InscribedReport:
    inscribed: bool
    max_residual: float


def sign_vectors(n):
    """All 2^n sign patterns, lexicographic with -1 before +1, index 0 most significant."""
    if n > VERTEX_ENUM_CAP:
        raise DimensionTooLarge(f"refusing to enumerate 2^{n} sign vectors")
    eps = np.empty((2**n, n))
    for i in range(n):
        block = 2 ** (n - 1 - i)
        eps[:, i] = np.tile(np.repeat([-1.0, 1.0], block), 2**i)
    return eps


def vertices(p):
    """The 2^n vertices (1/2) sum_i eps_i v_i, ordered like sign_vectors."""
    eps = sign_vectors(p.n)
    return 0.5 * eps @ p.V.T


def all_plus_vertex(p):
    return 0.5 * np.sum(p.V, axis=1)


def is_inscribed(e, p, tol=1e-9):
    """Check all 2^n vertices against x^T C x = 1."""
    if e.n != p.n:
        raise DimensionMismatch("ellipsoid and parallelepiped dimensions differ")
    x = vertices(p)
    res = np.abs(np.einsum("ij,jk,ik->i", x, e.C, x) - 1.0)
    worst = float(res.max())
    return InscribedReport(inscribed=worst <= tol, max_residual=worst)


def orthotope_to_parallelepiped(e, q):
    """Map a unit-sphere orthotope to the inscribed parallelepiped v_i = lambda_i B u_i."""
    if e.n != q.n:
        raise DimensionMismatch("ellipsoid and orthotope dimensions differ")
    return Parallelepiped(e.B @ q.U @ np.diag(q.lam))


def parallelepiped_to_orthotope(e, p, ortho_tol=1e-8, sum_tol=LAMBDA_SUM_TOL):
    """Invert the reduction: W = B^{-1}V must have orthogonal columns and sum ||w_i||^2 = 4.

    Raises NotOrthotope when some pair of columns fails orthogonality (the
    parallelepiped cannot be inscribed, by the classification), NotInscribed
    when the lambda constraint fails.
    """
    if e.n != p.n:
        raise DimensionMismatch("ellipsoid and parallelepiped dimensions differ")
    w = e.Binv @ p.V
    lam = np.linalg.norm(w, axis=0)
    g = w.T @ w
    cosines = g / np.outer(lam, lam)
    np.fill_diagonal(cosines, 0.0)
    worst = float(np.max(np.abs(cosines)))
    if worst > ortho_tol:
        raise NotOrthotope(f"edge directions not orthogonal (max |cos| = {worst:.3e})")
    s = float(np.sum(lam**2))
    if abs(s - 4.0) > sum_tol:
        raise NotInscribed(f"sum(lambda^2) = {s!r}, expected 4")
    return SphereOrthotope(w / lam, lam)
