"""Signature-(1,n) Hermitian geometry on C^{n+1}.

The form is <w, v> = w_1 conj(v_{n+1}) + w_{n+1} conj(v_1) + sum_{j=2}^{n} w_j conj(v_j),
linear in the first slot.  The complex ball is where <w, w> < 0.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from chg.errors import CoincidentPoints, DimensionMismatch, NotBoundary, NotInPencil
from chg.projective import (
    POINT_TOL,
    ProjectivePoint,
    ProjectiveSubspace,
    _as_vector,
    complement,
    fs_distance,
    normalize_point,
)

BOUNDARY_TOL = 1e-9
TRIPLE_TOL = 1e-6


@lru_cache(maxsize=None)
def _hmatrix(n: int) -> np.ndarray:
    H = np.zeros((n + 1, n + 1))
    H[0, n] = H[n, 0] = 1.0
    for j in range(1, n):
        H[j, j] = 1.0
    H.flags.writeable = False
    return H


def hermitian_matrix(n: int) -> np.ndarray:
    """The Gram matrix H of the form: anti-diagonal corners and an identity block."""
    return _hmatrix(n)


@dataclass(frozen=True)
class HermitianContext:
    n: int

    @property
    def H(self) -> np.ndarray:
        return hermitian_matrix(self.n)


def herm(w, v) -> complex:
    w = _as_vector(w)
    v = _as_vector(v)
    if w.shape != v.shape:
        raise DimensionMismatch(f"lengths {w.shape[0]} and {v.shape[0]}")
    return complex(w[0] * np.conj(v[-1]) + w[-1] * np.conj(v[0])
                   + np.dot(w[1:-1], np.conj(v[1:-1])))


def herm_norm_value(w) -> float:
    """<w, w> / |w|^2 for a single vector."""
    w = _as_vector(w)
    return herm(w, w).real / float(np.vdot(w, w).real)


def herm_values(W: np.ndarray) -> np.ndarray:
    """Row-wise <w, w> / |w|^2."""
    num = 2.0 * np.real(W[:, 0] * np.conj(W[:, -1])) + np.sum(np.abs(W[:, 1:-1]) ** 2, axis=1)
    return num / np.sum(np.abs(W) ** 2, axis=1)


class Position(enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    EXTERIOR = "exterior"


@dataclass(frozen=True)
class BallPosition:
    classification: Position
    value: float


def ball_position(p, tol: float = BOUNDARY_TOL) -> BallPosition:
    value = herm_norm_value(p)
    if value < -tol:
        cls = Position.INTERIOR
    elif value > tol:
        cls = Position.EXTERIOR
    else:
        cls = Position.BOUNDARY
    return BallPosition(cls, value)


def is_boundary(p, tol: float = BOUNDARY_TOL) -> bool:
    return ball_position(p, tol).classification is Position.BOUNDARY


def polar(P) -> ProjectiveSubspace:
    """The <,>-orthogonal complement P^perp."""
    if isinstance(P, ProjectivePoint) or not isinstance(P, ProjectiveSubspace):
        from chg.projective import span
        P = span([P])
    return complement(P, form=hermitian_matrix(P.dim_n))


def project_to_boundary(w) -> ProjectivePoint:
    """Nearby boundary point obtained by balancing the +/- eigencomponents of H.

    Keeps real vectors real and keeps vectors inside H-invariant subspaces.
    """
    w = _as_vector(w)
    n = w.shape[0] - 1
    Hw = hermitian_matrix(n) @ w
    plus = (w + Hw) / 2
    minus = (w - Hw) / 2
    a, b = np.linalg.norm(plus), np.linalg.norm(minus)
    if a == 0 or b == 0:
        raise NotBoundary("vector has no component in one eigenspace of H")
    return normalize_point(plus / a + minus / b)


def _check_triple(x, y, z, tol):
    pts = [_as_vector(p) for p in (x, y, z)]
    for p in pts:
        if not is_boundary(p, tol):
            raise NotBoundary(f"<w,w>/|w|^2 = {herm_norm_value(p):.3e} exceeds {tol:.1e}")
    for i, j in ((0, 1), (1, 2), (0, 2)):
        if fs_distance(pts[i], pts[j]) < POINT_TOL:
            raise CoincidentPoints("boundary triple has repeated points")
    return pts


def cartan_invariant(x, y, z, tol: float = BOUNDARY_TOL) -> float:
    """arg(-<x,y><y,z><z,x>) for a triple of distinct boundary points."""
    x, y, z = _check_triple(x, y, z, tol)
    return float(np.angle(-herm(x, y) * herm(y, z) * herm(z, x)))


class TripleClass(enum.Enum):
    COMPLEX_LINE = "complex-line"
    LAGRANGIAN = "lagrangian"
    GENERIC = "generic"


def triple_class(x, y, z, tol: float = TRIPLE_TOL, boundary_tol: float = BOUNDARY_TOL) -> TripleClass:
    A = cartan_invariant(x, y, z, boundary_tol)
    if abs(abs(2 * A) - np.pi) < tol:
        return TripleClass.COMPLEX_LINE
    if abs(A) < tol:
        return TripleClass.LAGRANGIAN
    return TripleClass.GENERIC


def _pencil_direction(p: np.ndarray, line: ProjectiveSubspace, tol: float) -> np.ndarray:
    """A point of ``line`` other than ``p``, after checking the pencil conditions."""
    if not line.contains(p, tol):
        raise NotInPencil("line does not pass through the base point")
    P = polar(normalize_point(p))
    if not P.contains(line, tol):
        raise NotInPencil("line is not contained in the tangent hyperplane")
    # Component of the frame orthogonal to p: never a multiple of p.
    pu = p / np.linalg.norm(p)
    F = line.frame - np.outer(pu, pu.conj() @ line.frame)
    k = int(np.argmax(np.linalg.norm(F, axis=0)))
    return F[:, k]


def pencil_distance(p, l1: ProjectiveSubspace, l2: ProjectiveSubspace,
                    tol: float = 1e-8) -> float:
    """Distance between two lines of the pencil at the boundary point p."""
    p = _as_vector(p)
    if not is_boundary(p):
        raise NotInPencil("base point is not on the boundary")
    q1 = _pencil_direction(p, l1, tol)
    q2 = _pencil_direction(p, l2, tol)
    g12 = herm(q1, q2)
    g11 = herm(q1, q1).real
    g22 = herm(q2, q2).real
    c = np.sqrt(max(0.0, min(1.0, abs(g12) ** 2 / (g11 * g22))))
    return float(np.arccos(c))


def dist_to_tangent_hyperplane(q, p) -> float:
    """Angle between [q] and the hyperplane p^perp, i.e. arcsin of |(q, Hp)| / |q||Hp|."""
    q = _as_vector(q)
    p = _as_vector(p)
    Hp = hermitian_matrix(p.shape[0] - 1) @ p
    s = abs(np.vdot(Hp, q)) / (np.linalg.norm(q) * np.linalg.norm(Hp))
    return float(np.arcsin(min(1.0, s)))


def dist_to_hyperplanes(Q: np.ndarray, P: np.ndarray) -> np.ndarray:
    """For rows q of Q, the minimum over rows p of P of the distance to p^perp."""
    n = Q.shape[1] - 1
    HP = P @ hermitian_matrix(n)
    HP = HP / np.linalg.norm(HP, axis=1, keepdims=True)
    Qn = Q / np.linalg.norm(Q, axis=1, keepdims=True)
    s = np.abs(Qn @ HP.conj().T)
    return np.arcsin(np.clip(s.min(axis=1), 0.0, 1.0))
