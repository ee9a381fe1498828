"""Complex projective linear algebra: points, subspaces, spans, meets and lines.

Points are stored as unit vectors in C^{n+1} with a fixed phase; subspaces
as orthonormal column frames.  Rank decisions are made from singular values
relative to the largest one.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from chg.errors import CoincidentPoints, DimensionMismatch, ZeroVector

ZERO_NORM = 1e-14
PHASE_TIE = 1e-12
RANK_TOL = 1e-9
POINT_TOL = 1e-9
ORTHO_TOL = 1e-10


def _as_vector(v) -> np.ndarray:
    if isinstance(v, ProjectivePoint):
        return v.coords
    return np.asarray(v, dtype=complex).reshape(-1)


def phase_fix(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so its largest-magnitude entry is real and positive.

    Ties within ``PHASE_TIE`` go to the first index.  Works on the flattened
    array, so matrices are handled as well.
    """
    flat = v.reshape(-1)
    mags = np.abs(flat)
    k = int(np.argmax(mags >= mags.max() - PHASE_TIE))
    return v * (np.conj(flat[k]) / mags[k])


@dataclass(frozen=True, eq=False)
class ProjectivePoint:
    """A point of P^n as its canonical unit representative."""

    coords: np.ndarray

    @property
    def dim_n(self) -> int:
        return self.coords.shape[0] - 1

    def __eq__(self, other):
        if not isinstance(other, ProjectivePoint):
            return NotImplemented
        return (self.coords.shape == other.coords.shape
                and bool(np.allclose(self.coords, other.coords, atol=POINT_TOL, rtol=0)))

    __hash__ = None

    def __array__(self, dtype=None, copy=None):
        return self.coords if dtype is None else self.coords.astype(dtype)

    def __repr__(self):
        body = ", ".join(f"{c.real:.6g}{c.imag:+.6g}j" for c in self.coords)
        return f"ProjectivePoint([{body}])"


def normalize_point(v) -> ProjectivePoint:
    """Canonical representative of the projective class of ``v``.

    >>> normalize_point([0, 0, 5]).coords.real
    array([0., 0., 1.])
    """
    w = np.array(_as_vector(v), dtype=complex)
    nrm = np.linalg.norm(w)
    if not np.isfinite(nrm) or nrm <= ZERO_NORM:
        raise ZeroVector(f"cannot projectivize vector of norm {nrm:.3e}")
    w = phase_fix(w / nrm)
    w.flags.writeable = False
    return ProjectivePoint(w)


def basis_point(i: int, n: int) -> ProjectivePoint:
    """The coordinate point [e_{i}] of P^n, with 1-based ``i`` as in e_1..e_{n+1}."""
    v = np.zeros(n + 1, dtype=complex)
    v[i - 1] = 1.0
    return normalize_point(v)


def _orthonormal_range(M: np.ndarray, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the column space of M."""
    if M.size == 0:
        return np.zeros((M.shape[0], 0), dtype=complex)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((M.shape[0], 0), dtype=complex)
    r = int(np.sum(s > rank_tol * s[0]))
    return U[:, :r]


def nullspace(M: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of ker M, with an absolute singular-value cutoff.

    Callers pass matrices whose rows are (near) unit vectors, so an
    absolute cutoff is scale-appropriate.
    """
    cols = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(cols, dtype=complex)
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    r = int(np.sum(s > tol))
    return Vh[r:].conj().T


@dataclass(frozen=True, eq=False)
class ProjectiveSubspace:
    """Projectivization of the column span of an orthonormal ``frame``."""

    frame: np.ndarray

    @property
    def proj_dim(self) -> int:
        return self.frame.shape[1] - 1

    @property
    def dim_n(self) -> int:
        return self.frame.shape[0] - 1

    def projector(self) -> np.ndarray:
        return self.frame @ self.frame.conj().T

    def residual(self, v) -> float:
        """Relative norm of the component of ``v`` orthogonal to the subspace."""
        w = _as_vector(v)
        r = w - self.frame @ (self.frame.conj().T @ w)
        return float(np.linalg.norm(r) / np.linalg.norm(w))

    def distance(self, v) -> float:
        """Fubini-Study distance from the point [v] to the subspace."""
        w = _as_vector(v)
        w = w / np.linalg.norm(w)
        inside = np.linalg.norm(self.frame.conj().T @ w)
        outside = np.linalg.norm(w - self.frame @ (self.frame.conj().T @ w))
        return float(np.arctan2(outside, inside))

    def contains(self, item, tol: float = POINT_TOL) -> bool:
        if isinstance(item, ProjectiveSubspace):
            return all(self.residual(c) < tol for c in item.frame.T)
        return self.residual(item) < tol

    def point(self) -> ProjectivePoint:
        """The subspace as a point; only valid when ``proj_dim == 0``."""
        if self.proj_dim != 0:
            raise DimensionMismatch(f"subspace has dimension {self.proj_dim}, not a point")
        return normalize_point(self.frame[:, 0])

    def __eq__(self, other):
        if not isinstance(other, ProjectiveSubspace):
            return NotImplemented
        return (self.frame.shape == other.frame.shape
                and subspace_distance(self, other) < POINT_TOL)

    __hash__ = None

    def __repr__(self):
        return f"ProjectiveSubspace(proj_dim={self.proj_dim}, n={self.dim_n})"


def subspace_from_vectors(vectors: np.ndarray, rank_tol: float = RANK_TOL) -> ProjectiveSubspace:
    frame = _orthonormal_range(np.asarray(vectors, dtype=complex), rank_tol)
    if frame.shape[1] == 0:
        raise ZeroVector("no nonzero vectors to span")
    frame.flags.writeable = False
    return ProjectiveSubspace(frame)


def subspace_distance(a: ProjectiveSubspace, b: ProjectiveSubspace) -> float:
    """Spectral-norm distance between orthogonal projectors."""
    return float(np.linalg.norm(a.projector() - b.projector(), 2))


def principal_angles(a: ProjectiveSubspace, b: ProjectiveSubspace) -> np.ndarray:
    """Principal angles between the underlying linear subspaces, ascending."""
    s = np.linalg.svd(a.frame.conj().T @ b.frame, compute_uv=False)
    return np.arccos(np.clip(s, 0.0, 1.0))


Spannable = Union[ProjectivePoint, ProjectiveSubspace, np.ndarray, Sequence[complex]]


def _columns(item) -> np.ndarray:
    if isinstance(item, ProjectiveSubspace):
        return item.frame
    return _as_vector(item).reshape(-1, 1)


def span(items: Iterable[Spannable], rank_tol: float = RANK_TOL) -> ProjectiveSubspace:
    """Smallest projective subspace containing every item."""
    cols = [_columns(it) for it in items]
    if not cols:
        raise ValueError("span of an empty collection")
    dims = {c.shape[0] for c in cols}
    if len(dims) != 1:
        raise DimensionMismatch(f"mixed ambient dimensions {sorted(dims)}")
    return subspace_from_vectors(np.hstack(cols), rank_tol)


def complement(P: ProjectiveSubspace, form: Optional[np.ndarray] = None,
               tol: float = RANK_TOL) -> Optional[ProjectiveSubspace]:
    """Orthogonal complement of P for the Hermitian ``form`` (standard if None).

    The pairing is <w, v> = w^T F conj(v); returns None when the complement
    is trivial.
    """
    V = P.frame
    rows = V.conj().T if form is None else V.conj().T @ np.asarray(form).T
    # Row-normalize so the absolute null-space cutoff is meaningful.
    rows = rows / np.linalg.norm(rows, axis=1, keepdims=True)
    N = nullspace(rows, tol)
    if N.shape[1] == 0:
        return None
    return subspace_from_vectors(N)


def meet(a: ProjectiveSubspace, b: ProjectiveSubspace,
         tol: float = RANK_TOL) -> Optional[ProjectiveSubspace]:
    """Intersection of two subspaces, or None when it is empty."""
    if a.dim_n != b.dim_n:
        raise DimensionMismatch(f"ambient dimensions {a.dim_n} and {b.dim_n}")
    blocks = []
    for s in (a, b):
        c = complement(s, tol=tol)
        if c is not None:
            blocks.append(c.frame.conj().T)
    if not blocks:
        return a
    N = nullspace(np.vstack(blocks), tol)
    if N.shape[1] == 0:
        return None
    return subspace_from_vectors(N)


def fs_distance(p, q) -> float:
    """Fubini-Study distance in [0, pi/2].

    Evaluated as atan2(|sin|, |cos|) with the sine taken from the orthogonal
    residual, which keeps tiny angles accurate.
    """
    u = _as_vector(p)
    v = _as_vector(q)
    if u.shape != v.shape:
        raise DimensionMismatch(f"lengths {u.shape[0]} and {v.shape[0]}")
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    c = np.vdot(u, v)
    s = np.linalg.norm(v - c * u)
    return float(np.arctan2(s, abs(c)))


def pairwise_fs(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Matrix of Fubini-Study distances between rows of A and rows of B."""
    A = A / np.linalg.norm(A, axis=1, keepdims=True)
    B = B / np.linalg.norm(B, axis=1, keepdims=True)
    c = np.abs(A.conj() @ B.T)
    return np.arccos(np.clip(c, 0.0, 1.0))


def line_through(p, q, tol: float = POINT_TOL) -> ProjectiveSubspace:
    if fs_distance(p, q) < tol:
        raise CoincidentPoints("points coincide; no unique line")
    return span([p, q])


def pair_index(m: int):
    """Lexicographic basis (i, j), i < j, of the second exterior power of C^m."""
    return list(combinations(range(m), 2))


def second_compound(M) -> np.ndarray:
    """Matrix of the induced action of M on the wedge square, lexicographic basis."""
    M = np.asarray(M, dtype=complex)
    pairs = pair_index(M.shape[0])
    I = np.array([p[0] for p in pairs])
    J = np.array([p[1] for p in pairs])
    return (M[np.ix_(I, I)] * M[np.ix_(J, J)] - M[np.ix_(I, J)] * M[np.ix_(J, I)])


def wedge(u, v) -> np.ndarray:
    u = _as_vector(u)
    v = _as_vector(v)
    return np.array([u[i] * v[j] - u[j] * v[i] for i, j in pair_index(u.shape[0])])


@dataclass(frozen=True, eq=False)
class LinePoint:
    """Plücker image of a projective line."""

    plucker: ProjectivePoint

    def __eq__(self, other):
        if not isinstance(other, LinePoint):
            return NotImplemented
        return self.plucker == other.plucker

    __hash__ = None


def plucker(line: ProjectiveSubspace) -> LinePoint:
    if line.proj_dim != 1:
        raise DimensionMismatch(f"expected a line, got dimension {line.proj_dim}")
    return LinePoint(normalize_point(wedge(line.frame[:, 0], line.frame[:, 1])))
