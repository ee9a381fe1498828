"""The group PU(1,n): membership, sampling, Cartan decomposition, pseudo-projective maps."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from chg.errors import DimensionMismatch, InKernel, NotConverged, NumericalFailure, ZeroMatrix
from chg.hermitian import hermitian_matrix
from chg.projective import (
    RANK_TOL,
    ProjectivePoint,
    ProjectiveSubspace,
    _as_vector,
    normalize_point,
    phase_fix,
)

GROUP_TOL = 1e-9
CARTAN_TOL = 1e-8
ELLIPTIC_TOL = 1e-12
PP_TOL = 1e-10
PP_WINDOW = 5


def _as_matrix(g) -> np.ndarray:
    if isinstance(g, GroupElement):
        return g.lift
    if isinstance(g, PseudoProjectiveMap):
        return g.matrix
    return np.asarray(g, dtype=complex)


def canonical_matrix(M) -> np.ndarray:
    """Frobenius-normalized, phase-fixed representative of the projective class of M."""
    M = _as_matrix(M)
    nrm = np.linalg.norm(M)
    if nrm == 0:
        raise ZeroMatrix("zero matrix has no projective class")
    return phase_fix(M / nrm)


def unit_det(M) -> np.ndarray:
    """Rescale M by a positive number so that |det M| = 1."""
    M = _as_matrix(M)
    d = abs(np.linalg.det(M))
    if d == 0:
        raise ZeroMatrix("singular matrix")
    return M / d ** (1.0 / M.shape[0])


@dataclass(frozen=True, eq=False)
class GroupElement:
    """A lift in U(1,n), optionally with the generator word that produced it.

    Words are tuples of signed 1-based generator indices; -i is the inverse
    of generator i.
    """

    lift: np.ndarray
    word: Optional[Tuple[int, ...]] = None

    @property
    def n(self) -> int:
        return self.lift.shape[0] - 1

    @property
    def canonical(self) -> np.ndarray:
        return canonical_matrix(self.lift)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        w = None
        if self.word is not None and other.word is not None:
            w = self.word + other.word
        return GroupElement(self.lift @ other.lift, w)

    def inverse(self) -> "GroupElement":
        H = hermitian_matrix(self.n)
        w = None if self.word is None else tuple(-i for i in reversed(self.word))
        return GroupElement(H @ self.lift.conj().T @ H, w)

    def apply(self, p) -> ProjectivePoint:
        return normalize_point(self.lift @ _as_vector(p))

    def __eq__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return bool(np.allclose(self.canonical, other.canonical, atol=1e-9, rtol=0))

    __hash__ = None


def form_residual(M) -> float:
    """Relative Frobenius residual |M H M* - H| / |H|."""
    M = _as_matrix(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    H = hermitian_matrix(M.shape[0] - 1)
    return float(np.linalg.norm(M @ H @ M.conj().T - H) / np.linalg.norm(H))


def is_in_u1n(M, tol: float = GROUP_TOL) -> bool:
    return form_residual(M) < tol


def is_in_k(M, tol: float = GROUP_TOL) -> bool:
    M = _as_matrix(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    I = np.eye(M.shape[0])
    unitary = np.linalg.norm(M @ M.conj().T - I) / np.sqrt(M.shape[0]) < tol
    return bool(unitary and is_in_u1n(M, tol))


def lie_algebra_element(rng: np.random.Generator, n: int, scale: float) -> np.ndarray:
    """Random X with X H + H X* = 0, entries of size ``scale``.

    X = A H with A skew-Hermitian satisfies the condition since H = H* and H^2 = I.
    """
    A = rng.normal(size=(n + 1, n + 1)) + 1j * rng.normal(size=(n + 1, n + 1))
    A = scale * (A - A.conj().T) / 2
    return A @ hermitian_matrix(n)


def random_group_element(seed, n: int, scale: float = 0.3) -> GroupElement:
    if scale < 0:
        raise ValueError("scale must be nonnegative")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if scale == 0:
        return GroupElement(np.eye(n + 1, dtype=complex))
    return GroupElement(expm(lie_algebra_element(rng, n, scale)))


def random_k_element(seed, n: int) -> GroupElement:
    """Haar-ish random element of K: unitary matrices commuting with H."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    H = hermitian_matrix(n)
    Z = rng.normal(size=(n + 1, n + 1)) + 1j * rng.normal(size=(n + 1, n + 1))
    # Average over {I, H} to commute with H, then take the unitary polar factor.
    C = (Z + H @ Z @ H) / 2
    U, _, Vh = np.linalg.svd(C)
    return GroupElement(U @ Vh)


def a_matrix(lam: float, n: int) -> np.ndarray:
    d = np.ones(n + 1)
    d[0] = np.exp(lam)
    d[-1] = np.exp(-lam)
    return np.diag(d).astype(complex)


@dataclass(frozen=True, eq=False)
class CartanDecomposition:
    k1: np.ndarray
    lam: float
    k2: np.ndarray

    @property
    def a(self) -> np.ndarray:
        return a_matrix(self.lam, self.k1.shape[0] - 1)

    def reconstruct(self) -> np.ndarray:
        return self.k1 @ self.a @ self.k2


def _isotropic(v: np.ndarray, H: np.ndarray) -> np.ndarray:
    """Closest unit vector with <v, v> = 0: equalize the H = +1 and H = -1 parts."""
    Hv = H @ v
    plus = (v + Hv) / 2
    minus = (v - Hv) / 2
    return (plus / np.linalg.norm(plus) + minus / np.linalg.norm(minus)) / np.sqrt(2)


def _middle_frame(c: np.ndarray, H: np.ndarray, seed_block: Optional[np.ndarray] = None) -> np.ndarray:
    """Orthonormal frame of span(c, Hc)^perp, chosen continuously in c.

    The frame is the unitary polar factor of the projection of ``seed_block``
    (default e_2..e_n), so it moves continuously with c and equals the seed
    when that already lies in the complement.
    """
    m = c.shape[0]
    if m <= 2:
        return np.zeros((m, 0), dtype=complex)
    Hc = H @ c
    P = np.eye(m) - np.outer(c, c.conj()) - np.outer(Hc, Hc.conj())
    E = np.eye(m, dtype=complex)[:, 1:-1] if seed_block is None else seed_block
    B = P @ E
    W, s, Zh = np.linalg.svd(B, full_matrices=False)
    if s[-1] < 1e-6:
        W, _, _ = np.linalg.svd(P)
        return W[:, : m - 2]
    return W @ Zh


def cartan_decompose(g, tol: float = CARTAN_TOL) -> CartanDecomposition:
    """KAK decomposition g = k1 diag(e^lam, 1, ..., 1, e^-lam) k2 with k1, k2 in K.

    The lift is first rescaled to unit-modulus determinant.  The right
    factor is assembled from the top right-singular vector v (made exactly
    isotropic and phase-fixed), Hv, and a middle frame; the left factor from
    g v.  Gauge is fixed so that sequences with converging factors give
    converging outputs.
    """
    G = unit_det(g)
    n = G.shape[0] - 1
    H = hermitian_matrix(n)
    _, s, Vh = np.linalg.svd(G)
    if s[0] - 1.0 < ELLIPTIC_TOL:
        return CartanDecomposition(G.copy(), 0.0, np.eye(n + 1, dtype=complex))
    lam = float(np.log(s[0]))

    v = phase_fix(_isotropic(Vh[0].conj(), H))
    mid = _middle_frame(v, H)
    R = np.column_stack([v, mid, H @ v])
    k2 = R.conj().T

    c1 = G @ v
    c1 = _isotropic(c1 / np.linalg.norm(c1), H)
    cmid = G @ mid
    if cmid.shape[1]:
        Hc = H @ c1
        P = np.eye(n + 1) - np.outer(c1, c1.conj()) - np.outer(Hc, Hc.conj())
        W, _, Zh = np.linalg.svd(P @ cmid, full_matrices=False)
        cmid = W @ Zh
    k1 = np.column_stack([c1, cmid, H @ c1])

    out = CartanDecomposition(k1, lam, k2)
    err = np.linalg.norm(out.reconstruct() - G) / np.linalg.norm(G)
    if err > tol or not is_in_k(k1, tol) or not is_in_k(k2, tol):
        raise NumericalFailure(f"Cartan decomposition residual {err:.3e}")
    return out


def cartan_lambda(g) -> float:
    """lam(g) = log of the top singular value of the unit-determinant lift."""
    s = np.linalg.svd(unit_det(g), compute_uv=False)
    return float(max(0.0, np.log(s[0])))


@dataclass(frozen=True, eq=False)
class PseudoProjectiveMap:
    """Projective class of a possibly singular matrix, with kernel and image."""

    matrix: np.ndarray
    kernel: Optional[ProjectiveSubspace]
    image: ProjectiveSubspace

    @property
    def rank(self) -> int:
        return self.image.proj_dim + 1


def pp_from_matrix(M, rank_tol: float = RANK_TOL) -> PseudoProjectiveMap:
    C = canonical_matrix(M)
    U, s, Vh = np.linalg.svd(C)
    r = int(np.sum(s > rank_tol * s[0]))
    image = ProjectiveSubspace(U[:, :r])
    kernel = None if r == C.shape[0] else ProjectiveSubspace(Vh[r:].conj().T)
    return PseudoProjectiveMap(C, kernel, image)


def pp_apply(tau: PseudoProjectiveMap, p, tol: float = 1e-9) -> ProjectivePoint:
    v = _as_vector(p)
    w = tau.matrix @ v
    smax = np.linalg.norm(tau.matrix, 2)
    if np.linalg.norm(w) < tol * smax * np.linalg.norm(v):
        raise InKernel("point lies in the kernel of the pseudo-projective map")
    return normalize_point(w)


def pp_limit(seq: Sequence, tol: float = PP_TOL, window: int = PP_WINDOW,
             rank_tol: float = RANK_TOL) -> PseudoProjectiveMap:
    """Limit of a sequence of matrices in the space of pseudo-projective maps.

    Convergence is declared when the last ``window`` consecutive gaps between
    canonical representatives are below ``tol``.  Singular values below
    ``rank_tol`` (relative) are truncated from the returned limit.
    """
    if len(seq) < 2:
        raise ValueError("need at least two matrices")
    canon = [canonical_matrix(M) for M in seq]
    k = min(window, len(canon) - 1)
    gaps = [np.linalg.norm(canon[-i] - canon[-i - 1]) for i in range(1, k + 1)]
    gap = float(max(gaps))
    if gap >= tol:
        raise NotConverged(f"Cauchy gap {gap:.3e} over last {k} steps", gap=gap)
    U, s, Vh = np.linalg.svd(canon[-1])
    s = np.where(s > rank_tol * s[0], s, 0.0)
    return pp_from_matrix((U * s) @ Vh, rank_tol)


@dataclass
class TendsSimplyDiagnosis:
    converging_k_factors: bool
    lambda_divergent: bool
    k1_limit: Optional[np.ndarray]
    k2_limit: Optional[np.ndarray]
    alpha_sequence: List[float] = field(default_factory=list)
    k_gap: float = float("inf")

    @property
    def positive(self) -> bool:
        return self.converging_k_factors and self.lambda_divergent


def tends_simply(seq: Sequence, tol: float = 1e-8, window: int = PP_WINDOW,
                 lambda_threshold: float = 5.0) -> TendsSimplyDiagnosis:
    """Diagnose whether a finite prefix looks like a sequence tending simply to infinity.

    K-factors must be Cauchy (Frobenius distance) over the last ``window``
    steps, and lam must increase strictly over that window and end above
    ``lambda_threshold``.
    """
    decs = [cartan_decompose(g) for g in seq]
    alphas = [d.lam for d in decs]
    k = min(window, len(decs) - 1)
    if k < 1:
        return TendsSimplyDiagnosis(False, False, None, None, alphas)
    gap = max(
        max(np.linalg.norm(decs[-i].k1 - decs[-i - 1].k1),
            np.linalg.norm(decs[-i].k2 - decs[-i - 1].k2))
        for i in range(1, k + 1))
    converging = gap < tol
    tail = alphas[-k - 1:]
    divergent = bool(all(b > a for a, b in zip(tail, tail[1:])) and tail[-1] > lambda_threshold)
    k1 = decs[-1].k1 if converging else None
    k2 = decs[-1].k2 if converging else None
    return TendsSimplyDiagnosis(bool(converging), divergent, k1, k2, alphas, float(gap))
