"""Lambda-lemma dynamics and the control-group maps on pencils of lines.

A pencil at a boundary point p is the set of lines through p inside the
tangent hyperplane p^perp.  It is identified with P^{n-2} through an
adapted frame F_p: an orthonormal basis of span(p, Hp)^perp.  The form is
the standard inner product on that frame, so pencil isometries are exactly
the maps whose matrices are unitary up to scale.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from chg.errors import (
    ChainDegenerate,
    DegenerateTriple,
    DegenerateZ,
    DimensionMismatch,
    NotBoundary,
    NotInK,
    NotTendingSimply,
    PencilMismatch,
    Undefined,
)
from chg.hermitian import (
    BOUNDARY_TOL,
    _pencil_direction,
    cartan_invariant,
    dist_to_tangent_hyperplane,
    herm,
    hermitian_matrix,
    is_boundary,
    polar,
)
from chg.projective import (
    POINT_TOL,
    LinePoint,
    ProjectivePoint,
    ProjectiveSubspace,
    _as_vector,
    fs_distance,
    line_through,
    meet,
    normalize_point,
    plucker,
    principal_angles,
    second_compound,
    span,
    wedge,
)
from chg.pu1n import (
    GroupElement,
    PseudoProjectiveMap,
    _as_matrix,
    cartan_lambda,
    is_in_k,
    pp_from_matrix,
    tends_simply,
)

TRANSVERSE_TOL = 1e-7
FUCHSIAN_TOL = 1e-4


def pencil_frame(p) -> np.ndarray:
    """Orthonormal frame of span(p, Hp)^perp, depending continuously on p."""
    p = _as_vector(p)
    m = p.shape[0]
    H = hermitian_matrix(m - 1)
    Q, _ = np.linalg.qr(np.column_stack([p, H @ p]))
    P = np.eye(m) - Q @ Q.conj().T
    B = P[:, 1:-1]
    W, s, Zh = np.linalg.svd(B, full_matrices=False)
    if s.size and s[-1] < 1e-6:
        W, _, _ = np.linalg.svd(P)
        return W[:, : m - 2]
    return W @ Zh


@dataclass(frozen=True, eq=False)
class Pencil:
    base: ProjectivePoint
    frame: np.ndarray = field(repr=False)

    @classmethod
    def at(cls, p, tol: float = 1e-8) -> "Pencil":
        p = normalize_point(p)
        if not is_boundary(p, tol):
            raise NotBoundary("pencils are defined at boundary points only")
        return cls(p, pencil_frame(p.coords))

    @property
    def carrier(self) -> ProjectiveSubspace:
        return polar(self.base)

    @property
    def size(self) -> int:
        return self.frame.shape[1]

    def coords(self, line: ProjectiveSubspace, tol: float = 1e-8) -> np.ndarray:
        """Frame coordinates of a line of the pencil."""
        q = _pencil_direction(self.base.coords, line, tol)
        return self.frame.conj().T @ q

    def line(self, c) -> ProjectiveSubspace:
        return span([self.base, self.frame @ np.asarray(c, dtype=complex)])

    def random_line(self, rng: np.random.Generator) -> ProjectiveSubspace:
        c = rng.normal(size=self.size) + 1j * rng.normal(size=self.size)
        return self.line(c)

    def same_as(self, other: "Pencil") -> bool:
        return fs_distance(self.base, other.base) < POINT_TOL


def frame_distance(pencil: Pencil, l1: ProjectiveSubspace, l2: ProjectiveSubspace) -> float:
    """Fubini-Study distance between the frame coordinates of two pencil lines."""
    return fs_distance(pencil.coords(l1), pencil.coords(l2))


@dataclass(frozen=True, eq=False)
class PencilMap:
    """Projective map from the pencil at ``source.base`` to the pencil at ``target.base``."""

    source: Pencil
    target: Pencil
    matrix: np.ndarray

    @classmethod
    def from_linear(cls, T, source: Pencil, target: Pencil) -> "PencilMap":
        """Pencil map induced by a linear map T sending source.carrier to target.carrier."""
        T = _as_matrix(T)
        return cls(source, target, target.frame.conj().T @ T @ source.frame)

    @classmethod
    def identity(cls, pencil: Pencil) -> "PencilMap":
        return cls(pencil, pencil, np.eye(pencil.size, dtype=complex))

    def __call__(self, line: ProjectiveSubspace) -> ProjectiveSubspace:
        c = self.source.coords(line)
        return self.target.line(self.matrix @ c)

    def is_isometry(self, tol: float = 1e-9) -> bool:
        M = self.matrix
        G = M @ M.conj().T
        scale = np.trace(G).real / M.shape[0]
        return bool(np.linalg.norm(G / scale - np.eye(M.shape[0])) < tol)


def projective_matrix_distance(A: np.ndarray, B: np.ndarray) -> float:
    """Distance between matrices up to a common complex scalar."""
    a = A / np.linalg.norm(A)
    b = B / np.linalg.norm(B)
    c = np.vdot(a, b)
    if abs(c) > 0:
        b = b * (np.conj(c) / abs(c))
    return float(np.linalg.norm(a - b))


@dataclass(frozen=True, eq=False)
class LimitPair:
    tau: PseudoProjectiveMap
    theta: PseudoProjectiveMap
    phi: PencilMap
    k1: np.ndarray = field(repr=False)
    k2: np.ndarray = field(repr=False)


def limit_pair_from_k(k1, k2) -> LimitPair:
    """Limit pair of a sequence k1 a_m k2 with lam_m -> infinity."""
    k1 = _as_matrix(k1)
    k2 = _as_matrix(k2)
    m = k1.shape[0]
    H = hermitian_matrix(m - 1)
    E_first = np.zeros((m, m))
    E_first[0, 0] = 1
    E_last = np.zeros((m, m))
    E_last[-1, -1] = 1
    tau = pp_from_matrix(k1 @ E_first @ k2)
    theta = pp_from_matrix(k2.conj().T @ E_last @ k1.conj().T)
    src = Pencil.at(k2.conj().T[:, -1])
    tgt = Pencil.at(k1[:, 0])
    phi = PencilMap.from_linear(k1 @ H @ k2, src, tgt)
    return LimitPair(tau, theta, phi, k1, k2)


def limit_pair(seq: Sequence, **kwargs) -> LimitPair:
    diag = tends_simply(seq, **kwargs)
    if not diag.positive:
        raise NotTendingSimply(
            f"k-factor gap {diag.k_gap:.3e}, lambda divergent: {diag.lambda_divergent}")
    return limit_pair_from_k(diag.k1_limit, diag.k2_limit)


def dset_predict(lp: LimitPair, x, tol: float = 1e-9):
    """Predicted D-set at x: the point Im(tau), or a line of the pencil at Im(tau)."""
    base = lp.theta.image.point()
    if fs_distance(x, base) < tol:
        raise Undefined("the D-set at Im(theta) is not determined")
    if dist_to_tangent_hyperplane(x, base) > tol:
        return lp.tau.image.point()
    return lp.phi(line_through(base, x))


def dset_estimate(seq: Sequence, x, trials: int = 100,
                  radius_schedule: Callable[[int], float] = lambda m: 1.0 / m,
                  seed=0, tail: int = 3) -> np.ndarray:
    """Sample gamma_m(x_m) with |x_m - x| <= radius_schedule(m) for the last ``tail`` m.

    Perturbation sizes are log-uniform down to e^{-lam_m - 5} times the
    radius, which is the scale at which gamma_m unfolds a neighbourhood of x
    onto its D-set.  Returns the images as rows of unit vectors.
    """
    rng = np.random.default_rng(seed)
    x = _as_vector(x)
    x = x / np.linalg.norm(x)
    M = len(seq)
    idx = list(range(max(0, M - tail), M))
    lams = {i: cartan_lambda(seq[i]) for i in idx}
    out = []
    for _ in range(trials):
        i = idx[int(rng.integers(len(idx)))]
        r = radius_schedule(i + 1)
        u = rng.normal(size=x.shape) + 1j * rng.normal(size=x.shape)
        u /= np.linalg.norm(u)
        t = r * np.exp(-rng.uniform() * (lams[i] + 5.0))
        w = _as_matrix(seq[i]) @ (x + t * u)
        out.append(normalize_point(w).coords)
    return np.array(out)


def transfer_matrix(src: Pencil, dst: Pencil) -> np.ndarray:
    """Matrix of l -> Span((l meet dst.base^perp) with dst.base) from src to dst."""
    d = src.base.coords
    a = dst.base.coords
    if src.same_as(dst):
        return dst.frame.conj().T @ src.frame
    H = hermitian_matrix(d.shape[0] - 1)
    lift = np.outer(d, (H @ a).conj()) - herm(d, a) * np.eye(d.shape[0])
    return dst.frame.conj().T @ lift @ src.frame


def star_compose(mu: PencilMap, nu: PencilMap) -> PencilMap:
    """mu * nu: apply nu, move to mu's source pencil through the tangent hyperplane, apply mu."""
    if mu.source.size != nu.target.size:
        raise PencilMismatch("pencils live in different ambient dimensions")
    T = transfer_matrix(nu.target, mu.source)
    if np.linalg.svd(T, compute_uv=False)[-1] < 1e-12:
        raise PencilMismatch("transfer between pencils is degenerate")
    return PencilMap(nu.source, mu.target, mu.matrix @ T @ nu.matrix)


@dataclass(frozen=True, eq=False)
class CartanExtension:
    kplus: np.ndarray
    kminus: np.ndarray
    action: np.ndarray

    def apply(self, line: ProjectiveSubspace) -> LinePoint:
        v = wedge(line.frame[:, 0], line.frame[:, 1])
        return LinePoint(normalize_point(self.action @ v))


def cartan_extension(kplus, kminus, tol: float = 1e-8) -> CartanExtension:
    kp = _as_matrix(kplus)
    km = _as_matrix(kminus)
    for name, k in (("kplus", kp), ("kminus", km)):
        if not is_in_k(k, tol):
            raise NotInK(f"{name} is not in K")
    H = hermitian_matrix(kp.shape[0] - 1)
    return CartanExtension(kp, km, second_compound(kp @ H @ km))


def _z_vector(z) -> np.ndarray:
    z = _as_vector(z)
    nz = np.linalg.norm(z)
    if np.linalg.norm(z[1:]) < 1e-12 * nz or np.linalg.norm(z[:-1]) < 1e-12 * nz:
        raise DegenerateZ("z coincides with [e_1] or [e_{n+1}]")
    if not is_boundary(z, BOUNDARY_TOL):
        raise NotBoundary("z must lie on the boundary of the ball")
    return z


def mz_matrix(z) -> np.ndarray:
    """The (n-1)x(n-1) matrix z_{n+1} conj(z_1) I + z0 z0^* representing phi_z.

    Uses the lift as given, so integer input yields exact entries.
    """
    z = _z_vector(z)
    z0 = z[1:-1]
    m = z0.shape[0]
    return z[-1] * np.conj(z[0]) * np.eye(m, dtype=complex) + np.outer(z0, z0.conj())


def _chain_step(v, b, hyper: ProjectiveSubspace, tol: float = TRANSVERSE_TOL) -> np.ndarray:
    """Span({v, b}) meet hyper, checked for transversality."""
    try:
        L = line_through(v, b)
    except Exception as exc:
        raise ChainDegenerate("span of coincident points") from exc
    ang = principal_angles(L, hyper)
    if ang[-1] <= tol:
        raise ChainDegenerate(f"line lies in the hyperplane (angle {ang[-1]:.2e})")
    m = meet(L, hyper)
    if m is None or m.proj_dim != 0:
        raise ChainDegenerate("meet is not a point")
    return m.frame[:, 0]


def _unit(i: int, m: int) -> np.ndarray:
    e = np.zeros(m, dtype=complex)
    e[i] = 1.0
    return e


def phi_z_geometric(z, w) -> ProjectivePoint:
    """phi_z(w) evaluated by the span/meet chain through z^perp, e_1^perp, e_{n+1}^perp."""
    z = _z_vector(z)
    w = _as_vector(w)
    m = z.shape[0]
    if abs(w[0]) > 1e-12 * np.linalg.norm(w) or abs(w[-1]) > 1e-12 * np.linalg.norm(w):
        raise DimensionMismatch("w must lie in Span(e_2, ..., e_n)")
    e1, en1 = _unit(0, m), _unit(m - 1, m)
    w1 = _chain_step(w, en1, polar(z))
    w2 = _chain_step(w1, z, polar(e1))
    return normalize_point(_chain_step(w2, e1, polar(en1)))


def _check_distinct_boundary(x, y, z):
    pts = [_as_vector(p) for p in (x, y, z)]
    for p in pts:
        if not is_boundary(p, 1e-8):
            raise DegenerateTriple("all three points must be on the boundary")
    for i, j in ((0, 1), (1, 2), (0, 2)):
        if fs_distance(pts[i], pts[j]) < 1e-8:
            raise DegenerateTriple("points must be pairwise distinct")
    return pts


def meet_lift(a, b) -> np.ndarray:
    """Linear lift of v -> Span({v, b}) meet a^perp, namely v -> <b,a> v - <v,a> b."""
    a = _as_vector(a)
    b = _as_vector(b)
    H = hermitian_matrix(a.shape[0] - 1)
    return herm(b, a) * np.eye(a.shape[0]) - np.outer(b, (H @ a).conj())


def phi_xyz_lift(x, y, z) -> np.ndarray:
    """Linear lift of phi_xyz on C^{n+1}; its phase does not depend on the chosen lifts."""
    x, y, z = _check_distinct_boundary(x, y, z)
    return meet_lift(z, x) @ meet_lift(x, y) @ meet_lift(y, z)


def phi_xyz(x, y, z) -> PencilMap:
    """Phi_xyz as a map of the pencil at z."""
    C = phi_xyz_lift(x, y, z)
    P = Pencil.at(z, 1e-8)
    return PencilMap.from_linear(C, P, P)


def phi_xyz_point(x, y, z, w) -> ProjectivePoint:
    """phi_xyz(w) for w in x^perp meet z^perp, by explicit meets."""
    x, y, z = _check_distinct_boundary(x, y, z)
    w1 = _chain_step(w, z, polar(y))
    w2 = _chain_step(w1, y, polar(x))
    return normalize_point(_chain_step(w2, x, polar(z)))


def spectrum_args(M: np.ndarray) -> np.ndarray:
    """Sorted arguments of the eigenvalues of M in (-pi, pi]."""
    return np.sort(np.angle(np.linalg.eigvals(M)))


def boundary_frame(x, z) -> np.ndarray:
    """h in U(1,n) with h e_1 in [x] and h e_{n+1} in [z] for distinct boundary x, z."""
    x = _as_vector(x)
    z = _as_vector(z)
    m = x.shape[0]
    H = hermitian_matrix(m - 1)
    c = herm(x, z)
    if abs(c) < 1e-12 * np.linalg.norm(x) * np.linalg.norm(z):
        raise DegenerateTriple("points are not distinct boundary points")
    X = x
    Z = z / np.conj(c)
    cols = [X]
    if m > 2:
        Wsub = polar(span([x, z]))
        B = Wsub.frame
        G = B.T @ H @ B.conj()
        evals, Q = np.linalg.eigh(G)
        if evals.min() <= 0:
            raise DegenerateTriple("complement of the axis is not positive definite")
        cols.append(B @ np.conj(Q / np.sqrt(evals)))
    cols.append(Z)
    return np.column_stack(cols)


def normalize_triple(x, y, z) -> GroupElement:
    """gamma in PU(1,n) with gamma(x) = [e_1], gamma(z) = [e_{n+1}].

    gamma(y) is arranged so that its first coordinate is the dominant,
    real positive entry of its canonical form.
    """
    x, y, z = _check_distinct_boundary(x, y, z)
    h = boundary_frame(x, z)
    H = hermitian_matrix(x.shape[0] - 1)
    g = H @ h.conj().T @ H
    yp = g @ y
    a, c = yp[0], yp[-1]
    t = np.sqrt(abs(a) / abs(c)) / 2
    alpha = np.exp(-1j * np.angle(a)) / t
    D = np.ones(yp.shape[0], dtype=complex)
    D[0] = alpha
    D[-1] = 1 / np.conj(alpha)
    return GroupElement(D[:, None] * g)


class FuchsianVerdict(enum.Enum):
    C_FUCHSIAN_LIKE = "C-Fuchsian-like"
    R_FUCHSIAN_LIKE = "R-Fuchsian-like"
    GENERIC = "generic"


@dataclass
class FuchsianReport:
    invariants: np.ndarray
    histogram: np.ndarray
    bin_edges: np.ndarray
    verdict: FuchsianVerdict


def fuchsian_classify(triples, tol: float = FUCHSIAN_TOL, bins: int = 18,
                      boundary_tol: float = 1e-8) -> FuchsianReport:
    triples = list(triples)
    if len(triples) < 10:
        raise ValueError("need at least 10 triples")
    A = np.array([cartan_invariant(x, y, z, boundary_tol) for x, y, z in triples])
    hist, edges = np.histogram(A, bins=bins, range=(-np.pi / 2, np.pi / 2))
    if np.all(np.abs(np.abs(2 * A) - np.pi) < tol):
        verdict = FuchsianVerdict.C_FUCHSIAN_LIKE
    elif np.all(np.abs(A) < tol):
        verdict = FuchsianVerdict.R_FUCHSIAN_LIKE
    else:
        verdict = FuchsianVerdict.GENERIC
    return FuchsianReport(A, hist, edges, verdict)
