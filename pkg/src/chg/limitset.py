"""Limit-set estimates: orbit accumulation, tangent-hyperplane families, equicontinuity."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from chg.errors import EmptyCloud, EmptyEstimate, MarginViolated
from chg.hermitian import hermitian_matrix, project_to_boundary
from chg.orbit import GroupPresentation, OrbitCloud, canonical_keys, orbit_bfs
from chg.projective import ProjectivePoint, _as_vector, normalize_point, pairwise_fs

DEFAULT_DELTA = 1e-3
FAMILY_RESOLUTION = 1e-4
COMPACT_MARGIN = 0.1
CLUSTER_RADIUS = 0.1
PROBE = 1e-12
CHUNK = 4096


def _rows(points) -> np.ndarray:
    if isinstance(points, np.ndarray) and points.ndim == 2:
        return points.astype(complex)
    return np.array([_as_vector(p) for p in points], dtype=complex)


@dataclass
class LimitSetEstimate:
    """Orbit points within ``delta`` of the boundary, from words of length >= depth/2."""

    boundary_samples: np.ndarray
    delta: float
    depth: int
    word_lengths: np.ndarray = field(repr=False)
    element_index: np.ndarray = field(repr=False)
    truncated: bool = False

    def __len__(self):
        return int(self.boundary_samples.shape[0])

    def points(self) -> List[ProjectivePoint]:
        return [normalize_point(v) for v in self.boundary_samples]

    def boundary_points(self) -> np.ndarray:
        """Samples pushed exactly onto the boundary."""
        return np.array([project_to_boundary(v).coords for v in self.boundary_samples])


def chen_greenberg_estimate(G: GroupPresentation, depth: int, delta: float = DEFAULT_DELTA,
                            base=None, budget: int = 10 ** 6, frontier_cap: Optional[int] = None,
                            seed: int = 0, threads: int = 1,
                            cloud: Optional[OrbitCloud] = None) -> LimitSetEstimate:
    if cloud is None:
        cloud = orbit_bfs(G, depth, budget, base, frontier_cap, seed, threads)
    keep = (np.abs(cloud.ball_values) <= delta) & (cloud.word_lengths >= depth / 2)
    idx = np.nonzero(keep)[0]
    return LimitSetEstimate(cloud.points[idx], delta, depth, cloud.word_lengths[idx], idx,
                            cloud.truncated)


def cluster_labels(points, radius: float = CLUSTER_RADIUS) -> np.ndarray:
    """Single-linkage components of a point cloud at Fubini-Study scale ``radius``."""
    P = _rows(points)
    N = P.shape[0]
    if N == 0:
        return np.zeros(0, dtype=int)
    rows, cols = [], []
    step = max(1, (1 << 22) // N)
    for s in range(0, N, step):
        D = pairwise_fs(P[s:s + step], P)
        r, c = np.nonzero(D < radius)
        rows.append(r + s)
        cols.append(c)
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    A = csr_matrix((np.ones(r.shape[0]), (r, c)), shape=(N, N))
    return connected_components(A, directed=False)[1]


def cluster_count(est, radius: float = CLUSTER_RADIUS) -> int:
    pts = est.boundary_samples if isinstance(est, LimitSetEstimate) else est
    labels = cluster_labels(pts, radius)
    return int(labels.max() + 1) if labels.size else 0


def elementarity(est, radius: float = CLUSTER_RADIUS) -> str:
    """'1', '2' or '>=3' clusters."""
    k = cluster_count(est, radius)
    return str(k) if k < 3 else ">=3"


def _grid_dedup(P: np.ndarray, resolution: float) -> np.ndarray:
    """Indices of one representative per phase-fixed grid cell of size ``resolution``."""
    P = P / np.linalg.norm(P, axis=1, keepdims=True)
    mags = np.abs(P)
    k = np.argmax(mags >= mags.max(axis=1, keepdims=True) - 1e-12, axis=1)
    lead = P[np.arange(P.shape[0]), k]
    P = P * (np.conj(lead) / np.abs(lead))[:, None]
    cells = np.round(np.hstack([P.real, P.imag]) / resolution).astype(np.int64)
    _, first = np.unique(cells, axis=0, return_index=True)
    return np.sort(first)


@dataclass
class HyperplaneFamily:
    """Tangent hyperplanes p^perp at boundary points p (stored as rows)."""

    bases: np.ndarray

    def __len__(self):
        return int(self.bases.shape[0])

    def distances(self, Q) -> np.ndarray:
        """For each row q, the angle to the nearest hyperplane of the family."""
        Q = _rows(Q)
        out = np.empty(Q.shape[0])
        HP = self.bases @ hermitian_matrix(self.bases.shape[1] - 1)
        HP = HP / np.linalg.norm(HP, axis=1, keepdims=True)
        step = max(1, (1 << 22) // max(1, len(self)))
        for s in range(0, Q.shape[0], step):
            q = Q[s:s + step]
            q = q / np.linalg.norm(q, axis=1, keepdims=True)
            c = np.abs(q @ HP.conj().T).min(axis=1)
            out[s:s + step] = np.arcsin(np.clip(c, 0.0, 1.0))
        return out

    def membership(self, q) -> float:
        return float(self.distances(_as_vector(q)[None, :])[0])


def kulkarni_from_cg(est: LimitSetEstimate, resolution: float = FAMILY_RESOLUTION) -> HyperplaneFamily:
    if len(est) == 0:
        raise EmptyEstimate("limit-set estimate has no samples")
    B = est.boundary_points()
    return HyperplaneFamily(B[_grid_dedup(B, resolution)])


def sample_compact(family: HyperplaneFamily, count: int = 50, margin: float = COMPACT_MARGIN,
                   seed: int = 0, max_rounds: int = 200) -> np.ndarray:
    """Random points of P^n at distance >= margin from every hyperplane of the family."""
    rng = np.random.default_rng(seed)
    m = family.bases.shape[1]
    got = []
    total = 0
    for _ in range(max_rounds):
        Z = rng.normal(size=(256, m)) + 1j * rng.normal(size=(256, m))
        Z /= np.linalg.norm(Z, axis=1, keepdims=True)
        ok = Z[family.distances(Z) >= margin]
        got.append(ok)
        total += ok.shape[0]
        if total >= count:
            return np.vstack(got)[:count]
    raise MarginViolated(f"found only {total} of {count} points with margin {margin}")


@dataclass
class DirectEstimate:
    """Images of compact samples under long words, plus fixed points of long loxodromics."""

    points: np.ndarray
    word_lengths: np.ndarray
    fixed_points: np.ndarray
    fixed_points_approximate: bool = True


def _attracting_fixed_points(lifts: np.ndarray, lam_min: float = 1e-3) -> np.ndarray:
    out = []
    for g in lifts:
        w, V = np.linalg.eig(g)
        mag = np.abs(w)
        if np.log(mag.max() / mag.min()) / 2 <= lam_min:
            continue
        out.append(V[:, int(np.argmax(mag))])
    if not out:
        return np.zeros((0, lifts.shape[-1]), dtype=complex)
    P = np.array(out)
    return P / np.linalg.norm(P, axis=1, keepdims=True)


def kulkarni_direct_estimate(G: GroupPresentation, K_samples, depth: int,
                             family: Optional[HyperplaneFamily] = None,
                             margin: float = COMPACT_MARGIN, budget: int = 10 ** 6,
                             frontier_cap: Optional[int] = None, seed: int = 0,
                             threads: int = 1, max_elements: Optional[int] = None,
                             fixed_point_words: int = 200,
                             cloud: Optional[OrbitCloud] = None) -> DirectEstimate:
    """Images of K under elements of word length in [depth/2, depth].

    With ``max_elements`` set, an evenly spaced subset of those elements is used.
    """
    K = _rows(K_samples)
    if family is not None and len(family):
        d = family.distances(K)
        if d.min() < margin:
            raise MarginViolated(f"compact sample at distance {d.min():.3e} < margin {margin}")
    if cloud is None:
        cloud = orbit_bfs(G, depth, budget, None, frontier_cap, seed, threads)
    lo = math.ceil(depth / 2) if depth > 0 else 0
    idx = cloud.select(lo, depth)
    if max_elements is not None and idx.shape[0] > max_elements:
        idx = idx[np.linspace(0, idx.shape[0] - 1, max_elements).round().astype(int)]
    L = cloud.lifts[idx]
    imgs = np.einsum("eij,kj->eki", L, K).reshape(-1, K.shape[1])
    imgs /= np.linalg.norm(imgs, axis=1, keepdims=True)
    wl = np.repeat(cloud.word_lengths[idx], K.shape[0])
    fp = _attracting_fixed_points(L[:fixed_point_words])
    return DirectEstimate(imgs, wl, fp)


def _fs_rows(V: np.ndarray, W: np.ndarray, eps: float) -> np.ndarray:
    """fs distance between rows v and v + eps w, evaluated without cancellation."""
    nv = np.linalg.norm(V, axis=-1, keepdims=True)
    Vh = V / nv
    c = np.sum(Vh.conj() * W, axis=-1, keepdims=True)
    perp = np.linalg.norm(W - c * Vh, axis=-1)
    along = np.abs(nv[..., 0] + eps * c[..., 0])
    return np.arctan2(eps * perp, along)


def equicontinuity_profile(G: GroupPresentation, x, depth: int, probe: float = PROBE,
                           directions: int = 8, beam: int = 1024, seed: int = 0) -> np.ndarray:
    """Running maximum of d(gx, g x_eps) / d(x, x_eps) over words of length <= L, for L = 0..depth.

    Elements are enumerated breadth-first; when a level exceeds ``beam``
    elements, only the ``beam`` most expanding ones are extended, which
    steers the search toward the words that expand most at x.
    """
    if not 0 < probe <= 1e-3:
        raise ValueError("probe must lie in (0, 1e-3]")
    x = _as_vector(x)
    x = x / np.linalg.norm(x)
    m = x.shape[0]
    rng = np.random.default_rng(seed)
    U = rng.normal(size=(directions, m)) + 1j * rng.normal(size=(directions, m))
    U -= np.outer(U @ x.conj(), x)
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    base = _fs_rows(np.tile(x, (directions, 1)), U, probe)

    def scores(M):
        gx = M @ x
        gu = np.einsum("eij,kj->eki", M, U)
        d = _fs_rows(np.repeat(gx[:, None, :], directions, axis=1), gu, probe)
        return (d / base).max(axis=1)

    gens, _ = G.symmetric_generators()
    I = np.eye(m, dtype=complex)[None]
    seen = set(canonical_keys(I))
    frontier = I
    profile = np.empty(depth + 1)
    best = float(scores(I).max())
    profile[0] = best
    for level in range(1, depth + 1):
        fresh = []
        if gens.shape[0] and frontier.shape[0]:
            P = np.einsum("gij,fjk->gfik", gens, frontier).reshape(-1, m, m)
            keys = canonical_keys(P)
            fresh = [i for i, k in enumerate(keys) if k not in seen]
        if fresh:
            seen.update(keys[i] for i in fresh)
            P = P[fresh]
            s = scores(P)
            best = max(best, float(s.max()))
            if P.shape[0] > beam:
                P = P[np.sort(np.argsort(-s, kind="stable")[:beam])]
            frontier = P
        else:
            frontier = frontier[:0]
        profile[level] = best
    return profile


def equicontinuity_modulus(G: GroupPresentation, x, depth: int, probe: float = PROBE,
                           directions: int = 8, beam: int = 1024, seed: int = 0) -> float:
    """Largest observed expansion factor at x over words of length <= depth."""
    return float(equicontinuity_profile(G, x, depth, probe, directions, beam, seed)[-1])


def hausdorff_distance(A, B) -> float:
    A = _rows(A)
    B = _rows(B)
    if A.shape[0] == 0 or B.shape[0] == 0:
        raise EmptyCloud("Hausdorff distance needs two nonempty clouds")
    ab = np.zeros(A.shape[0])
    ba = np.full(B.shape[0], np.inf)
    step = max(1, (1 << 22) // B.shape[0])
    for s in range(0, A.shape[0], step):
        D = pairwise_fs(A[s:s + step], B)
        ab[s:s + step] = D.min(axis=1)
        ba = np.minimum(ba, D.min(axis=0))
    return float(max(ab.max(), ba.max()))


def hyperplane_samples(G: GroupPresentation, count: int, seed: int = 0,
                       short_depth: int = 3, est: Optional[LimitSetEstimate] = None) -> np.ndarray:
    """Random points on tangent hyperplanes at limit points of G.

    Limit points are attracting fixed points of short loxodromic words, which
    are exact; when there are none, boundary samples of ``est`` are used.
    """
    rng = np.random.default_rng(seed)
    cloud = orbit_bfs(G, short_depth)
    P = _attracting_fixed_points(cloud.lifts[1:])
    if P.shape[0] == 0:
        if est is None or len(est) == 0:
            raise EmptyEstimate("no limit points available")
        P = est.boundary_points()
    m = P.shape[1]
    H = hermitian_matrix(m - 1)
    out = []
    for i in range(count):
        p = P[rng.integers(P.shape[0])]
        hp = H @ p
        hp = hp / np.linalg.norm(hp)
        v = rng.normal(size=m) + 1j * rng.normal(size=m)
        v -= np.vdot(hp, v) * hp
        out.append(v / np.linalg.norm(v))
    return np.array(out)


@dataclass
class VerifyParams:
    depths: Sequence[int] = (10, 20, 30)
    delta: float = DEFAULT_DELTA
    compact_count: int = 50
    margin: float = COMPACT_MARGIN
    frontier_cap: Optional[int] = 200
    budget: int = 10 ** 6
    max_elements: Optional[int] = 1000
    eq_depths: Sequence[int] = (20, 40)
    eq_points: int = 20
    probe: float = PROBE
    beam: int = 1024
    seed: int = 0
    threads: int = 1
    criterion_i_tol: float = 1e-2
    stable_ratio: float = 2.0
    growth_ratio: float = 10.0


@dataclass
class VerificationReport:
    group: str
    depths: List[int]
    max_cluster_to_hyperplane: Dict[str, float]
    min_cluster_gap_in_omega: Dict[str, float]
    equicontinuity_table: Dict[str, object]
    verdict: Dict[str, Dict[str, object]]
    config: Dict[str, object]
    mode: str

    @property
    def passed(self) -> bool:
        return all(v["pass"] for v in self.verdict.values())

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _verdicts(max_dist, gaps, eq, p: VerifyParams):
    ds = sorted(int(d) for d in max_dist)
    last = max_dist[str(ds[-1])]
    decreasing = all(max_dist[str(a)] >= max_dist[str(b)] for a, b in zip(ds, ds[1:]))
    v = {
        "i_cluster_to_hyperplane": {
            "pass": bool(last < p.criterion_i_tol and (len(ds) < 2 or decreasing)),
            "value": last, "tolerance": p.criterion_i_tol, "decreasing": bool(decreasing)},
        "ii_properness_proxy": {
            "pass": bool(min(gaps.values()) > p.margin / 2),
            "value": min(gaps.values()), "tolerance": p.margin / 2},
    }
    if eq["omega"]:
        om = np.array(eq["omega"])
        hp = np.array(eq["hyperplane"])
        omega_ratio = float((om[:, -1] / om[:, 0]).max())
        hyper_growth = float((hp[:, -1] / hp[:, 0]).min())
        v["iii_equicontinuity_omega"] = {"pass": bool(omega_ratio < p.stable_ratio),
                                         "value": omega_ratio, "tolerance": p.stable_ratio}
        v["iii_expansion_on_hyperplanes"] = {"pass": bool(hyper_growth >= p.growth_ratio),
                                             "value": hyper_growth, "tolerance": p.growth_ratio}
    return v


def verify_main_theorem(G: GroupPresentation, params: Optional[VerifyParams] = None) -> VerificationReport:
    """Numerical check that tangent hyperplanes at limit points carry the Kulkarni limit set."""
    p = params or VerifyParams()
    depths = [int(d) for d in p.depths]
    clouds = {d: orbit_bfs(G, d, p.budget, None, p.frontier_cap, p.seed, p.threads) for d in depths}
    ests = {d: chen_greenberg_estimate(G, d, p.delta, cloud=clouds[d]) for d in depths}
    deepest = max(depths)
    if len(ests[deepest]) == 0:
        raise EmptyEstimate("no boundary samples; the group may be finite")
    fam = {d: kulkarni_from_cg(ests[d]) for d in depths if len(ests[d])}
    K = sample_compact(fam[deepest], p.compact_count, p.margin, p.seed)

    max_dist, gaps = {}, {}
    for d in depths:
        if d not in fam:
            max_dist[str(d)] = float("inf")
            gaps[str(d)] = 0.0
            continue
        direct = kulkarni_direct_estimate(G, K, d, None, p.margin, max_elements=p.max_elements,
                                          cloud=clouds[d])
        max_dist[str(d)] = float(fam[d].distances(direct.points).max())
        gap = np.inf
        for s in range(0, direct.points.shape[0], CHUNK):
            gap = min(gap, float(pairwise_fs(direct.points[s:s + CHUNK], K).min()))
        gaps[str(d)] = gap

    eq: Dict[str, object] = {"depths": list(p.eq_depths), "omega": [], "hyperplane": []}
    if p.eq_points > 0 and p.eq_depths:
        omega = K[:p.eq_points]
        hyper = hyperplane_samples(G, p.eq_points, p.seed, est=ests[deepest])
        for key, pts in (("omega", omega), ("hyperplane", hyper)):
            rows = []
            for x in pts:
                prof = equicontinuity_profile(G, x, max(p.eq_depths), p.probe, beam=p.beam,
                                              seed=p.seed)
                rows.append([float(prof[d]) for d in p.eq_depths])
            eq[key] = rows

    config = {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(p).items()}
    mode = "single-threaded" if p.threads <= 1 else f"threads={p.threads}"
    return VerificationReport(G.name, depths, max_dist, gaps, eq,
                              _verdicts(max_dist, gaps, eq, p), config, mode)
