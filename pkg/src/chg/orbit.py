"""Breadth-first enumeration of group elements with canonical-hash deduplication."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from chg.errors import NonInteriorBase
from chg.hermitian import herm_values
from chg.projective import PHASE_TIE, _as_vector
from chg.pu1n import GROUP_TOL, form_residual, unit_det

KEY_DECIMALS = 6


@dataclass
class GroupPresentation:
    n: int
    generators: List[np.ndarray]
    labels: List[str] = field(default_factory=list)
    name: str = ""
    description: str = ""
    elementary: Optional[int] = None

    def __post_init__(self):
        self.generators = [np.asarray(g, dtype=complex) for g in self.generators]
        if not self.labels:
            self.labels = [f"g{i + 1}" for i in range(len(self.generators))]
        for i, g in enumerate(self.generators):
            if g.shape != (self.n + 1, self.n + 1):
                raise ValueError(f"generator {i} has shape {g.shape}, expected {(self.n + 1,) * 2}")

    def residuals(self) -> List[float]:
        return [form_residual(g) for g in self.generators]

    def validate(self, tol: float = GROUP_TOL) -> None:
        from chg.errors import NotInGroup
        for i, r in enumerate(self.residuals()):
            if not r < tol:
                raise NotInGroup(i, r)

    def symmetric_generators(self) -> Tuple[np.ndarray, List[int]]:
        """Unit-determinant generators followed by their inverses, with signed labels."""
        mats, labels = [], []
        for i, g in enumerate(self.generators):
            u = unit_det(g)
            mats += [u, np.linalg.inv(u)]
            labels += [i + 1, -(i + 1)]
        if not mats:
            return np.zeros((0, self.n + 1, self.n + 1), dtype=complex), []
        return np.array(mats), labels


def default_base(n: int) -> np.ndarray:
    o = np.zeros(n + 1, dtype=complex)
    o[0], o[-1] = 1.0, -1.0
    return o / np.sqrt(2)


def canonical_keys(M: np.ndarray, decimals: int = KEY_DECIMALS) -> List[bytes]:
    """Hash keys for the projective classes of a stack of unit-determinant lifts.

    Key = entries of the Frobenius-normalized, phase-fixed matrix rounded to
    ``decimals``, plus the rounded log Frobenius norm of the lift, which
    separates powers of a loxodromic whose normalized forms agree to that
    precision.
    """
    N = M.shape[0]
    flat = M.reshape(N, -1)
    nrm = np.linalg.norm(flat, axis=1)
    C = flat / nrm[:, None]
    mags = np.abs(C)
    k = np.argmax(mags >= mags.max(axis=1, keepdims=True) - PHASE_TIE, axis=1)
    lead = C[np.arange(N), k]
    C = C * (np.conj(lead) / np.abs(lead))[:, None]
    blob = np.hstack([
        np.round(C.real, decimals),
        np.round(C.imag, decimals),
        np.round(np.log(nrm), decimals)[:, None],
    ]) + 0.0
    return [row.tobytes() for row in blob]


@dataclass
class OrbitCloud:
    """Orbit of a base point under enumerated group elements."""

    points: np.ndarray
    word_lengths: np.ndarray
    ball_values: np.ndarray
    lifts: np.ndarray = field(repr=False)
    parents: np.ndarray = field(repr=False)
    letters: np.ndarray = field(repr=False)
    depth: int = 0
    truncated: bool = False
    mode: str = "single-threaded"

    @property
    def dedup_count(self) -> int:
        return int(self.lifts.shape[0])

    def word(self, i: int) -> Tuple[int, ...]:
        """Generator word of element i, leftmost letter applied last."""
        out = []
        while self.parents[i] >= 0:
            out.append(int(self.letters[i]))
            i = int(self.parents[i])
        return tuple(out)

    def select(self, lo: int, hi: int) -> np.ndarray:
        """Indices of elements with word length in [lo, hi]."""
        return np.nonzero((self.word_lengths >= lo) & (self.word_lengths <= hi))[0]


def _products(gens: np.ndarray, frontier: np.ndarray) -> np.ndarray:
    # (g, f) -> gens[g] @ frontier[f], ordered generator-major.
    return np.einsum("gij,fjk->gfik", gens, frontier).reshape(-1, *frontier.shape[1:])


def _expand(gens, frontier, threads):
    if threads <= 1 or frontier.shape[0] < 2 * threads:
        P = _products(gens, frontier)
        return P, canonical_keys(P)
    chunks = np.array_split(np.arange(frontier.shape[0]), threads)

    def work(idx):
        P = np.einsum("gij,fjk->gfik", gens, frontier[idx])
        return P

    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(work, chunks))
    # Reassemble in generator-major order so results match the serial path.
    P = np.concatenate(parts, axis=1).reshape(-1, *frontier.shape[1:])
    flat_chunks = np.array_split(np.arange(P.shape[0]), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        keys = list(pool.map(lambda ix: canonical_keys(P[ix]), flat_chunks))
    return P, [k for part in keys for k in part]


def orbit_bfs(G: GroupPresentation, depth: int, budget: int = 10 ** 6, base=None,
              frontier_cap: Optional[int] = None, seed: int = 0,
              threads: int = 1) -> OrbitCloud:
    """Enumerate elements by word length, deduplicating projective classes.

    New elements are s * w for generators (and inverses) s and frontier
    elements w.  With ``frontier_cap`` set, each level's frontier is a
    seeded subsample of that size, so deep levels stay affordable for
    free groups; every generated element is still recorded.  ``budget``
    caps the total number of stored elements and sets ``truncated``.
    """
    m = G.n + 1
    o = default_base(G.n) if base is None else _as_vector(base)
    if herm_values(o[None, :])[0] >= -1e-9:
        raise NonInteriorBase("base point must lie inside the ball")
    gens, labels = G.symmetric_generators()
    labels = np.array(labels, dtype=np.int64)
    rng = np.random.default_rng(seed)

    I = np.eye(m, dtype=complex)[None]
    seen: Dict[bytes, int] = {canonical_keys(I)[0]: 0}
    lifts = [I]
    parents = [np.array([-1])]
    letters = [np.array([0])]
    lengths = [np.array([0])]
    frontier = I
    frontier_idx = np.array([0])
    total = 1
    truncated = False

    for level in range(1, depth + 1):
        if frontier.shape[0] == 0 or gens.shape[0] == 0:
            break
        P, keys = _expand(gens, frontier, threads)
        nf = frontier.shape[0]
        keep = []
        for i, key in enumerate(keys):
            if key in seen:
                continue
            if total + len(keep) >= budget:
                truncated = True
                break
            seen[key] = total + len(keep)
            keep.append(i)
        if not keep:
            break
        keep = np.array(keep)
        new = P[keep]
        lifts.append(new)
        parents.append(frontier_idx[keep % nf])
        letters.append(labels[keep // nf])
        lengths.append(np.full(keep.shape[0], level))
        new_idx = np.arange(total, total + keep.shape[0])
        total += keep.shape[0]
        if truncated:
            break
        if frontier_cap is not None and new.shape[0] > frontier_cap:
            pick = np.sort(rng.choice(new.shape[0], size=frontier_cap, replace=False))
            frontier, frontier_idx = new[pick], new_idx[pick]
        else:
            frontier, frontier_idx = new, new_idx

    L = np.concatenate(lifts)
    pts = L @ o
    pts = pts / np.linalg.norm(pts, axis=1, keepdims=True)
    wl = np.concatenate(lengths)
    mode = "single-threaded" if threads <= 1 else f"threads={threads}"
    return OrbitCloud(pts, wl, herm_values(pts), L, np.concatenate(parents),
                      np.concatenate(letters), depth=int(wl.max()), truncated=truncated,
                      mode=mode)
