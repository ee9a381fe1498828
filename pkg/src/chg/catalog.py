"""Built-in groups with known limit-set structure."""

from __future__ import annotations

from typing import Callable, Dict, Optional

import numpy as np

from chg.errors import UnknownName
from chg.orbit import GroupPresentation
from chg.pu1n import a_matrix, random_k_element

SCHOTTKY_LAMBDA = 1.1
REAL_SCHOTTKY_LAMBDA = 2.0
TWO_POINT_RATIO = 1.6


def cyclic_loxodromic(n: int = 2) -> GroupPresentation:
    g = np.diag([2.0] + [1.0] * (n - 1) + [0.5]).astype(complex)
    return GroupPresentation(n, [g], ["g"], "cyclic-loxodromic",
                             "diag(2, I, 1/2): limit set {[e1], [e_{n+1}]}", elementary=2)


def elementary_two_point(n: int = 2, seed: int = 7, ratio: float = TWO_POINT_RATIO) -> GroupPresentation:
    """diag(r c, U, c / r) with U unitary and c^2 = det U."""
    rng = np.random.default_rng(seed)
    Z = rng.normal(size=(n - 1, n - 1)) + 1j * rng.normal(size=(n - 1, n - 1))
    U, _ = np.linalg.qr(Z)
    c = np.sqrt(np.linalg.det(U))
    g = np.zeros((n + 1, n + 1), dtype=complex)
    g[0, 0] = ratio * c
    g[1:n, 1:n] = U
    g[n, n] = c / ratio
    return GroupPresentation(n, [g], ["g"], "elementary-two-point",
                             "loxodromic with unitary middle block", elementary=2)


def heisenberg_translation(w, t: float = 0.0) -> np.ndarray:
    """Unipotent element fixing [e1]: exp of [[0, -w*, i t], [0, 0, w], [0, 0, 0]]."""
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    n = w.shape[0] + 1
    X = np.zeros((n + 1, n + 1), dtype=complex)
    X[0, 1:n] = -w.conj()
    X[0, n] = 1j * t
    X[1:n, n] = w
    return np.eye(n + 1) + X + X @ X / 2


def elementary_one_point(n: int = 2) -> GroupPresentation:
    e = np.zeros(n - 1, dtype=complex)
    e[0] = 1.0
    gens = [heisenberg_translation(e), heisenberg_translation(1j * e)]
    return GroupPresentation(n, gens, ["s", "t"], "elementary-one-point",
                             "Heisenberg lattice fixing [e1]", elementary=1)


def _conjugate(k: np.ndarray, g: np.ndarray) -> np.ndarray:
    return k @ g @ np.linalg.inv(k)


def c_fuchsian_schottky(lam: float = SCHOTTKY_LAMBDA, theta: float = np.pi / 4) -> GroupPresentation:
    """Two loxodromics on span(e1, e3) with perpendicular axes."""
    a = a_matrix(lam, 2).astype(complex)
    c, s = np.cos(theta), np.sin(theta)
    R = np.array([[c, 0, 1j * s], [0, 1, 0], [1j * s, 0, c]])
    return GroupPresentation(2, [a, _conjugate(R, a)], ["a", "b"], "c-fuchsian-schottky",
                             "Schottky pair preserving the complex line span(e1, e3)")


def r_fuchsian(lam: float = REAL_SCHOTTKY_LAMBDA, theta: float = np.pi / 2) -> GroupPresentation:
    """Two real loxodromics preserving the real plane, axes perpendicular."""
    a = a_matrix(lam, 2).astype(complex)
    f = np.array([1.0, 0.0, 1.0]) / np.sqrt(2)
    e2 = np.array([0.0, 1.0, 0.0])
    c, s = np.cos(theta), np.sin(theta)
    R = (np.eye(3) + (c - 1) * (np.outer(f, f) + np.outer(e2, e2))
         + s * (np.outer(e2, f) - np.outer(f, e2)))
    return GroupPresentation(2, [a, _conjugate(R, a)], ["a", "b"], "r-fuchsian",
                             "real Schottky pair preserving the real plane")


def generic_schottky(n: int = 2, lam: float = SCHOTTKY_LAMBDA, seed: int = 3) -> GroupPresentation:
    """Two loxodromics with axes in general position and well-separated endpoints."""
    if n not in (2, 3):
        raise ValueError("generic-schottky is defined for n = 2, 3")
    a = a_matrix(lam, n).astype(complex)
    e1 = np.eye(n + 1)[0]
    en = np.eye(n + 1)[n]
    rng = np.random.default_rng(seed)
    while True:
        k = random_k_element(rng, n).lift
        ends = [e1, en, k @ e1, k @ en]
        gaps = [abs(np.vdot(ends[i], ends[j])) for i in range(4) for j in range(i + 1, 4)]
        # Avoid nearly coincident endpoints and avoid a common complex line.
        if max(gaps) < 0.8 and np.linalg.matrix_rank(np.array(ends), tol=1e-3) >= 3:
            break
    return GroupPresentation(n, [a, _conjugate(k, a)], ["a", "b"], "generic-schottky",
                             "Schottky pair with generic axes")


BUILDERS: Dict[str, Callable[..., GroupPresentation]] = {
    "cyclic-loxodromic": cyclic_loxodromic,
    "elementary-two-point": elementary_two_point,
    "elementary-one-point": elementary_one_point,
    "c-fuchsian-schottky": lambda n=2: c_fuchsian_schottky(),
    "r-fuchsian": lambda n=2: r_fuchsian(),
    "generic-schottky": generic_schottky,
}

ALIASES = {"cyclic": "cyclic-loxodromic"}

ELEMENTARY_COUNTS = {
    "cyclic-loxodromic": 2,
    "elementary-two-point": 2,
    "elementary-one-point": 1,
    "c-fuchsian-schottky": None,
    "r-fuchsian": None,
    "generic-schottky": None,
}


def names():
    return list(BUILDERS)


def catalog(name: str, n: Optional[int] = None) -> GroupPresentation:
    key = ALIASES.get(name, name)
    if key not in BUILDERS:
        raise UnknownName(f"unknown catalog group {name!r}; known: {', '.join(BUILDERS)}")
    return BUILDERS[key]() if n is None else BUILDERS[key](n)
