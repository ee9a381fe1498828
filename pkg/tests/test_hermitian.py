import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chg.errors import CoincidentPoints, DimensionMismatch, NotBoundary, NotInPencil
from chg.hermitian import (
    Position,
    TripleClass,
    ball_position,
    cartan_invariant,
    dist_to_tangent_hyperplane,
    herm,
    hermitian_matrix,
    is_boundary,
    pencil_distance,
    polar,
    project_to_boundary,
    triple_class,
)
from chg.projective import fs_distance, normalize_point, span
from chg.pu1n import random_group_element

from conftest import boundary_point, cvec, unit


def form_oracle(w, v):
    """<w, v> = w^T H conj(v), written out from the matrix."""
    H = hermitian_matrix(len(w) - 1)
    return np.asarray(w) @ H @ np.conj(v)


def test_matrix_properties():
    for n in range(1, 7):
        H = hermitian_matrix(n)
        assert np.array_equal(H, H.T)
        assert np.array_equal(H @ H, np.eye(n + 1))
        ev = np.linalg.eigvalsh(H)
        assert np.sum(ev < 0) == 1 and np.sum(ev > 0) == n


def test_herm_examples():
    assert herm(unit(0, 3), unit(0, 3)) == 0
    assert herm(unit(0, 3), unit(2, 3)) == 1
    assert herm([1, 0, -1], [1, 0, -1]) == -2


def test_herm_sesquilinear(rng):
    for _ in range(100):
        w, v = cvec(rng, 4), cvec(rng, 4)
        c = complex(*rng.normal(size=2))
        assert abs(herm(w, v) - form_oracle(w, v)) < 1e-12
        assert abs(herm(c * w, v) - c * herm(w, v)) < 1e-10
        assert abs(herm(w, c * v) - np.conj(c) * herm(w, v)) < 1e-10
        assert abs(herm(v, w) - np.conj(herm(w, v))) < 1e-12


def test_herm_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        herm([1, 0, 0], [1, 0])


def test_herm_preserved_by_group(rng):
    for n in (2, 3, 4):
        g = random_group_element(rng, n, 0.5).lift
        for _ in range(20):
            w, v = cvec(rng, n + 1), cvec(rng, n + 1)
            assert abs(herm(g @ w, g @ v) - herm(w, v)) < 1e-9 * (1 + abs(herm(w, v)))


def test_ball_position_examples():
    p = ball_position([1, 0, 0, -1])
    assert p.classification is Position.INTERIOR and abs(p.value + 1) < 1e-15
    assert ball_position([1, 0, 0, 1j]).classification is Position.BOUNDARY
    q = ball_position(unit(1, 3))
    assert q.classification is Position.EXTERIOR and q.value == 1
    assert ball_position(np.array([1, 0, -1]) * 7j).value == pytest.approx(-1)


def test_polar_examples():
    assert polar(normalize_point(unit(0, 3))) == span([unit(0, 3), unit(1, 3)])
    assert polar(normalize_point(unit(1, 3))) == span([unit(0, 3), unit(2, 3)])
    assert polar(normalize_point([1, 0, -1])) == span([[1, 0, 1], [0, 1, 0]])


def test_polar_dimension_and_involution(rng):
    for _ in range(50):
        P = span([cvec(rng, 5), cvec(rng, 5)])
        Q = polar(P)
        assert P.proj_dim + Q.proj_dim == 5 - 2
        assert polar(Q) == P


def test_polar_of_interior_point_is_exterior(rng):
    for _ in range(20):
        g = random_group_element(rng, 3, 0.7).lift
        p = g @ np.array([1, 0, 0, -1])
        Q = polar(normalize_point(p))
        for _ in range(200):
            c = cvec(rng, Q.frame.shape[1])
            w = Q.frame @ c
            assert herm(w, w).real / np.vdot(w, w).real > 0


def test_cartan_invariant_examples():
    e1, e3 = unit(0, 3), unit(2, 3)
    # Oracle: -<e1,y><y,e3><e3,e1> with y = (1,0,i): <e1,y> = conj(i) = -i, <y,e3> = 1, <e3,e1> = 1.
    y = np.array([1, 0, 1j])
    expected = np.angle(-form_oracle(e1, y) * form_oracle(y, e3) * form_oracle(e3, e1))
    assert expected == pytest.approx(np.pi / 2)
    assert cartan_invariant(e1, y, e3) == pytest.approx(np.pi / 2, abs=1e-14)
    assert cartan_invariant(e1, [1, np.sqrt(2), -1], e3) == pytest.approx(0, abs=1e-14)


def test_triple_class_examples():
    e1, e3 = unit(0, 3), unit(2, 3)
    assert triple_class(e1, [1, 0, 1j], e3) is TripleClass.COMPLEX_LINE
    assert triple_class(e1, [1, np.sqrt(2), -1], e3) is TripleClass.LAGRANGIAN
    assert triple_class(unit(0, 4), [1, 1, 1, -1], unit(3, 4)) is TripleClass.LAGRANGIAN


def test_triple_class_generic(rng):
    kinds = {triple_class(*(boundary_point(rng, 2) for _ in range(3))) for _ in range(20)}
    assert TripleClass.GENERIC in kinds


def test_cartan_invariant_errors():
    with pytest.raises(NotBoundary):
        cartan_invariant(unit(0, 3), unit(1, 3), unit(2, 3))
    with pytest.raises(CoincidentPoints):
        cartan_invariant(unit(0, 3), unit(0, 3), unit(2, 3))


def test_cartan_invariant_bound_and_lift_invariance(rng):
    for n in (2, 3, 4):
        for _ in range(3000):
            x, y, z = (boundary_point(rng, n) for _ in range(3))
            A = cartan_invariant(x, y, z)
            assert abs(2 * A) <= np.pi + 1e-12
        a, b, c = (complex(*rng.normal(size=2)) for _ in range(3))
        assert abs(cartan_invariant(a * x, b * y, c * z) - A) < 1e-12


def test_cartan_invariant_group_invariance(rng):
    for _ in range(50):
        x, y, z = (boundary_point(rng, 2) for _ in range(3))
        g = random_group_element(rng, 2, 0.6).lift
        assert abs(cartan_invariant(g @ x, g @ y, g @ z) - cartan_invariant(x, y, z)) < 1e-9


def test_project_to_boundary(rng):
    for _ in range(100):
        v = cvec(rng, 4)
        assert is_boundary(project_to_boundary(v))
    real = rng.normal(size=3)
    assert np.allclose(project_to_boundary(real).coords.imag, 0)


def test_pencil_distance_examples():
    e = [unit(i, 4) for i in range(4)]
    p = e[0]
    l2 = span([p, e[1]])
    l3 = span([p, e[2]])
    mix = span([p, (e[1] + e[2]) / np.sqrt(2)])
    assert pencil_distance(p, l2, l3) == pytest.approx(np.pi / 2)
    assert pencil_distance(p, l2, l2) == pytest.approx(0, abs=1e-7)
    assert pencil_distance(p, l2, mix) == pytest.approx(np.pi / 4)


def test_pencil_distance_independent_of_representatives():
    e = [unit(i, 4) for i in range(4)]
    p = e[0]
    l1 = span([p, e[1] + 3 * p])
    l2 = span([p, e[1] + e[2] - 2j * p])
    assert pencil_distance(p, l1, l2) == pytest.approx(np.pi / 4, abs=1e-9)


def test_pencil_distance_rejects_non_pencil_lines():
    e = [unit(i, 4) for i in range(4)]
    with pytest.raises(NotInPencil):
        pencil_distance(e[0], span([e[0], e[3]]), span([e[0], e[1]]))
    with pytest.raises(NotInPencil):
        pencil_distance(e[0], span([e[1], e[2]]), span([e[0], e[1]]))


def test_dist_to_tangent_hyperplane_examples(rng):
    e1, e2, e3 = unit(0, 3), unit(1, 3), unit(2, 3)
    assert dist_to_tangent_hyperplane(e2, e1) == 0
    assert dist_to_tangent_hyperplane(e3, e1) == pytest.approx(np.pi / 2)
    for _ in range(50):
        p = boundary_point(rng, 3)
        Q = polar(normalize_point(p))
        q = Q.frame @ cvec(rng, Q.frame.shape[1])
        assert dist_to_tangent_hyperplane(q, p) < 1e-10


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(-3, 3))
def test_boundary_family(theta, s):
    # [1, s e^{i theta}, -s^2/2] is a boundary point for every s, theta.
    v = np.array([1, s * np.exp(1j * theta), -s * s / 2])
    assert is_boundary(v)
