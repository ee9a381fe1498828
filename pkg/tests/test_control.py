import numpy as np
import pytest

from chg.control import (
    FuchsianVerdict,
    Pencil,
    PencilMap,
    cartan_extension,
    dset_estimate,
    dset_predict,
    frame_distance,
    fuchsian_classify,
    limit_pair,
    limit_pair_from_k,
    mz_matrix,
    normalize_triple,
    phi_xyz,
    phi_xyz_point,
    phi_z_geometric,
    projective_matrix_distance,
    spectrum_args,
    star_compose,
)
from chg.errors import (
    DegenerateTriple,
    DegenerateZ,
    NotInK,
    NotTendingSimply,
    PencilMismatch,
    Undefined,
)
from chg.hermitian import cartan_invariant, hermitian_matrix, pencil_distance, polar
from chg.projective import (
    ProjectiveSubspace,
    fs_distance,
    meet,
    normalize_point,
    plucker,
    second_compound,
    span,
    subspace_distance,
)
from chg.pu1n import a_matrix, random_group_element, random_k_element

from conftest import boundary_point, cvec, unit


def gamma_seq(n, M=40, k1=None, k2=None):
    k1 = np.eye(n + 1) if k1 is None else k1
    k2 = np.eye(n + 1) if k2 is None else k2
    return [k1 @ a_matrix(m * np.log(2), n) @ k2 for m in range(1, M + 1)]


def random_unitary(rng, m):
    Q, _ = np.linalg.qr(rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m)))
    return Q


def test_pencil_frame_identification(rng):
    """pencil_distance equals fs_distance of frame coordinates."""
    worst = 0.0
    for _ in range(1000):
        p = boundary_point(rng, 4)
        P = Pencil.at(p)
        l1, l2 = P.random_line(rng), P.random_line(rng)
        worst = max(worst, abs(pencil_distance(p, l1, l2) - frame_distance(P, l1, l2)))
    assert worst < 1e-9


def test_pencil_lines_are_in_the_pencil(rng):
    p = boundary_point(rng, 3)
    P = Pencil.at(p)
    l = P.random_line(rng)
    assert l.contains(p) and P.carrier.contains(l, 1e-9)


def test_unitary_pencil_map_is_isometry(rng):
    p, q = boundary_point(rng, 4), boundary_point(rng, 4)
    P, Q = Pencil.at(p), Pencil.at(q)
    f = PencilMap(P, Q, random_unitary(rng, P.size))
    assert f.is_isometry()
    for _ in range(20):
        l1, l2 = P.random_line(rng), P.random_line(rng)
        out = f(l1)
        assert out.contains(q) and Q.carrier.contains(out, 1e-9)
        assert abs(pencil_distance(q, f(l1), f(l2)) - pencil_distance(p, l1, l2)) < 1e-8


def test_limit_pair_cyclic():
    n = 3
    lp = limit_pair(gamma_seq(n))
    e = [unit(i, n + 1) for i in range(n + 1)]
    assert np.allclose(lp.tau.matrix, np.diag([1, 0, 0, 0]), atol=1e-10)
    assert np.allclose(lp.theta.matrix, np.diag([0, 0, 0, 1]), atol=1e-10)
    for j in (1, 2):
        out = lp.phi(span([e[3], e[j]]))
        assert out == span([e[0], e[j]])


def test_limit_pair_subspace_identities(rng):
    for _ in range(100):
        n = int(rng.integers(2, 5))
        k1, k2 = random_k_element(rng, n).lift, random_k_element(rng, n).lift
        lp = limit_pair_from_k(k1, k2)
        assert subspace_distance(polar(lp.tau.image), lp.theta.kernel) < 1e-8
        assert subspace_distance(polar(lp.theta.image), lp.tau.kernel) < 1e-8
        assert lp.phi.is_isometry(1e-8)


def test_limit_pair_equivariance(rng):
    n = 3
    u = random_k_element(rng, n).lift
    # Rounding in k a k' grows like e^lam * eps, so keep the prefix short.
    seq = [u @ g @ u.conj().T for g in gamma_seq(n, 20)]
    lp = limit_pair(seq)
    assert lp.tau.image.point() == normalize_point(u @ unit(0, n + 1))
    assert lp.theta.image.point() == normalize_point(u @ unit(n, n + 1))


def test_limit_pair_rejects_bounded(rng):
    k = random_k_element(rng, 2).lift
    with pytest.raises(NotTendingSimply):
        limit_pair([k] * 10)


def test_phi_preserves_pencil_distance(rng):
    k1, k2 = random_k_element(rng, 4).lift, random_k_element(rng, 4).lift
    lp = limit_pair_from_k(k1, k2)
    src = lp.phi.source
    for _ in range(50):
        l1, l2 = src.random_line(rng), src.random_line(rng)
        d0 = pencil_distance(src.base, l1, l2)
        d1 = pencil_distance(lp.phi.target.base, lp.phi(l1), lp.phi(l2))
        assert abs(d0 - d1) < 1e-8


def test_dset_predict_examples():
    n = 2
    lp = limit_pair(gamma_seq(n))
    assert dset_predict(lp, [1, 1, 1]) == normalize_point(unit(0, 3))
    line = dset_predict(lp, unit(1, 3))
    assert line == span([unit(0, 3), unit(1, 3)])
    with pytest.raises(Undefined):
        dset_predict(lp, unit(2, 3))


def test_dset_estimate_on_line():
    n = 2
    seq = gamma_seq(n)
    lp = limit_pair(seq)
    line = dset_predict(lp, unit(1, 3))
    cloud = dset_estimate(seq, unit(1, 3), trials=200, seed=1)
    assert max(line.distance(v) for v in cloud) < 1e-3


def test_dset_estimate_off_kernel():
    seq = gamma_seq(2)
    cloud = dset_estimate(seq, [1, 1, 1], trials=100, seed=2)
    assert max(fs_distance(v, unit(0, 3)) for v in cloud) < 1e-6


def test_dset_estimate_constant_sequence():
    seq = gamma_seq(2)
    line = span([unit(0, 3), unit(1, 3)])
    cloud = dset_estimate(seq, unit(1, 3), trials=1, radius_schedule=lambda m: 0.0)
    assert cloud.shape[0] == 1 and line.distance(cloud[0]) < 1e-12


def test_star_identity_and_same_base_product(rng):
    p = boundary_point(rng, 4)
    P = Pencil.at(p)
    A = PencilMap(P, P, random_unitary(rng, P.size))
    B = PencilMap(P, P, random_unitary(rng, P.size))
    assert np.allclose(star_compose(PencilMap.identity(P), A).matrix, A.matrix, atol=1e-12)
    assert projective_matrix_distance(star_compose(A, B).matrix, A.matrix @ B.matrix) < 1e-9
    inv = PencilMap(P, P, A.matrix.conj().T)
    assert np.allclose(star_compose(inv, A).matrix, np.eye(P.size), atol=1e-9)


def test_star_matches_geometric_definition(rng):
    p, q, r, s = (boundary_point(rng, 3) for _ in range(4))
    Pp, Pq, Pr, Ps = (Pencil.at(x) for x in (p, q, r, s))
    nu = PencilMap(Pp, Pq, random_unitary(rng, Pp.size))
    mu = PencilMap(Pr, Ps, random_unitary(rng, Pp.size))
    comp = star_compose(mu, nu)
    for _ in range(10):
        l = Pp.random_line(rng)
        # nu(l) meets r^perp in a point; join it to r, then apply mu.
        x = meet(nu(l), polar(normalize_point(r)))
        expected = mu(span([x.frame[:, 0], r]))
        assert comp(l) == expected


def test_star_associative(rng):
    pts = [boundary_point(rng, 3) for _ in range(6)]
    P = [Pencil.at(x) for x in pts]
    m = P[0].size
    f = PencilMap(P[0], P[1], random_unitary(rng, m))
    g = PencilMap(P[2], P[3], random_unitary(rng, m))
    h = PencilMap(P[4], P[5], random_unitary(rng, m))
    left = star_compose(h, star_compose(g, f))
    right = star_compose(star_compose(h, g), f)
    assert projective_matrix_distance(left.matrix, right.matrix) < 1e-9


def test_star_dimension_mismatch(rng):
    A = PencilMap.identity(Pencil.at(boundary_point(rng, 3)))
    B = PencilMap.identity(Pencil.at(boundary_point(rng, 4)))
    with pytest.raises(PencilMismatch):
        star_compose(A, B)


def test_cartan_extension_identity_case():
    n = 3
    ext = cartan_extension(np.eye(4), np.eye(4))
    assert np.allclose(ext.action, second_compound(hermitian_matrix(n)))
    e = [unit(i, 4) for i in range(4)]
    for j in (1, 2):
        assert ext.apply(span([e[3], e[j]])) == plucker(span([e[0], e[j]]))
    with pytest.raises(NotInK):
        cartan_extension(np.diag([2, 1, 1, 0.5]), np.eye(4))


def test_cartan_extension_agrees_with_phi(rng):
    n = 3
    k1, k2 = random_k_element(rng, n).lift, random_k_element(rng, n).lift
    seq = gamma_seq(n, 20, k1, k2)
    lp = limit_pair(seq)
    ext = cartan_extension(lp.k1, lp.k2)
    src = lp.phi.source
    for _ in range(100):
        l = src.random_line(rng)
        assert ext.apply(l) == plucker(lp.phi(l))


def test_mz_examples():
    M = mz_matrix([1, 1, 1, -1])
    assert np.array_equal(M, np.array([[0, 1], [1, 0]]))
    assert np.allclose(mz_matrix([1, 0, 0, 1j]), 1j * np.eye(2))
    w, V = np.linalg.eig(M)
    k = int(np.argmin(abs(w - 1)))
    assert abs(w[k] - 1) < 1e-15
    assert fs_distance(V[:, k], [1, 1]) < 1e-12


def test_mz_degenerate():
    with pytest.raises(DegenerateZ):
        mz_matrix([1, 0, 0, 0])
    with pytest.raises(DegenerateZ):
        mz_matrix([0, 0, 0, 1])


def test_phi_z_examples():
    z = [1, 1, 1, -1]
    assert phi_z_geometric(z, [0, 1, 0, 0]) == normalize_point([0, 0, 1, 0])
    assert phi_z_geometric(z, [0, 1, 1, 0]) == normalize_point([0, 1, 1, 0])
    w = np.array([0, 0.3, -1j, 0])
    assert phi_z_geometric([1, 0, 0, 1j], w) == normalize_point(w)


def test_mz_fixed_set(rng):
    for _ in range(50):
        z = boundary_point(rng, 4)
        M = mz_matrix(z)
        z0 = z[1:-1]
        assert fs_distance(M @ z0, z0) < 1e-10
        # Every vector orthogonal to z0 is fixed as well.
        w = cvec(rng, 3)
        w -= np.vdot(z0, w) / np.vdot(z0, z0) * z0
        assert fs_distance(M @ w, w) < 1e-10


def test_phi_xyz_worked_example():
    x, z, y = unit(0, 4), unit(3, 4), np.array([1, 1, 1, -1])
    f = phi_xyz(x, y, z)
    args = spectrum_args(f.matrix)
    A = cartan_invariant(x, y, z)
    assert abs(A) < 1e-14
    # Up to a common phase the spectrum is {1, -1}.
    rel = np.sort(np.mod(args - args[0], 2 * np.pi))
    assert np.allclose(rel, [0, np.pi], atol=1e-12)


def test_phi_xyz_complex_line_is_scalar():
    x, y, z = unit(0, 4), np.array([1, 0, 0, 1j]), unit(3, 4)
    M = phi_xyz(x, y, z).matrix
    assert projective_matrix_distance(M, np.eye(2)) < 1e-12


def test_phi_xyz_matches_explicit_meets(rng):
    for _ in range(20):
        x, y, z = (boundary_point(rng, 3) for _ in range(3))
        f = phi_xyz(x, y, z)
        W = meet(polar(normalize_point(x)), polar(normalize_point(z)))
        w = W.frame @ cvec(rng, W.frame.shape[1])
        img = phi_xyz_point(x, y, z, w)
        assert f(span([z, w])) == span([z, img.coords])


def test_phi_xyz_conjugation(rng):
    for _ in range(20):
        x, y, z = (boundary_point(rng, 3) for _ in range(3))
        g = random_group_element(rng, 3, 0.5).lift
        a = spectrum_args(phi_xyz(x, y, z).matrix)
        b = spectrum_args(phi_xyz(g @ x, g @ y, g @ z).matrix)
        assert np.allclose(np.sort(np.mod(a - a[0], 2 * np.pi)),
                           np.sort(np.mod(b - b[0], 2 * np.pi)), atol=1e-8)


def test_phi_xyz_degenerate():
    with pytest.raises(DegenerateTriple):
        phi_xyz(unit(0, 4), unit(0, 4), unit(3, 4))


def test_normalize_triple(rng):
    g = normalize_triple(unit(0, 4), [1, 1, 1, -1], unit(3, 4))
    assert g.apply(unit(0, 4)) == normalize_point(unit(0, 4))
    assert g.apply(unit(3, 4)) == normalize_point(unit(3, 4))
    for _ in range(100):
        x, y, z = (boundary_point(rng, 3) for _ in range(3))
        g = normalize_triple(x, y, z)
        h = g.lift
        assert g.apply(x) == normalize_point(unit(0, 4))
        assert g.apply(z) == normalize_point(unit(3, 4))
        gy = g.apply(y).coords
        assert gy[0].real > 0 and abs(gy[0].imag) < 1e-12
        assert abs(cartan_invariant(h @ x, h @ y, h @ z) - cartan_invariant(x, y, z)) < 1e-10


def test_fuchsian_classify(rng):
    e1, e3 = unit(0, 3), unit(2, 3)
    line = [np.array([1, 0, 1j * t]) for t in np.linspace(-3, 3, 13) if t != 0] + [e1, e3]
    triples = [tuple(line[i] for i in rng.choice(len(line), 3, replace=False)) for _ in range(30)]
    assert fuchsian_classify(triples).verdict is FuchsianVerdict.C_FUCHSIAN_LIKE
    real = [np.array([1, s, -s * s / 2]) for s in np.linspace(-2, 2, 9)]
    triples = [tuple(real[i] for i in rng.choice(len(real), 3, replace=False)) for _ in range(30)]
    assert fuchsian_classify(triples).verdict is FuchsianVerdict.R_FUCHSIAN_LIKE
    rand = [tuple(boundary_point(rng, 2) for _ in range(3)) for _ in range(30)]
    assert fuchsian_classify(rand).verdict is FuchsianVerdict.GENERIC
