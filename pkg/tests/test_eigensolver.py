import math

import numpy as np
import pytest

from tto_spectrum.eigensolver import (
    TAU_EIG,
    build_criterion,
    construct_eigenfunction,
    criterion_rows,
    refine_eigenvalue,
    scan_eigenvalues,
    sigma_grid,
    verify_observation,
)
from tto_spectrum.errors import NoConvergence, PreconditionError, ResidualTooLarge
from tto_spectrum.inner import InnerFunction
from tto_spectrum.symbols import LaurentSymbol, roots_of_Q

BASIC = LaurentSymbol.three_term(1, 0, 4)
BOX = (-5.0, 5.0, -5.0, 5.0)


def blaschke(*zeros):
    return InnerFunction.from_zeros(list(zeros))


# -- criterion ---------------------------------------------------------------------


def test_criterion_eigenvalue_two():
    sys = build_criterion(InnerFunction.monomial(2), BASIC, 2.0)
    z1, z2 = sys.config.roots
    # rows [z_j theta(z_j), 1], determinant z1^3 - z2^3
    np.testing.assert_allclose(sys.matrix, [[z1 ** 3, 1], [z2 ** 3, 1]], atol=1e-15)
    assert z1 ** 3 == pytest.approx(-1 / 8) and z2 ** 3 == pytest.approx(-1 / 8)
    assert sys.is_candidate
    assert sys.sigma_min < 1e-14


def test_criterion_not_eigenvalue_zero():
    sys = build_criterion(InnerFunction.monomial(2), BASIC, 0.0)
    z1, z2 = sys.config.roots
    assert abs(z1 ** 3 - z2 ** 3) == pytest.approx(0.25)
    assert not sys.is_candidate
    assert sys.relative_sigma > 0.1


def test_criterion_theta_cubed_zero():
    sys = build_criterion(InnerFunction.monomial(3), BASIC, 0.0)
    assert sys.is_candidate
    assert sys.sigma_min < 1e-14


def test_criterion_shape_and_outside_rows():
    th = blaschke(0.3, -0.2j)
    phi = LaurentSymbol((1, 0.5), (0.2, 1.5, -0.7))
    sys = build_criterion(th, phi, 0.4 + 0.1j)
    assert sys.matrix.shape == (4, 4)
    z = sys.config.roots
    M, N = phi.M, phi.N
    for j, zj in enumerate(z):
        if abs(zj) < 1:
            w1, w2 = zj ** N * complex(th._values(zj)), 1.0
        else:
            w1, w2 = zj ** N, np.conj(complex(th._values(1 / np.conj(zj))))
        row = [w1 * zj ** k for k in range(M)] + [w2 * zj ** k for k in range(N)]
        np.testing.assert_allclose(sys.matrix[j], row, rtol=1e-13)


def test_batched_rows_match_single():
    th = blaschke(0.3, -0.2j, 0.5)
    phi = LaurentSymbol((1, 0.5), (0.2, 1.5, -0.7))
    lams = [0.1, 1 + 1j, -2 + 0.3j]
    sig, nin = sigma_grid(th, phi, np.array(lams))
    for s, n, lam in zip(sig, nin, lams):
        sys = build_criterion(th, phi, lam)
        assert s == pytest.approx(sys.relative_sigma, rel=1e-10)
        assert n == sys.config.n_inside


def test_conjugation_symmetry():
    th = blaschke(0.3, -0.5, 0.1)
    phi = LaurentSymbol((1, 0.5), (0.2, 1.5, -0.7))
    rng = np.random.default_rng(4)
    for _ in range(30):
        lam = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        try:
            a = build_criterion(th, phi, lam)
            b = build_criterion(th, phi, lam.conjugate())
        except Exception:
            continue
        assert abs(a.sigma_min - b.sigma_min) < 1e-10


# -- eigenfunctions ---------------------------------------------------------------


@pytest.mark.parametrize("lam,vec", [(2.0, [1, 2]), (-2.0, [1, -2])])
def test_eigenfunction_examples(lam, vec):
    th = InnerFunction.monomial(2)
    sys = build_criterion(th, BASIC, lam)
    pair = construct_eigenfunction(th, BASIC, sys, K=64)
    assert pair.residual < 1e-10
    assert pair.f.norm() == pytest.approx(1.0, abs=1e-14)
    expect = np.array(vec, dtype=complex) / np.linalg.norm(vec)
    # equal up to a unimodular scalar
    assert abs(abs(np.vdot(expect, pair.f.coeffs[:2])) - 1) < 1e-12
    assert np.max(np.abs(pair.f.coeffs[2:])) < 1e-12
    assert pair.model_defect < 1e-12


def test_eigenfunction_rejected_off_spectrum():
    th = InnerFunction.monomial(2)
    sys = build_criterion(th, BASIC, 0.0)
    with pytest.raises(ResidualTooLarge):
        construct_eigenfunction(th, BASIC, sys, K=64)
    pair = construct_eigenfunction(th, BASIC, sys, K=64, check=False)
    assert pair.residual > 0.1


def test_eigenfunction_with_outside_roots():
    # M = N = 2 with mixed root positions; eigenvalue taken from the dense matrix
    from tto_spectrum.oracle import build_matrix, dense_spectrum

    th = blaschke(0.3, -0.4j, 0.1 + 0.5j)
    phi = LaurentSymbol((0.4, 1.1j), (0.5, 1.0, 0.3))
    for e in dense_spectrum(build_matrix(th, phi)):
        try:
            cfg = roots_of_Q(phi, e.lam)
        except Exception:
            continue
        lam = refine_eigenvalue(th, phi, e.lam)
        sys = build_criterion(th, phi, lam)
        assert sys.is_candidate
        pair = construct_eigenfunction(th, phi, sys)
        assert pair.residual < 1e-6
        assert pair.factorization_error < 1e-6
        assert pair.model_defect < 1e-6
        assert cfg.n_inside in range(0, 5)


def test_eigenpair_serialisation():
    th = InnerFunction.monomial(2)
    pair = construct_eigenfunction(th, BASIC, build_criterion(th, BASIC, 2.0), K=16)
    d = pair.to_dict()
    assert list(d) == ["lambda", "residual", "p1", "p2", "fourier"]
    assert len(d["fourier"]) == 16
    assert d["lambda"][0] == pytest.approx(2.0)


# -- scan --------------------------------------------------------------------------


def test_scan_theta_squared():
    res = scan_eigenvalues(InnerFunction.monomial(2), BASIC, BOX)
    np.testing.assert_allclose(sorted(l.real for l in res.eigenvalues), [-2, 2], atol=1e-10)
    assert all(abs(l.imag) < 1e-10 for l in res.eigenvalues)
    assert all(p.residual < 1e-6 for p in res.eigenpairs)


def test_scan_theta_cubed():
    res = scan_eigenvalues(InnerFunction.monomial(3), BASIC, BOX)
    r8 = 2 * math.sqrt(2)
    np.testing.assert_allclose(sorted(l.real for l in res.eigenvalues), [-r8, 0, r8], atol=1e-10)


def test_scan_equal_moduli_reports_exclusions():
    res = scan_eigenvalues(InnerFunction.monomial(2), LaurentSymbol.three_term(1, 0, 1), (-3, 3, -3, 3))
    assert res.eigenvalues == []
    assert res.curve_cells  # Phi(T) = [-2, 2] crosses the grid
    ys = {res.im[i] for i, _ in res.curve_cells}
    assert all(abs(y) < (res.im[1] - res.im[0]) for y in ys)


def test_scan_preconditions():
    with pytest.raises(PreconditionError):
        scan_eigenvalues(InnerFunction.monomial(2), BASIC, (1, 1, -1, 1))
    with pytest.raises(PreconditionError):
        scan_eigenvalues(InnerFunction.monomial(2), BASIC, BOX, grid=8)


def test_scan_deterministic_under_threads(monkeypatch):
    th = blaschke(0.5, 0.3j, -0.6)
    phi = LaurentSymbol((1 + 1j, 0.5), (0.3, 1.2, -0.7j))
    box = (-4, 4, -4, 4)
    a = scan_eigenvalues(th, phi, box, grid=32)
    monkeypatch.setenv("TTO_THREADS", "3")
    b = scan_eigenvalues(th, phi, box, grid=32)
    assert a.eigenvalues == b.eigenvalues


def test_refine_converges_and_reports_failure():
    th = InnerFunction.monomial(2)
    assert refine_eigenvalue(th, BASIC, 1.9 + 0.05j) == pytest.approx(2.0, abs=1e-12)
    # Phi = conj z + z: roots z, 1/z straddle the circle, so the determinant has no
    # zero in the seed's classification region
    with pytest.raises(NoConvergence):
        refine_eigenvalue(InnerFunction.monomial(1), LaurentSymbol.three_term(1, 0, 1), 3.0, max_iter=10)


# -- Lagrange interpolation ---------------------------------------------------------


@pytest.mark.parametrize("seed", range(10))
def test_lagrange_identity(seed):
    rng = np.random.default_rng(seed)
    N, M = int(rng.integers(1, 3)), int(rng.integers(1, 3))
    phi = LaurentSymbol(tuple(complex(*rng.uniform(-2, 2, 2)) for _ in range(N)),
                        tuple(complex(*rng.uniform(-2, 2, 2)) for _ in range(M + 1)))
    cfg = roots_of_Q(phi, complex(*rng.uniform(-2, 2, 2)))
    R = rng.normal(size=M + N) + 1j * rng.normal(size=M + N)  # degree <= M+N-1
    for _ in range(20):
        z = complex(*rng.uniform(-3, 3, 2))
        if np.min(np.abs(z - cfg.roots)) < 0.1:
            continue
        lhs = np.polyval(R, z) / cfg.q(z)
        rhs = np.sum(cfg.beta * np.polyval(R, cfg.roots) / (z - cfg.roots))
        assert abs(lhs - rhs) < 1e-9 * max(1, abs(lhs))


# -- observation fixtures -------------------------------------------------------------


def test_observation_examples():
    th = blaschke(0.3) * InnerFunction.monomial(1)
    r = verify_observation(th, [1, 0, 1], 0.3)
    assert r.eigenvalue == pytest.approx(1.09)
    assert r.residual_analytic < 1e-8 and r.residual_antianalytic < 1e-8
    r = verify_observation(th, [1, 0, 1], 0.0)
    assert r.eigenvalue == pytest.approx(1.0)
    assert r.residual_analytic < 1e-8 and r.residual_antianalytic < 1e-8
    r = verify_observation(InnerFunction.monomial(1), [0, 1], 0.0)
    assert r.eigenvalue == 0
    assert r.residual_analytic < 1e-14


def test_observation_precondition():
    with pytest.raises(PreconditionError):
        verify_observation(blaschke(0.3), [1, 1], 0.2)


def test_tau_eig_default():
    assert TAU_EIG == 1e-8
    assert criterion_rows(InnerFunction.monomial(1), BASIC, np.array([0.5, 0.25]), np.array([True, True])).shape == (2, 2)
