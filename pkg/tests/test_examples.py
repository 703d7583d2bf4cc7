import numpy as np
import pytest

from polyharm.errors import (DegreeMismatch, PoleAtPoint,
                             UnknownSpec, ZeroDenominatorPolynomial)
from polyharm.examples import (HomogeneousPolynomial, build_covering,
                               build_eta, eta_phwc_suite, monomial,
                               seeded_sample_points, standard_eta, sum_map,
                               zero_polynomial)
from polyharm.morphism import GradientSample, phwc_residual
from polyharm.target import to_complex

RNG = np.random.default_rng(17)


# -- polynomials ----------------------------------------------------------------

def test_polynomial_rejects_inhomogeneous():
    with pytest.raises(DegreeMismatch):
        HomogeneousPolynomial(2, {(1, 0): 1.0, (1, 1): 2.0})


def test_polynomial_gradient_oracle():
    p = HomogeneousPolynomial(2, {(2, 1): 3.0, (0, 3): -1.0})
    z = RNG.standard_normal(2) + 1j * RNG.standard_normal(2)
    expect = np.array([6.0 * z[0] * z[1], 3.0 * z[0] ** 2 - 3.0 * z[1] ** 2])
    assert np.allclose(p.grad(z), expect)


def test_zero_polynomial_needs_declared_degree():
    with pytest.raises(ZeroDenominatorPolynomial):
        HomogeneousPolynomial(2, {})
    z = zero_polynomial(2, 1)
    assert z.is_zero and z.degree == 1


# -- eta construction -------------------------------------------------------------

def test_build_eta_standard_instance_formula():
    eta = standard_eta()
    u = np.array([1.0 + 1.0j, 2.0 - 0.5j])
    v = np.array([0.7 + 0.1j, -1.1 + 0.4j])
    got = eta.value_complex(np.concatenate([u, v]))
    expect = (u[0] / u[1]) * (np.conj(v[0]) / np.conj(v[1]))
    assert abs(got[0] - expect) < 1e-14


def test_build_eta_degree_mismatch():
    quad = HomogeneousPolynomial(2, {(2, 0): 1.0})
    with pytest.raises(DegreeMismatch):
        build_eta(2, 2, 1, F=[quad], G=[monomial(2, 1)],
                  P=[monomial(2, 0)], Q=[monomial(2, 1)])


def test_build_eta_zero_denominator():
    with pytest.raises(ZeroDenominatorPolynomial):
        build_eta(2, 2, 1, F=[monomial(2, 0)], G=[zero_polynomial(2, 1)],
                  P=[monomial(2, 0)], Q=[monomial(2, 1)])


def test_identical_families_give_constant_one():
    eta = build_eta(2, 2, 1, F=[monomial(2, 0)], G=[monomial(2, 0)],
                    P=[monomial(2, 1)], Q=[monomial(2, 1)])
    for pt in seeded_sample_points(eta, count=10, seed=3):
        val = eta.value_complex(to_complex(pt))
        assert abs(val[0] - 1.0) < 1e-14


def test_eta_pole_raises():
    eta = standard_eta()
    w = np.array([1.0, 0.0, 1.0, 1.0], dtype=complex)  # u2 = 0
    with pytest.raises(PoleAtPoint):
        eta.value_complex(w)


def test_eta_gradients_match_finite_differences():
    eta = standard_eta()
    for pt in seeded_sample_points(eta, count=25, seed=42):
        assert np.abs(eta.real_jacobian(pt) - eta.fd_jacobian(pt)).max() < 1e-6


def test_eta_conjugation_symmetry():
    # conjugating (P, Q) equals conjugating the v-block quotient value
    eta = standard_eta()
    eta_conj = build_eta(
        2, 2, 1,
        F=eta.F, G=eta.G,
        P=[p.conjugated() for p in eta.P],
        Q=[q.conjugated() for q in eta.Q])
    for pt in seeded_sample_points(eta, count=10, seed=5):
        w = to_complex(pt)
        u, v = w[:2], w[2:]
        lhs = eta_conj.value_complex(w)[0]
        rhs = (u[0] / u[1]) * np.conj(v[0] / v[1]).conjugate().conjugate()
        # closed form: F/G at u times conj(P/Q at v)
        rhs = (u[0] / u[1]) * np.conj(v[0] / v[1])
        assert abs(lhs - rhs) < 1e-14


# -- eta suite ---------------------------------------------------------------------

def test_standard_eta_passes_suite_and_is_mixed_type():
    eta = standard_eta()
    pts = seeded_sample_points(eta, count=100, seed=42)
    res = eta_phwc_suite(eta, pts)
    assert res.passed
    assert res.phwc_max < 1e-8
    assert res.commutator_max < 1e-8
    assert res.laplacian_max < 1e-4
    assert res.gradient_check_max < 1e-6
    # holomorphic in u: CR residual over the u variables vanishes
    assert res.cr_u_max < 1e-6
    # but the full map is neither holomorphic nor anti-holomorphic
    assert res.cr_full_max > 0.1
    assert res.anti_cr_max > 0.1
    assert not res.holomorphic and not res.anti_holomorphic


def test_purely_holomorphic_instance_flagged():
    # constant second factor: P/Q = 1, so eta is honestly holomorphic
    eta = build_eta(2, 2, 1, F=[monomial(2, 0)], G=[monomial(2, 1)],
                    P=[monomial(2, 0)], Q=[monomial(2, 0)],
                    name="holo")
    pts = seeded_sample_points(eta, count=30, seed=9)
    res = eta_phwc_suite(eta, pts)
    assert res.passed
    assert res.holomorphic
    assert not res.anti_holomorphic


def test_sum_of_two_etas_passes():
    sm = sum_map(standard_eta(), standard_eta())
    pts = seeded_sample_points(sm, count=50, seed=42)
    res = eta_phwc_suite(sm, pts)
    assert res.passed


def test_sum_with_zero_second_summand_reduces_to_first():
    eta = standard_eta()
    zero_eta = build_eta(2, 2, 1, F=[zero_polynomial(2, 1)],
                         G=[monomial(2, 1)], P=[monomial(2, 0)],
                         Q=[monomial(2, 1)], name="0")
    sm = sum_map(eta, zero_eta)
    for pt in seeded_sample_points(sm, count=10, seed=4):
        first, _ = sm._halves(pt)
        assert np.allclose(sm.value_real(pt), eta.value_real(first))
        ja = sm.real_jacobian(pt)
        d = eta.domain_complex_dim
        sub = np.concatenate([ja[:, 0:d], ja[:, 2 * d:3 * d]], axis=1)
        assert np.allclose(sub, eta.real_jacobian(first))


def test_sum_residual_subadditive_and_localized():
    # planted non-PHWC second summand: the sum fails and the violation is
    # visible exactly in the second block of variables
    eta = standard_eta()

    class Planted:
        r = 1
        domain_complex_dim = 4

        def value_real(self, pt):
            w = to_complex(pt)
            # x + 2iy pattern in the first coordinate: not PHWC
            return np.array([w[0].real, 2.0 * w[0].imag])

        def real_jacobian(self, pt):
            jac = np.zeros((2, 8))
            jac[0, 0] = 1.0
            jac[1, 4] = 2.0
            return jac

    sm = sum_map(eta, eta)
    object.__setattr__(sm, "eta2", Planted())
    pts = seeded_sample_points(standard_eta(), count=5, seed=6)
    for pt in pts:
        full = np.concatenate([to_complex(pt), to_complex(pt)])
        full_pt = np.concatenate([full.real, full.imag])
        jac = sm.real_jacobian(full_pt)
        s_sum = GradientSample(jac, np.eye(16), [0j])
        r_sum = phwc_residual([s_sum]).raw[0]
        d = 4
        first_block = np.concatenate([jac[:, 0:d], jac[:, 2 * d:3 * d]],
                                     axis=1)
        second_block = np.concatenate([jac[:, d:2 * d], jac[:, 3 * d:4 * d]],
                                      axis=1)
        r1 = phwc_residual([GradientSample(first_block, np.eye(8), [0j])]).raw[0]
        r2 = phwc_residual([GradientSample(second_block, np.eye(8), [0j])]).raw[0]
        assert r_sum <= r1 + r2 + 1e-10
        assert r1 < 1e-12          # eta block is clean
        assert r2 == pytest.approx(3.0)  # violation sits in the planted block
        assert r_sum == pytest.approx(3.0)


def test_unknown_covering_spec():
    with pytest.raises(UnknownSpec):
        build_covering("mystery")


def test_torus_cover_counts_and_isometry():
    cov = build_covering("torus_cover", k=3)
    assert len(cov.total_complex.top_simplices) == \
        2 * len(cov.base_complex.top_simplices)
    assert cov.validate()
