import math

import numpy as np
import pytest
from scipy import integrate

from polyharm import meshes
from polyharm.energy import (approx_energy_density,
                             composite_energy_bound_check, dirichlet_energy,
                             ks_normalization, unit_ball_volume)
from polyharm.errors import BallLeavesSimplex, NonpositiveEpsilon
from polyharm.maps import PLMap
from polyharm.riemannian import point_on
from polyharm.target import (HolomorphicMap, fubini_study_cp1,
                             identity_map, polynomial)

RNG = np.random.default_rng(2718)


def test_normalization_constants():
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert ks_normalization(2) == pytest.approx(math.pi / 4.0)


# -- dirichlet energy ---------------------------------------------------------

def test_identity_map_unit_right_triangle():
    c, m = meshes.unit_right_triangle()
    rep = dirichlet_energy(c, m, PLMap.from_function(c, lambda p: p))
    assert rep.densities[0] == 2.0
    assert rep.contributions[0] == 1.0
    assert rep.total == 1.0


def test_constant_map_zero_energy():
    c, m = meshes.unit_square_mesh(2)
    pm = PLMap(c, {v: np.array([1.0, 2.0]) for v in c.vertices})
    assert dirichlet_energy(c, m, pm).total == 0.0


def test_energy_zero_iff_constant():
    c, m = meshes.unit_square_mesh(2)
    pm = PLMap(c, {v: RNG.standard_normal(2) for v in c.vertices})
    assert dirichlet_energy(c, m, pm).total > 0


def test_energy_scales_quadratically():
    c, m = meshes.unit_square_mesh(2)
    pm = PLMap(c, {v: RNG.standard_normal(2) for v in c.vertices})
    base = dirichlet_energy(c, m, pm).total
    assert dirichlet_energy(c, m, pm.scaled(3.0)).total == pytest.approx(
        9.0 * base, rel=1e-12)


def test_energy_additive_over_simplex_partition():
    c, m = meshes.unit_square_mesh(3)
    pm = PLMap(c, {v: RNG.standard_normal(2) for v in c.vertices})
    rep = dirichlet_energy(c, m, pm)
    half = len(rep.contributions) // 2
    assert rep.total == pytest.approx(
        rep.contributions[:half].sum() + rep.contributions[half:].sum(),
        rel=1e-14)


def test_ks_raw_normalization_factor():
    c, m = meshes.unit_right_triangle()
    pm = PLMap.from_function(c, lambda p: p)
    grad = dirichlet_energy(c, m, pm, normalization="gradient_squared")
    raw = dirichlet_energy(c, m, pm, normalization="ks_raw")
    assert raw.total == pytest.approx(grad.total * math.pi / 4.0, rel=1e-14)


def test_pl_energy_converges_to_continuum_integral():
    # phi = PL interpolation of z^2; continuum Dirichlet integral of z^2
    # over the unit square via adaptive quadrature
    def density(y, x):
        # |grad(x^2 - y^2)|^2 + |grad(2xy)|^2 = 8 (x^2 + y^2)
        return 8.0 * (x * x + y * y)

    oracle, _ = integrate.dblquad(density, 0, 1, 0, 1,
                                  epsabs=1e-12, epsrel=1e-12)
    errs = []
    for k in (4, 8, 16):
        c, m = meshes.unit_square_mesh(k)
        pm = PLMap.from_complex_function(c, lambda p: (p[0] + 1j * p[1]) ** 2)
        errs.append(abs(dirichlet_energy(c, m, pm).total - oracle))
    # O(h^2): each halving of h divides the error by about 4
    assert errs[0] / errs[1] > 3.5
    assert errs[1] / errs[2] > 3.5


def test_curved_target_energy_uses_target_metric():
    c, m = meshes.unit_right_triangle()
    pm = PLMap.from_function(c, lambda p: 0.1 * p)
    fs = fubini_study_cp1()
    flat = dirichlet_energy(c, m, pm).total
    curved = dirichlet_energy(c, m, pm, fs).total
    assert 0 < curved < flat  # FS conformal factor < 1 away from 0


# -- ball-averaged density ----------------------------------------------------

def test_constant_map_density_zero():
    c, m = meshes.unit_right_triangle()
    pm = PLMap(c, {v: np.array([2.0, 2.0]) for v in c.vertices})
    addr = point_on(c, 0, (1 / 3, 1 / 3, 1 / 3))
    for eps in (0.05, 0.1, 0.2):
        est, se = approx_energy_density(c, m, pm, addr, eps, 10_000, seed=1)
        assert est == 0.0 and se == 0.0


@pytest.mark.parametrize("eps", [0.2, 0.1, 0.05])
def test_affine_density_matches_closed_form(eps):
    # oracle: the ball integral of |D u|^2 / eps^4 over the metric ball
    # equals c_2 * ||D||_F^2 exactly for affine maps on flat simplices
    c, m = meshes.unit_right_triangle()
    pm = PLMap.from_function(c, lambda p: (p[0] + p[1], 2 * p[1]))
    addr = point_on(c, 0, (1 / 3, 1 / 3, 1 / 3))
    est, se = approx_energy_density(c, m, pm, addr, eps, 400_000, seed=42)
    expected = ks_normalization(2) * 6.0
    assert abs(est - expected) <= 3.0 * se
    assert abs(est - expected) / expected < 2e-2


def test_identity_density_limit():
    c, m = meshes.unit_right_triangle()
    pm = PLMap.from_function(c, lambda p: p)
    addr = point_on(c, 0, (1 / 3, 1 / 3, 1 / 3))
    est, se = approx_energy_density(c, m, pm, addr, 0.1, 400_000, seed=42)
    assert abs(est - math.pi / 2.0) <= 3.0 * se


def test_ball_leaves_simplex():
    c, m = meshes.unit_right_triangle()
    pm = PLMap.from_function(c, lambda p: p)
    addr = point_on(c, 0, (1 / 3, 1 / 3, 1 / 3))
    with pytest.raises(BallLeavesSimplex):
        approx_energy_density(c, m, pm, addr, 0.5, 100)
    near_edge = point_on(c, 0, (0.9, 0.05, 0.05))
    with pytest.raises(BallLeavesSimplex):
        approx_energy_density(c, m, pm, near_edge, 0.1, 100)


def test_nonpositive_epsilon():
    c, m = meshes.unit_right_triangle()
    pm = PLMap.from_function(c, lambda p: p)
    addr = point_on(c, 0, (1 / 3, 1 / 3, 1 / 3))
    with pytest.raises(NonpositiveEpsilon):
        approx_energy_density(c, m, pm, addr, 0.0, 100)


def test_density_seed_reproducible():
    c, m = meshes.unit_right_triangle()
    pm = PLMap.from_function(c, lambda p: p)
    addr = point_on(c, 0, (1 / 3, 1 / 3, 1 / 3))
    a = approx_energy_density(c, m, pm, addr, 0.1, 50_000, seed=42)
    b = approx_energy_density(c, m, pm, addr, 0.1, 50_000, seed=42)
    assert a == b


# -- composite energy bound ---------------------------------------------------

def _random_disk_map(c, rng, radius=0.8):
    vals = {}
    for v in c.vertices:
        z = rng.uniform(-radius, radius, 2)
        while np.hypot(*z) >= radius:
            z = rng.uniform(-radius, radius, 2)
        vals[v] = z
    return PLMap(c, vals)


def test_composite_bound_identity_equality():
    c, m = meshes.unit_square_mesh(2)
    pm = _random_disk_map(c, RNG)
    res = composite_energy_bound_check(c, m, pm, identity_map(1))
    assert res.holds
    assert res.lhs == pytest.approx(res.rhs, rel=1e-12)
    assert res.lipschitz == pytest.approx(1.0)


def test_composite_bound_linear_scaling_exact():
    c, m = meshes.unit_square_mesh(2)
    pm = _random_disk_map(c, RNG)
    three_z = HolomorphicMap((polynomial(1, {(1,): 3.0}, name="3z"),))
    res = composite_energy_bound_check(c, m, pm, three_z)
    base = dirichlet_energy(c, m, pm).total
    assert res.lhs == pytest.approx(9.0 * base, rel=1e-12)
    assert res.holds


def test_composite_bound_square_on_disk_maps():
    c, m = meshes.unit_square_mesh(2)
    square = HolomorphicMap((polynomial(1, {(2,): 1.0}, name="z^2"),))
    rng = np.random.default_rng(99)
    for _ in range(20):
        pm = _random_disk_map(c, rng)
        res = composite_energy_bound_check(c, m, pm, square)
        assert res.holds
