"""Approximate (ball-averaged) energy density and PL Dirichlet energy.

The ball-averaged density at an interior point x of a flat simplex is

    e_eps(x) = integral over the metric eps-ball of
               d_Y(phi(x), phi(x'))^2 / eps^(m+2)  dmu_g(x')

estimated by Monte Carlo over the metric ball.  For affine phi this tends
to c_m = omega_m / (m + 2) times the gradient-squared density, so reports
carry both normalizations: "gradient_squared" (the default, the plain
Dirichlet integrand) and "ks_raw" (multiplied by c_m).

Per-simplex contributions are computed independently and reduced in
simplex-index order, so totals are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BallLeavesSimplex, NonpositiveEpsilon, PoleAtPoint
from .maps import PLMap, compose_gradients
from .riemannian import PiecewiseMetric, simplex_rule, simplex_volume


def unit_ball_volume(m: int) -> float:
    return math.pi ** (m / 2.0) / math.gamma(m / 2.0 + 1.0)


def ks_normalization(m: int) -> float:
    """c_m = omega_m / (m + 2); the factor relating the ball-average limit
    to the gradient-squared density for affine maps on flat simplices."""
    return unit_ball_volume(m) / (m + 2.0)


@dataclass(frozen=True)
class EnergyReport:
    """Per-simplex densities and contributions plus their sum.

    densities[i] * volume[i] == contributions[i]; total == sum of
    contributions (fixed summation order).  ``normalization`` records the
    convention and ``c_m`` the constant linking the two.
    """

    densities: np.ndarray
    contributions: np.ndarray
    total: float
    normalization: str
    c_m: float

    def as_dict(self):
        return {
            "total": self.total,
            "per_simplex": list(map(float, self.contributions)),
            "per_simplex_density": list(map(float, self.densities)),
            "normalization": self.normalization,
            "c_m": self.c_m,
        }


def _density_at(rows, ginv, h=None):
    """Target-weighted gradient pairing sum_ab h_ab <grad a, grad b>."""
    q = rows @ ginv @ rows.T
    if h is None:
        return float(np.trace(q))
    return float(np.sum(h * q))


def dirichlet_energy(complex_, metric: PiecewiseMetric, plmap: PLMap,
                     target=None, normalization="gradient_squared",
                     order=None) -> EnergyReport:
    """Closed-form PL Dirichlet energy, optionally with a target metric.

    With a null target the flat euclidean chart is assumed.  The density
    on each simplex is sum_ab h_ab(phi(q)) <grad phi^a, grad phi^b> at the
    quadrature points q (barycenter for constant data; an order-2 rule
    when the metric is smooth or the target curved).
    """
    n = complex_.n
    cm = ks_normalization(n)
    smooth = metric.mode == "smooth" or (target is not None
                                         and not target.is_flat)
    if order is None:
        order = 2 if smooth else 1
    pts, wts = simplex_rule(n, order)

    densities = []
    contributions = []
    for idx in range(len(complex_.top_simplices)):
        rows = plmap.differential(idx)
        contrib = 0.0
        vol = 0.0
        for xi, w in zip(pts, wts):
            g = metric.at(idx, xi if metric.mode == "smooth" else None)
            ginv = np.linalg.inv(g)
            h = None
            if target is not None:
                h = target.metric_at(plmap.value_at(idx, xi))
            dens = _density_at(rows, ginv, h)
            dv = w * math.sqrt(np.linalg.det(g))
            contrib += dens * dv
            vol += dv
        densities.append(contrib / vol)
        contributions.append(contrib)

    densities = np.asarray(densities)
    contributions = np.asarray(contributions)
    if normalization == "ks_raw":
        densities = cm * densities
        contributions = cm * contributions
    elif normalization != "gradient_squared":
        raise ValueError(f"unknown normalization {normalization!r}")
    return EnergyReport(densities, contributions,
                        float(np.sum(contributions)), normalization, cm)


def approx_energy_density(complex_, metric: PiecewiseMetric, plmap: PLMap,
                          address, eps, sample_count=100_000, seed=0):
    """Monte-Carlo estimate of the ball-averaged density at one point.

    ``address`` is a riemannian.PointAddress interior to a top simplex.
    The metric eps-ball must stay inside that (flat, constant-metric)
    simplex; target distances are euclidean chart distances.  Returns
    (estimate, standard_error).
    """
    if eps <= 0:
        raise NonpositiveEpsilon(f"eps must be positive, got {eps}")
    if metric.mode != "constant":
        # the ball is only a metric ellipsoid on a flat simplex
        raise TypeError("ball-average density requires constant-per-simplex metrics")
    m = complex_.n
    idx = address.top_index
    xi0 = address.ref_coords()
    g = metric.at(idx)
    ginv = np.linalg.inv(g)

    # distance from xi0 to each face of the reference simplex, measured in g
    margins = []
    for i in range(m):
        a = np.zeros(m)
        a[i] = 1.0
        margins.append(xi0[i] / math.sqrt(a @ ginv @ a))
    ones = np.ones(m)
    margins.append((1.0 - xi0.sum()) / math.sqrt(ones @ ginv @ ones))
    if min(margins) < eps:
        raise BallLeavesSimplex(
            f"eps={eps} exceeds distance {min(margins):.3g} to the simplex boundary")

    rows = plmap.differential(idx)
    evals, evecs = np.linalg.eigh(g)
    g_inv_sqrt = evecs @ np.diag(evals ** -0.5) @ evecs.T

    rng = np.random.default_rng(seed)
    normals = rng.standard_normal((sample_count, m))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    radii = rng.uniform(0.0, 1.0, sample_count) ** (1.0 / m)
    u = normals * radii[:, None]

    # xi' - xi0 = eps * g^{-1/2} u ; phi affine on the simplex
    disp = eps * (u @ g_inv_sqrt.T)
    dvals = disp @ rows.T
    omega = unit_ball_volume(m)
    samples = omega * np.einsum("ij,ij->i", dvals, dvals) / eps ** 2
    est = float(samples.mean())
    stderr = float(samples.std(ddof=1) / math.sqrt(sample_count))
    return est, stderr


@dataclass(frozen=True)
class CompositeBound:
    lhs: float
    rhs: float
    lipschitz: float
    holds: bool

    def as_dict(self):
        return {"lhs": self.lhs, "rhs": self.rhs,
                "lipschitz": self.lipschitz, "holds": self.holds}


def composite_energy_bound_check(complex_, metric, plmap, hol) -> CompositeBound:
    """Check E(psi o phi) <= lambda^2 E(phi) for a holomorphic psi.

    lambda is estimated as the maximal operator norm of the jacobian of
    psi over the image quadrature points; both energies use the flat
    chart metric.  ``holds`` allows a 1e-9 relative slack.
    """
    base = dirichlet_energy(complex_, metric, plmap)
    lam = 0.0
    lhs = 0.0
    for idx in range(len(complex_.top_simplices)):
        bary = np.full(complex_.n, 1.0 / (complex_.n + 1))
        image = plmap.value_at(idx, bary)
        rows = plmap.differential(idx)
        composed = compose_gradients(hol, rows, image)
        if not np.all(np.isfinite(composed)):
            raise PoleAtPoint(f"composition not finite on simplex {idx}")
        g = metric.at(idx)
        ginv = np.linalg.inv(g)
        dens = _density_at(composed, ginv)
        lhs += dens * simplex_volume(complex_, metric, idx)
        if hasattr(hol, "real_jacobian"):
            jac = hol.real_jacobian(image)
        else:
            jac = hol.jacobian_at(image)
        lam = max(lam, float(np.linalg.norm(jac, 2)))
    rhs = lam ** 2 * base.total
    return CompositeBound(float(lhs), float(rhs), lam,
                          bool(lhs <= rhs * (1.0 + 1e-9) + 1e-15))
