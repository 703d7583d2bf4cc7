"""Charted Hermitian/Kahler targets and holomorphic test functions.

A target lives in a single chart with real coordinates
(x_1..x_n, y_1..y_n), z_A = x_A + i y_A.  The complex structure acts as
J dx_A = dy_A, J dy_A = -dx_A.  Built-ins: the flat chart of C^n and the
affine chart of the complex projective line with the Fubini-Study metric.

Holomorphic functions carry closed-form complex derivatives where possible;
generic callables fall back to central finite differences.  All evaluators
are pure and concurrently safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement, combinations

import numpy as np

from .errors import ChartBoundary, PoleAtPoint, TargetMetricSingular


def complex_structure(n: int) -> np.ndarray:
    """Matrix of J in the (x_1..x_n, y_1..y_n) basis."""
    j = np.zeros((2 * n, 2 * n))
    j[n:, :n] = np.eye(n)
    j[:n, n:] = -np.eye(n)
    return j


def to_complex(p) -> np.ndarray:
    """(x_1..x_n, y_1..y_n) -> complex n-vector."""
    p = np.asarray(p, dtype=float)
    n = p.shape[-1] // 2
    return p[..., :n] + 1j * p[..., n:]


def to_real(z) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    return np.concatenate([z.real, z.imag])


# ---------------------------------------------------------------------------
# charted targets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChartedTarget:
    """Hermitian/Kahler manifold in one chart.

    ``metric(p)`` returns the 2n x 2n SPD array at the real chart point p;
    ``christoffel_fn(p)`` the (2n, 2n, 2n) array Gamma[k, a, b], symmetric
    in (a, b).  When ``christoffel_fn`` is None a finite-difference
    Levi-Civita evaluator derived from the metric is used.
    """

    n: int
    metric: callable
    christoffel_fn: callable = None
    is_hermitian: bool = True
    is_kahler: bool = True
    is_flat: bool = False
    name: str = "target"
    chart_contains: callable = None
    fd_step: float = 1e-6

    @property
    def J(self) -> np.ndarray:
        return complex_structure(self.n)

    def metric_at(self, p) -> np.ndarray:
        self._check_chart(p)
        h = np.asarray(self.metric(np.asarray(p, dtype=float)), dtype=float)
        ev = np.linalg.eigvalsh(0.5 * (h + h.T))
        if ev[0] <= 0.0 or not np.all(np.isfinite(h)):
            raise TargetMetricSingular(
                f"{self.name} metric singular at chart point {p}")
        return h

    def inverse_metric_at(self, p) -> np.ndarray:
        return np.linalg.inv(self.metric_at(p))

    def christoffel(self, p) -> np.ndarray:
        self._check_chart(p)
        if self.christoffel_fn is not None:
            return np.asarray(self.christoffel_fn(np.asarray(p, dtype=float)))
        return christoffel_fd(self.metric_at, p, self.fd_step)

    def _check_chart(self, p):
        if self.chart_contains is not None and not self.chart_contains(
                np.asarray(p, dtype=float)):
            raise ChartBoundary(f"point {p} outside chart of {self.name}")

    # -- sampled structure checks ----------------------------------------

    def hermitian_residual(self, p) -> float:
        """max | h(JU, JV) - h(U, V) | over basis vectors at p."""
        h = self.metric_at(p)
        j = self.J
        return float(np.abs(j.T @ h @ j - h).max())

    def christoffel_compatibility_residual(self, p, step=1e-5) -> float:
        """Finite-difference metric compatibility:
        d_c h_ab - Gamma^k_ca h_kb - Gamma^k_cb h_ak ~ 0."""
        p = np.asarray(p, dtype=float)
        m = 2 * self.n
        gamma = self.christoffel(p)
        h = self.metric_at(p)
        worst = 0.0
        for c in range(m):
            pp, pm = p.copy(), p.copy()
            pp[c] += step
            pm[c] -= step
            dh = (self.metric_at(pp) - self.metric_at(pm)) / (2 * step)
            contraction = (np.einsum("ka,kb->ab", gamma[:, c, :], h)
                           + np.einsum("kb,ak->ab", gamma[:, c, :], h))
            worst = max(worst, float(np.abs(dh - contraction).max()))
        return worst

    def kahler_form_residual(self, p, step=1e-4) -> float:
        """Sampled closedness of the Kahler form omega(U,V) = h(JU, V):
        max component of d(omega) at p by central differences."""
        p = np.asarray(p, dtype=float)
        m = 2 * self.n

        def omega(q):
            h = self.metric_at(q)
            return self.J.T @ h  # omega_ab = h(J e_a, e_b)

        domega = np.empty((m, m, m))
        for c in range(m):
            pp, pm = p.copy(), p.copy()
            pp[c] += step
            pm[c] -= step
            domega[c] = (omega(pp) - omega(pm)) / (2 * step)
        worst = 0.0
        for a, b, c in combinations(range(m), 3):
            val = domega[a][b, c] + domega[b][c, a] + domega[c][a, b]
            worst = max(worst, abs(val))
        return worst


def christoffel_fd(metric_at, p, step=1e-6) -> np.ndarray:
    """Levi-Civita symbols by central differences of the metric."""
    p = np.asarray(p, dtype=float)
    m = p.shape[0]
    dh = np.empty((m, m, m))
    for c in range(m):
        pp, pm = p.copy(), p.copy()
        pp[c] += step
        pm[c] -= step
        dh[c] = (metric_at(pp) - metric_at(pm)) / (2 * step)
    hinv = np.linalg.inv(metric_at(p))
    gamma = np.empty((m, m, m))
    for a in range(m):
        for b in range(m):
            v = 0.5 * (dh[a][:, b] + dh[b][:, a] - dh[:, a, b])
            gamma[:, a, b] = hinv @ v
    return gamma


def flat_target(n: int) -> ChartedTarget:
    """C^n with the euclidean metric; all Christoffel symbols vanish."""
    eye = np.eye(2 * n)
    zeros = np.zeros((2 * n, 2 * n, 2 * n))
    return ChartedTarget(
        n=n,
        metric=lambda p: eye,
        christoffel_fn=lambda p: zeros,
        is_flat=True,
        name=f"flat:{n}",
    )


def fubini_study_cp1() -> ChartedTarget:
    """The affine chart of the projective line with the Fubini-Study
    metric h = I / (1 + |z|^2)^2.

    The chart covers all of C (only the point at infinity is missing),
    so no chart-boundary error can occur; maps are expected to stay a
    bounded distance from the pole.
    """

    def metric(p):
        x, y = p
        return np.eye(2) / (1.0 + x * x + y * y) ** 2

    def christoffel(p):
        # conformal metric exp(2 rho) I with rho = -log(1 + r^2)
        x, y = p
        denom = 1.0 + x * x + y * y
        rx = -2.0 * x / denom
        ry = -2.0 * y / denom
        g = np.empty((2, 2, 2))
        g[0] = [[rx, ry], [ry, -rx]]
        g[1] = [[-ry, rx], [rx, ry]]
        return g

    return ChartedTarget(n=1, metric=metric, christoffel_fn=christoffel,
                         name="cp1")


def christoffel(target: ChartedTarget, p) -> np.ndarray:
    """Christoffel symbols Gamma[k, a, b] of a target at a chart point."""
    return target.christoffel(p)


# ---------------------------------------------------------------------------
# holomorphic functions and maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HolomorphicFunction:
    """Holomorphic function on the chart of an n-dimensional target.

    ``fn(z)`` maps a complex n-vector to a complex scalar; ``dz(z)``
    returns the complex gradient (d/dz_1 .. d/dz_n).  When ``dz`` is
    omitted it is computed by central finite differences, which keeps
    user-supplied callables usable but less accurate.
    """

    n: int
    fn: callable
    dz: callable = None
    name: str = "f"
    fd_step: float = 1e-6
    pole_tol: float = 0.0

    def __call__(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        w = complex(self.fn(z))
        if not np.isfinite(w):
            raise PoleAtPoint(f"{self.name} not finite at {z}")
        return w

    def grad(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.dz is not None:
            return np.atleast_1d(np.asarray(self.dz(z), dtype=complex))
        out = np.empty(self.n, dtype=complex)
        for a in range(self.n):
            h = self.fd_step * max(1.0, abs(z[a]))
            e = np.zeros(self.n, dtype=complex)
            e[a] = h
            out[a] = (self(z + e) - self(z - e)) / (2 * h)
        return out

    # -- real form --------------------------------------------------------

    def value_real(self, p) -> np.ndarray:
        w = self(to_complex(p))
        return np.array([w.real, w.imag])

    def real_jacobian(self, p) -> np.ndarray:
        """(2 x 2n) real Jacobian rows (d f1; d f2) in the
        (x_1..x_n, y_1..y_n) basis, derived from the complex gradient."""
        g = self.grad(to_complex(p))
        row1 = np.concatenate([g.real, -g.imag])   # d f1
        row2 = np.concatenate([g.imag, g.real])    # d f2
        return np.stack([row1, row2])


def coordinate(n, a, name=None) -> HolomorphicFunction:
    e = np.zeros(n, dtype=complex)
    e[a] = 1.0
    return HolomorphicFunction(n, lambda z: z[a], lambda z: e,
                               name=name or f"z{a + 1}")


def pair_sum(n, k, l) -> HolomorphicFunction:
    e = np.zeros(n, dtype=complex)
    e[k] += 1.0
    e[l] += 1.0
    return HolomorphicFunction(n, lambda z: z[k] + z[l], lambda z: e,
                               name=f"z{k + 1}+z{l + 1}")


def product(n, a, b, factor=1.0, name=None) -> HolomorphicFunction:
    def fn(z):
        return factor * z[a] * z[b]

    def dz(z):
        g = np.zeros(n, dtype=complex)
        g[a] += factor * z[b]
        g[b] += factor * z[a]
        return g

    if name is None:
        name = f"z{a + 1}z{b + 1}" if factor == 1.0 else f"iz{a + 1}z{b + 1}"
    return HolomorphicFunction(n, fn, dz, name=name)


def i_product(n, a, b) -> HolomorphicFunction:
    return product(n, a, b, factor=1j)


def polynomial(n, coeffs, name="poly") -> HolomorphicFunction:
    """Polynomial sum_c coeffs[c] * z^c with c an exponent tuple."""
    items = [(tuple(c), complex(v)) for c, v in coeffs.items()]

    def fn(z):
        return sum(v * np.prod(z ** np.array(c)) for c, v in items)

    def dz(z):
        g = np.zeros(n, dtype=complex)
        for c, v in items:
            for a in range(n):
                if c[a] == 0:
                    continue
                cc = np.array(c)
                cc[a] -= 1
                g[a] += v * c[a] * np.prod(z ** cc)
        return g

    return HolomorphicFunction(n, fn, dz, name=name)


def rational(num: HolomorphicFunction, den: HolomorphicFunction,
             pole_tol=1e-12, name=None) -> HolomorphicFunction:
    """Quotient with a pole guard on the denominator."""

    def fn(z):
        d = den(z)
        if abs(d) <= pole_tol:
            raise PoleAtPoint(f"denominator {den.name} vanishes at {z}")
        return num(z) / d

    def dz(z):
        d = den(z)
        if abs(d) <= pole_tol:
            raise PoleAtPoint(f"denominator {den.name} vanishes at {z}")
        return (num.grad(z) * d - num(z) * den.grad(z)) / d ** 2

    return HolomorphicFunction(num.n, fn, dz,
                               name=name or f"({num.name})/({den.name})")


@dataclass(frozen=True)
class HolomorphicMap:
    """Holomorphic map N -> P given by component functions."""

    components: tuple
    name: str = "psi"

    @property
    def n(self):
        return self.components[0].n

    @property
    def p(self):
        return len(self.components)

    def value_complex(self, z) -> np.ndarray:
        return np.array([f(z) for f in self.components], dtype=complex)

    def value_real(self, pt) -> np.ndarray:
        w = self.value_complex(to_complex(pt))
        return np.concatenate([w.real, w.imag])

    def real_jacobian(self, pt) -> np.ndarray:
        """(2p x 2n) real Jacobian, rows ordered (x_1..x_p, y_1..y_p)."""
        rows = [f.real_jacobian(pt) for f in self.components]
        top = np.stack([r[0] for r in rows])
        bottom = np.stack([r[1] for r in rows])
        return np.concatenate([top, bottom], axis=0)


def identity_map(n) -> HolomorphicMap:
    return HolomorphicMap(tuple(coordinate(n, a) for a in range(n)),
                          name="id")


# ---------------------------------------------------------------------------
# residual checks
# ---------------------------------------------------------------------------

def cauchy_riemann_residual(f, point, step=1e-5) -> float:
    """max_A |dx_A f1 - dy_A f2| + |dy_A f1 + dx_A f2| at a chart point.

    ``f`` is a HolomorphicFunction or any callable taking a complex
    n-vector; derivatives are central finite differences of the values,
    so anti-holomorphic candidates are handled honestly.
    """
    z = np.atleast_1d(np.asarray(point, dtype=complex))
    worst = 0.0
    for a in range(z.shape[0]):
        e = np.zeros_like(z)
        e[a] = step
        fxp, fxm = complex(f(z + e)), complex(f(z - e))
        fyp, fym = complex(f(z + 1j * e)), complex(f(z - 1j * e))
        if not all(np.isfinite([fxp, fxm, fyp, fym])):
            raise PoleAtPoint(f"function not finite near {z}")
        dx = (fxp - fxm) / (2 * step)
        dy = (fyp - fym) / (2 * step)
        worst = max(worst, abs(dx.real - dy.imag) + abs(dy.real + dx.imag))
    return worst


def anti_cauchy_riemann_residual(f, point, step=1e-5) -> float:
    """Residual of the conjugate CR system; vanishes for
    anti-holomorphic functions."""
    z = np.atleast_1d(np.asarray(point, dtype=complex))
    worst = 0.0
    for a in range(z.shape[0]):
        e = np.zeros_like(z)
        e[a] = step
        dx = (complex(f(z + e)) - complex(f(z - e))) / (2 * step)
        dy = (complex(f(z + 1j * e)) - complex(f(z - 1j * e))) / (2 * step)
        worst = max(worst, abs(dx.real + dy.imag) + abs(dy.real - dx.imag))
    return worst


def kahler_symmetry_residual(f, point, step=1e-4) -> float:
    """max over components j and indices A, B of
    | d2 f^j / dx_A dy_B - d2 f^j / dx_B dy_A | by mixed central
    differences."""
    z = np.atleast_1d(np.asarray(point, dtype=complex))
    n = z.shape[0]

    def val(w):
        out = complex(f(w))
        if not np.isfinite(out):
            raise PoleAtPoint(f"function not finite near {point}")
        return out

    mixed = np.empty((n, n), dtype=complex)
    for a in range(n):
        ea = np.zeros_like(z)
        ea[a] = step
        for b in range(n):
            eb = np.zeros_like(z)
            eb[b] = 1j * step
            mixed[a, b] = (val(z + ea + eb) - val(z + ea - eb)
                           - val(z - ea + eb) + val(z - ea - eb)) / (4 * step * step)
    diff = mixed - mixed.T
    return float(max(np.abs(diff.real).max(), np.abs(diff.imag).max()))


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

def holomorphic_family(n, include_products=True, include_sums=True):
    """The test family used by the equivalence suites: coordinates,
    pair sums, products z_A z_B and i z_A z_B."""
    fam = [coordinate(n, a) for a in range(n)]
    if include_sums:
        fam.extend(pair_sum(n, k, l) for k, l in combinations(range(n), 2))
    if include_products:
        for a, b in combinations_with_replacement(range(n), 2):
            fam.append(product(n, a, b))
            fam.append(i_product(n, a, b))
    return fam
