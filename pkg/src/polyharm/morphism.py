"""HWC / PHWC / PHM checkers and the equivalence, pullback and
factorization property suites.

All checks are pointwise on gradient samples: the 2n component
differentials of a map at a location, together with the domain metric and
the image chart point.  For PL maps the gradients are constant per simplex,
so evaluating at barycenters is exhaustive; analytic maps can be sampled at
free points.

Notation used below, with Q = dphi . g^-1 . dphi^T the gradient Gram array
in the (x_1..x_n, y_1..y_n) chart basis and J the complex structure:

  PHWC     <=>  Q[x_B,x_A] = Q[y_B,y_A] and Q[y_B,x_A] = -Q[x_B,y_A]
           <=>  [Q, J] = 0   <=>   [Q h, J] = 0   (h Hermitian),
  HWC      <=>  Q = lambda * h^-1(phi),  lambda >= 0 the dilation.

Sample evaluations are independent and deterministic; suites aggregate in
input order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NotHolomorphic, TargetMetricSingular
from .harmonic import assemble_stiffness, weak_harmonic_residual
from .maps import PLMap, compose_gradients
from .meshes import refine
from .riemannian import PiecewiseMetric, simplex_volume
from .target import (ChartedTarget, cauchy_riemann_residual,
                     complex_structure, to_complex)

DEFAULT_TOL_C = 1e-8
DEFAULT_TOL_H = 1e-8


# ---------------------------------------------------------------------------
# gradient samples
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GradientSample:
    """Component differentials of a map at one location.

    rows : (2n x m) array, the differentials of (x_1..x_n, y_1..y_n) o phi
    metric : (m x m) SPD domain metric at the location
    image : complex n-vector, the chart point phi(location)
    location : free-form tag (simplex index, point, ...)
    weight : measure weight of the location (simplex volume; 1 for free
        points) used by the mu_g-weighted report norm
    """

    rows: np.ndarray
    metric: np.ndarray
    image: np.ndarray
    location: object = None
    weight: float = 1.0

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        metric = np.asarray(self.metric, dtype=float)
        if rows.shape[0] % 2 != 0:
            raise DimensionMismatch("sample needs 2n gradient rows")
        if metric.shape != (rows.shape[1], rows.shape[1]):
            raise DimensionMismatch(
                f"metric shape {metric.shape} does not match rows {rows.shape}")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "metric", metric)
        object.__setattr__(self, "image",
                           np.atleast_1d(np.asarray(self.image, dtype=complex)))

    @property
    def n(self) -> int:
        return self.rows.shape[0] // 2

    @property
    def gram(self) -> np.ndarray:
        cache = self.__dict__.get("_gram")
        if cache is None:
            cache = self.rows @ np.linalg.solve(self.metric, self.rows.T)
            object.__setattr__(self, "_gram", cache)
        return cache

    @property
    def scale(self) -> float:
        """Normalization max(1, ||dphi||^2) making verdicts scale invariant."""
        return max(1.0, float(np.abs(np.diag(self.gram)).max()))

    def composed_with(self, hol) -> "GradientSample":
        """Post-compose with a holomorphic map via the exact chain rule."""
        rows = compose_gradients(hol, self.rows, np.concatenate(
            [self.image.real, self.image.imag]))
        image = hol.value_complex(self.image)
        return GradientSample(rows, self.metric, image, self.location,
                              self.weight)


def samples_from_plmap(complex_, metric: PiecewiseMetric,
                       plmap: PLMap) -> list:
    """One sample per top simplex, evaluated at the barycenter (exhaustive
    for constant-per-simplex gradients)."""
    if plmap.target_dim % 2 != 0:
        raise DimensionMismatch("chart-valued maps need an even value dimension")
    bary = np.full(complex_.n, 1.0 / (complex_.n + 1))
    out = []
    for idx in range(len(complex_.top_simplices)):
        image = to_complex(plmap.value_at(idx, bary))
        out.append(GradientSample(
            rows=plmap.differential(idx),
            metric=metric.at(idx),
            image=image,
            location=("simplex", idx),
            weight=simplex_volume(complex_, metric, idx),
        ))
    return out


def samples_from_analytic(amap, points, metric=None) -> list:
    """Samples of an analytic map at free real points; identity domain
    metric unless one is supplied per point."""
    out = []
    for p in points:
        p = np.asarray(p, dtype=float)
        rows = amap.real_jacobian(p) if hasattr(amap, "real_jacobian") \
            else amap.jacobian_at(p)
        g = np.eye(p.shape[0]) if metric is None else metric
        image = to_complex(amap.value_real(p)) if hasattr(amap, "value_real") \
            else to_complex(amap.value_at(p))
        out.append(GradientSample(rows, g, image, ("point", tuple(p))))
    return out


# ---------------------------------------------------------------------------
# residual reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResidualReport:
    """Per-sample residuals with norms and a verdict at a tolerance.

    ``normalized`` divides each raw residual by max(1, ||dphi||^2) of its
    sample so the verdict is invariant under rescaling the map.
    ``weighted_1`` is the mu_g-weighted 1-norm (weights = sample weights).
    """

    kind: str
    locations: tuple
    raw: np.ndarray
    normalized: np.ndarray
    tol: float
    extras: dict = field(default_factory=dict)

    @property
    def inf(self) -> float:
        return float(self.raw.max()) if self.raw.size else 0.0

    @property
    def normalized_inf(self) -> float:
        return float(self.normalized.max()) if self.normalized.size else 0.0

    @property
    def weighted_1(self) -> float:
        w = self.extras.get("weights")
        if w is None:
            return float(self.raw.sum())
        return float(np.sum(np.asarray(w) * self.raw))

    @property
    def verdict(self) -> bool:
        return self.normalized_inf <= self.tol

    def as_dict(self):
        out = {
            "kind": self.kind,
            "inf": self.inf,
            "normalized_inf": self.normalized_inf,
            "weighted_1": self.weighted_1,
            "tol": self.tol,
            "verdict": self.verdict,
            "per_sample": list(map(float, self.raw)),
        }
        for key, val in self.extras.items():
            if key == "weights":
                continue
            out[key] = list(map(float, val)) if np.ndim(val) else val
        return out


def _phwc_value(q, n):
    """max_{A,B} |Q_xx - Q_yy| + |Q_yx + Q_xy| entrywise."""
    qxx = q[:n, :n]
    qxy = q[:n, n:]
    qyx = q[n:, :n]
    qyy = q[n:, n:]
    return float((np.abs(qxx - qyy) + np.abs(qyx + qxy)).max())


def phwc_residual(samples, tol=DEFAULT_TOL_C) -> ResidualReport:
    """Residual of the two PHWC gradient identities at each sample."""
    if not samples:
        raise DimensionMismatch("need at least one sample")
    raw, normed, weights = [], [], []
    for s in samples:
        val = _phwc_value(s.gram, s.n)
        raw.append(val)
        normed.append(val / s.scale)
        weights.append(s.weight)
    return ResidualReport(
        kind="phwc",
        locations=tuple(s.location for s in samples),
        raw=np.asarray(raw),
        normalized=np.asarray(normed),
        tol=tol,
        extras={"weights": np.asarray(weights)},
    )


def hwc_residual(samples, target: ChartedTarget, tol=DEFAULT_TOL_C) -> ResidualReport:
    """Residual of Q = lambda h^-1(phi) with the trace-ratio dilation.

    lambda = tr(Q) / tr(h^-1) is the unique candidate fixed by the
    diagonal constraints; it is reported per sample and clamped to the
    report when negative beyond -tol.
    """
    raw, normed, weights, lams = [], [], [], []
    for s in samples:
        hinv = target.inverse_metric_at(
            np.concatenate([s.image.real, s.image.imag]))
        denom = float(np.trace(hinv))
        if denom <= 0:
            raise TargetMetricSingular("inverse metric trace not positive")
        lam = float(np.trace(s.gram)) / denom
        if lam < -tol:
            lam = max(lam, 0.0)
        val = float(np.abs(s.gram - lam * hinv).max())
        raw.append(val)
        normed.append(val / s.scale)
        weights.append(s.weight)
        lams.append(lam)
    return ResidualReport(
        kind="hwc",
        locations=tuple(s.location for s in samples),
        raw=np.asarray(raw),
        normalized=np.asarray(normed),
        tol=tol,
        extras={"weights": np.asarray(weights),
                "dilation": np.asarray(lams)},
    )


def commutator_form_residual(samples, target: ChartedTarget,
                             tol=DEFAULT_TOL_C) -> ResidualReport:
    """Commutator form: || [dphi dphi^*, J] ||_inf per sample, with
    dphi^* the metric adjoint, i.e. dphi dphi^* = Q h(phi)."""
    raw, normed, weights = [], [], []
    for s in samples:
        h = target.metric_at(np.concatenate([s.image.real, s.image.imag]))
        j = complex_structure(s.n)
        m = s.gram @ h
        val = float(np.abs(m @ j - j @ m).max())
        raw.append(val)
        normed.append(val / s.scale)
        weights.append(s.weight)
    return ResidualReport(
        kind="commutator",
        locations=tuple(s.location for s in samples),
        raw=np.asarray(raw),
        normalized=np.asarray(normed),
        tol=tol,
        extras={"weights": np.asarray(weights)},
    )


def phwc_via_functions(samples, fn_family, tol=DEFAULT_TOL_C) -> ResidualReport:
    """PHWC residual of f o phi for every f in the family, max per sample.

    The family must contain at least the coordinates, the pair sums and
    the products z_A z_B, i z_A z_B: coordinates alone miss cross-pair
    violations.
    """
    raw, normed, weights = [], [], []
    for s in samples:
        worst = 0.0
        for f in fn_family:
            comp = s.composed_with(_as_map(f))
            worst = max(worst, _phwc_value(comp.gram, comp.n))
        raw.append(worst)
        normed.append(worst / s.scale)
        weights.append(s.weight)
    return ResidualReport(
        kind="phwc_via_functions",
        locations=tuple(s.location for s in samples),
        raw=np.asarray(raw),
        normalized=np.asarray(normed),
        tol=tol,
        extras={"weights": np.asarray(weights)},
    )


def _as_map(f):
    from .target import HolomorphicFunction, HolomorphicMap
    if isinstance(f, HolomorphicMap):
        return f
    if isinstance(f, HolomorphicFunction):
        return HolomorphicMap((f,), name=f.name)
    raise DimensionMismatch(f"not a holomorphic function or map: {f!r}")


@dataclass(frozen=True)
class PostcomposeResult:
    passed: bool
    input_residuals: np.ndarray
    output_residuals: np.ndarray
    jacobian_bound: float


def postcompose_preserves_phwc(samples, hol_map, tol=1e-9,
                               cr_tol=1e-8) -> PostcomposeResult:
    """Assert PHWC is preserved under post-composition with a holomorphic
    map: zero residual in implies zero residual out; nonzero inputs are
    only required to satisfy out <= in * K + tol with K the squared
    jacobian-norm bound.

    The map must pass a Cauchy-Riemann pre-check at every image point;
    anti-holomorphic candidates are refused with NotHolomorphic.
    """
    hol_map = _as_map(hol_map)
    for s in samples:
        for f in hol_map.components:
            res = cauchy_riemann_residual(f, s.image)
            if res > cr_tol:
                raise NotHolomorphic(
                    f"component {f.name} fails Cauchy-Riemann at {s.image} "
                    f"(residual {res:.3g})")
    r_in = phwc_residual(samples)
    composed = [s.composed_with(hol_map) for s in samples]
    r_out = phwc_residual(composed)
    kbound = 0.0
    for s in samples:
        jac = hol_map.real_jacobian(np.concatenate([s.image.real, s.image.imag]))
        kbound = max(kbound, float(np.linalg.norm(jac, 2)) ** 2)
    ok = bool(np.all(r_out.raw <= r_in.raw * kbound + tol))
    return PostcomposeResult(ok, r_in.raw, r_out.raw, kbound)


# ---------------------------------------------------------------------------
# constructive equivalence suite
# ---------------------------------------------------------------------------

def _random_spd(rng, m, spread=1.0):
    a = rng.standard_normal((m, m)) * spread
    return a @ a.T + (0.1 + spread) * np.eye(m)


def _random_hermitian_spd(rng, n):
    """SPD 2n x 2n compatible with the complex structure: J^T h J = h."""
    p = _random_spd(rng, 2 * n)
    j = complex_structure(n)
    return 0.5 * (p + j.T @ p @ j)


@dataclass(frozen=True)
class EquivalenceSuiteResult:
    hwc_to_phwc_max: float
    n1_phwc_to_hwc_max: float
    n2_counterexample_hwc_residual: float
    commutator_agreement: bool
    passed: bool


def hwc_implies_phwc_suite(random_count=1000, n=3, domain_dim=None,
                           seed=42, tol=1e-10) -> EquivalenceSuiteResult:
    """Constructive check of the HWC => PHWC implication and the n = 1
    equivalence.

    HWC samples are built exactly: rows = sqrt(lambda) h^-1/2 R g^1/2
    with R row-orthonormal, so Q = lambda h^-1 by construction.  The n=1
    converse builds PHWC pairs (equal norms, orthogonal) and checks the
    HWC identity with the dilation defined by the diagonal ratio.  A
    planted n=2 sample (two holomorphic blocks with different moduli) is
    verified PHWC but not HWC.
    """
    rng = np.random.default_rng(seed)
    m = domain_dim or (2 * n + 1)

    worst_fwd = 0.0
    flat2 = _flat_cache(1)
    agree = True
    for _ in range(random_count):
        g = _random_spd(rng, m)
        h = _random_hermitian_spd(rng, n)
        lam = rng.uniform(0.0, 4.0)
        r = np.linalg.qr(rng.standard_normal((m, 2 * n)))[0].T
        evals, evecs = np.linalg.eigh(h)
        h_inv_sqrt = evecs @ np.diag(evals ** -0.5) @ evecs.T
        gvals, gvecs = np.linalg.eigh(g)
        g_sqrt = gvecs @ np.diag(gvals ** 0.5) @ gvecs.T
        rows = np.sqrt(lam) * h_inv_sqrt @ r @ g_sqrt
        sample = GradientSample(rows, g, np.zeros(n, dtype=complex))
        worst_fwd = max(worst_fwd, _phwc_value(sample.gram, n) / sample.scale)
        # commutator agreement on arbitrary (generically non-PHWC) samples
        wild = GradientSample(rng.standard_normal((2, m)), g,
                              np.zeros(1, dtype=complex))
        agree &= _joint_verdicts_agree(wild, tol)

    worst_n1 = 0.0
    for _ in range(random_count):
        g = _random_spd(rng, m)
        du = rng.standard_normal(m)
        dv = rng.standard_normal(m)
        ginv = np.linalg.inv(g)
        # g^-1-orthogonalize and equalize norms: PHWC by construction
        dv = dv - (du @ ginv @ dv) / (du @ ginv @ du) * du
        dv *= np.sqrt((du @ ginv @ du) / (dv @ ginv @ dv))
        sample = GradientSample(np.stack([du, dv]), g,
                                np.zeros(1, dtype=complex))
        rep = hwc_residual([sample], flat2)
        worst_n1 = max(worst_n1, rep.normalized.max())

    counter = _planted_n2_counterexample()
    counter_hwc = hwc_residual([counter], _flat_cache(2)).raw[0]
    counter_phwc = phwc_residual([counter]).raw[0]

    passed = (worst_fwd < tol and worst_n1 < tol and agree
              and counter_phwc < tol and counter_hwc > 0.1)
    return EquivalenceSuiteResult(
        hwc_to_phwc_max=float(worst_fwd),
        n1_phwc_to_hwc_max=float(worst_n1),
        n2_counterexample_hwc_residual=float(counter_hwc),
        commutator_agreement=bool(agree),
        passed=bool(passed),
    )


_FLAT_CACHE = {}


def _flat_cache(n):
    from .target import flat_target
    if n not in _FLAT_CACHE:
        _FLAT_CACHE[n] = flat_target(n)
    return _FLAT_CACHE[n]


def _joint_verdicts_agree(sample, tol):
    """Zero/nonzero verdicts of the two PHWC forms agree on one sample.

    For flat targets the commutator norm c and the identity-form value p
    satisfy c <= p <= 2c, so the verdicts must coincide and the sandwich
    is asserted too.
    """
    phwc = _phwc_value(sample.gram, sample.n) / sample.scale
    rep = commutator_form_residual([sample], _flat_cache(sample.n))
    comm = rep.normalized[0]
    slack = 1e-12 * max(1.0, phwc, comm)
    sandwich = comm <= phwc + slack and phwc <= 2.0 * comm + slack
    return ((phwc <= tol) == (comm <= tol)) and sandwich


def _planted_n2_counterexample(c1=1.5 + 0.0j, c2=0.5j):
    """PHWC-but-not-HWC: block map (c1 z1, c2 z2) with |c1| != |c2|."""
    rows = np.zeros((4, 4))
    rows[0, :2] = [c1.real, -c1.imag]   # x1
    rows[1, 2:] = [c2.real, -c2.imag]   # x2
    rows[2, :2] = [c1.imag, c1.real]    # y1
    rows[3, 2:] = [c2.imag, c2.real]    # y2
    return GradientSample(rows, np.eye(4), np.zeros(2, dtype=complex))


# ---------------------------------------------------------------------------
# PHM checks and the pullback / factorization suites
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhmReport:
    harmonic: object               # HarmonicResidual
    phwc: ResidualReport
    via_functions: ResidualReport
    tol_h: float
    verdict_harmonic: bool
    verdict_phwc: bool

    @property
    def verdict(self) -> bool:
        return self.verdict_harmonic and self.verdict_phwc

    def as_dict(self):
        return {
            "harmonic": self.harmonic.as_dict(),
            "phwc": self.phwc.as_dict(),
            "via_functions": (self.via_functions.as_dict()
                              if self.via_functions else None),
            "verdict_harmonic": self.verdict_harmonic,
            "verdict_phwc": self.verdict_phwc,
            "verdict": self.verdict,
        }


def phm_check(complex_, metric, plmap, target, fn_family=None,
              tol_h=DEFAULT_TOL_H, tol_c=DEFAULT_TOL_C,
              system=None) -> PhmReport:
    """Pseudo harmonic morphism verdict: weakly harmonic and PHWC."""
    if system is None:
        system = assemble_stiffness(complex_, metric)
    harm = weak_harmonic_residual(system, target, plmap)
    samples = samples_from_plmap(complex_, metric, plmap)
    phwc = phwc_residual(samples, tol=tol_c)
    via = None
    if fn_family is not None:
        via = phwc_via_functions(samples, fn_family, tol=tol_c)
    return PhmReport(
        harmonic=harm,
        phwc=phwc,
        via_functions=via,
        tol_h=tol_h,
        verdict_harmonic=bool(harm.inf <= tol_h),
        verdict_phwc=bool(phwc.verdict),
    )


@dataclass(frozen=True)
class PullbackSuiteResult:
    """Dual-norm residuals of the pullbacks per function and level."""

    names: tuple
    levels: int
    residuals: dict          # name -> list of dual-energy norms
    orders: dict             # name -> list of dyadic orders (or None)
    passed: bool
    zero_floor: float = 1e-12

    def as_dict(self):
        return {
            "levels": self.levels,
            "residuals": {k: list(map(float, v))
                          for k, v in self.residuals.items()},
            "orders": {k: [None if o is None else float(o) for o in v]
                       for k, v in self.orders.items()},
            "passed": self.passed,
        }


def pullback_harmonicity_suite(complex_, metric, plmap, fn_family,
                               refinement_levels=3,
                               require_order=1.0) -> PullbackSuiteResult:
    """Pullbacks of holomorphic functions through an exact PHM become
    harmonic in the refinement limit.

    At each red-refinement level, f o phi is sampled at the vertices and
    its interior weak-harmonic residual is measured in the discrete dual
    (energy) norm; for PHM inputs the norms must decrease with empirical
    order >= ``require_order``, families that are reproduced exactly by
    PL interpolation (affine f) count as converged at the zero floor.
    """
    cx, mt, pm = complex_, metric, plmap
    levels = []
    for _ in range(refinement_levels):
        system = assemble_stiffness(cx, mt)
        levels.append((cx, mt, pm, system))
        cx, mt, (pm,) = refine(cx, mt, (pm,))
    residuals = {f.name: [] for f in fn_family}
    for cx_l, mt_l, pm_l, system in levels:
        for f in fn_family:
            vals = {v: f.value_real(pm_l.values[v])
                    for v in cx_l.vertices}
            pull = PLMap(cx_l, vals)
            res = weak_harmonic_residual(system, None, pull)
            residuals[f.name].append(res.dual_energy)

    orders = {}
    floor = 1e-12
    passed = True
    for name, vals in residuals.items():
        if max(vals) <= floor:
            orders[name] = [None] * (len(vals) - 1)
            continue
        os = []
        for a, b in zip(vals, vals[1:]):
            if a <= floor and b <= floor:
                os.append(None)
                continue
            os.append(np.log2(a / max(b, 1e-300)))
        orders[name] = os
        measured = [o for o in os if o is not None]
        if not measured or min(measured) < require_order:
            passed = False
    return PullbackSuiteResult(
        names=tuple(f.name for f in fn_family),
        levels=refinement_levels,
        residuals=residuals,
        orders=orders,
        passed=bool(passed),
    )


@dataclass(frozen=True)
class FactorizationResult:
    base_report: PhmReport
    total_report: PhmReport
    max_phwc_difference: float
    max_harmonic_difference: float
    verdicts_match: bool
    passed: bool

    def as_dict(self):
        return {
            "base": self.base_report.as_dict(),
            "total": self.total_report.as_dict(),
            "max_phwc_difference": self.max_phwc_difference,
            "max_harmonic_difference": self.max_harmonic_difference,
            "verdicts_match": self.verdicts_match,
            "passed": self.passed,
        }


def factorization_suite(covering, plmap_base: PLMap, target,
                        fn_family=None, tol=1e-10) -> FactorizationResult:
    """Residual reports of phi and phi o pi agree through a covering.

    ``covering`` provides base/total complexes and metrics, the vertex
    projection and the matched-simplex table with exact frame conjugations
    (see examples.build_covering); sheet isometry is validated there and a
    scaled sheet raises NotACovering.
    """
    covering.validate()
    base_cx, base_mt = covering.base_complex, covering.base_metric
    tot_cx, tot_mt = covering.total_complex, covering.total_metric

    # rebase onto the covering's own complexes (values are keyed by id)
    plmap_base = PLMap(base_cx, {v: plmap_base.values[v]
                                 for v in base_cx.vertices})
    lifted = PLMap(tot_cx, {v: plmap_base.values[covering.vertex_map[v]]
                            for v in tot_cx.vertices})

    rep_base = phm_check(base_cx, base_mt, plmap_base, target, fn_family)
    rep_total = phm_check(tot_cx, tot_mt, lifted, target, fn_family)

    # matched-simplex comparison of the PHWC residuals
    base_raw = dict(zip(rep_base.phwc.locations, rep_base.phwc.raw))
    worst_c = 0.0
    for t_idx, b_idx in covering.simplex_map.items():
        worst_c = max(worst_c, abs(rep_total.phwc.raw[t_idx]
                                   - base_raw[("simplex", b_idx)]))

    # matched-vertex comparison of the weak-harmonic residuals
    base_rows = {v: r for v, r in zip(rep_base.harmonic.vertex_order,
                                      rep_base.harmonic.per_vertex)}
    worst_h = 0.0
    for i, v in enumerate(rep_total.harmonic.vertex_order):
        worst_h = max(worst_h, float(np.abs(
            rep_total.harmonic.per_vertex[i]
            - base_rows[covering.vertex_map[v]]).max()))

    verdicts = (rep_base.verdict == rep_total.verdict
                and rep_base.verdict_phwc == rep_total.verdict_phwc
                and rep_base.verdict_harmonic == rep_total.verdict_harmonic)
    passed = bool(worst_c <= tol and worst_h <= tol and verdicts)
    return FactorizationResult(rep_base, rep_total, float(worst_c),
                               float(worst_h), bool(verdicts), passed)


def component_residual_consistency(system, plmap: PLMap) -> float:
    """Corollary check on flat targets: the residual of the full map
    equals the stacked residuals of its coordinate-pair components."""
    full = weak_harmonic_residual(system, None, plmap)
    n = plmap.target_dim // 2
    worst = 0.0
    order = list(system.vertex_order)
    for k in range(n):
        comp = PLMap(plmap.complex,
                     {v: plmap.values[v][[k, n + k]] for v in order})
        res = weak_harmonic_residual(system, None, comp)
        stacked = full.per_vertex[:, [k, n + k]]
        worst = max(worst, float(np.abs(stacked - res.per_vertex).max()))
    return worst
