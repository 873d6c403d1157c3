"""Named verification suites binding simulators to closed forms.

Each suite runs a list of checks and returns a machine-readable report.
Check kinds:

* ``z``: a Monte Carlo estimate of a bounded statistic (Laplace
  functionals, capped means) against an exact target; passes when
  ``|estimate - target| <= z_crit * stderr + budget``, where ``budget`` is
  the declared discretisation bias (Euler step, jump threshold, start
  truncation) added linearly to the statistical band;
* ``ks`` / ``chi2``: goodness of fit with a p-value floor;
* ``quadrature`` / ``exact``: deterministic identities with a relative
  tolerance and no sampling;
* ``info``: reported numbers with no pass criterion (heavy-tailed raw
  means).

Only bounded statistics are ever z-tested; heavy-tailed quantities (the
volume marks, hull volumes) enter through Laplace transforms or capped
means so the central limit theorem actually applies.  Within a suite the
z threshold is Bonferroni-adjusted over the number of z checks (never
below 3) and the KS/chi-squared level is split evenly; the report records
the adjustment.

Reports are reproducible: replaying (suite, n, seed, params) regenerates
every estimate bit-identically (wall time and version metadata aside).
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy import integrate, stats

from . import formulas as F
from .csbp import (
    _atomic_write,
    _csv_bytes,
    bm_exit_functional,
    csbp_ensemble,
    extinction_times,
    reversed_boundary_ensemble,
    sample_xi,
    sample_xi_by_inversion,
)
from .errors import ConfigError
from .hulls import forward_pair_ensemble, small_jump_volume_budget
from .maps import canonical_code, growth_stats, sample_labeled_tree, schaeffer, tree_from_contour
from .rng import substream

SCHEMA_VERSION = "1"

THREADS_ENV = "BROWNIAN_HULLS_THREADS"


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass
class Check:
    """One verification check inside a suite."""

    name: str
    kind: str                   # z | ks | chi2 | quadrature | exact | info
    estimate: float
    target: float
    stderr: float = 0.0
    z: float | None = None
    pvalue: float | None = None
    tolerance: float | None = None
    budget: float = 0.0
    passed: bool = True
    note: str = ""


@dataclass
class SuiteSpec:
    """Binding of a named suite to its sample size, seed, and overrides."""

    name: str
    n: int | None = None
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.name not in SUITES:
            raise ConfigError(f"unknown suite {self.name!r}; known: {sorted(SUITES)}")
        if self.n is not None and self.n < 100:
            raise ConfigError("sample size must be >= 100")


@dataclass
class McReport:
    """Result of one suite run; JSON schema version 1."""

    suite: str
    seed: int
    n: int
    checks: list[Check]
    passed: bool
    wall_time_s: float
    version: str
    params: dict = field(default_factory=dict)
    schema: str = SCHEMA_VERSION

    def summary_lines(self) -> list[str]:
        lines = []
        for c in self.checks:
            status = "PASS" if c.passed else ("INFO" if c.kind == "info" else "FAIL")
            extra = f" z={c.z:+.2f}" if c.z is not None else ""
            extra += f" p={c.pvalue:.4g}" if c.pvalue is not None else ""
            lines.append(
                f"  [{status}] {c.name}: estimate={c.estimate:.6g} target={c.target:.6g}"
                f"{extra} (se={c.stderr:.2g}, budget={c.budget:.2g})"
            )
        lines.append(
            f"suite {self.suite}: {'PASS' if self.passed else 'FAIL'}"
            f" ({sum(c.passed for c in self.checks)}/{len(self.checks)} checks,"
            f" n={self.n}, seed={self.seed}, {self.wall_time_s:.1f}s)"
        )
        return lines

    def write_json(self, path: str) -> None:
        _atomic_write(path, (json.dumps(asdict(self), indent=1) + "\n").encode())

    def write_csv(self, path: str) -> None:
        rows = [
            [
                c.name,
                c.kind,
                repr(float(c.estimate)),
                repr(float(c.target)),
                repr(float(c.stderr)),
                "" if c.z is None else repr(float(c.z)),
                "" if c.pvalue is None else repr(float(c.pvalue)),
                "" if c.tolerance is None else repr(float(c.tolerance)),
                repr(float(c.budget)),
                int(c.passed),
            ]
            for c in self.checks
        ]
        _atomic_write(
            path,
            _csv_bytes(
                ["name", "kind", "estimate", "target", "stderr", "z", "pvalue",
                 "tolerance", "budget", "passed"],
                rows,
            ),
        )


def _version() -> str:
    from . import __version__

    return __version__


def z_crit(n_checks: int, base: float = 3.0) -> float:
    """Bonferroni-adjusted z threshold for a family of z checks.

    The two-sided exceedance level of ``base`` sigmas is split across the
    family; the result never falls below ``base``.
    """
    if n_checks <= 1:
        return base
    alpha = 2.0 * stats.norm.sf(base)
    return float(max(base, stats.norm.isf(alpha / (2.0 * n_checks))))


def _z_check(name, estimate, stderr, target, budget=0.0, crit=3.0, note="") -> Check:
    gap = abs(estimate - target)
    tol = crit * stderr + budget
    z = (estimate - target) / stderr if stderr > 0 else (0.0 if gap == 0.0 else math.inf)
    return Check(
        name=name, kind="z", estimate=float(estimate), target=float(target),
        stderr=float(stderr), z=float(z), tolerance=float(tol), budget=float(budget),
        passed=bool(gap <= tol), note=note,
    )


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    if values.size < 2:
        raise ConfigError("need at least two samples for a standard error")
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size))


def compare_laplace(samples, exact, grid) -> list[Check]:
    """Per-point Laplace comparison of samples against an exact transform.

    ``estimate = mean exp(-lam * sample)`` is bounded in [0, 1], so its
    standard error is CLT-calibrated regardless of the sample's tails.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size < 2:
        raise ConfigError("need at least two samples")
    if np.any(samples < 0):
        raise ConfigError("samples must be nonnegative")
    grid = list(grid)
    checks = []
    crit = z_crit(len(grid))
    for lam in grid:
        if lam <= 0:
            raise ConfigError("grid points must be positive")
        est, se = _mean_se(np.exp(-lam * samples))
        checks.append(_z_check(f"laplace@{lam:g}", est, se, exact(lam), crit=crit))
    return checks


def _ks_check(name, values, cdf, level) -> Check:
    res = stats.kstest(values, cdf)
    return Check(
        name=name, kind="ks", estimate=float(res.statistic), target=0.0,
        pvalue=float(res.pvalue), tolerance=level, passed=bool(res.pvalue > level),
        note=f"pass iff p > {level:g}",
    )


def _rel_check(name, value, target, rel_tol, kind="quadrature") -> Check:
    scale = max(abs(target), 1e-300)
    rel = abs(value - target) / scale
    return Check(
        name=name, kind=kind, estimate=float(value), target=float(target),
        tolerance=rel_tol, passed=bool(rel <= rel_tol),
        note=f"relative error {rel:.3g}",
    )


# ---------------------------------------------------------------------------
# Suite bodies.  Each returns (checks, params_used).
# ---------------------------------------------------------------------------


def _suite_analytic_identities(n, seed, **kw):
    checks: list[Check] = []
    lam_mu = [(l, m) for l in (0.5, 1.0, 2.0) for m in (0.5, 1.0, 2.0)]

    # Riccati residual of u_joint on a grid, second central difference
    h = 2e-4
    worst = 0.0
    for lam, mu in lam_mu:
        for x in np.linspace(0.1, 5.0, 25):
            u0 = F.u_joint(x, lam, mu)
            upp = (F.u_joint(x + h, lam, mu) - 2.0 * u0 + F.u_joint(x - h, lam, mu)) / h**2
            resid = abs(0.5 * upp - (2.0 * u0 * u0 - mu)) / (2.0 * u0 * u0 + mu)
            worst = max(worst, resid)
    checks.append(_rel_check("riccati-residual(max over grid)", worst, 0.0, 1e-6, kind="exact"))
    checks[-1].passed = worst <= 1e-6
    checks[-1].note = f"max relative residual {worst:.3g}"

    # boundary value u(0+) = lam
    worst = max(
        abs(F.u_joint(1e-9, lam, mu) - lam) / lam for lam, mu in lam_mu
    )
    checks.append(_rel_check("riccati-boundary u(0+)=lam", worst, 0.0, 1e-6, kind="exact"))
    checks[-1].passed = worst <= 1e-6

    # semigroup: w_{a+b} = w_a o w_b
    worst = 0.0
    for lam, mu in lam_mu:
        for a in (0.3, 0.7):
            for b in (0.4, 1.1):
                lhs = F.u_joint(a + b, lam, mu)
                rhs = F.u_joint(a, F.u_joint(b, lam, mu), mu)
                worst = max(worst, abs(lhs - rhs) / abs(lhs))
    checks.append(_rel_check("flow w_{a+b}=w_a(w_b)", worst, 0.0, 1e-10, kind="exact"))
    checks[-1].passed = worst <= 1e-10

    # inverse: u_inf(theta(mu, lam), mu) = lam on a log grid
    worst = 0.0
    for mu in (0.5, 1.0, 2.0):
        root = math.sqrt(mu / 2.0)
        for fac in (1.00001, 1.1, 2.0, 10.0, 1e3):
            lam = fac * root
            worst = max(worst, abs(F.u_inf(F.theta(mu, lam), mu) - lam) / lam)
    checks.append(_rel_check("inverse u_inf(theta)=id", worst, 0.0, 1e-12, kind="exact"))
    checks[-1].passed = worst <= 1e-12

    # mu -> 0 degeneration onto the exit transform
    worst = 0.0
    for lam in (0.5, 1.0, 2.0):
        for x in (0.1, 1.0, 5.0):
            u = F.u_joint(x, lam, 1e-10)
            u0 = (lam ** -0.5 + math.sqrt(2.0 / 3.0) * x) ** -2
            worst = max(worst, abs(u - u0) / u0)
    checks.append(_rel_check("u at mu=1e-10 matches exit transform", worst, 0.0, 1e-6, kind="exact"))
    checks[-1].passed = worst <= 1e-6

    # kappa integral: compensated transform equals psi
    for u in (1.0, 4.0):
        val, _ = integrate.quad(
            lambda y: F.levy_measure_density(y) * (math.exp(-u * y) - 1.0 + u * y),
            0.0, np.inf, limit=400,
        )
        checks.append(_rel_check(f"kappa-integral psi({u:g})", val, F.psi_of(u), 1e-6))

    # kappa integral behind the joint-transform derivative at zero
    for lam, mu in ((0.5, 1.0), (1.0, 0.5), (2.0, 2.0)):
        alpha = math.sqrt(2.0 * mu)
        val, _ = integrate.quad(
            lambda y: F.levy_measure_density(y)
            * ((1.0 + alpha * y) * math.exp(-(alpha + lam) * y) - 1.0 + lam * y),
            0.0, np.inf, limit=400,
        )
        checks.append(
            _rel_check(
                f"kappa-integral derivative(lam={lam:g},mu={mu:g})",
                val, -F.w_derivative_at_zero(lam, mu), 1e-6,
            )
        )
    return checks, {}


def _suite_mixture_identity(n, seed, **kw):
    checks = []
    for r in (0.5, 1.0, 2.0):
        for mu in (0.5, 1.0):
            mix = F.gamma_average_32(
                lambda z: F.hull_volume_laplace_given_boundary(r, z, mu), r * r
            )
            checks.append(
                _rel_check(f"mixture r={r:g} mu={mu:g}", mix, F.hull_volume_laplace(r, mu), 1e-6)
            )
    return checks, {}


def _suite_chapman_kolmogorov(n, seed, **kw):
    checks = []
    for a, b in ((0.5, 1.0), (1.0, 2.0)):
        for lam in (0.5, 1.0, 2.0):
            avg = F.gamma_average_32(
                lambda z: F.conditional_boundary_laplace(a, b, z, lam), b * b
            )
            checks.append(
                _rel_check(
                    f"chapman-kolmogorov a={a:g} b={b:g} lam={lam:g}",
                    avg, F.boundary_length_laplace(a, lam), 1e-6,
                )
            )
    return checks, {}


def _suite_csbp_laplace(n, seed, **kw):
    n = n or 100_000
    dt = kw.get("dt", 1e-3)
    x0, t = kw.get("x0", 1.0), kw.get("t", 1.0)
    res = csbp_ensemble(x0, horizon=t, dt=dt, seed=seed, n=n, t_marks=[t])
    x_end = res.marks[:, 0]
    lams = (0.5, 1.0, 2.0)
    crit = z_crit(len(lams))
    # weak order-1 clock bias, envelope calibrated against dt-halving runs
    checks = []
    for lam in lams:
        est, se = _mean_se(np.exp(-lam * x_end))
        budget = 2.0 * lam * x0 * dt
        checks.append(
            _z_check(f"csbp-laplace lam={lam:g}", est, se,
                     F.csbp_laplace(x0, t, lam), budget=budget, crit=crit,
                     note=f"dt budget 2*lam*x0*dt={budget:.2g}")
        )
    return checks, {"dt": dt, "x0": x0, "t": t}


def _suite_extinction_law(n, seed, **kw):
    n = n or 100_000
    dt = kw.get("dt", 1e-3)
    x0 = kw.get("x0", 1.0)
    T = extinction_times(x0, dt=dt, seed=seed, n=n)
    checks = [
        _ks_check(
            "extinction-time KS",
            T, lambda t: F.extinction_cdf(t, x0), level=kw.get("level", 1e-3),
        )
    ]
    est, se = _mean_se(T)
    checks.append(
        Check(
            name="mean extinction time", kind="info", estimate=est,
            target=math.sqrt(1.5 * math.pi * x0), stderr=se,
            note="informational; exact mean sqrt(4 pi x0 / c^2)",
        )
    )
    return checks, {"dt": dt, "x0": x0}


def _suite_boundary_gamma(n, seed, **kw):
    n = n or 100_000
    dt = kw.get("dt", 1e-3)
    r = kw.get("r", 1.0)
    x_start = kw.get("x_start")
    rev = reversed_boundary_ensemble(
        n, r_marks=[r], r_max=r, x_start=x_start, dt=dt, seed=seed
    )
    z = rev.z_marks[:, 0]
    scale = 2.0 * r * r / 3.0
    checks = [
        _ks_check(
            f"boundary KS vs Gamma(3/2) at r={r:g}",
            z, lambda q: stats.gamma.cdf(q, 1.5, scale=scale), level=kw.get("level", 1e-3),
        )
    ]
    lams = (0.5, 1.0, 2.0)
    crit = z_crit(len(lams))
    xs = x_start if x_start is not None else 50.0 * r * r
    for lam in lams:
        est, se = _mean_se(np.exp(-lam * z))
        # clock-alignment bias ~ 2 lam r^2 dt (radius resolution) + truncation
        budget = 2.0 * lam * r * r * dt + math.exp(-1.5 * xs / (r * r))
        checks.append(
            _z_check(f"boundary-laplace lam={lam:g}", est, se,
                     F.boundary_length_laplace(r, lam), budget=budget, crit=crit)
        )
    return checks, {"dt": dt, "r": r, "x_start": xs}


def _suite_xi_sampler(n, seed, **kw):
    n = n or 1_000_000
    rng_a = substream(seed, 0)
    rng_b = substream(seed, 1)
    a = sample_xi(rng_a, size=n)
    b = sample_xi_by_inversion(rng_b, size=n)
    betas = (0.5, 1.0, 2.0)
    crit = z_crit(len(betas))
    checks = []
    for beta in betas:
        est, se = _mean_se(np.exp(-beta * a))
        checks.append(_z_check(f"xi-laplace beta={beta:g}", est, se, F.xi_laplace(beta), crit=crit))
    ks = stats.ks_2samp(a, b)
    checks.append(
        Check(
            name="two-sampler KS agreement", kind="ks", estimate=float(ks.statistic),
            target=0.0, pvalue=float(ks.pvalue), tolerance=1e-3,
            passed=bool(ks.pvalue > 1e-3), note="reciprocal-chi2 vs quantile inversion",
        )
    )
    cap = 10.0
    est, se = _mean_se(np.minimum(a, cap))
    checks.append(
        _z_check(f"capped mean E[min(xi,{cap:g})]", est, se, F.xi_capped_mean(cap), crit=3.0)
    )
    est_raw, se_raw = _mean_se(a)
    checks.append(
        Check(
            name="raw mean (heavy tail)", kind="info", estimate=est_raw, target=1.0,
            stderr=se_raw, note="informational; variance is infinite",
        )
    )
    return checks, {}


def _suite_hull_volume(n, seed, **kw):
    n = n or 10_000
    dt = kw.get("dt", 1e-4)
    eps = kw.get("eps", 2e-3)
    r = kw.get("r", 1.0)
    rev = reversed_boundary_ensemble(
        n, r_marks=[r], r_max=r, dt=dt, eps=eps, seed=seed, record_jumps=True
    )
    # decorate: V_r = sum xi * size^2 over jumps at reversed time <= r
    rng = substream(seed, 977)
    v = np.zeros(n)
    for i in range(n):
        sizes = rev.jump_sizes[i]
        if sizes.size:
            order = np.lexsort((rev.jump_times[i], -sizes))
            xi = sample_xi(rng, size=sizes.size)
            v[i] = float(np.sum(xi * sizes[order] ** 2))
    b_eff = max(eps, 8.0 * float(stable_scale_typ(r * r, dt)))
    vol_budget = small_jump_volume_budget(b_eff, r ** 3 / 3.0)
    mus = (0.5, 1.0)
    crit = z_crit(len(mus))
    checks = []
    for mu in mus:
        est, se = _mean_se(np.exp(-mu * v))
        checks.append(
            _z_check(
                f"hull-volume-laplace mu={mu:g}", est, se, F.hull_volume_laplace(r, mu),
                budget=mu * vol_budget, crit=crit,
                note=f"small-jump budget mu*{vol_budget:.3g} at threshold {b_eff:.3g}",
            )
        )
    cap = 5.0 * r ** 4
    est, se = _mean_se(np.minimum(v, cap))
    checks.append(
        Check(
            name=f"capped mean E[min(V,{cap:g})]", kind="info", estimate=est,
            target=r ** 4 / 3.0, stderr=se,
            note="informational; target is the exact uncapped mean r^4/3",
        )
    )
    return checks, {"dt": dt, "eps": eps, "r": r}


def stable_scale_typ(x: float, dt: float) -> float:
    """Typical per-step stable scale at state x (canonical mechanism)."""
    return (F.CANONICAL_C * x * dt / math.sqrt(2.0)) ** (2.0 / 3.0)


def _suite_forward_pair(n, seed, **kw):
    n = n or 100_000
    dt = kw.get("dt", 1e-4)
    eps = kw.get("eps", 1e-3)
    x0 = kw.get("x0", 1.0)
    a = kw.get("a", 1.0)
    res = forward_pair_ensemble(x0, horizon=a, dt=dt, seed=seed, n=n, eps=eps)
    b_eff = max(eps, 8.0 * stable_scale_typ(x0, dt))
    kap = math.sqrt(3.0 / (2.0 * math.pi)) * 2.0 * math.sqrt(b_eff)
    pairs = [(l, m) for l in (0.5, 1.0) for m in (0.5, 1.0)]
    crit = z_crit(len(pairs))
    checks = []
    for lam, mu in pairs:
        vals = np.exp(-lam * res.mass - mu * res.volume)
        est, se = _mean_se(vals)
        # first-order small-jump bias: mu * kappa-mass * E[e^{-...} int X]
        wgt = float(np.mean(vals * res.clock_integral))
        budget = mu * kap * wgt + 2.0 * lam * x0 * dt
        target = math.exp(-x0 * F.u_joint(a, lam, mu))
        checks.append(
            _z_check(f"joint-laplace lam={lam:g} mu={mu:g}", est, se, target,
                     budget=budget, crit=crit,
                     note=f"jump budget {mu * kap * wgt:.3g} + dt budget {2*lam*x0*dt:.2g}")
        )
    return checks, {"dt": dt, "eps": eps, "x0": x0, "a": a}


def _suite_bm_functional(n, seed, **kw):
    n = n or 100_000
    dt = kw.get("dt", 1e-4)
    cases = (((2.0, 1.0, 6.0), 0.125), ((3.0, 1.0, 6.0), 1.0 / 27.0))
    crit = z_crit(len(cases))
    checks = []
    for (start, stop, coeff), target in cases:
        est = bm_exit_functional(start, stop, coeff, dt=dt, n=n, seed=seed)
        checks.append(
            _z_check(
                f"exit functional start={start:g} stop={stop:g} coeff={coeff:g}",
                est.mean, est.stderr, target, budget=est.bias_bound, crit=crit,
                note="closed form (stop/start)^3",
            )
        )
    return checks, {"dt": dt}


def _suite_quad_exactness(n, seed, **kw):
    import itertools

    checks = []
    # exhaustive bijection audit for 1 <= n_edges <= 4
    def dyck_words(m):
        def rec(ups, downs, prefix):
            if ups == 0 and downs == 0:
                yield prefix
                return
            if ups > 0:
                yield from rec(ups - 1, downs, prefix + [1])
            if downs > ups:
                yield from rec(ups, downs - 1, prefix + [-1])

        yield from rec(m, m, [])

    for m in (1, 2, 3, 4):
        codes = {}
        total = 0
        for w in dyck_words(m):
            for incs in itertools.product((-1, 0, 1), repeat=m):
                tree = tree_from_contour(w, incs)
                if tree.label.min() < 1:
                    continue
                total += 1
                quad = schaeffer(tree)
                code = canonical_code(quad)
                codes[code] = codes.get(code, 0) + 1
        expected = 2 * 3 ** m * math.comb(2 * m, m) // (m + 1) // (m + 2)
        ok = total == expected and len(codes) == expected and set(codes.values()) == {1}
        checks.append(
            Check(
                name=f"bijection exhaustive n={m}", kind="exact", estimate=len(codes),
                target=expected, passed=bool(ok),
                note=f"{total} well-labeled trees, each rooted image hit once",
            )
        )

    # invariants on random maps
    maps_n = kw.get("maps", 100)
    size = kw.get("faces", 1000)
    violations = 0
    for i in range(maps_n):
        variant = "well-labeled" if i % 2 == 0 else "free-pointed"
        tree = sample_labeled_tree(size, variant=variant, seed=seed, stream_index=i)
        try:
            quad = schaeffer(tree)  # validates structure and distance = label
            quad.validate()
        except Exception:
            violations += 1
    checks.append(
        Check(
            name=f"invariants on {maps_n} maps of {size} faces", kind="exact",
            estimate=violations, target=0, passed=bool(violations == 0),
            note="face degree, Euler, bipartite, distance equals label",
        )
    )
    return checks, {"maps": maps_n, "faces": size}


def _suite_quad_hull_scaling(n, seed, **kw):
    samples = kw.get("samples", 50)
    faces = kw.get("faces", 100_000)
    k_grid = kw.get("k_grid", tuple(range(5, 26)))
    gs = growth_stats(samples, faces, k_grid, seed=seed)
    checks = [
        Check(
            name="hull growth exponent", kind="exact", estimate=gs.slope, target=4.0,
            tolerance=0.5, passed=bool(3.5 <= gs.slope <= 4.5),
            note=(
                f"geometric-mean fit over bulk window k={gs.fit_k[0]}..{gs.fit_k[-1]}"
                f" (grid {k_grid[0]}..{k_grid[-1]}); unguarded arithmetic-mean fit"
                f" {gs.slope_mean_full:.2f} saturates the finite map"
            ),
        )
    ]
    resc = gs.boundary_sample / gs.boundary_sample.mean()
    ks = stats.kstest(resc, lambda q: stats.gamma.cdf(q, 1.5, scale=2.0 / 3.0))
    checks.append(
        Check(
            name=f"rescaled boundary KS vs Gamma(3/2) at k={gs.boundary_k}", kind="ks",
            estimate=float(ks.statistic), target=0.0, pvalue=float(ks.pvalue),
            tolerance=1e-2, passed=bool(ks.pvalue > 1e-2),
        )
    )
    checks.append(
        Check(
            name="hull/ball mean volume ratio", kind="info",
            estimate=gs.hull_ball_ratio, target=3.5,
            note="desk-scale; continuum ratio of mean volumes is 7/2",
        )
    )
    return checks, {"samples": samples, "faces": faces, "k_grid": list(k_grid)}


def _suite_harness_selftest(n, seed, **kw):
    n = n or 100_000
    rng = substream(seed)
    checks = []
    # closed-form gamma draws against the boundary transform
    g = rng.gamma(1.5, scale=2.0 / 3.0, size=n)
    checks.extend(compare_laplace(g, lambda lam: F.boundary_length_laplace(1.0, lam), (0.5, 1.0, 2.0)))
    # textbook oracle: unit exponential against 1/(1+lam)
    e = rng.standard_exponential(n)
    for c in compare_laplace(e, lambda lam: 1.0 / (1.0 + lam), (0.5, 1.0, 2.0)):
        c.name = "exp " + c.name
        checks.append(c)
    return checks, {}


SUITES = {
    "analytic-identities": (_suite_analytic_identities, None, 5.0),
    "mixture-identity": (_suite_mixture_identity, None, 5.0),
    "chapman-kolmogorov": (_suite_chapman_kolmogorov, None, 5.0),
    "csbp-laplace": (_suite_csbp_laplace, 100_000, 60.0),
    "extinction-law": (_suite_extinction_law, 100_000, 60.0),
    "boundary-gamma": (_suite_boundary_gamma, 100_000, 300.0),
    "xi-sampler": (_suite_xi_sampler, 1_000_000, 60.0),
    "hull-volume": (_suite_hull_volume, 10_000, 600.0),
    "forward-pair": (_suite_forward_pair, 100_000, 600.0),
    "bm-functional": (_suite_bm_functional, 100_000, 600.0),
    "quad-exactness": (_suite_quad_exactness, None, 60.0),
    "quad-hull-scaling": (_suite_quad_hull_scaling, None, 600.0),
    "harness-selftest": (_suite_harness_selftest, 100_000, 60.0),
    "empty": (lambda n, seed, **kw: ([], {}), None, 5.0),
}


def suite_time_limit(name: str) -> float:
    """Declared wall-clock limit of a suite, in seconds."""
    return SUITES[name][2]


def run_suite(spec: SuiteSpec) -> McReport:
    """Execute a named suite and assemble its report.

    Deterministic per (name, n, seed, params); no global state is touched.
    """
    body, default_n, _limit = SUITES[spec.name]
    t0 = time.perf_counter()
    checks, params = body(spec.n, spec.seed, **spec.params)
    wall = time.perf_counter() - t0
    return McReport(
        suite=spec.name,
        seed=spec.seed,
        n=spec.n or (default_n or 0),
        checks=checks,
        passed=all(c.passed for c in checks),
        wall_time_s=wall,
        version=_version(),
        params=params,
    )


def run_suites(names, seed: int = 0, n: int | None = None) -> list[McReport]:
    """Run several suites, optionally across a small thread pool.

    The pool size comes from the BROWNIAN_HULLS_THREADS environment
    variable (default 1); reports are returned in the requested order
    regardless of completion order.
    """
    specs = [SuiteSpec(name, n=n, seed=seed) for name in names]
    workers = _thread_count()
    if workers == 1 or len(specs) == 1:
        return [run_suite(s) for s in specs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_suite, specs))
