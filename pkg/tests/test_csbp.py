"""Simulators: determinism, absorption, law checks at unit-test sample sizes.

Statistical assertions run at fixed seeds with 3-to-4 sigma bands (plus
declared discretisation budgets), so they are deterministic; the full-size
calibrated versions live in the acceptance suite.
"""

import json
import math

import numpy as np
import pytest
from scipy import stats

from brownian_hulls import formulas as F
from brownian_hulls.csbp import (
    CsbpParams,
    EnsembleResult,
    JumpRecord,
    SampledPath,
    bm_exit_functional,
    csbp_ensemble,
    extinction_times,
    reversed_boundary_ensemble,
    sample_xi,
    sample_xi_by_inversion,
    simulate_csbp,
    simulate_reversed_boundary,
    stable_increments,
    stable_scale,
)
from brownian_hulls.errors import ConfigError, DomainError
from brownian_hulls.rng import substream

C = F.CANONICAL_C


def mean_se(v):
    return v.mean(), v.std(ddof=1) / math.sqrt(len(v))


class TestStableIncrements:
    def test_laplace_transform(self):
        rng = substream(99)
        x = stable_increments(rng, 1.0, size=200_000)
        for u in (0.5, 1.0):
            m, se = mean_se(np.exp(-u * x))
            assert m == pytest.approx(math.exp(math.sqrt(2.0) * u ** 1.5), abs=4 * se)

    def test_duration_scaling(self):
        rng = substream(7)
        h = 0.02
        sig = stable_scale(1.0, h)  # state 1, step h
        x = stable_increments(rng, sig, size=200_000)
        for u in (1.0, 2.0):
            m, se = mean_se(np.exp(-u * x))
            assert m == pytest.approx(math.exp(h * C * u ** 1.5), abs=4 * se)

    def test_against_scipy_cdf(self):
        # scipy's numeric stable CDF is an independent evaluation route
        rng = substream(3)
        x = stable_increments(rng, 1.0, size=4000)
        res = stats.kstest(x, lambda q: stats.levy_stable.cdf(q, 1.5, 1.0))
        assert res.pvalue > 1e-3


class TestSimulateCsbp:
    def test_zero_start(self):
        path = simulate_csbp(0.0, horizon=1.0, dt=1e-2, eps=1e-3, seed=1)
        assert np.all(path.values == 0.0)
        assert path.jumps == []

    def test_deterministic(self):
        a = simulate_csbp(1.0, horizon=0.5, dt=1e-3, eps=1e-3, seed=42)
        b = simulate_csbp(1.0, horizon=0.5, dt=1e-3, eps=1e-3, seed=42)
        assert np.array_equal(a.values, b.values)
        assert a.jumps == b.jumps

    def test_absorption_invariant(self):
        path = simulate_csbp(0.05, horizon=8.0, dt=1e-3, eps=1e-3, seed=11)
        path.validate()
        assert path.values[-1] == 0.0  # tiny start dies well before horizon 8

    def test_params_object(self):
        path = simulate_csbp(1.0, params=CsbpParams(c=2.0), horizon=0.1, dt=1e-3, eps=1e-3, seed=5)
        assert path.meta["c"] == 2.0

    def test_config_errors(self):
        with pytest.raises(ConfigError):
            simulate_csbp(1.0, horizon=1.0, dt=0.0, eps=1e-3, seed=1)
        with pytest.raises(ConfigError):
            simulate_csbp(1.0, horizon=1.0, dt=1e-3, eps=-1.0, seed=1)
        with pytest.raises(DomainError):
            simulate_csbp(-1.0, horizon=1.0, dt=1e-3, eps=1e-3, seed=1)

    def test_csv_json_roundtrip(self, tmp_path):
        path = simulate_csbp(1.0, horizon=0.05, dt=1e-3, eps=1e-3, seed=3)
        csv_file = tmp_path / "p.csv"
        json_file = tmp_path / "p.json"
        path.write_csv(str(csv_file))
        path.write_json(str(json_file))
        lines = csv_file.read_text().splitlines()
        assert lines[0] == "time,value"
        assert len(lines) == len(path.values) + 1
        payload = json.loads(json_file.read_text())
        assert payload["schema"] == 1
        assert payload["values"] == [float(v) for v in path.values]


class TestEnsembleLaws:
    def test_laplace_at_horizon(self):
        n = 30_000
        res = csbp_ensemble(1.0, horizon=1.0, dt=1e-3, seed=12, n=n, t_marks=[1.0])
        x1 = res.marks[:, 0]
        for lam in (0.5, 1.0, 2.0):
            m, se = mean_se(np.exp(-lam * x1))
            budget = 2.0 * lam * 1e-3
            assert abs(m - F.csbp_laplace(1.0, 1.0, lam)) <= 3.5 * se + budget

    def test_branching_property(self):
        # sum of independent paths from a and b matches one path from a+b
        n, t, lam = 25_000, 0.6, 1.0
        ra = csbp_ensemble(0.7, horizon=t, dt=1e-3, seed=21, n=n, t_marks=[t])
        rb = csbp_ensemble(0.5, horizon=t, dt=1e-3, seed=22, n=n, t_marks=[t])
        s = ra.marks[:, 0] + rb.marks[:, 0]
        m, se = mean_se(np.exp(-lam * s))
        assert m == pytest.approx(F.csbp_laplace(1.2, t, lam), abs=3.5 * se + 3e-3)

    def test_generic_c(self):
        n, c = 25_000, 2.5
        res = csbp_ensemble(1.0, horizon=0.5, dt=5e-4, seed=31, n=n, c=c, t_marks=[0.5])
        m, se = mean_se(np.exp(-res.marks[:, 0]))
        assert m == pytest.approx(F.csbp_laplace(1.0, 0.5, 1.0, c=c), abs=3.5 * se + 2e-3)

    def test_jump_tail_intensity(self):
        # expected count of jumps above y over [0, T] is x0 T kappa((y, inf))
        n, horizon, dt = 4000, 1.0, 2.5e-4
        res = csbp_ensemble(
            1.0, horizon=horizon, dt=dt, seed=41, n=n, count_jumps_above=(0.1, 0.5)
        )
        for j, y in enumerate((0.1, 0.5)):
            counts = res.jump_counts[:, j]
            m, se = mean_se(counts)
            assert m == pytest.approx(horizon * F.levy_tail_mass(y), abs=3.5 * se)

    def test_extinct_paths_stay_dead(self):
        res = csbp_ensemble(0.05, horizon=6.0, dt=1e-3, seed=51, n=300, t_marks=[3.0, 6.0])
        dead_mid = res.marks[:, 0] == 0.0
        assert dead_mid.sum() > 250
        assert np.all(res.marks[dead_mid, 1] == 0.0)


class TestExtinctionTimes:
    def test_law(self):
        T = extinction_times(1.0, dt=1e-3, seed=8, n=30_000)
        res = stats.kstest(T, lambda t: F.extinction_cdf(t, 1.0))
        assert res.pvalue > 1e-3

    def test_deterministic(self):
        a = extinction_times(1.0, dt=2e-3, seed=77, n=500)
        b = extinction_times(1.0, dt=2e-3, seed=77, n=500)
        assert np.array_equal(a, b)


class TestReversedBoundary:
    def test_single_path_structure(self):
        path = simulate_reversed_boundary(1.0, dt=2e-3, seed=9)
        path.validate()
        assert path.values[0] > 0.0  # value at r = dt, near the death point
        assert path.meta["extinction_time"] > 1.0
        # reversed path built from forward data: values bounded by start level
        assert path.values.max() <= path.meta["x_start"]

    def test_gamma_marginal_and_laplace(self):
        n = 20_000
        rev = reversed_boundary_ensemble(n, r_marks=[1.0], r_max=1.0, dt=1e-3, seed=13)
        z = rev.z_marks[:, 0]
        res = stats.kstest(z, lambda q: stats.gamma.cdf(q, 1.5, scale=2.0 / 3.0))
        assert res.pvalue > 1e-3
        for lam in (0.5, 2.0):
            m, se = mean_se(np.exp(-lam * z))
            assert abs(m - F.boundary_length_laplace(1.0, lam)) <= 3.5 * se + 2 * lam * 1e-3

    def test_conditional_kernel_binned(self):
        # among paths with Z_1 in a bin, the inner marginal follows the
        # conditional transform; bin-averaged target by quadrature
        n = 30_000
        rev = reversed_boundary_ensemble(n, r_marks=[0.5, 1.0], r_max=1.0, dt=1e-3, seed=14)
        z1, z05 = rev.z_marks[:, 0], rev.z_marks[:, 1]
        lo, hi = 0.8, 1.2
        mask = (z1 >= lo) & (z1 <= hi)
        assert mask.sum() > 3000
        from scipy import integrate

        for lam in (0.5, 1.0):
            den, _ = integrate.quad(lambda v: F.boundary_length_pdf(v, 1.0), lo, hi)
            num, _ = integrate.quad(
                lambda v: F.conditional_boundary_laplace(0.5, 1.0, v, lam)
                * F.boundary_length_pdf(v, 1.0),
                lo, hi,
            )
            target = num / den
            m, se = mean_se(np.exp(-lam * z05[mask]))
            assert m == pytest.approx(target, abs=3.5 * se + 2e-3)

    def test_downward_jumps_only(self):
        rev = reversed_boundary_ensemble(
            50, r_marks=[1.0], r_max=1.0, dt=1e-3, seed=15, record_jumps=True
        )
        for sz in rev.jump_sizes:
            assert np.all(sz > 0)  # stored as |dZ|, forward up-moves

    def test_jump_replay_matches_single_path(self):
        # the two-pass ensemble and the single-path simulator share the
        # stepping rule; with acceleration off and the same substream the
        # paths coincide where both are defined
        rev = reversed_boundary_ensemble(
            1, r_marks=[0.5, 1.0], r_max=1.0, dt=2e-3, seed=16,
            record_jumps=True, accel_factor=1, chunk=1,
        )
        single = simulate_reversed_boundary(1.0, dt=2e-3, seed=16)
        assert rev.extinction_time[0] == pytest.approx(single.meta["extinction_time"], rel=1e-12)
        z_single = {round(float(t), 6): v for t, v in zip(single.times, single.values)}
        assert rev.z_marks[0, 0] == pytest.approx(z_single[1.0], rel=1e-12)
        assert rev.z_marks[0, 1] == pytest.approx(z_single[0.5], rel=1e-12)

    def test_stability_under_refinement(self):
        # doubling x_start and halving eps moves the Laplace estimate by
        # less than one standard error band (truncation audit)
        n, lam = 8000, 1.0
        base = reversed_boundary_ensemble(n, r_marks=[1.0], r_max=1.0, dt=1e-3, seed=17)
        finer = reversed_boundary_ensemble(
            n, r_marks=[1.0], r_max=1.0, dt=1e-3, seed=17, x_start=100.0, eps=0.025
        )
        ma, sa = mean_se(np.exp(-lam * base.z_marks[:, 0]))
        mb, sb = mean_se(np.exp(-lam * finer.z_marks[:, 0]))
        assert abs(ma - mb) <= 3.0 * math.hypot(sa, sb)


class TestXiSamplers:
    def test_laplace(self):
        rng = substream(19)
        x = sample_xi(rng, size=300_000)
        for beta in (0.5, 1.0, 2.0):
            m, se = mean_se(np.exp(-beta * x))
            assert m == pytest.approx(F.xi_laplace(beta), abs=4 * se)

    def test_two_implementations_agree(self):
        a = sample_xi(substream(23, 0), size=100_000)
        b = sample_xi_by_inversion(substream(23, 1), size=100_000)
        res = stats.ks_2samp(a, b)
        assert res.pvalue > 1e-3

    def test_capped_mean(self):
        rng = substream(29)
        x = sample_xi(rng, size=400_000)
        m, se = mean_se(np.minimum(x, 10.0))
        assert m == pytest.approx(F.xi_capped_mean(10.0), abs=4 * se)


class TestBmExitFunctional:
    def test_coeff_zero(self):
        est = bm_exit_functional(2.0, 1.0, 0.0, dt=1e-3, n=1000, seed=1)
        assert est.mean == 1.0 and est.stderr == 0.0

    def test_closed_form_half(self):
        est = bm_exit_functional(2.0, 1.0, 6.0, dt=2e-4, n=20_000, seed=2)
        assert abs(est.mean - 0.125) <= 3.5 * est.stderr + est.bias_bound

    def test_closed_form_third(self):
        est = bm_exit_functional(3.0, 1.0, 6.0, dt=2e-4, n=20_000, seed=3)
        assert abs(est.mean - 1.0 / 27.0) <= 3.5 * est.stderr + est.bias_bound

    def test_domain(self):
        with pytest.raises(DomainError):
            bm_exit_functional(1.0, 2.0, 6.0, dt=1e-3, n=100, seed=1)


class TestSampledPathValidation:
    def test_rejects_negative_values(self):
        p = SampledPath(np.array([0.0, 1.0]), np.array([1.0, -0.5]))
        with pytest.raises(ConfigError):
            p.validate()

    def test_rejects_resurrection(self):
        p = SampledPath(np.array([0.0, 1.0, 2.0]), np.array([1.0, 0.0, 0.3]))
        with pytest.raises(ConfigError):
            p.validate()

    def test_rejects_out_of_span_jump(self):
        p = SampledPath(
            np.array([0.0, 1.0]), np.array([1.0, 1.5]), jumps=[JumpRecord(5.0, 0.5)]
        )
        with pytest.raises(ConfigError):
            p.validate()
