"""Decorated hull volumes and the forward (mass, volume) pair."""

import math

import numpy as np
import pytest

from brownian_hulls import formulas as F
from brownian_hulls.csbp import JumpRecord, SampledPath, reversed_boundary_ensemble, sample_xi
from brownian_hulls.errors import ConfigError
from brownian_hulls.hulls import decorate, forward_pair, forward_pair_ensemble
from brownian_hulls.rng import substream


def mean_se(v):
    return v.mean(), v.std(ddof=1) / math.sqrt(len(v))


def toy_path(jumps):
    times = np.arange(1, 11) * 0.1
    values = np.linspace(5.0, 1.0, 10)
    return SampledPath(times, values, jumps=jumps, meta={"kind": "toy"})


class TestDecorate:
    def test_no_jumps_zero_volume(self):
        hull = decorate(toy_path([]), seed=1)
        assert np.all(hull.volume == 0.0)
        assert hull.marks == []

    def test_increments_at_jump_times_only(self):
        jumps = [JumpRecord(0.3, 1.5), JumpRecord(0.7, 0.4)]
        hull = decorate(toy_path(jumps), seed=2)
        hull.validate()
        dv = np.diff(hull.volume)
        nonzero = np.flatnonzero(dv)
        assert list(hull.boundary.times[nonzero + 1]) == [pytest.approx(0.3), pytest.approx(0.7)]
        # each increment is exactly xi * size^2
        by_time = {j.time: xi for j, xi in hull.marks}
        assert dv[nonzero[0]] == pytest.approx(by_time[0.3] * 1.5 ** 2)
        assert dv[nonzero[1]] == pytest.approx(by_time[0.7] * 0.4 ** 2)

    def test_marks_in_size_order(self):
        jumps = [JumpRecord(0.2, 0.3), JumpRecord(0.5, 2.0), JumpRecord(0.8, 0.3)]
        hull = decorate(toy_path(jumps), seed=3)
        sizes = [j.size for j, _ in hull.marks]
        times = [j.time for j, _ in hull.marks]
        assert sizes == [2.0, 0.3, 0.3]
        assert times[1] < times[2]  # ties resolved by time

    def test_deterministic(self):
        jumps = [JumpRecord(0.3, 1.0)]
        a = decorate(toy_path(jumps), seed=4)
        b = decorate(toy_path(jumps), seed=4)
        assert np.array_equal(a.volume, b.volume)

    def test_volume_grid_mismatch_rejected(self):
        hull = decorate(toy_path([]), seed=5)
        hull.volume = hull.volume[:-1]
        with pytest.raises(ConfigError):
            hull.validate()


class TestHullVolumeLaw:
    def test_laplace_against_closed_form(self):
        # moderate-size version of the decorated-volume law check
        n, dt, eps, r = 3000, 2e-4, 2e-3, 1.0
        rev = reversed_boundary_ensemble(
            n, r_marks=[r], r_max=r, dt=dt, eps=eps, seed=31, record_jumps=True
        )
        rng = substream(31, 977)
        v = np.zeros(n)
        for i in range(n):
            sizes = rev.jump_sizes[i]
            if sizes.size:
                xi = sample_xi(rng, size=sizes.size)
                v[i] = float(np.sum(xi * sizes ** 2))
        b_eff = max(eps, 8.0 * (F.CANONICAL_C * dt / math.sqrt(2)) ** (2.0 / 3.0))
        budget = 2.0 * math.sqrt(3.0 / (2 * math.pi)) * math.sqrt(b_eff) * (r ** 3 / 3.0)
        for mu in (0.5, 1.0):
            m, se = mean_se(np.exp(-mu * v))
            assert abs(m - F.hull_volume_laplace(r, mu)) <= 3.5 * se + mu * budget


class TestForwardPair:
    def test_zero_start(self):
        hull = forward_pair(0.0, horizon=0.5, dt=1e-2, seed=1)
        assert np.all(hull.boundary.values == 0.0)
        assert np.all(hull.volume == 0.0)

    def test_structure(self):
        hull = forward_pair(1.0, horizon=0.5, dt=1e-3, seed=7)
        hull.validate()
        # strict convention: no volume increment at the jump's own grid time
        for j, xi in hull.marks:
            k = int(np.searchsorted(hull.boundary.times, j.time - 1e-12))
            assert hull.volume[k] == pytest.approx(hull.volume[k - 1])
            assert hull.volume[k + 1] >= hull.volume[k] + xi * j.size ** 2 - 1e-12

    def test_joint_laplace(self):
        n, dt, eps, x0, a = 30_000, 2e-4, 1e-3, 1.0, 1.0
        res = forward_pair_ensemble(x0, horizon=a, dt=dt, seed=8, n=n, eps=eps)
        b_eff = max(eps, 8.0 * (F.CANONICAL_C * x0 * dt / math.sqrt(2)) ** (2.0 / 3.0))
        kap = 2.0 * math.sqrt(3.0 / (2 * math.pi)) * math.sqrt(b_eff)
        for lam, mu in ((0.5, 0.5), (1.0, 1.0)):
            vals = np.exp(-lam * res.mass - mu * res.volume)
            m, se = mean_se(vals)
            budget = mu * kap * float(np.mean(vals * res.clock_integral)) + 2 * lam * x0 * dt
            target = math.exp(-x0 * F.u_joint(a, lam, mu))
            assert abs(m - target) <= 3.5 * se + budget

    def test_markov_two_stage(self):
        # restarting at the midpoint with accumulated volume matches the
        # single-stage law (two-sample Laplace comparison)
        n, dt, lam, mu = 25_000, 5e-4, 0.8, 0.8
        one = forward_pair_ensemble(1.0, horizon=1.0, dt=dt, seed=9, n=n)
        half = forward_pair_ensemble(1.0, horizon=0.5, dt=dt, seed=10, n=n)
        two = forward_pair_ensemble(
            half.mass, horizon=0.5, dt=dt, seed=11, y0=half.volume, stream_index=500
        )
        va = np.exp(-lam * one.mass - mu * one.volume)
        vb = np.exp(-lam * two.mass - mu * two.volume)
        ma, sa = mean_se(va)
        mb, sb = mean_se(vb)
        assert abs(ma - mb) <= 3.5 * math.hypot(sa, sb) + 2e-3

    def test_scaling_relation(self):
        # (fac^2 Z_r, fac^4 V_r) at radius r matches (Z, V) at radius fac*r
        n, dt, fac, r = 20_000, 5e-4, 1.25, 0.8
        small = reversed_boundary_ensemble(
            n, r_marks=[r], r_max=r, dt=dt, eps=1e-3, seed=12, record_jumps=True
        )
        big = reversed_boundary_ensemble(
            n, r_marks=[fac * r], r_max=fac * r, dt=dt, eps=1e-3, seed=13, record_jumps=True
        )

        def volumes(rev, seed):
            rng = substream(seed, 977)
            out = np.zeros(n)
            for i in range(n):
                sz = rev.jump_sizes[i]
                if sz.size:
                    out[i] = float(np.sum(sample_xi(rng, size=sz.size) * sz ** 2))
            return out

        v_small = volumes(small, 12)
        v_big = volumes(big, 13)
        p, q = 0.7, 0.5
        a_vals = np.exp(-p * fac ** 2 * small.z_marks[:, 0] - q * fac ** 4 * v_small)
        b_vals = np.exp(-p * big.z_marks[:, 0] - q * v_big)
        ma, sa = mean_se(a_vals)
        mb, sb = mean_se(b_vals)
        assert abs(ma - mb) <= 3.5 * math.hypot(sa, sb) + 6e-3
