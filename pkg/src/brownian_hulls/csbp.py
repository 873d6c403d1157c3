"""Seeded simulators for the branching process behind hull boundary lengths.

The continuous-state branching process (CSBP) with mechanism
``psi(u) = c * u**1.5`` is simulated through its Lamperti representation:
a spectrally positive 3/2-stable Levy process, sampled with exact-in-law
increments (Chambers-Mallows-Stuck construction), driven through the
Lamperti clock by explicit Euler stepping.  Over a step of length ``dt``
from state ``x`` the process receives a stable increment of duration
``x * dt``; the only discretisation error is the O(dt) freezing of the
clock, since the increments themselves are exact.

Grid moves larger than both the jump threshold ``eps`` and eight times the
typical step scale ``(c x dt / sqrt 2)**(2/3)`` are classified as jumps and
recorded with their sizes; smaller jumps melt into the diffusive motion and
their neglected contribution is budgeted downstream (it scales like the
square root of the effective threshold).

The time-reversed boundary process (the CSBP started from "infinity" and
conditioned to die at 0) is realised by simulating forward from a high
start level until extinction and re-indexing time from the extinction
instant; the start level stands in for infinity with a quantified
truncation bias.

All simulators are deterministic functions of (arguments, seed) and use
the counter-keyed streams of :mod:`brownian_hulls.rng`.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import BudgetError, ConfigError, DomainError
from .formulas import CANONICAL_C
from .rng import substream

_SQRT2 = math.sqrt(2.0)

# CMS constants for the spectrally positive 3/2-stable law (alpha=3/2, beta=1).
_ALPHA = 1.5
_CMS_SHIFT = math.atan(-1.0) / _ALPHA  # -pi/6
_CMS_SCALE = 2.0 ** (1.0 / 3.0)

# Jump classification: a move counts as a jump when it exceeds both eps and
# this multiple of the typical diffusive step scale.
JUMP_SIGMA_MULTIPLE = 8.0


@dataclass(frozen=True)
class CsbpParams:
    """Branching mechanism coefficient: psi(u) = c * u**1.5."""

    c: float = CANONICAL_C

    def __post_init__(self) -> None:
        if not self.c > 0.0:
            raise DomainError(f"c must be > 0, got {self.c}")


class JumpRecord(NamedTuple):
    """A resolved jump: (time within the path, positive size)."""

    time: float
    size: float


@dataclass
class SampledPath:
    """A cadlag path on a grid with its resolved jump list.

    Invariants: times strictly increasing, values nonnegative, values stay
    at 0 after first hitting 0, every jump time lies inside the grid span.
    """

    times: np.ndarray
    values: np.ndarray
    jumps: list[JumpRecord] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def validate(self) -> None:
        if len(self.times) != len(self.values):
            raise ConfigError("times and values must have equal length")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ConfigError("times must be strictly increasing")
        if np.any(self.values < 0):
            raise ConfigError("values must be nonnegative")
        zero = np.flatnonzero(self.values == 0.0)
        if zero.size and np.any(self.values[zero[0]:] != 0.0):
            raise ConfigError("path must stay at 0 after absorption")
        if self.jumps:
            lo, hi = self.times[0], self.times[-1]
            for j in self.jumps:
                if not (lo <= j.time <= hi):
                    raise ConfigError(f"jump at {j.time} outside grid [{lo}, {hi}]")
                if j.size <= 0:
                    raise ConfigError("jump sizes must be positive")

    def write_csv(self, path: str) -> None:
        """Columns time,value; LF endings, '.' decimals (see CLI docs)."""
        _atomic_write(path, _csv_bytes(["time", "value"], zip(self.times, self.values)))

    def write_json(self, path: str) -> None:
        payload = {
            "schema": 1,
            "meta": _jsonable(self.meta),
            "times": [float(t) for t in self.times],
            "values": [float(v) for v in self.values],
            "jumps": [[float(j.time), float(j.size)] for j in self.jumps],
        }
        _atomic_write(path, (json.dumps(payload, indent=1) + "\n").encode())


def _atomic_write(path: str, data: bytes) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _csv_bytes(header: Sequence[str], rows) -> bytes:
    import io

    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue().encode()


def _jsonable(meta: dict) -> dict:
    out = {}
    for k, v in meta.items():
        if isinstance(v, (np.integer,)):
            out[k] = int(v)
        elif isinstance(v, (np.floating,)):
            out[k] = float(v)
        else:
            out[k] = v
    return out


# ---------------------------------------------------------------------------
# Primitive samplers
# ---------------------------------------------------------------------------


def stable_increments(rng: np.random.Generator, sigma, size=None) -> np.ndarray:
    """Exact increments of the spectrally positive 3/2-stable driver.

    ``sigma`` is the stable scale; an increment of the driver over duration
    ``h`` has scale ``(c * h / sqrt 2)**(2/3)`` and Laplace transform
    ``E[exp(-u L_h)] = exp(h c u**1.5)``.
    """
    sigma = np.asarray(sigma, dtype=float)
    if size is None:
        size = sigma.shape
    v = np.pi * (rng.random(size) - 0.5)
    w = rng.standard_exponential(size)
    t = _ALPHA * (v + _CMS_SHIFT)
    a = (
        _CMS_SCALE
        * np.sin(t)
        / np.cos(v) ** (1.0 / _ALPHA)
        * (np.cos(v - t) / w) ** ((1.0 - _ALPHA) / _ALPHA)
    )
    return sigma * a


def stable_scale(x, dt, c: float = CANONICAL_C) -> np.ndarray:
    """Stable scale of one Euler step from state ``x``: (c x dt / sqrt 2)**(2/3)."""
    return np.cbrt((c * np.asarray(x, dtype=float) * dt / _SQRT2) ** 2)


def _time_credit(step, x, x_new):
    """Elapsed time credited to one Euler step, by the log-mean rule.

    The driver stretch of a step has duration x * step, and the true
    elapsed time is the integral of 1 / X over it.  Crediting a flat
    ``step`` under-counts whenever X dips (Jensen), which accumulates to an
    O(dt^{2/3}) extinction-time bias; interpolating X linearly between the
    endpoints credits ``step * x * log(x / x_new) / (x - x_new)`` and
    removes that term.  Absorbing steps (x_new <= 0) are credited ``step``.
    """
    dead = x_new <= 0.0
    xn = np.where(dead, x, x_new)
    diff = x - xn
    tiny = np.abs(diff) <= 1e-9 * x
    safe = np.where(tiny, x, xn)
    ratio = np.where(tiny, 1.0, x * np.log(x / safe) / np.where(tiny, 1.0, diff))
    return step * np.where(dead, 1.0, ratio)


def sample_xi(rng: np.random.Generator, size=None):
    """Volume marks with density (2 pi x^5)^{-1/2} exp(-1/(2x)).

    Sampled as the reciprocal of a chi-squared(3) draw: under y = 1/x the
    density becomes sqrt(y) exp(-y/2) / sqrt(2 pi), the chi-squared(3) law.
    """
    return 1.0 / rng.chisquare(3, size=size)


def sample_xi_by_inversion(rng: np.random.Generator, size=None):
    """Second, independent implementation of the xi mark sampler.

    Inverts the distribution function through the regularised incomplete
    gamma quantile (scipy's inverse-gamma with shape 3/2, scale 1/2), which
    shares no code path with the chi-squared rejection sampler above.
    """
    from scipy import stats

    u = rng.random(size)
    return stats.invgamma.ppf(u, 1.5, scale=0.5)


# ---------------------------------------------------------------------------
# Forward CSBP
# ---------------------------------------------------------------------------


def _check_sim_args(dt: float, eps: float) -> None:
    if not dt > 0.0:
        raise ConfigError(f"dt must be > 0, got {dt}")
    if not eps > 0.0:
        raise ConfigError(f"eps must be > 0, got {eps}")


def simulate_csbp(
    x0: float,
    params: CsbpParams | float = CsbpParams(),
    horizon: float = 1.0,
    dt: float = 1e-3,
    eps: float = 1e-3,
    seed: int = 0,
) -> SampledPath:
    """One CSBP path from ``x0`` on the grid 0, dt, ..., horizon.

    The path is absorbed at 0; values after extinction are 0 and no further
    jumps are recorded.  Jumps are grid moves exceeding both ``eps`` and
    eight step scales.  Deterministic per (arguments, seed).
    """
    c = params.c if isinstance(params, CsbpParams) else float(params)
    if x0 < 0.0:
        raise DomainError(f"x0 must be >= 0, got {x0}")
    _check_sim_args(dt, eps)
    n_steps = int(round(horizon / dt))
    times = np.arange(n_steps + 1) * dt
    values = np.zeros(n_steps + 1)
    values[0] = x0
    jumps: list[JumpRecord] = []
    meta = {"kind": "csbp", "seed": seed, "dt": dt, "eps": eps, "x0": x0, "c": c}
    if x0 == 0.0:
        return SampledPath(times, values, jumps, meta)
    rng = substream(seed)
    x = x0
    for k in range(n_steps):
        if x == 0.0:
            break
        sig = stable_scale(x, dt, c)
        move = float(stable_increments(rng, sig, size=()))
        x_new = x + move
        if x_new <= 0.0:
            x_new = 0.0
        elif move > max(eps, JUMP_SIGMA_MULTIPLE * sig):
            jumps.append(JumpRecord(time=times[k + 1], size=move))
        values[k + 1] = x_new
        x = x_new
    return SampledPath(times, values, jumps, meta)


@dataclass
class EnsembleResult:
    """Marginals of a CSBP ensemble run to a fixed horizon."""

    final: np.ndarray           # state at the horizon (0 if extinct)
    marks: np.ndarray           # (n, len(t_marks)) values at requested times
    extinct_time: np.ndarray    # grid extinction time, +inf if alive at horizon
    jump_counts: np.ndarray     # (n, len(count_jumps_above))
    volume: np.ndarray          # decorated jump volume, jumps strictly before horizon
    clock_integral: np.ndarray  # trapezoid of integral X_s ds over [0, horizon]


def csbp_ensemble(
    x0,
    horizon: float,
    dt: float,
    seed: int,
    n: int | None = None,
    c: float = CANONICAL_C,
    eps: float = 1e-3,
    t_marks: Sequence[float] = (),
    count_jumps_above: Sequence[float] = (),
    accumulate_volume: bool = False,
    stream_index: int = 0,
    chunk: int = 50_000,
) -> EnsembleResult:
    """Vectorised ensemble of forward CSBP paths on [0, horizon].

    ``x0`` may be a scalar (with ``n`` paths) or a vector of start states.
    When ``accumulate_volume`` is set, each resolved jump of size D draws an
    independent xi mark and adds xi * D**2 to the path's volume; jumps
    landing exactly at the horizon are excluded, matching the
    left-continuous volume convention.
    """
    _check_sim_args(dt, eps)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.size == 1 and n is not None:
        x0 = np.full(n, x0[0])
    n_paths = x0.size
    if np.any(x0 < 0):
        raise DomainError("x0 must be >= 0")
    n_steps = int(round(horizon / dt))
    mark_steps = np.asarray([int(round(t / dt)) for t in t_marks], dtype=int)
    if np.any(mark_steps > n_steps) or np.any(mark_steps < 0):
        raise ConfigError("t_marks must lie in [0, horizon]")
    thresholds = np.asarray(count_jumps_above, dtype=float)

    final = np.empty(n_paths)
    marks = np.empty((n_paths, mark_steps.size))
    extinct = np.full(n_paths, np.inf)
    counts = np.zeros((n_paths, thresholds.size))
    volume = np.zeros(n_paths)
    clock = np.zeros(n_paths)

    for lo in range(0, n_paths, chunk):
        hi = min(lo + chunk, n_paths)
        rng = substream(seed, stream_index + lo // chunk)
        x = x0[lo:hi].copy()
        ext = np.full(x.shape, np.inf)
        cnt = np.zeros((x.size, thresholds.size))
        vol = np.zeros(x.size)
        clk = np.zeros(x.size)
        mark_buf = np.empty((x.size, mark_steps.size))
        if mark_steps.size and np.any(mark_steps == 0):
            for j in np.flatnonzero(mark_steps == 0):
                mark_buf[:, j] = x
        for k in range(n_steps):
            alive = x > 0.0
            if np.any(alive):
                xs = x[alive]
                clk[alive] += xs * dt  # left-rule clock; absorbed paths add 0
                sig = stable_scale(xs, dt, c)
                move = stable_increments(rng, sig)
                x_new = xs + move
                absorbed = x_new <= 0.0
                x_new[absorbed] = 0.0
                jump = move > np.maximum(eps, JUMP_SIGMA_MULTIPLE * sig)
                jump &= ~absorbed
                if thresholds.size:
                    pos = np.where(absorbed, 0.0, move)
                    cnt[alive] += pos[:, None] > thresholds[None, :]
                if accumulate_volume and k < n_steps - 1 and np.any(jump):
                    xi = sample_xi(rng, size=int(jump.sum()))
                    add = np.zeros(xs.size)
                    add[jump] = xi * move[jump] ** 2
                    vol[alive] += add
                newly = np.flatnonzero(alive)[absorbed]
                ext[newly] = (k + 1) * dt
                x[alive] = x_new
            for j in np.flatnonzero(mark_steps == k + 1):
                mark_buf[:, j] = x
        final[lo:hi] = x
        marks[lo:hi] = mark_buf
        extinct[lo:hi] = ext
        counts[lo:hi] = cnt
        volume[lo:hi] = vol
        clock[lo:hi] = clk
    return EnsembleResult(final, marks, extinct, counts, volume, clock)


def extinction_times(
    x0: float,
    dt: float,
    seed: int,
    n: int,
    c: float = CANONICAL_C,
    max_time: float = 1e6,
    stream_index: int = 0,
    chunk: int = 50_000,
) -> np.ndarray:
    """Extinction times of ``n`` CSBP paths from ``x0``.

    Runs each path to absorption.  The extinction-time tail is heavy
    (P(T > t) ~ 4 x0 / (c^2 t^2)), so once fewer than 1/1024 of a chunk
    remains alive the step size is repeatedly doubled; this coarsens only
    the extreme top quantiles, far below any test's resolution.  Times are
    midpoint-corrected by half the absorbing step.  Raises
    :class:`BudgetError` if a path survives past ``max_time``.
    """
    _check_sim_args(dt, eps=1.0)
    if x0 <= 0.0:
        raise DomainError(f"x0 must be > 0, got {x0}")
    out = np.empty(n)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        m = hi - lo
        rng = substream(seed, stream_index + lo // chunk)
        x = np.full(m, float(x0))
        t = np.zeros(m)
        times = np.full(m, np.nan)
        idx = np.arange(m)
        step = dt
        accel_at = max(32, m // 1024)
        since_boost = 0
        while idx.size:
            sig = stable_scale(x, step, c)
            move = stable_increments(rng, sig)
            x_new = x + move
            t += _time_credit(step, x, x_new)
            dead = x_new <= 0.0
            if np.any(dead):
                times[idx[dead]] = t[dead] - 0.5 * step
                keep = ~dead
                x_new, t, idx = x_new[keep], t[keep], idx[keep]
            x = x_new
            since_boost += 1
            if idx.size <= accel_at and since_boost >= 512 and step < 0.25:
                step *= 2.0
                since_boost = 0
            if idx.size and t[0] > max_time:
                raise BudgetError(f"extinction not reached within max_time={max_time}")
        out[lo:hi] = times
    return out


# ---------------------------------------------------------------------------
# Time-reversed boundary process
# ---------------------------------------------------------------------------


def default_start_level(r_max: float) -> float:
    """Stand-in for the start "from infinity": 50 * r_max**2.

    The boundary process at radius r has mean r**2, so this start level
    dwarfs every level of interest; the truncation bias of the law of
    (Z_r)_{r <= r_max} is bounded by exp(-1.5 * x_start / r_max**2).
    """
    return 50.0 * r_max * r_max


def simulate_reversed_boundary(
    r_max: float,
    x_start: float | None = None,
    dt: float = 1e-3,
    eps: float | None = None,
    seed: int = 0,
    c: float = CANONICAL_C,
    max_steps: int = 50_000_000,
) -> SampledPath:
    """One boundary-length path (Z_r) on the grid r = dt, 2 dt, ..., r_max.

    Simulates the forward CSBP from ``x_start`` to extinction at time T and
    re-indexes r := T - t, so the path hits 0 as r decreases to 0 and has
    only downward jumps in r.  ``eps`` defaults to 1e-3 * x_start.  In the
    (exponentially unlikely) event T < r_max the unreachable part of the
    grid is filled with ``x_start``.
    """
    if r_max <= 0.0:
        raise DomainError(f"r_max must be > 0, got {r_max}")
    if x_start is None:
        x_start = default_start_level(r_max)
    if eps is None:
        eps = 1e-3 * x_start
    _check_sim_args(dt, eps)
    if x_start <= 0.0:
        raise DomainError(f"x_start must be > 0, got {x_start}")
    rng = substream(seed)
    values = [x_start]
    cum_t = [0.0]
    jump_steps: list[tuple[float, float]] = []  # (credited end time, size)
    x = x_start
    k = 0
    while x > 0.0:
        if k >= max_steps:
            raise BudgetError(f"extinction not reached within {max_steps} steps")
        sig = stable_scale(x, dt, c)
        move = float(stable_increments(rng, sig, size=()))
        x_new = x + move
        credit = float(_time_credit(dt, np.float64(x), np.float64(x_new)))
        t_end = cum_t[-1] + credit
        if x_new <= 0.0:
            x_new = 0.0
        elif move > max(eps, JUMP_SIGMA_MULTIPLE * sig):
            jump_steps.append((t_end, move))
        values.append(x_new)
        cum_t.append(t_end)
        x = x_new
        k += 1
    t_ext = cum_t[-1]
    cum_arr = np.asarray(cum_t)
    val_arr = np.asarray(values)
    n_grid = int(round(r_max / dt))
    r_times = np.arange(1, n_grid + 1) * dt
    # state at forward time tau is values[k] for tau in [cum_t[k], cum_t[k+1})
    targets = t_ext - r_times
    z = np.where(
        targets >= 0.0,
        val_arr[np.clip(np.searchsorted(cum_arr, targets, side="right") - 1, 0, len(values) - 1)],
        x_start,
    )
    jumps = [
        JumpRecord(time=t_ext - tj, size=sz)
        for tj, sz in jump_steps
        if dt <= t_ext - tj <= r_max  # grid span; reversed times below dt are dropped
    ]
    jumps.sort(key=lambda jr: jr.time)
    meta = {
        "kind": "reversed_boundary",
        "seed": seed,
        "dt": dt,
        "eps": eps,
        "x_start": x_start,
        "r_max": r_max,
        "c": c,
        "extinction_time": t_ext,
    }
    return SampledPath(np.asarray(r_times), z, jumps, meta)


@dataclass
class ReversedEnsembleResult:
    """Marginals and jump windows of a reversed-boundary ensemble."""

    z_marks: np.ndarray                 # (n, len(r_marks))
    extinction_time: np.ndarray         # (n,) forward extinction times
    jump_times: list[np.ndarray]        # per path, reversed times in (0, window]
    jump_sizes: list[np.ndarray]        # per path, matching |jump| sizes


def reversed_boundary_ensemble(
    n: int,
    r_marks: Sequence[float],
    r_max: float,
    x_start: float | None = None,
    dt: float = 1e-3,
    eps: float | None = None,
    seed: int = 0,
    c: float = CANONICAL_C,
    record_jumps: bool = False,
    jump_window: float | None = None,
    accel_level: float | None = None,
    accel_factor: int = 16,
    max_time: float = 1e5,
    chunk: int = 50_000,
) -> ReversedEnsembleResult:
    """Vectorised ensemble of reversed boundary paths.

    Two deterministic passes per chunk: the first finds each path's
    extinction time, the second replays the identical draws and harvests
    values at reversed radii ``r_marks`` plus (optionally) all resolved
    jumps whose reversed time lies in (0, jump_window].

    Above ``accel_level`` (default 12 * r_max**2) steps are taken with
    ``accel_factor * dt``; the final stretch of every path, which is all
    that the reversed law at radii <= r_max sees, runs at fine ``dt``
    except on an event of probability about exp(-18).  Set
    ``accel_factor=1`` to disable (stability audits).
    """
    if r_max <= 0.0:
        raise DomainError(f"r_max must be > 0, got {r_max}")
    if x_start is None:
        x_start = default_start_level(r_max)
    if eps is None:
        eps = 1e-3 * x_start
    _check_sim_args(dt, eps)
    if accel_level is None:
        accel_level = 12.0 * r_max * r_max
    if accel_factor < 1:
        raise ConfigError("accel_factor must be >= 1")
    r_marks = np.asarray(sorted(r_marks, reverse=True), dtype=float)
    if np.any(r_marks > r_max) or np.any(r_marks <= 0):
        raise ConfigError("r_marks must lie in (0, r_max]")
    if jump_window is None:
        jump_window = r_max

    z_all = np.empty((n, r_marks.size))
    t_all = np.empty(n)
    jt_all: list[np.ndarray] = [np.empty(0)] * n
    js_all: list[np.ndarray] = [np.empty(0)] * n

    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        m = hi - lo
        ext = _reversed_pass(
            substream(seed, lo // chunk), m, x_start, dt, eps, c,
            accel_level, accel_factor, max_time,
            extinction_only=True,
        )
        res = _reversed_pass(
            substream(seed, lo // chunk), m, x_start, dt, eps, c,
            accel_level, accel_factor, max_time,
            extinction_only=False,
            ext_times=ext,
            r_marks=r_marks,
            record_jumps=record_jumps,
            jump_window=jump_window,
        )
        z_all[lo:hi] = res["z"]
        t_all[lo:hi] = ext
        if record_jumps:
            for i in range(m):
                jt_all[lo + i] = res["jump_times"][i]
                js_all[lo + i] = res["jump_sizes"][i]
    return ReversedEnsembleResult(z_all, t_all, jt_all, js_all)


def _reversed_pass(
    rng, m, x_start, dt, eps, c, accel_level, accel_factor, max_time,
    extinction_only, ext_times=None, r_marks=None, record_jumps=False, jump_window=None,
):
    """One sweep of a reversed-boundary chunk; draw-identical across passes."""
    x = np.full(m, float(x_start))
    t = np.zeros(m)
    idx = np.arange(m)
    ext = np.full(m, np.nan)
    if not extinction_only:
        # harvest target forward times, one row per mark (descending radii)
        targets = ext_times[None, :] - r_marks[:, None]  # (n_marks, m)
        z = np.full((m, r_marks.size), float(x_start))
        grabbed = np.zeros((m, r_marks.size), dtype=bool)
        t_window = ext_times - jump_window - 2.0 * dt
        jtimes: list[list[float]] = [[] for _ in range(m)]
        jsizes: list[list[float]] = [[] for _ in range(m)]
    while idx.size:
        coarse = x > accel_level
        step = np.where(coarse, accel_factor * dt, dt)
        sig = stable_scale(x, step, c)
        move = stable_increments(rng, sig)
        x_new = x + move
        dead = x_new <= 0.0
        credit = _time_credit(step, x, x_new)
        if not extinction_only:
            # the state x stands for all forward times in [t, t + credit)
            for j in range(r_marks.size):
                due = (~grabbed[idx, j]) & (t <= targets[j, idx]) & (t + credit > targets[j, idx])
                if np.any(due):
                    rows = idx[due]
                    z[rows, j] = x[due]
                    grabbed[rows, j] = True
        if not extinction_only and record_jumps:
            jump = (~dead) & (move > np.maximum(eps, JUMP_SIGMA_MULTIPLE * sig)) & (t >= t_window[idx])
            for w in np.flatnonzero(jump):
                jtimes[idx[w]].append(t[w] + credit[w])
                jsizes[idx[w]].append(move[w])
        x = np.where(dead, 0.0, x_new)
        t += credit
        if np.any(dead):
            ext[idx[dead]] = t[dead]
            keep = ~dead
            x, t, idx = x[keep], t[keep], idx[keep]
        if idx.size and np.any(t > max_time):
            raise BudgetError(f"extinction not reached within max_time={max_time}")
    if extinction_only:
        return ext
    out_t, out_s = [], []
    for i in range(m):
        rt = ext_times[i] - np.asarray(jtimes[i])
        keep = (rt > 0) & (rt <= jump_window)
        order = np.argsort(rt[keep])
        out_t.append(rt[keep][order])
        out_s.append(np.asarray(jsizes[i])[keep][order])
    return {"z": z, "jump_times": out_t, "jump_sizes": out_s}


# ---------------------------------------------------------------------------
# Brownian-motion exit functional
# ---------------------------------------------------------------------------


@dataclass
class McEstimate:
    """Monte Carlo estimate with its standard error and bias bound."""

    mean: float
    stderr: float
    n: int
    bias_bound: float = 0.0


def bm_exit_functional(
    start: float,
    stop_level: float,
    coeff: float,
    dt: float,
    n: int,
    seed: int,
    relative_step: float = 0.03,
    max_iters: int = 2_000_000,
    chunk: int = 50_000,
) -> McEstimate:
    """Estimate E_start[exp(-coeff * integral_0^{gamma_stop} ds / B_s^2)].

    Euler-Maruyama with trapezoidal accumulation of 1/B^2 along Brownian
    paths from ``start``, stopped at the first passage of ``stop_level``.
    Within-step crossings are detected by the exact Brownian-bridge
    crossing probability exp(-2 (B_k - a)(B_{k+1} - a)/h), removing the
    O(sqrt(dt)) first-passage bias.  Far above the barrier the step grows
    like (relative_step * (B - a))^2, which keeps the expected step count
    finite; the integrand contribution up there is negligible.

    For the closed-form target, a path from ``b`` stopped at ``a < b``
    with coeff 6 has expectation (a / b)**3.
    """
    if not (0.0 < stop_level < start):
        raise DomainError(f"need 0 < stop_level < start, got {stop_level}, {start}")
    if coeff < 0.0:
        raise DomainError(f"coeff must be >= 0, got {coeff}")
    _check_sim_args(dt, eps=1.0)
    if coeff == 0.0:
        return McEstimate(mean=1.0, stderr=0.0, n=n)
    a = stop_level
    total = 0.0
    total_sq = 0.0
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        m = hi - lo
        rng = substream(seed, lo // chunk)
        b = np.full(m, float(start))
        acc = np.zeros(m)  # integral of ds / B^2 so far
        done_vals: list[np.ndarray] = []
        iters = 0
        while b.size:
            if iters >= max_iters:
                raise BudgetError(f"step budget {max_iters} exhausted with {b.size} paths open")
            iters += 1
            h = np.maximum(dt, (relative_step * (b - a)) ** 2)
            z = rng.standard_normal(b.size)
            b_new = b + np.sqrt(h) * z
            crossed = b_new <= a
            # Brownian-bridge probability of an intra-step dip below a
            still = ~crossed
            if np.any(still):
                p_cross = np.exp(-2.0 * (b[still] - a) * (b_new[still] - a) / h[still])
                u = rng.random(int(still.sum()))
                bridge = np.zeros(b.size, dtype=bool)
                bridge[still] = u < p_cross
                crossed |= bridge
            b_eff = np.where(crossed, a, b_new)
            acc += 0.5 * h * (1.0 / b ** 2 + 1.0 / b_eff ** 2)
            if np.any(crossed):
                done_vals.append(np.exp(-coeff * acc[crossed]))
                keep = ~crossed
                b, acc = b_new[keep], acc[keep]
            else:
                b = b_new
        vals = np.concatenate(done_vals)
        total += vals.sum()
        total_sq += (vals ** 2).sum()
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0) * n / max(n - 1, 1)
    bias = (10.0 * dt + 0.5 * relative_step ** 2) * mean  # empirical Euler envelope
    return McEstimate(mean=mean, stderr=math.sqrt(var / n), n=n, bias_bound=bias)
