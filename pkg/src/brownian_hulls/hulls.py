"""Hull volumes from decorated boundary jumps.

Conditionally on the boundary-length process, the hull volume is the pure
jump functional ``V_r = sum over jumps s_i <= r of xi_i * (dZ_{s_i})**2``
with i.i.d. reciprocal chi-squared(3) marks ``xi_i`` independent of the
boundary path.  Between boundary jumps the volume is constant: the law has
no continuous part, so no interpolation is applied.

The forward variant runs the branching process forward from ``x0`` and
accumulates ``Y_a = sum over jumps s_i < a`` (strict inequality: volume is
left-continuous where mass is right-continuous).  Its joint transform is
``E[exp(-lam X_a - mu Y_a)] = exp(-x0 * u_joint(a, lam, mu))``.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .csbp import (
    CsbpParams,
    JumpRecord,
    SampledPath,
    _atomic_write,
    sample_xi,
    simulate_csbp,
)
from .errors import ConfigError
from .formulas import CANONICAL_C
from .rng import substream


@dataclass
class HullSample:
    """Paired boundary-length and volume paths with their jump marks.

    ``volume[k]`` is nondecreasing, constant between boundary jumps, and
    increments exactly by ``xi * size**2`` at each decorated jump.  Marks
    are stored in decoration order: decreasing jump size, ties by time.
    """

    boundary: SampledPath
    volume: np.ndarray
    marks: list[tuple[JumpRecord, float]] = field(default_factory=list)

    def validate(self) -> None:
        self.boundary.validate()
        if len(self.volume) != len(self.boundary.values):
            raise ConfigError("volume grid must match boundary grid")
        if np.any(np.diff(self.volume) < 0):
            raise ConfigError("volume must be nondecreasing")

    def write_csv(self, path: str) -> None:
        """Columns r,boundary,volume."""
        _atomic_write(path, _hull_csv(["r", "boundary", "volume"], [self]))

    def write_json(self, path: str) -> None:
        payload = {
            "schema": 1,
            "meta": dict(self.boundary.meta),
            "r": [float(t) for t in self.boundary.times],
            "boundary": [float(v) for v in self.boundary.values],
            "volume": [float(v) for v in self.volume],
            "marks": [
                {"time": float(j.time), "size": float(j.size), "xi": float(x)}
                for j, x in self.marks
            ],
        }
        _atomic_write(path, (json.dumps(payload, indent=1) + "\n").encode())


def _hull_csv(header, samples, with_id=False) -> bytes:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow((["sample"] if with_id else []) + header)
    for i, s in enumerate(samples):
        for t, z, v in zip(s.boundary.times, s.boundary.values, s.volume):
            row = [repr(float(t)), repr(float(z)), repr(float(v))]
            writer.writerow(([i] if with_id else []) + row)
    return buf.getvalue().encode()


def write_hull_csv(samples: list[HullSample], path: str) -> None:
    """Ensemble export; a leading sample column disambiguates paths."""
    _atomic_write(path, _hull_csv(["r", "boundary", "volume"], samples, with_id=True))


def decorate(boundary: SampledPath, seed: int) -> HullSample:
    """Attach i.i.d. volume marks to the jumps of a boundary path.

    Jumps are enumerated by decreasing size (ties by time) and the i-th
    enumerated jump receives the i-th mark; the volume sum itself does not
    depend on the enumeration.  Deterministic per (path, seed).
    """
    rng = substream(seed)
    order = sorted(boundary.jumps, key=lambda j: (-j.size, j.time))
    xis = sample_xi(rng, size=len(order)) if order else np.empty(0)
    marks = list(zip(order, (float(v) for v in xis)))
    volume = np.zeros(len(boundary.values))
    times = boundary.times
    # V_r counts jumps with time <= r: increment from the jump's own grid point
    for j, xi in marks:
        k = int(np.searchsorted(times, j.time - 1e-12))
        volume[k:] += xi * j.size * j.size
    return HullSample(boundary=boundary, volume=volume, marks=marks)


def forward_pair(
    x0: float,
    horizon: float,
    dt: float = 1e-3,
    eps: float = 1e-3,
    seed: int = 0,
    params: CsbpParams | float = CsbpParams(),
) -> HullSample:
    """Mass and swallowed-volume pair (X_a, Y_a) run forward to ``horizon``.

    Y uses the strict convention: at grid time a the volume counts jumps at
    times strictly before a, so Y is the left-continuous companion of the
    right-continuous mass path.
    """
    boundary = simulate_csbp(x0, params=params, horizon=horizon, dt=dt, eps=eps, seed=seed)
    boundary.meta["kind"] = "forward_pair"
    rng = substream(seed, 1)  # marks independent of the path stream
    order = sorted(boundary.jumps, key=lambda j: (-j.size, j.time))
    xis = sample_xi(rng, size=len(order)) if order else np.empty(0)
    marks = list(zip(order, (float(v) for v in xis)))
    volume = np.zeros(len(boundary.values))
    times = boundary.times
    for j, xi in marks:
        k = int(np.searchsorted(times, j.time + 1e-12))  # first index with t > jump time
        volume[k:] += xi * j.size * j.size
    return HullSample(boundary=boundary, volume=volume, marks=marks)


@dataclass
class ForwardPairResult:
    """End state of a forward (mass, volume) ensemble."""

    mass: np.ndarray            # X at the horizon
    volume: np.ndarray          # Y at the horizon (jumps strictly before it)
    clock_integral: np.ndarray  # integral of X ds, for bias budgets


def forward_pair_ensemble(
    x0,
    horizon: float,
    dt: float,
    seed: int,
    n: int | None = None,
    c: float = CANONICAL_C,
    eps: float = 1e-3,
    y0=0.0,
    stream_index: int = 0,
) -> ForwardPairResult:
    """Vectorised forward pairs; ``x0``/``y0`` may be vectors for restarts.

    Marks are drawn inline from the same counter stream; the path never
    reads them, so they stay independent of the boundary evolution.
    """
    from .csbp import csbp_ensemble

    res = csbp_ensemble(
        x0, horizon, dt, seed, n=n, c=c, eps=eps,
        accumulate_volume=True, stream_index=stream_index,
    )
    y0 = np.broadcast_to(np.asarray(y0, dtype=float), res.volume.shape)
    return ForwardPairResult(
        mass=res.final,
        volume=res.volume + y0,
        clock_integral=res.clock_integral,
    )


def small_jump_volume_budget(threshold: float, boundary_mass: float) -> float:
    """Expected volume carried by jumps below ``threshold``.

    Jumps arrive with intensity (mass) x kappa(dy) and each contributes
    xi * dy**2 with E[xi] = 1, so the neglected mean volume is
    ``boundary_mass * integral_0^b y^2 kappa(dy) = boundary_mass *
    sqrt(3/(2 pi)) * 2 * sqrt(b)``.  ``boundary_mass`` is (an upper bound
    on) the expected time-integral of the boundary process over the window
    of interest, e.g. r_max**3 / 3 for the reversed process.
    """
    if threshold < 0 or boundary_mass < 0:
        raise ConfigError("threshold and boundary_mass must be >= 0")
    return boundary_mass * np.sqrt(3.0 / (2.0 * np.pi)) * 2.0 * np.sqrt(threshold)
