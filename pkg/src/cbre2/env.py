"""The Levy random environment: spec, integer exponential moments, path sampling.

The canonical parameter is the drift `a` of the additive environment xi;
the drift of the multiplicative driver L is derived from it so that
e^{xi} is exactly the stochastic exponential of L.  Only finite-activity
jump measures are sampled; positive jumps above `trunc_level` are
clipped (the effective jump becomes 0, i.e. the multiplier becomes 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergentExponent, InvalidStep, MassOverflow
from .measures import ZERO_MEASURE_1D, JumpMeasure1D

DEFAULT_JUMP_CAP = 1e6


@dataclass(frozen=True)
class LevyEnvSpec:
    """Environment triplet (a, sigma1, nu) plus an optional truncation level.

    trunc_level = inf is the untruncated environment; finite levels must
    be >= 1 so that only the large-jump part is affected (level exactly 1
    removes every positive large jump, which is the restricted-environment
    configuration used by the auxiliary comparison process).
    """

    a: float = 0.0
    sigma1: float = 0.0
    nu: JumpMeasure1D = field(default_factory=lambda: ZERO_MEASURE_1D)
    trunc_level: float = math.inf

    def __post_init__(self):
        if self.sigma1 < 0:
            raise ValueError("sigma1 must be >= 0")
        if not (self.trunc_level >= 1.0):
            raise ValueError("trunc_level must be >= 1 (or inf)")

    @property
    def is_deterministic(self) -> bool:
        return self.sigma1 == 0.0 and self.nu.is_zero

    def driver_drift(self) -> float:
        """Drift of the multiplicative driver L implied by the xi drift a."""
        return self.a + 0.5 * self.sigma1**2 + self.nu.small_exp_integral(1.0)


def levy_exponent(spec: LevyEnvSpec, n: int) -> float:
    """Integer Laplace exponent: E e^{n xi(t)} = e^{beta(n) t}.

    beta(n) = a n + sigma1^2 n^2 / 2 + integral terms, with the spec's
    truncation applied to positive large jumps.  Raises DivergentExponent
    when an untruncated tail makes the large-jump integral infinite.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return 0.0
    jump = spec.nu.exp_integral(float(n), clip=spec.trunc_level)
    if math.isinf(jump):
        raise DivergentExponent(
            f"integral of e^({n}z) over the positive environment tail diverges"
        )
    return spec.a * n + 0.5 * spec.sigma1**2 * n**2 + jump


def beta_tilde(spec: LevyEnvSpec) -> float:
    """First exponential moment rate: E e^{xi(t)} = e^{beta_tilde t}."""
    return levy_exponent(spec, 1)


@dataclass
class EnvPath:
    """A sampled, truncated environment path on a refined grid.

    Partial sums of `xi_increments` reconstruct xi exactly at grid points
    for the sampled jump set; the per-interval environment multiplier is
    exp(increment).  `big_jump_marks` records (time, raw z) for |z| > 1.
    """

    grid: np.ndarray
    xi_increments: np.ndarray
    big_jump_marks: list

    @property
    def horizon(self) -> float:
        return float(self.grid[-1])

    def xi_values(self) -> np.ndarray:
        """xi at every grid point (xi(0) = 0)."""
        out = np.empty(len(self.grid))
        out[0] = 0.0
        np.cumsum(self.xi_increments, out=out[1:])
        return out

    def multipliers(self) -> np.ndarray:
        return np.exp(self.xi_increments)


@dataclass
class EnvSkeleton:
    """Raw random ingredients of one environment path, before truncation.

    Shared across truncation levels so that coupled variants differ only
    through the clipping rule.
    """

    grid: np.ndarray
    jump_times: np.ndarray
    jump_sizes: np.ndarray
    normals: np.ndarray  # one standard normal per refined interval
    jump_index: np.ndarray  # position of each jump time in the grid


def effective_jump(z, clip):
    """Clipped contribution of an environment jump: z, unless z > clip."""
    z = np.asarray(z, dtype=float)
    keep = (np.abs(z) <= 1.0) | (z < 0) | (z <= clip)
    return np.where(keep, z, 0.0)


def _base_grid(horizon: float, step: float) -> np.ndarray:
    if step <= 0:
        raise InvalidStep("step must be > 0")
    if step > horizon:
        raise InvalidStep("step must be <= horizon")
    m = int(math.floor(horizon / step + 1e-9))
    grid = step * np.arange(m + 1)
    if horizon - grid[-1] > 1e-12 * max(1.0, horizon):
        grid = np.append(grid, horizon)
    else:
        grid[-1] = horizon
    return grid


def sample_env_skeleton(
    spec: LevyEnvSpec,
    horizon: float,
    step: float,
    rng: np.random.Generator,
    jump_cap: float = DEFAULT_JUMP_CAP,
) -> EnvSkeleton:
    """Sample jump times/sizes and Gaussian increments on the refined grid."""
    base = _base_grid(horizon, step)
    lam = spec.nu.total_mass()
    if lam * horizon > jump_cap:
        raise MassOverflow(
            f"expected environment jump count {lam * horizon:.3g} exceeds cap {jump_cap:.3g}"
        )
    n_jumps = int(rng.poisson(lam * horizon)) if lam > 0 else 0
    if n_jumps > 0:
        u = rng.random(n_jumps)
        u[u == 0.0] = 0.5  # keep jump times strictly inside (0, horizon)
        times = np.sort(u * horizon)
        sizes = spec.nu.sample(rng, n_jumps)
        grid = np.unique(np.concatenate([base, times]))
        jump_index = np.searchsorted(grid, times)
    else:
        times = np.empty(0)
        sizes = np.empty(0)
        grid = base
        jump_index = np.empty(0, dtype=int)
    normals = rng.standard_normal(len(grid) - 1)
    return EnvSkeleton(grid, times, sizes, normals, jump_index)


def realize_env_path(spec: LevyEnvSpec, skel: EnvSkeleton, clip: float | None = None) -> EnvPath:
    """Build the truncated path from a skeleton at a given clip level."""
    if clip is None:
        clip = spec.trunc_level
    dt = np.diff(skel.grid)
    incr = (spec.a - spec.nu.mean_small()) * dt + spec.sigma1 * np.sqrt(dt) * skel.normals
    if len(skel.jump_times):
        eff = effective_jump(skel.jump_sizes, clip)
        np.add.at(incr, skel.jump_index - 1, eff)
    marks = [
        (float(t), float(z))
        for t, z in zip(skel.jump_times, skel.jump_sizes)
        if abs(z) > 1.0
    ]
    return EnvPath(skel.grid, incr, marks)


def sample_env_path(
    spec: LevyEnvSpec,
    horizon: float,
    step: float,
    rng: np.random.Generator,
    jump_cap: float = DEFAULT_JUMP_CAP,
) -> EnvPath:
    """Sample one truncated environment path; grid includes all jump times."""
    skel = sample_env_skeleton(spec, horizon, step, rng, jump_cap)
    return realize_env_path(spec, skel)


def segment_sums(values: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Sum `values` into len(counts) groups of the given sizes."""
    out = np.zeros(len(counts))
    if values.size == 0:
        return out
    offsets = np.concatenate(([0], np.cumsum(counts)[:-1]))
    nonzero = counts > 0
    if nonzero.any():
        sums = np.add.reduceat(values, offsets[nonzero])
        out[nonzero] = sums
    return out


def sample_xi_terminal(
    spec: LevyEnvSpec,
    horizon: float,
    n_paths: int,
    rng: np.random.Generator,
    jump_cap: float = DEFAULT_JUMP_CAP,
) -> np.ndarray:
    """Vectorized exact-in-law sample of xi(horizon) for many paths."""
    lam = spec.nu.total_mass()
    if lam * horizon > jump_cap:
        raise MassOverflow("expected environment jump count exceeds cap")
    xi = np.full(n_paths, (spec.a - spec.nu.mean_small()) * horizon)
    if spec.sigma1 > 0:
        xi += spec.sigma1 * math.sqrt(horizon) * rng.standard_normal(n_paths)
    if lam > 0:
        counts = rng.poisson(lam * horizon, n_paths)
        sizes = spec.nu.sample(rng, int(counts.sum()))
        xi += segment_sums(effective_jump(sizes, spec.trunc_level), counts)
    return xi
