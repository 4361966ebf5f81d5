import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cbre2.env import (
    LevyEnvSpec,
    beta_tilde,
    levy_exponent,
    realize_env_path,
    sample_env_path,
    sample_env_skeleton,
    sample_xi_terminal,
)
from cbre2.errors import DivergentExponent, InvalidStep, MassOverflow
from cbre2.measures import Atom1D, JumpMeasure1D, Tail1D


def test_levy_exponent_pure_drift():
    assert levy_exponent(LevyEnvSpec(a=1.0), 3) == 3.0


def test_levy_exponent_gaussian():
    assert levy_exponent(LevyEnvSpec(sigma1=2.0), 2) == 8.0


def test_levy_exponent_single_atom():
    nu = JumpMeasure1D(atoms=[Atom1D(0.5, 2.0)])
    expected = 0.5 * (math.e**2 - 1.0)  # direct scalar arithmetic
    assert levy_exponent(LevyEnvSpec(nu=nu), 1) == pytest.approx(expected, rel=1e-12)


def test_levy_exponent_zero_order():
    spec = LevyEnvSpec(a=2.0, sigma1=1.0, nu=JumpMeasure1D(atoms=[Atom1D(1.0, 0.3)]))
    assert levy_exponent(spec, 0) == 0.0


def test_divergent_exponent_raises():
    nu = JumpMeasure1D(tails=[Tail1D("exponential", 1.0, 2.0, 1.0)])
    spec = LevyEnvSpec(nu=nu)
    assert levy_exponent(spec, 1) < math.inf
    with pytest.raises(DivergentExponent):
        levy_exponent(spec, 2)  # n >= rate diverges
    with pytest.raises(DivergentExponent):
        levy_exponent(LevyEnvSpec(nu=JumpMeasure1D(tails=[Tail1D("pareto", 1.0, 3.0, 1.0)])), 1)


def test_truncation_restores_finiteness():
    nu = JumpMeasure1D(tails=[Tail1D("pareto", 1.0, 3.0, 1.0)])
    spec = LevyEnvSpec(nu=nu, trunc_level=4.0)
    assert levy_exponent(spec, 2) < math.inf


def test_beta_tilde_is_order_one():
    spec = LevyEnvSpec(a=0.2, sigma1=0.5, nu=JumpMeasure1D(atoms=[Atom1D(0.3, 1.4)]))
    assert beta_tilde(spec) == levy_exponent(spec, 1)


@settings(max_examples=40, deadline=None)
@given(
    a=st.floats(-1.5, 1.5),
    sigma=st.floats(0.0, 1.5),
    mass=st.floats(0.05, 1.5),
    z=st.floats(-1.8, 1.2).filter(lambda v: abs(v) > 1e-3),
)
def test_levy_exponent_convex_in_order(a, sigma, mass, z):
    spec = LevyEnvSpec(a=a, sigma1=sigma, nu=JumpMeasure1D(atoms=[Atom1D(mass, z)]))
    beta = [levy_exponent(spec, n) for n in range(5)]
    diffs = np.diff(beta)
    scale = 1.0 + np.max(np.abs(beta))
    assert (np.diff(diffs) >= -1e-9 * scale).all()


def test_pure_drift_path_increments():
    path = sample_env_path(LevyEnvSpec(a=0.7), 2.0, 0.5, np.random.default_rng(0))
    assert np.allclose(path.xi_increments, 0.35, rtol=0, atol=1e-15)
    assert len(path.xi_increments) == 4


def test_step_validation():
    with pytest.raises(InvalidStep):
        sample_env_path(LevyEnvSpec(), 1.0, 0.0, np.random.default_rng(0))
    with pytest.raises(InvalidStep):
        sample_env_path(LevyEnvSpec(), 1.0, 2.0, np.random.default_rng(0))


def test_mass_overflow_guard():
    nu = JumpMeasure1D(atoms=[Atom1D(1e9, 0.5)])
    with pytest.raises(MassOverflow):
        sample_env_path(LevyEnvSpec(nu=nu), 1.0, 0.5, np.random.default_rng(0))


def test_grid_contains_base_and_jump_times():
    nu = JumpMeasure1D(atoms=[Atom1D(3.0, 0.9)])
    spec = LevyEnvSpec(a=0.1, sigma1=0.3, nu=nu)
    rng = np.random.default_rng(5)
    skel = sample_env_skeleton(spec, 1.0, 0.125, rng)
    base = 0.125 * np.arange(9)
    assert np.isin(np.round(base, 12), np.round(skel.grid, 12)).all()
    assert np.isin(skel.jump_times, skel.grid).all()
    path = realize_env_path(spec, skel)
    # partial sums reconstruct xi at grid points for the sampled jump set
    xi = path.xi_values()
    drift = (spec.a - nu.mean_small()) * skel.grid
    gauss = np.concatenate(([0.0], np.cumsum(spec.sigma1 * np.sqrt(np.diff(skel.grid)) * skel.normals)))
    jumps = np.zeros_like(skel.grid)
    for t, z in zip(skel.jump_times, skel.jump_sizes):
        jumps[skel.grid >= t - 1e-15] += z
    assert np.allclose(xi, drift + gauss + jumps, atol=1e-12)


def test_gaussian_terminal_statistics():
    rng = np.random.default_rng(31)
    xi = sample_xi_terminal(LevyEnvSpec(sigma1=1.0), 1.0, 100_000, rng)
    assert abs(xi.mean()) <= 3.0 / math.sqrt(100_000)
    assert abs(xi.std(ddof=1) - 1.0) < 0.01


def test_clipping_kills_large_atom():
    nu = JumpMeasure1D(atoms=[Atom1D(2.0, 1.5)])
    spec = LevyEnvSpec(nu=nu, trunc_level=1.2)
    path = sample_env_path(spec, 1.0, 0.25, np.random.default_rng(1))
    assert path.xi_values()[-1] == 0.0
    assert len(path.big_jump_marks) > 0  # raw jumps retained for diagnostics


def test_negative_jumps_never_clipped():
    nu = JumpMeasure1D(atoms=[Atom1D(2.0, -1.5)])
    spec = LevyEnvSpec(nu=nu, trunc_level=1.2)
    rng = np.random.default_rng(2)
    path = sample_env_path(spec, 1.0, 0.25, rng)
    n_jumps = len(path.big_jump_marks)
    if n_jumps:
        assert path.xi_values()[-1] == pytest.approx(-1.5 * n_jumps)


def test_truncation_monotone_under_shared_randomness():
    nu = JumpMeasure1D(atoms=[Atom1D(1.5, 1.8), Atom1D(1.0, 0.4), Atom1D(0.5, -1.1)])
    spec = LevyEnvSpec(a=0.05, sigma1=0.2, nu=nu)
    rng = np.random.default_rng(17)
    skel = sample_env_skeleton(spec, 2.0, 0.1, rng)
    lo = realize_env_path(spec, skel, clip=1.5).xi_values()
    hi = realize_env_path(spec, skel, clip=2.5).xi_values()
    assert (lo <= hi + 1e-12).all()


def test_exponential_moment_monte_carlo():
    spec = LevyEnvSpec(a=0.1, sigma1=0.5, nu=JumpMeasure1D(atoms=[Atom1D(0.5, 0.4)]))
    rng = np.random.default_rng(99)
    xi = sample_xi_terminal(spec, 1.0, 100_000, rng)
    for n in (1, 2):
        vals = np.exp(n * xi)
        se = vals.std(ddof=1) / math.sqrt(len(vals))
        assert abs(vals.mean() - math.exp(levy_exponent(spec, n))) <= 3 * se


def test_trunc_level_below_one_rejected():
    with pytest.raises(ValueError):
        LevyEnvSpec(trunc_level=0.5)
    LevyEnvSpec(trunc_level=1.0)  # the restricted-environment configuration
