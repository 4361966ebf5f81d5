import math

import numpy as np
import pytest

from cbre2.branching import BranchingSpec
from cbre2.env import LevyEnvSpec
from cbre2.errors import MassOverflow
from cbre2.measures import Atom1D, JumpMeasure1D
from cbre2.moments import first_moment_closed_form
from cbre2.presets import coupling_scenario, mixed_scenario
from cbre2.scenario import ScenarioConfig
from cbre2.simulate import (
    scenario_states,
    simulate_coupled_pair,
    simulate_paths,
)
from cbre2.truncation import IDENTITY, norm_cap


def _plain_scenario(env, branching, x0, horizon, step, **kw):
    return ScenarioConfig(
        environment=env, branching=branching, x0=x0, horizon=horizon, step=step, **kw
    )


def test_linear_ode_limit():
    """All noise off: the exact drift flow reproduces the linear ODE."""
    sc = _plain_scenario(LevyEnvSpec(), BranchingSpec(b11=1.0, b22=1.0), (2.0, 3.0), 1.0, 1e-3)
    _, states = scenario_states(sc, 1, 0, record_times=[1.0])
    expected = np.array([2.0, 3.0]) * math.exp(-1.0)
    assert np.max(np.abs(states[0, 0, 0] - expected) / expected) < 1e-3


def test_environment_factorization_exact():
    """Branching off: X(t) = x0 e^{xi(t)} exactly at grid points."""
    env = LevyEnvSpec(
        a=0.2, sigma1=0.7, nu=JumpMeasure1D(atoms=[Atom1D(1.5, 0.5), Atom1D(0.5, -1.3)])
    )
    sc = _plain_scenario(env, BranchingSpec(), (1.5, 0.5), 1.0, 0.05)
    for path in simulate_paths(sc, 4, 7):
        xi = path.xi_values()
        assert np.allclose(path.states[:, 0], 1.5 * np.exp(xi), rtol=1e-12, atol=0)
        assert np.allclose(path.states[:, 1], 0.5 * np.exp(xi), rtol=1e-12, atol=0)
        assert np.allclose(np.log(path.states[:, 0] / 1.5), xi, rtol=0, atol=1e-12)


def test_nonnegativity_and_zero_absorbing():
    sc = mixed_scenario(n_paths=0)
    paths = simulate_paths(sc, 30, 12)
    for p in paths:
        assert (p.states >= 0).all()
    # zero start is absorbing: no drift, no diffusion, no jumps fire
    sz = _plain_scenario(sc.environment, sc.branching, (0.0, 0.0), 1.0, 0.05)
    for p in simulate_paths(sz, 3, 5):
        assert (p.states == 0.0).all()


def test_batch_engine_nonnegativity():
    sc = mixed_scenario()
    _, states = scenario_states(sc, 2000, 3, record_times=[0.25, 0.5, 1.0])
    assert states.min() >= 0.0


def test_mean_against_closed_form_batch():
    sc = mixed_scenario(n_paths=0, step=1e-3)
    target = first_moment_closed_form(sc.environment, sc.branching, sc.x0, 1.0)
    _, states = scenario_states(sc, 40_000, 91, record_times=[1.0])
    x = states[0, :, 0, :]
    for i in (0, 1):
        se = x[:, i].std(ddof=1) / math.sqrt(len(x))
        assert abs(x[:, i].mean() - target[i]) <= 3 * se + 2 * sc.step * target[i]


def test_exact_engine_consistent_with_closed_form():
    sc = mixed_scenario(n_paths=0, step=5e-3)
    target = first_moment_closed_form(sc.environment, sc.branching, sc.x0, 0.5)
    paths = simulate_paths(
        _plain_scenario(sc.environment, sc.branching, sc.x0, 0.5, 5e-3), 1500, 77
    )
    finals = np.array([p.states[-1] for p in paths])
    for i in (0, 1):
        se = finals[:, i].std(ddof=1) / math.sqrt(len(finals))
        assert abs(finals[:, i].mean() - target[i]) <= 4 * se + 2 * 5e-3 * target[i]


def test_identical_predicates_bitwise_equal():
    sc = coupling_scenario()
    pairs = simulate_coupled_pair(sc, norm_cap(2.0), norm_cap(2.0), 6, 3)
    for a, b in pairs:
        assert (a.states == b.states).all()
        assert (a.xi_increments == b.xi_increments).all()


def test_pure_jump_coupling_ordered_pathwise():
    sc = coupling_scenario()
    pairs = simulate_coupled_pair(sc, norm_cap(2.0), norm_cap(5.0), 40, 11)
    strict = 0
    for a, b in pairs:
        assert (a.states <= b.states + 1e-12).all()
        strict += int((b.states > a.states).any())
    assert strict > 0  # the band jumps actually fire


def test_coupled_batch_ordering_full_grid():
    sc = coupling_scenario()
    _, states = scenario_states(
        sc, 2000, sc.seed, predicates=(norm_cap(2.0), norm_cap(5.0))
    )
    assert (states[0] <= states[1] + 1e-12).all()


def test_env_clip_coupling_ordered():
    sc = coupling_scenario()
    from cbre2.truncation import TruncationPredicate

    pa = TruncationPredicate(env_clip=1.2)
    pb = TruncationPredicate(env_clip=2.0)
    _, states = scenario_states(sc, 1500, 4, predicates=(pa, pb))
    assert (states[0] <= states[1] + 1e-12).all()


def test_jump_log_sources():
    sc = coupling_scenario()
    paths = simulate_paths(sc, 10, 2)
    sources = {src for p in paths for (_, src, _) in p.jumps}
    assert sources <= {"m1", "m2", "env"}
    assert "m1" in sources or "m2" in sources


def test_mass_overflow_fail_fast():
    sc = mixed_scenario()
    with pytest.raises(MassOverflow):
        simulate_paths(sc, 20, 0, events_cap=1.0)  # ~2 events/path expected
    with pytest.raises(MassOverflow):
        scenario_states(sc, 50, 0, record_times=[1.0], events_cap=1.0)


def test_batch_engine_deterministic():
    sc = mixed_scenario()
    _, s1 = scenario_states(sc, 500, 42, record_times=[0.5, 1.0])
    _, s2 = scenario_states(sc, 500, 42, record_times=[0.5, 1.0])
    assert (s1 == s2).all()


def test_truncated_system_mean_matches_truncated_table():
    """Kept-jump rates and truncated compensator drift stay consistent."""
    from cbre2.moments import moment_table

    sc = coupling_scenario()
    pred = norm_cap(2.0)
    table = moment_table(sc.environment, sc.branching, sc.x0, [1.0], 1, pred)
    _, states = scenario_states(sc, 20_000, 55, predicates=(pred,))
    x = states[0, :, -1, :]
    for i, pq in enumerate([(1, 0), (0, 1)]):
        target = table.entry(*pq, 1.0)
        se = x[:, i].std(ddof=1) / math.sqrt(len(x))
        assert abs(x[:, i].mean() - target) <= 3 * se + 2 * sc.step * target


def test_restricted_system_configuration_runs():
    """Unit-square branching rule + env clip at 1: only small jumps act."""
    from cbre2.truncation import BranchingRule, TruncationPredicate

    pred = TruncationPredicate(branching=BranchingRule("unit_square"), env_clip=1.0)
    sc = coupling_scenario()
    paths = simulate_paths(sc, 20, 9, predicate=pred)
    for p in paths:
        for t, src, payload in p.jumps:
            if src in ("m1", "m2"):
                assert payload[0] <= 1.0 and payload[1] <= 1.0
        assert (p.states >= 0).all()
    # positive environment jumps above 1 contribute nothing under the clip
    from cbre2.moments import moment_table

    table = moment_table(sc.environment, sc.branching, sc.x0, [1.0], 2, pred)
    full = moment_table(sc.environment, sc.branching, sc.x0, [1.0], 2)
    assert table.entry(2, 0, 1.0) <= full.entry(2, 0, 1.0)


def test_resolve_predicate_rules():
    from cbre2.simulate import resolve_predicate
    from cbre2.truncation import unit_square

    plain = BranchingSpec()
    assert resolve_predicate(plain, None) == IDENTITY
    assert resolve_predicate(plain, norm_cap(2.0)) == norm_cap(2.0)
    tagged = BranchingSpec(trunc_predicate=norm_cap(2.0))
    assert resolve_predicate(tagged, None) == norm_cap(2.0)
    assert resolve_predicate(tagged, norm_cap(2.0)) == norm_cap(2.0)
    with pytest.raises(ValueError):
        resolve_predicate(tagged, unit_square())


def test_per_path_substreams_are_stable():
    """Path i depends only on (seed, i), so prefixes agree across budgets."""
    sc = coupling_scenario()
    p3 = simulate_paths(sc, 3, 123)
    p5 = simulate_paths(sc, 5, 123)
    for a, b in zip(p3, p5[:3]):
        assert (a.states == b.states).all()
