"""Bundled reference scenarios used by the demos, tests and CLI configs.

The coupling scenario is constructed so that truncation only removes
jumps whose compensated coordinate is zero: the kept-region compensator
moments then agree across truncation levels and the pathwise ordering of
coupled variants is exact for the discrete scheme (see simulate module
notes).
"""

from __future__ import annotations

from .branching import BranchingSpec
from .env import LevyEnvSpec
from .measures import Atom1D, Atom2D, AxisTail, JumpMeasure, JumpMeasure1D, Tail1D
from .scenario import OutputSpec, ScenarioConfig


def env_drift_spec() -> LevyEnvSpec:
    return LevyEnvSpec(a=0.4)


def env_brownian_spec() -> LevyEnvSpec:
    return LevyEnvSpec(a=-0.3, sigma1=1.0)


def env_brownian_atom_spec() -> LevyEnvSpec:
    return LevyEnvSpec(a=0.1, sigma1=0.5, nu=JumpMeasure1D(atoms=[Atom1D(0.5, 0.4)]))


def _mixed_env() -> LevyEnvSpec:
    return LevyEnvSpec(
        a=0.1,
        sigma1=0.2,
        nu=JumpMeasure1D(
            atoms=[Atom1D(0.3, 0.4), Atom1D(0.2, -0.5), Atom1D(0.05, 1.3)]
        ),
    )


def _mixed_branching() -> BranchingSpec:
    return BranchingSpec(
        b11=0.3,
        b12=-0.2,
        b21=-0.1,
        b22=0.4,
        c1=0.15,
        c2=0.1,
        m1=JumpMeasure(atoms=[Atom2D(0.4, 0.3, 0.2), Atom2D(0.1, 1.2, 0.5)]),
        m2=JumpMeasure(atoms=[Atom2D(0.5, 0.25, 0.5), Atom2D(0.08, 0.4, 1.1)]),
    )


def mixed_scenario(n_paths: int = 100_000, step: float = 1e-3) -> ScenarioConfig:
    """Environment and branching both active; all moments finite (atoms only)."""
    return ScenarioConfig(
        environment=_mixed_env(),
        branching=_mixed_branching(),
        x0=(1.5, 2.5),
        horizon=1.0,
        step=step,
        n_paths=n_paths,
        seed=20240811,
        moment_degree=2,
        name="mixed",
    )


def env_only_scenario(n_paths: int = 50_000, step: float = 1e-3) -> ScenarioConfig:
    return ScenarioConfig(
        environment=_mixed_env(),
        branching=BranchingSpec(),
        x0=(1.5, 2.5),
        horizon=1.0,
        step=step,
        n_paths=n_paths,
        seed=7021,
        moment_degree=2,
        name="env_only",
    )


def branching_only_scenario(n_paths: int = 50_000, step: float = 1e-3) -> ScenarioConfig:
    return ScenarioConfig(
        environment=LevyEnvSpec(),
        branching=_mixed_branching(),
        x0=(1.5, 2.5),
        horizon=1.0,
        step=step,
        n_paths=n_paths,
        seed=7022,
        moment_degree=2,
        name="branching_only",
    )


def feller_scenario(n_paths: int = 20_000, step: float = 1e-3) -> ScenarioConfig:
    """Single-type square-root diffusion: the classical analytic test case."""
    return ScenarioConfig(
        environment=LevyEnvSpec(),
        branching=BranchingSpec(c1=0.6),
        x0=(1.4, 0.0),
        horizon=1.0,
        step=step,
        n_paths=n_paths,
        seed=7023,
        moment_degree=2,
        laplace_lambda=(1.0, 0.0),
        laplace_t=1.0,
        name="feller",
    )


def coupling_scenario(n_paths: int = 10_000, step: float = 0.01) -> ScenarioConfig:
    """Pure-jump two-type scenario for exact monotone-coupling checks.

    The jumps with norm in the (2, 5] band carry zero mass on their
    compensated coordinate, so truncation at 2 vs 5 leaves the drift
    correction untouched and the coupled ordering is exact pathwise.
    """
    return ScenarioConfig(
        environment=LevyEnvSpec(
            a=0.05,
            sigma1=0.1,
            nu=JumpMeasure1D(atoms=[Atom1D(0.4, 0.6), Atom1D(0.3, -0.8), Atom1D(0.1, 1.4)]),
        ),
        branching=BranchingSpec(
            b11=0.2,
            b12=-0.15,
            b21=-0.1,
            b22=0.25,
            m1=JumpMeasure(atoms=[Atom2D(0.6, 0.5, 0.4), Atom2D(0.25, 0.0, 2.4)]),
            m2=JumpMeasure(atoms=[Atom2D(0.5, 0.3, 0.3), Atom2D(0.3, 3.0, 0.0)]),
        ),
        x0=(1.0, 1.2),
        horizon=1.0,
        step=step,
        n_paths=n_paths,
        seed=7024,
        coupling_k=(2.0, 5.0),
        name="coupling",
    )


def pareto_scenario(n_paths: int = 10_000, step: float = 2e-3) -> ScenarioConfig:
    """Heavy-tailed cross jumps (Pareto index 2.5) for truncation convergence."""
    return ScenarioConfig(
        environment=LevyEnvSpec(a=0.0, sigma1=0.1, nu=JumpMeasure1D(atoms=[Atom1D(0.3, 0.5)])),
        branching=BranchingSpec(
            b11=0.2,
            b12=-0.1,
            b21=-0.05,
            b22=0.3,
            m1=JumpMeasure(atoms=[Atom2D(0.5, 0.4, 0.25)]),
            m2=JumpMeasure(
                atoms=[Atom2D(0.3, 0.3, 0.5)],
                tails=[AxisTail(1, "pareto", 0.5, 2.5, 1.0)],
            ),
        ),
        x0=(1.0, 1.0),
        horizon=1.0,
        step=step,
        n_paths=n_paths,
        seed=7025,
        moment_degree=1,
        coupling_k=(2.0, 5.0),
        trunc_k_list=(2.0, 4.0, 8.0, 16.0),
        name="pareto",
    )


def verify_scenario(n_paths: int = 20_000, step: float = 2e-3) -> ScenarioConfig:
    """Default target of the `verify` subcommand: every report is nontrivial."""
    sc = pareto_scenario(n_paths=n_paths, step=step)
    return ScenarioConfig(
        **{
            **sc.__dict__,
            "name": "verify",
            "seed": 7030,
            "output": OutputSpec(directory="out", formats=("csv",), dump_paths=3),
        }
    )


def laplace_scenario(n_paths: int = 10_000, step: float = 2e-3) -> ScenarioConfig:
    """Moderate mixed scenario for the quenched/annealed transform identity."""
    return ScenarioConfig(
        environment=LevyEnvSpec(
            a=0.05, sigma1=0.25, nu=JumpMeasure1D(atoms=[Atom1D(0.4, 0.5), Atom1D(0.2, -0.6)])
        ),
        branching=BranchingSpec(
            b11=0.25,
            b12=-0.1,
            b21=-0.05,
            b22=0.3,
            c1=0.3,
            c2=0.2,
            m1=JumpMeasure(atoms=[Atom2D(0.4, 0.35, 0.2)]),
            m2=JumpMeasure(atoms=[Atom2D(0.3, 0.2, 0.45)]),
        ),
        x0=(1.0, 1.0),
        horizon=0.5,
        step=step,
        n_paths=n_paths,
        seed=7026,
        laplace_lambda=(0.7, 0.4),
        laplace_t=0.5,
        name="laplace",
    )


def env_tail_scenario() -> ScenarioConfig:
    """Environment with an exponential positive tail (for f-moment demos)."""
    return ScenarioConfig(
        environment=LevyEnvSpec(
            a=0.0, sigma1=0.1, nu=JumpMeasure1D(tails=[Tail1D("exponential", 0.4, 3.0, 1.0)])
        ),
        branching=_mixed_branching(),
        x0=(1.0, 1.0),
        horizon=1.0,
        step=2e-3,
        n_paths=5_000,
        seed=7027,
        name="env_tail",
    )
