"""f-moment finiteness: test-function families and the tail classifier.

Classification is symbolic: the growth exponent of the test function is
compared against the decay of each parametric tail component, so the
finite/infinite verdict is exact wherever the comparison table has a
rule, and Unknown elsewhere.  Numeric quadrature is never used to decide
divergence.

Curated families: power (1+x)^p, power-log (1+x)^p log(e+x) with p >= 1,
and exp-power exp(theta x^gamma) with gamma in (0, 1].  Power and
power-log carry a full structural certificate (convex nondecreasing,
f >= 1 with f > 1 off zero, submultiplicative with the stored K).  The
exp-power family is convex for gamma = 1 but no exponential satisfies
f(xy) <= K f(x) f(y) for a fixed K, so it is stored uncertified: the
structural check reports that failure honestly, while the tail
classification (a pure integral comparison) remains exact.  Boundary
rules: a pure power against a Pareto tail of equal index diverges (the
integral picks up a log), and power-log at equality diverges as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .branching import BranchingSpec
from .env import LevyEnvSpec
from .errors import ZeroInitialState
from .measures import EXPONENTIAL, PARETO, JumpMeasure, JumpMeasure1D

FINITE = "Finite"
INFINITE = "Infinite"
UNKNOWN = "Unknown"

POWER = "power"
POWER_LOG = "power_log"
EXP_POWER = "exp_power"


@dataclass(frozen=True)
class MomentTestFunction:
    """A curated test function with growth metadata.

    `rho` is the infimum exponent with f(x) = O(x^rho) (inf for
    exp-power); `rho_attained` says whether f is actually Theta(x^rho),
    which decides the boundary case against a Pareto tail of index rho.
    """

    family: str
    params: tuple
    K: float
    rho: float
    rho_attained: bool
    b_certified: bool

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore"):
            if self.family == POWER:
                (p,) = self.params
                return (1.0 + x) ** p
            if self.family == POWER_LOG:
                (p,) = self.params
                return (1.0 + x) ** p * np.log(math.e + x)
            theta, gamma = self.params
            return np.exp(theta * x**gamma)

    def describe(self) -> str:
        if self.family == POWER:
            return f"(1+x)^{self.params[0]:g}"
        if self.family == POWER_LOG:
            return f"(1+x)^{self.params[0]:g} log(e+x)"
        return f"exp({self.params[0]:g} x^{self.params[1]:g})"


def power(p: float) -> MomentTestFunction:
    if p < 1:
        raise ValueError("power family requires p >= 1 (convexity)")
    return MomentTestFunction(POWER, (float(p),), 2.0, float(p), True, True)


def power_log(p: float) -> MomentTestFunction:
    if p < 1:
        raise ValueError("power-log family requires p >= 1 (convexity)")
    return MomentTestFunction(POWER_LOG, (float(p),), 4.0, float(p), False, True)


def exp_power(theta: float, gamma: float = 1.0) -> MomentTestFunction:
    # no exponential is submultiplicative, so the family is never B-certified
    if theta <= 0 or not (0 < gamma <= 1):
        raise ValueError("exp-power family requires theta > 0 and gamma in (0, 1]")
    return MomentTestFunction(
        EXP_POWER, (float(theta), float(gamma)), 1.0, math.inf, False, False
    )


# ---------------------------------------------------------------------------
# Condition B structural check (grid-based, for arbitrary callables)
# ---------------------------------------------------------------------------

@dataclass
class ConditionBResult:
    passed: bool
    failures: list = field(default_factory=list)  # (label, witness)
    K: float | None = None

    def __bool__(self):
        return self.passed


def condition_b_check(
    f,
    K: float | None = None,
    x_max: float = 1e6,
    n_grid: int = 120,
    k_cap: float = 1e6,
) -> ConditionBResult:
    """Grid-based check of convexity, monotonicity, f > 1, submultiplicativity.

    Accepts any callable; a MomentTestFunction supplies its stored K.
    Failure is a value (not an error) and carries a witness point.
    """
    if K is None and isinstance(f, MomentTestFunction):
        K = f.K
    xs = np.concatenate(([0.0], np.geomspace(1e-3, x_max, n_grid)))
    fx = np.asarray([float(f(x)) for x in xs])
    failures = []
    rel = 1e-9
    # (B3) f > 1: at 0 we accept f(0) >= 1 (the curated families touch 1 there)
    if fx[0] < 1.0 - 1e-12:
        failures.append(("f>1", (float(xs[0]), float(fx[0]))))
    else:
        bad = np.where(fx[1:] <= 1.0)[0]
        if bad.size:
            failures.append(("f>1", (float(xs[1 + bad[0]]), float(fx[1 + bad[0]]))))
    # (B1) nondecreasing
    with np.errstate(invalid="ignore"):
        bad = np.where(np.diff(fx) < -rel * np.abs(fx[:-1]))[0]
    if bad.size:
        failures.append(("monotone", (float(xs[bad[0]]), float(xs[bad[0] + 1]))))
    # (B1) midpoint convexity on consecutive triples
    for i in range(len(xs) - 2):
        x, y = xs[i], xs[i + 2]
        mid = float(f(0.5 * (x + y)))
        bound = 0.5 * (fx[i] + fx[i + 2])
        if mid > bound * (1.0 + rel) + 1e-12:
            failures.append(("convex", (float(x), float(y), mid - bound)))
            break
    # (B2) submultiplicativity over a pair grid
    pair = np.geomspace(1e-2, math.sqrt(x_max), 25)
    worst = 0.0
    witness = None
    for x in pair:
        fxv = float(f(x))
        for y in pair:
            ratio = float(f(x * y)) / (fxv * float(f(y)))
            if ratio > worst:
                worst, witness = ratio, (float(x), float(y), ratio)
    k_used = K if K is not None else worst
    if worst > max(k_used, 1.0) * (1.0 + rel) or k_used > k_cap:
        failures.append(("submultiplicative", witness))
    return ConditionBResult(not failures, failures, k_used)


# ---------------------------------------------------------------------------
# Tail classification
# ---------------------------------------------------------------------------

def _classify_branching_component(f: MomentTestFunction, family: str, shape: float) -> str:
    """Integral of f(|z|) against an unbounded axis tail over |z| >= 1."""
    if family == PARETO:
        alpha = shape
        if f.family in (POWER, POWER_LOG):
            if f.rho < alpha:
                return FINITE
            return INFINITE  # equality diverges: pure power picks up a log,
            # power-log carries the log explicitly
        if f.family == EXP_POWER:
            return INFINITE
        return UNKNOWN
    if family == EXPONENTIAL:
        rate = shape
        if f.family in (POWER, POWER_LOG):
            return FINITE
        if f.family == EXP_POWER:
            theta, gamma = f.params
            if gamma < 1.0:
                return FINITE
            return FINITE if theta < rate else INFINITE
        return UNKNOWN
    return UNKNOWN


def _classify_env_component(f: MomentTestFunction, family: str, shape: float) -> str:
    """Integral of f(e^z) against an unbounded positive tail over z > 1."""
    if family == EXPONENTIAL:
        rate = shape
        if f.family in (POWER, POWER_LOG):
            return FINITE if f.rho < rate else INFINITE
        if f.family == EXP_POWER:
            return INFINITE  # f(e^z) grows superexponentially in z
        return UNKNOWN
    if family == PARETO:
        # polynomial decay in z cannot integrate any e^{rho z} growth
        return INFINITE
    return UNKNOWN


def _combine(classes) -> str:
    classes = list(classes)
    if INFINITE in classes:
        return INFINITE
    if UNKNOWN in classes:
        return UNKNOWN
    return FINITE


def classify_branching_tail(
    f: MomentTestFunction, *measures: JumpMeasure, cap: float = math.inf, square: bool = False
) -> str:
    """Classify the integral of f(|z|) over |z| >= 1 against branching measures."""
    classes = [FINITE]
    for m in measures:
        for t in m.tails:
            if math.isfinite(cap) or square:
                continue  # truncated tail has bounded support
            classes.append(_classify_branching_component(f, t.family, t.shape))
        # atoms always integrate finitely
    return _combine(classes)


def classify_env_tail(f: MomentTestFunction, nu: JumpMeasure1D, clip: float = math.inf) -> str:
    """Classify the integral of f(e^z) over z > 1 against the environment measure."""
    classes = [FINITE]
    if math.isfinite(clip):
        return FINITE
    for t in nu.tails:
        if t.side < 0:
            continue
        classes.append(_classify_env_component(f, t.family, t.shape))
    return _combine(classes)


def tail_integral_classify(f: MomentTestFunction, target, clip: float = math.inf) -> str:
    """Classify one tail integral; target is a branching or environment measure."""
    if isinstance(target, JumpMeasure1D):
        return classify_env_tail(f, target, clip)
    if isinstance(target, JumpMeasure):
        return classify_branching_tail(f, target, cap=clip)
    raise TypeError("target must be a JumpMeasure or JumpMeasure1D")


@dataclass
class FMomentVerdict:
    verdict: str
    criteria: dict

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "criteria": dict(self.criteria)}


def f_moment_verdict(
    env: LevyEnvSpec, spec: BranchingSpec, x0, f: MomentTestFunction
) -> FMomentVerdict:
    """Finite/Infinite/Unknown verdict for E f(|X(t)|), t > 0, with breakdown.

    Finite iff the initial criterion (automatic for a deterministic
    nonzero start), the branching-tail criterion, and the
    environment-tail criterion all hold; any truncation carried by the
    specs is honored (truncated tails integrate everything).
    """
    x1, x2 = float(x0[0]), float(x0[1])
    if x1 == 0.0 and x2 == 0.0:
        raise ZeroInitialState("the f-moment criterion requires a nonzero initial state")
    rule = spec.trunc_predicate.branching
    branching = classify_branching_tail(
        f, spec.m1, spec.m2, cap=rule.cap, square=rule.square
    )
    env_clip = spec.trunc_predicate.effective_env_clip(env.trunc_level)
    environment = classify_env_tail(f, env.nu, env_clip)
    criteria = {
        "initial": FINITE,
        "branching_tail": branching,
        "environment_tail": environment,
    }
    return FMomentVerdict(_combine(criteria.values()), criteria)


def empirical_f_moment_probe(
    scenario, f: MomentTestFunction, path_budgets, seed: int, t: float | None = None
):
    """Running truncated estimates of E f(|X(t)|) across growing path budgets.

    Purely observational: a Finite verdict should show stabilizing
    estimates, an Infinite one keeps growing with the budget.  Returned
    as [(n_paths, estimate)], never asserted as a hard test.
    """
    from .simulate import scenario_states

    if t is None:
        t = scenario.horizon
    budgets = sorted(int(b) for b in path_budgets)
    _, states = scenario_states(scenario, budgets[-1], seed, record_times=[t])
    norms = np.hypot(states[0, :, 0, 0], states[0, :, 0, 1])
    vals = f(norms)
    return [(b, float(np.mean(vals[:b]))) for b in budgets]
