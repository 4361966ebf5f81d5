"""Exact mixed moments of the two-type process and related transforms.

The central object is a linear ODE over all monomial moments
m_{p,q}(t) = E[X1(t)^p X2(t)^q] with 1 <= p+q <= n, derived from the
process generator.  The system is closed (each row couples only to total
degree <= p+q), its degree-1 block reproduces the first-moment closed
form, and the n-th own-moment row integrates to the integral-form recursion,
which is kept as an independent cross-check (`recursion_residual`)
rather than as the computation path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.linalg import expm

from .branching import BranchingSpec, effective_drift_matrix, phi_eval
from .env import EnvPath, LevyEnvSpec, beta_tilde, levy_exponent
from .errors import (
    DivergentCoefficient,
    DivergentExponent,
    FixedPointDivergence,
    HypothesisViolated,
    RankDeficientGrid,
    SolverTolerance,
)
from .simulate import StatePath
from .truncation import IDENTITY, TruncationPredicate
from ._util import expm2

_EXPM_NORM_LIMIT = 400.0


def monomial_basis(degree: int) -> tuple[tuple[int, int], ...]:
    """Monomials (p, q) with 1 <= p+q <= degree, degree-major order."""
    return tuple(
        (d - q, q) for d in range(1, degree + 1) for q in range(d + 1)
    )


def _env_clipped(env: LevyEnvSpec, predicate: TruncationPredicate) -> LevyEnvSpec:
    clip = predicate.effective_env_clip(env.trunc_level)
    if clip == env.trunc_level:
        return env
    return replace(env, trunc_level=clip)


def hypotheses_hold(
    env: LevyEnvSpec,
    spec: BranchingSpec,
    n: int,
    truncation: TruncationPredicate = IDENTITY,
) -> bool:
    """Whether the order-n moment hypotheses hold for the (truncated) system."""
    rule = truncation.branching
    if not (spec.m1.norm_moment_finite(n, rule.cap) and spec.m2.norm_moment_finite(n, rule.cap)):
        return False
    try:
        levy_exponent(_env_clipped(env, truncation), n)
    except DivergentExponent:
        return False
    return True


def max_feasible_degree(
    env: LevyEnvSpec,
    spec: BranchingSpec,
    degree: int,
    truncation: TruncationPredicate = IDENTITY,
) -> int:
    n = 0
    while n < degree and hypotheses_hold(env, spec, n + 1, truncation):
        n += 1
    return n


@dataclass
class MomentGenerator:
    """Coefficient matrix of the closed linear moment system dm/dt = G m."""

    degree: int
    basis: tuple[tuple[int, int], ...]
    matrix: np.ndarray

    def index(self, p: int, q: int) -> int:
        return self.basis.index((p, q))


def build_moment_generator(
    env: LevyEnvSpec,
    spec: BranchingSpec,
    n: int,
    truncation: TruncationPredicate = IDENTITY,
) -> MomentGenerator:
    """Assemble the moment-closure matrix for all monomials of degree <= n.

    Row (p, q) with d = p+q receives: beta(d) - p b11 - q b22 on itself;
    -p b21 on (p-1, q+1); -q b12 on (p+1, q-1); c1 p(p-1) on (p-1, q);
    c2 q(q-1) on (p, q-1); and binomial-weighted kept-region jump moments
    of m1 on (i+1, j), of m2 on (i, j+1), excluding the compensated
    index pairs.  Raises HypothesisViolated when a required jump moment
    or exponential moment diverges.
    """
    if n < 1:
        raise ValueError("degree must be >= 1")
    if not hypotheses_hold(env, spec, n, truncation):
        raise HypothesisViolated(
            f"order-{n} moment hypotheses fail for this environment/branching pair"
        )
    rule = truncation.branching
    env_t = _env_clipped(env, truncation)
    basis = monomial_basis(n)
    idx = {pq: k for k, pq in enumerate(basis)}
    size = len(basis)
    g = np.zeros((size, size))
    beta = [0.0] + [levy_exponent(env_t, d) for d in range(1, n + 1)]

    def mu(measure, r, s):
        val = measure.moment(r, s, cap=rule.cap, square=rule.square) if r + s >= 1 else 0.0
        if math.isinf(val):  # pragma: no cover - guarded by hypotheses_hold
            raise HypothesisViolated("jump moment diverges")
        return val

    for row, (p, q) in enumerate(basis):
        d = p + q
        g[row, row] += beta[d] - p * spec.b11 - q * spec.b22
        if p >= 1:
            g[row, idx[(p - 1, q + 1)]] += -p * spec.b21
        if q >= 1:
            g[row, idx[(p + 1, q - 1)]] += -q * spec.b12
        if p >= 2:
            g[row, idx[(p - 1, q)]] += spec.c1 * p * (p - 1)
        if q >= 2:
            g[row, idx[(p, q - 1)]] += spec.c2 * q * (q - 1)
        if not spec.m1.is_zero:
            for i in range(p + 1):
                for j in range(q + 1):
                    if (i, j) == (p, q) or (i, j) == (p - 1, q):
                        continue
                    g[row, idx[(i + 1, j)]] += (
                        math.comb(p, i) * math.comb(q, j) * mu(spec.m1, p - i, q - j)
                    )
        if not spec.m2.is_zero:
            for i in range(p + 1):
                for j in range(q + 1):
                    if (i, j) == (p, q) or (i, j) == (p, q - 1):
                        continue
                    g[row, idx[(i, j + 1)]] += (
                        math.comb(p, i) * math.comb(q, j) * mu(spec.m2, p - i, q - j)
                    )
    return MomentGenerator(n, basis, g)


@dataclass
class MomentTable:
    """Mixed moments on a time grid, with finiteness flags per monomial.

    When built from a generator the table also acts as an exact
    propagator: `eval_vector(s)` returns every monomial moment at an
    arbitrary time s (not just grid points).
    """

    degree: int
    grid: np.ndarray
    values: dict
    finite: dict
    generator: MomentGenerator | None = None
    m0: np.ndarray | None = None

    def entry(self, p: int, q: int, t: float) -> float:
        k = int(np.argmin(np.abs(self.grid - t)))
        if abs(self.grid[k] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"t={t} is not a grid time")
        return float(self.values[(p, q)][k])

    def eval_vector(self, s: float) -> np.ndarray:
        if self.generator is None or self.m0 is None:
            raise ValueError("table carries no propagator")
        return _propagate(self.generator.matrix, self.m0, s)


def _propagate(g: np.ndarray, m0: np.ndarray, t: float) -> np.ndarray:
    if t == 0.0:
        return m0.copy()
    nrm = np.linalg.norm(g, 1) * abs(t)
    if nrm <= _EXPM_NORM_LIMIT:
        return expm(g * t) @ m0
    sol = solve_ivp(
        lambda s, y: g @ y, (0.0, t), m0, method="DOP853", rtol=1e-10, atol=1e-12
    )
    if not sol.success:
        raise SolverTolerance(f"moment ODE integration failed: {sol.message}")
    return sol.y[:, -1]


def initial_moment_vector(gen: MomentGenerator, x0) -> np.ndarray:
    x1, x2 = float(x0[0]), float(x0[1])
    return np.array([x1**p * x2**q for p, q in gen.basis])


def solve_moment_ode(gen: MomentGenerator, x0, t_grid) -> MomentTable:
    """Propagate the closed moment system from a deterministic initial state."""
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    m0 = initial_moment_vector(gen, x0)
    vals = np.empty((len(t_grid), len(gen.basis)))
    for k, t in enumerate(t_grid):
        vals[k] = _propagate(gen.matrix, m0, float(t))
    vals = np.maximum(vals, 0.0)  # expm dust; true moments are nonnegative
    values = {pq: vals[:, j].copy() for j, pq in enumerate(gen.basis)}
    finite = {pq: True for pq in gen.basis}
    return MomentTable(gen.degree, t_grid, values, finite, gen, m0)


def moment_table(
    env: LevyEnvSpec,
    spec: BranchingSpec,
    x0,
    t_grid,
    degree: int,
    truncation: TruncationPredicate = IDENTITY,
) -> MomentTable:
    """Moment table up to `degree`; infeasible degrees are flagged infinite.

    Degrees above the largest order whose hypotheses hold get value inf
    and finite=False; the rest are computed from the closure restricted
    to the feasible degrees (the system never couples upward).
    """
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    feasible = max_feasible_degree(env, spec, degree, truncation)
    if feasible == 0:
        values = {pq: np.full(len(t_grid), math.inf) for pq in monomial_basis(degree)}
        finite = {pq: False for pq in values}
        return MomentTable(degree, t_grid, values, finite)
    gen = build_moment_generator(env, spec, feasible, truncation)
    table = solve_moment_ode(gen, x0, t_grid)
    if feasible < degree:
        table.degree = degree
        for pq in monomial_basis(degree):
            if pq not in table.values:
                table.values[pq] = np.full(len(t_grid), math.inf)
                table.finite[pq] = False
    return table


def first_moment_closed_form(env: LevyEnvSpec, spec: BranchingSpec, x0, t: float) -> np.ndarray:
    """E X(t) = e^{beta~ t} exp(-t b~^T) x0 (2x2 closed-form exponential)."""
    bt = beta_tilde(env)
    btil = effective_drift_matrix(spec)
    return math.exp(bt * t) * (expm2(-t * btil.T) @ np.asarray(x0, dtype=float))


def martingale_transform(env: LevyEnvSpec, spec: BranchingSpec, path: StatePath) -> np.ndarray:
    """M(t) = e^{-beta~ t} exp(t b~^T) X(t) along a path's grid."""
    bt = beta_tilde(env)
    btil_t = effective_drift_matrix(spec).T
    out = np.empty_like(path.states)
    for k, t in enumerate(path.grid):
        out[k] = math.exp(-bt * t) * (expm2(t * btil_t) @ path.states[k])
    return out


def martingale_factors(env: LevyEnvSpec, spec: BranchingSpec, times) -> list[np.ndarray]:
    """The 2x2 matrices e^{-beta~ t} exp(t b~^T), one per requested time."""
    bt = beta_tilde(env)
    btil_t = effective_drift_matrix(spec).T
    return [math.exp(-bt * t) * expm2(t * btil_t) for t in np.atleast_1d(times)]


# ---------------------------------------------------------------------------
# Integral-form own-moment recursion as an independent cross-check
# ---------------------------------------------------------------------------

def recursion_coefficients(spec: BranchingSpec, n: int, type_index: int):
    """Coefficient lists (A_j for j<=n-2, B_j for j<=n-1) of the recursion.

    A_j = C(n,j) * int z_i^{n-j} d(own measure), with the diffusion
    add-on c_i n(n-1) at j = n-2; B_j = C(n,j) * int z_i^{n-j} d(cross
    measure), with the drift add-on -b_cross n at j = n-1.
    """
    if n < 2:
        raise ValueError("recursion coefficients need n >= 2")
    if type_index not in (1, 2):
        raise ValueError("type_index must be 1 or 2")
    own, cross = (spec.m1, spec.m2) if type_index == 1 else (spec.m2, spec.m1)
    c_own = spec.c1 if type_index == 1 else spec.c2
    b_cross = spec.b21 if type_index == 1 else spec.b12

    def own_coord_moment(measure, r):
        val = measure.moment(r, 0) if type_index == 1 else measure.moment(0, r)
        if math.isinf(val):
            raise DivergentCoefficient(f"jump moment of order {r} diverges")
        return val

    a = [math.comb(n, j) * own_coord_moment(own, n - j) for j in range(n - 1)]
    a[n - 2] += c_own * n * (n - 1)
    b = [math.comb(n, j) * own_coord_moment(cross, n - j) for j in range(n)]
    b[n - 1] += -b_cross * n
    return a, b


def recursion_residual(
    env: LevyEnvSpec,
    spec: BranchingSpec,
    table: MomentTable,
    n: int,
    type_index: int,
    t: float,
) -> float:
    """Relative gap between the recursion's right-hand side and the table.

    The right-hand side convolves lower moments from the table against
    e^{(beta(n) - n b_ii)(t-s)} by adaptive quadrature and adds the
    initial term; the residual is |RHS - m(t)| / max(1, m(t)).
    """
    return recursion_check(env, spec, table, n, type_index, t)[2]


def recursion_check(
    env: LevyEnvSpec,
    spec: BranchingSpec,
    table: MomentTable,
    n: int,
    type_index: int,
    t: float,
) -> tuple[float, float, float]:
    """(lhs, rhs, residual) of the n-th own-moment recursion identity."""
    if table.degree < n:
        raise ValueError("table degree is below the requested moment order")
    if table.generator is None:
        raise ValueError("table carries no propagator")
    target = (n, 0) if type_index == 1 else (0, n)
    if not table.finite.get(target, False):
        raise HypothesisViolated(f"moment {target} is flagged infinite in the table")
    a_coef, b_coef = recursion_coefficients(spec, n, type_index)
    b_ii = spec.b11 if type_index == 1 else spec.b22
    theta = levy_exponent(env, n) - n * b_ii
    gen = table.generator
    if type_index == 1:
        own_idx = [gen.index(j + 1, 0) for j in range(n - 1)]
        cross_idx = [gen.index(j, 1) for j in range(n)]
        target_idx = gen.index(n, 0)
    else:
        own_idx = [gen.index(0, j + 1) for j in range(n - 1)]
        cross_idx = [gen.index(1, j) for j in range(n)]
        target_idx = gen.index(0, n)

    def integrand(s):
        m = table.eval_vector(s)
        acc = math.fsum(a_coef[j] * m[own_idx[j]] for j in range(n - 1))
        acc += math.fsum(b_coef[j] * m[cross_idx[j]] for j in range(n))
        return acc * math.exp(theta * (t - s))

    conv, _ = quad(integrand, 0.0, t, epsabs=1e-9, epsrel=1e-10, limit=200)
    x0n = table.m0[target_idx]
    rhs = x0n * math.exp(theta * t) + conv
    lhs = float(table.eval_vector(t)[target_idx])
    return lhs, rhs, abs(rhs - lhs) / max(1.0, abs(lhs))


# ---------------------------------------------------------------------------
# Polynomial dependence on the initial state
# ---------------------------------------------------------------------------

@dataclass
class PolynomialFit:
    coefficients: dict
    residual: float
    max_degree: int


def polynomial_degree_check(
    env: LevyEnvSpec,
    spec: BranchingSpec,
    n: int,
    type_index: int,
    t: float,
    x_grid,
    fit_degree: int | None = None,
    coef_tol: float = 1e-8,
) -> PolynomialFit:
    """Least-squares fit of E[X_i(t)^n] as a polynomial of the initial state.

    Reports the fitted coefficients, the max fit residual over the grid,
    and the largest total degree carrying a coefficient above `coef_tol`.
    """
    if fit_degree is None:
        fit_degree = n
    x_grid = [(float(x[0]), float(x[1])) for x in x_grid]
    fit_basis = [(0, 0)] + list(monomial_basis(fit_degree))
    if len(x_grid) < len(fit_basis):
        raise RankDeficientGrid(
            f"need at least {len(fit_basis)} initial states, got {len(x_grid)}"
        )
    gen = build_moment_generator(env, spec, n)
    weights = expm(gen.matrix * t)[gen.index(n, 0) if type_index == 1 else gen.index(0, n)]
    y = np.array([weights @ initial_moment_vector(gen, x) for x in x_grid])
    design = np.array([[x1**p * x2**q for p, q in fit_basis] for x1, x2 in x_grid])
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < len(fit_basis):
        raise RankDeficientGrid("initial-state grid does not span the polynomial basis")
    residual = float(np.max(np.abs(design @ coef - y)))
    degrees = [p + q for p, q in fit_basis]
    big = [d for d, c in zip(degrees, coef) if abs(c) > coef_tol]
    return PolynomialFit(
        {pq: float(c) for pq, c in zip(fit_basis, coef)},
        residual,
        max(big) if big else 0,
    )


# ---------------------------------------------------------------------------
# Quenched Laplace functional
# ---------------------------------------------------------------------------

@dataclass
class QuenchedLaplace:
    """Backward trajectory v_{r,t} on the environment grid (v_{t,t} = lam)."""

    env_path: EnvPath
    lam: tuple
    t: float
    r_grid: np.ndarray
    v: np.ndarray  # (len(r_grid), 2)

    @property
    def v0(self) -> np.ndarray:
        return self.v[0]


def quenched_laplace(
    env_path: EnvPath,
    spec: BranchingSpec,
    lam,
    t: float,
    fp_tol: float = 1e-13,
    max_iter: int = 100,
) -> QuenchedLaplace:
    """Solve the backward equation for v_{r,t} given one environment path.

    Implicit trapezoidal stepping on the refined grid with a fixed-point
    solve per step; t must be a grid point of the path.
    """
    lam = np.asarray(lam, dtype=float)
    if (lam < 0).any():
        raise ValueError("lam must be nonnegative")
    grid = env_path.grid
    it = int(np.argmin(np.abs(grid - t)))
    if abs(grid[it] - t) > 1e-9 * max(1.0, t):
        raise ValueError(f"t={t} is not a grid point of the environment path")
    v = np.empty((it + 1, 2))
    v[it] = lam
    for m in range(it - 1, -1, -1):
        h = grid[m + 1] - grid[m]
        mult = math.exp(env_path.xi_increments[m])
        phi_next = np.array(phi_eval(spec, np.maximum(v[m + 1], 0.0)))
        const = mult * v[m + 1] - 0.5 * h * mult * phi_next
        cur = mult * v[m + 1]
        for _ in range(max_iter):
            nxt = const - 0.5 * h * np.array(phi_eval(spec, np.maximum(cur, 0.0)))
            if np.max(np.abs(nxt - cur)) <= fp_tol * (1.0 + np.max(np.abs(nxt))):
                cur = nxt
                break
            cur = nxt
        else:
            raise FixedPointDivergence("per-step fixed point did not converge; reduce the step")
        # only the nonnegative root is meaningful; a clearly negative
        # iterate means the step is too coarse for this mechanism
        if (cur < -1e-8 * (1.0 + np.max(np.abs(cur)))).any():
            raise FixedPointDivergence("backward step produced a negative rate; reduce the step")
        v[m] = np.maximum(cur, 0.0)
    return QuenchedLaplace(env_path, tuple(lam), float(grid[it]), grid[: it + 1], v)


def phi_eval_vec(spec: BranchingSpec, lam: np.ndarray) -> np.ndarray:
    """Vectorized mechanism evaluation for (n, 2) rate arrays.

    Supports atom-only jump measures (tail components need per-point
    quadrature; use `phi_eval` for those).
    """
    if spec.m1.tails or spec.m2.tails:
        raise NotImplementedError("vectorized phi supports atom-only measures")
    l1, l2 = lam[:, 0], lam[:, 1]
    phi1 = spec.b11 * l1 + spec.b12 * l2 + spec.c1 * l1**2
    phi2 = spec.b21 * l1 + spec.b22 * l2 + spec.c2 * l2**2
    for a in spec.m1.atoms:
        phi1 = phi1 + a.mass * (np.exp(-(l1 * a.z1 + l2 * a.z2)) - 1.0 + l1 * a.z1)
    for a in spec.m2.atoms:
        phi2 = phi2 + a.mass * (np.exp(-(l1 * a.z1 + l2 * a.z2)) - 1.0 + l2 * a.z2)
    return np.stack([phi1, phi2], axis=1)


def annealed_laplace_mc(
    env: LevyEnvSpec,
    spec: BranchingSpec,
    x0,
    lam,
    t: float,
    n_env_paths: int,
    step: float,
    seed: int,
    fp_tol: float = 1e-12,
    max_iter: int = 100,
) -> tuple[float, float]:
    """Monte Carlo estimate of E exp(-<x0, v_{0,t}>) over environment paths.

    Environment increments are aggregated per base-grid interval (exact
    in law at grid points) and the backward equation is solved for all
    paths at once.  Returns (estimate, standard error).
    """
    from .env import _base_grid, segment_sums
    from ._util import fsum_mean_se

    lam = np.asarray(lam, dtype=float)
    rng = np.random.default_rng(seed)
    grid = _base_grid(t, step)
    n_int = len(grid) - 1
    dt = np.diff(grid)
    dxi = (env.a - env.nu.mean_small()) * dt[None, :].repeat(n_env_paths, axis=0)
    if env.sigma1 > 0:
        dxi += env.sigma1 * np.sqrt(dt)[None, :] * rng.standard_normal((n_env_paths, n_int))
    lam_nu = env.nu.total_mass()
    if lam_nu > 0:
        counts = rng.poisson(lam_nu * dt[None, :].repeat(n_env_paths, axis=0))
        sizes = env.nu.sample(rng, int(counts.sum()))
        from .env import effective_jump

        dxi += segment_sums(effective_jump(sizes, env.trunc_level), counts.ravel()).reshape(
            n_env_paths, n_int
        )
    v = np.tile(lam, (n_env_paths, 1))
    for m in range(n_int - 1, -1, -1):
        h = dt[m]
        mult = np.exp(dxi[:, m])[:, None]
        phi_next = phi_eval_vec(spec, np.maximum(v, 0.0))
        const = mult * (v - 0.5 * h * phi_next)
        cur = mult * v
        for _ in range(max_iter):
            nxt = const - 0.5 * h * phi_eval_vec(spec, np.maximum(cur, 0.0))
            if np.max(np.abs(nxt - cur)) <= fp_tol * (1.0 + np.max(np.abs(nxt))):
                cur = nxt
                break
            cur = nxt
        else:
            raise FixedPointDivergence("vectorized fixed point did not converge")
        if (cur < -1e-8 * (1.0 + np.max(np.abs(cur)))).any():
            raise FixedPointDivergence("backward step produced a negative rate; reduce the step")
        v = np.maximum(cur, 0.0)
    x0 = np.asarray(x0, dtype=float)
    vals = np.exp(-(v @ x0))
    return fsum_mean_se(vals)
