"""Seeded generators for benchmark feasibility instances over the simplex.

Random matrices are built as Q diag(lam) Q^T with an explicitly placed
smallest eigenvalue, so curvature knobs are exact rather than sampled.
Every generator returns a Problem with parameters filled in by the
conservative estimator, and the same GeneratorSpec always reproduces the
same instance bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    Affine,
    Array,
    NegEntropy,
    NegLogBarrier,
    NormDistSq,
    Problem,
    Quadratic,
    SetupError,
    Simplex,
    make_problem,
)

# Relative pad placed on target eigenvalues so numeric eigensolvers report
# the promised lower bound despite rounding.
_EIG_PAD = 1e-10


@dataclass(frozen=True)
class GeneratorSpec:
    """Name plus knobs for one reproducible instance.

    family is one of strict_qp, perceptron_lp, portfolio_risk, entropy, crp.
    Knobs a family does not use are ignored (m doubles as T_days for crp
    via the t_days field).
    """

    family: str
    n: int
    m: int = 1
    seed: int = 0
    h_target: float = 1.0
    feasible: bool = True
    margin: float = 0.1
    c: float = 0.05
    t_days: int = 5


def _check_sizes(n: int, m: int) -> None:
    if n < 1 or m < 1:
        raise SetupError("need n >= 1 and m >= 1")


def _random_orthogonal(rng: np.random.Generator, n: int) -> Array:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def _psd_with_spectrum(rng: np.random.Generator, n: int, lam_min: float,
                       lam_max: float) -> Array:
    """Symmetric PSD matrix whose smallest eigenvalue is lam_min (padded)."""
    floor = lam_min * (1.0 + _EIG_PAD) + 1e-12
    if n == 1:
        lam = np.array([floor])
    else:
        lam = np.concatenate([[floor], rng.uniform(floor, max(lam_max, floor), n - 1)])
    q = _random_orthogonal(rng, n)
    A = (q * lam) @ q.T
    return 0.5 * (A + A.T)


def make_strict_qp(n: int, m: int, h_target: float = 1.0, feasible: bool = True,
                   seed: int = 0) -> Problem:
    """m strongly convex quadratics over Simplex(n).

    Every A_j has smallest eigenvalue >= h_target.  Feasible instances
    shift constants so a sampled witness has f_j(witness) = -0.1 on each
    constraint; infeasible ones shift so f_j >= 0.1 everywhere on the
    simplex (using x'A x >= h_target / n and b'x >= min_i b_i).
    """
    _check_sizes(n, m)
    if not h_target > 0:
        raise SetupError("h_target must be positive")
    rng = np.random.default_rng(seed)
    witness = rng.dirichlet(np.ones(n)) if feasible else None
    constraints = []
    for _ in range(m):
        A = _psd_with_spectrum(rng, n, h_target, 10.0 * h_target)
        b = rng.standard_normal(n)
        if witness is not None:
            c = -float(witness @ A @ witness + b @ witness) - 0.1
        else:
            c = 0.1 - h_target / n - float(np.min(b))
        constraints.append(Quadratic(A=A, b=b, c=c))
    return make_problem(constraints, Simplex(n))


def _plant_row(a: Array, witness: Array, margin: float) -> Array:
    """Blend a toward the witness until the normalized row clears margin."""

    def score(kappa: float) -> tuple[Array, float]:
        v = a + kappa * witness
        v = v / np.linalg.norm(v)
        return v, float(v @ witness)

    row, s = score(0.0)
    if s >= margin:
        return row
    hi = 1.0
    while score(hi)[1] < margin:
        hi *= 2.0
        if hi > 2.0**200:
            raise SetupError("margin too large to plant")
    lo = 0.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if score(mid)[1] >= margin:
            hi = mid
        else:
            lo = mid
    return score(hi)[0]


def make_perceptron_lp(n: int, m: int, margin: float = 0.1, feasible: bool = True,
                       seed: int = 0) -> Problem:
    """Linear separation feasibility: rows a_j with a_j . x >= 0 on the simplex.

    Constraints are stored in minimization form f_j(x) = -a_j . x.  Feasible
    instances plant a witness with a_j . witness >= margin for every row;
    infeasible ones alternate rows -d, +d, -d, ... for a fixed positive
    direction d, so some row is violated at every simplex point.
    """
    _check_sizes(n, m)
    if margin < 0:
        raise SetupError("margin must be nonnegative")
    rng = np.random.default_rng(seed)
    rows = []
    if feasible:
        witness = rng.dirichlet(np.ones(n))
        if margin >= float(np.linalg.norm(witness)) - 1e-9:
            raise SetupError(
                f"margin {margin:.6g} too large to plant: witness norm is "
                f"{float(np.linalg.norm(witness)):.6g}"
            )
        for _ in range(m):
            a = rng.standard_normal(n)
            a /= np.linalg.norm(a)
            rows.append(_plant_row(a, witness, margin))
    else:
        d = np.abs(rng.standard_normal(n)) + 0.1
        d /= np.linalg.norm(d)
        for j in range(m):
            rows.append(d if j % 2 == 1 else -d)
    constraints = [Affine(a=-row, b=0.0) for row in rows]
    return make_problem(constraints, Simplex(n))


def make_portfolio_risk(n: int, m: int, seed: int = 0) -> Problem:
    """Risk-versus-return scenarios: 0.05 + x' Sigma_j x - p_j . x <= 0.

    Each covariance Sigma_j is positive definite with smallest eigenvalue
    0.1 and expected returns p_j drawn uniformly from [0.05, 0.15].
    """
    _check_sizes(n, m)
    rng = np.random.default_rng(seed)
    constraints = []
    for _ in range(m):
        sigma = _psd_with_spectrum(rng, n, 0.1, 1.0)
        p = rng.uniform(0.05, 0.15, n)
        constraints.append(Quadratic(A=sigma, b=-p, c=0.05))
    return make_problem(constraints, Simplex(n))


def make_entropy_problem(n: int, m: int, c: float = 0.05, seed: int = 0) -> Problem:
    """Entropy level constraint plus m ellipsoidal balls around a base point.

    The first constraint asks sum_i x_i log x_i <= tau with tau set 0.1
    above the value at the sampled base point p_tilde, so p_tilde is an
    interior witness; each ball ||A_i (x - p_tilde)||^2 <= c is stored as
    an expanded Quadratic whose value at p_tilde is exactly -c.
    """
    _check_sizes(n, m)
    if not c > 0:
        raise SetupError("c must be positive")
    rng = np.random.default_rng(seed)
    p_tilde = rng.dirichlet(np.ones(n))
    tau = float(p_tilde @ np.log(p_tilde)) + 0.1
    constraints: list = [NegEntropy(n=n, shift=-tau)]
    for _ in range(m):
        M = _psd_with_spectrum(rng, n, 0.3, 1.0)
        Mp = M @ p_tilde
        constraints.append(Quadratic(A=M, b=-2.0 * Mp, c=float(p_tilde @ Mp) - c))
    return make_problem(constraints, Simplex(n))


def make_crp_problem(n: int, t_days: int, c: float = 0.05, seed: int = 0) -> Problem:
    """Log-wealth level constraint for constant-rebalanced portfolios.

    Price relatives r_t are sampled in [0.9, 1.1]; the barrier rows are the
    r_t plus the identity (one log p_i term per coordinate).  The level tau
    sits 0.5 below the barrier objective at a sampled base point, which
    also centers the ball constraint ||x - p_tilde||^2 <= c.
    """
    if n < 2:
        raise SetupError("need n >= 2")
    if t_days < 1:
        raise SetupError("need t_days >= 1")
    if not c > 0:
        raise SetupError("c must be positive")
    rng = np.random.default_rng(seed)
    p_tilde = rng.dirichlet(np.ones(n))
    R = rng.uniform(0.9, 1.1, (t_days, n))
    rows = np.vstack([R, np.eye(n)])
    tau = float(np.sum(np.log(rows @ p_tilde))) - 0.5
    constraints = [NegLogBarrier(rows=rows, level=tau),
                   NormDistSq(center=p_tilde, c=c)]
    return make_problem(constraints, Simplex(n))


def make_problem_from_spec(spec: GeneratorSpec) -> Problem:
    if spec.family == "strict_qp":
        return make_strict_qp(spec.n, spec.m, h_target=spec.h_target,
                              feasible=spec.feasible, seed=spec.seed)
    if spec.family == "perceptron_lp":
        return make_perceptron_lp(spec.n, spec.m, margin=spec.margin,
                                  feasible=spec.feasible, seed=spec.seed)
    if spec.family == "portfolio_risk":
        return make_portfolio_risk(spec.n, spec.m, seed=spec.seed)
    if spec.family == "entropy":
        return make_entropy_problem(spec.n, spec.m, c=spec.c, seed=spec.seed)
    if spec.family == "crp":
        return make_crp_problem(spec.n, spec.t_days, c=spec.c, seed=spec.seed)
    raise SetupError(f"unknown generator family {spec.family!r}")
