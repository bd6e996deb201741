"""Problem model: constraint families, domains, oracles and instance parameters.

A problem is a finite tuple of analytic constraints over a simple convex
domain (simplex, ball or box).  In the default ``sense="min"`` convention a
point is feasible when every constraint value is <= 0 and eps-approximately
feasible when no value exceeds eps.  Log-transformed problems (built by
:mod:`feasgame.reductions`) carry ``sense="max"`` and are satisfied when
every constraint value is >= 1.  The ``residual`` helpers fold both
conventions into a single "<= 0 means satisfied" orientation, which is what
every solver and oracle in the package consumes.

Constraint families form a closed set; there are no black-box callbacks.
Every family knows its value, gradient, and conservative interval/curvature
bounds over a domain, which is what makes the parameter estimates in
:func:`estimate_parameters` sound rather than sampled guesses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

Array = np.ndarray

# Comparisons against zero use this absolute tolerance unless stated.
ZERO_TOL = 1e-12
# Distribution vectors must sum to 1 within this tolerance.
DIST_TOL = 1e-9
# Floor for boundary-singular terms (entropy/barrier logs) in parameter
# bounds; keeps conservative constants finite.
GRAD_FLOOR = 1e-12


class DimensionMismatch(ValueError):
    """Vector/matrix shapes do not agree with the constraint or domain."""


class EvaluationDomainError(ValueError):
    """Constraint evaluated outside its analytic domain (e.g. log of <= 0)."""


class InvalidDistribution(ValueError):
    """Weight vector is not a probability distribution."""


class SetupError(ValueError):
    """Inconsistent configuration: learner/problem mismatch, bad knobs."""


class ConvergenceError(RuntimeError):
    """An inner iterative solve hit its cap without meeting its contract."""


def _freeze(a, dtype=float) -> Array:
    out = np.array(a, dtype=dtype)
    out.flags.writeable = False
    return out


# ---------------------------------------------------------------------------
# Domains


@dataclass(frozen=True, eq=False)
class Simplex:
    """Probability simplex in R^n."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise SetupError("simplex dimension must be >= 1")


@dataclass(frozen=True, eq=False)
class Ball:
    """Euclidean ball of given radius; center defaults to the origin."""

    n: int
    radius: float = 1.0
    center: Array | None = None

    def __post_init__(self):
        if self.n < 1:
            raise SetupError("ball dimension must be >= 1")
        if not self.radius > 0:
            raise SetupError("ball radius must be positive")
        c = np.zeros(self.n) if self.center is None else np.asarray(self.center, float)
        if c.shape != (self.n,):
            raise DimensionMismatch("ball center has wrong dimension")
        object.__setattr__(self, "center", _freeze(c))


@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned box {x : lo <= x <= hi}."""

    lo: Array
    hi: Array

    def __post_init__(self):
        lo = np.asarray(self.lo, float)
        hi = np.asarray(self.hi, float)
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise DimensionMismatch("box bounds must be 1-d and equal length")
        if np.any(lo > hi):
            raise SetupError("box has lo > hi in some coordinate")
        object.__setattr__(self, "lo", _freeze(lo))
        object.__setattr__(self, "hi", _freeze(hi))


Domain = Union[Simplex, Ball, Box]


def domain_dim(domain: Domain) -> int:
    if isinstance(domain, (Simplex, Ball)):
        return domain.n
    return domain.lo.shape[0]


def domain_contains(domain: Domain, x: Array, tol: float = DIST_TOL) -> bool:
    x = np.asarray(x, float)
    if x.shape != (domain_dim(domain),):
        return False
    if isinstance(domain, Simplex):
        return bool(np.all(x >= -tol) and abs(float(np.sum(x)) - 1.0) <= tol)
    if isinstance(domain, Ball):
        return bool(np.linalg.norm(x - domain.center) <= domain.radius + tol)
    return bool(np.all(x >= domain.lo - tol) and np.all(x <= domain.hi + tol))


def start_point(domain: Domain) -> Array:
    """Canonical first iterate: uniform point, ball center, or box midpoint."""
    if isinstance(domain, Simplex):
        return np.full(domain.n, 1.0 / domain.n)
    if isinstance(domain, Ball):
        return domain.center.copy()
    return 0.5 * (domain.lo + domain.hi)


def domain_diameter(domain: Domain) -> float:
    if isinstance(domain, Simplex):
        return math.sqrt(2.0) if domain.n > 1 else 0.0
    if isinstance(domain, Ball):
        return 2.0 * domain.radius
    return float(np.linalg.norm(domain.hi - domain.lo))


def bounding_box(domain: Domain) -> tuple[Array, Array]:
    if isinstance(domain, Simplex):
        return np.zeros(domain.n), np.ones(domain.n)
    if isinstance(domain, Ball):
        return domain.center - domain.radius, domain.center + domain.radius
    return domain.lo.copy(), domain.hi.copy()


def max_point_norm(domain: Domain) -> float:
    """sup of ||x||_2 over the domain (exact for these domain shapes)."""
    if isinstance(domain, Simplex):
        return 1.0
    if isinstance(domain, Ball):
        return float(np.linalg.norm(domain.center)) + domain.radius
    return float(np.sqrt(np.sum(np.maximum(domain.lo**2, domain.hi**2))))


def linear_minimum(domain: Domain, c: Array) -> tuple[Array, float]:
    """argmin/min of c.x over the domain, in closed form."""
    c = np.asarray(c, float)
    if c.shape != (domain_dim(domain),):
        raise DimensionMismatch("direction has wrong dimension for domain")
    if isinstance(domain, Simplex):
        i = int(np.argmin(c))
        x = np.zeros(domain.n)
        x[i] = 1.0
        return x, float(c[i])
    if isinstance(domain, Ball):
        nrm = float(np.linalg.norm(c))
        if nrm <= ZERO_TOL:
            x = domain.center.copy()
        else:
            x = domain.center - domain.radius * c / nrm
        return x, float(c @ x)
    x = np.where(c > 0, domain.lo, domain.hi)
    return x.astype(float), float(c @ x)


# ---------------------------------------------------------------------------
# Constraint families


@dataclass(frozen=True, eq=False)
class Affine:
    """f(x) = a.x + b."""

    a: Array
    b: float

    def __post_init__(self):
        a = np.asarray(self.a, float)
        if a.ndim != 1:
            raise DimensionMismatch("affine coefficient vector must be 1-d")
        object.__setattr__(self, "a", _freeze(a))
        object.__setattr__(self, "b", float(self.b))


@dataclass(frozen=True, eq=False)
class Quadratic:
    """f(x) = x.A x + b.x + c with A symmetric (not necessarily PSD)."""

    A: Array
    b: Array
    c: float

    def __post_init__(self):
        A = np.asarray(self.A, float)
        b = np.asarray(self.b, float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionMismatch("quadratic matrix must be square")
        if b.shape != (A.shape[0],):
            raise DimensionMismatch("quadratic linear term has wrong dimension")
        asym = float(np.max(np.abs(A - A.T))) if A.size else 0.0
        if asym > 1e-9 * (1.0 + float(np.max(np.abs(A)))):
            raise SetupError(f"quadratic matrix not symmetric (max asymmetry {asym:.3g})")
        object.__setattr__(self, "A", _freeze(A))
        object.__setattr__(self, "b", _freeze(b))
        object.__setattr__(self, "c", float(self.c))


@dataclass(frozen=True, eq=False)
class LogAffineComposite:
    """f(x) = log(e + inner(x)/omega); concave whenever inner is concave."""

    inner: "ConstraintFn"
    omega: float

    def __post_init__(self):
        if not self.omega > 0:
            raise SetupError("omega must be positive")
        object.__setattr__(self, "omega", float(self.omega))


@dataclass(frozen=True, eq=False)
class NegEntropy:
    """f(x) = sum_i x_i log x_i + shift; requires strictly positive x."""

    n: int
    shift: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise SetupError("dimension must be >= 1")
        object.__setattr__(self, "shift", float(self.shift))


@dataclass(frozen=True, eq=False)
class NormDistSq:
    """f(x) = ||x - center||^2 - c."""

    center: Array
    c: float

    def __post_init__(self):
        center = np.asarray(self.center, float)
        if center.ndim != 1:
            raise DimensionMismatch("center must be a 1-d vector")
        object.__setattr__(self, "center", _freeze(center))
        object.__setattr__(self, "c", float(self.c))


@dataclass(frozen=True, eq=False)
class NegLogBarrier:
    """f(x) = level - sum_k log(rows_k . x); requires rows_k . x > 0."""

    rows: Array
    level: float

    def __post_init__(self):
        rows = np.asarray(self.rows, float)
        if rows.ndim != 2:
            raise DimensionMismatch("rows must be a 2-d matrix")
        object.__setattr__(self, "rows", _freeze(rows))
        object.__setattr__(self, "level", float(self.level))


ConstraintFn = Union[Affine, Quadratic, LogAffineComposite, NegEntropy, NormDistSq, NegLogBarrier]


def constraint_dim(f: ConstraintFn) -> int:
    if isinstance(f, Affine):
        return f.a.shape[0]
    if isinstance(f, Quadratic):
        return f.A.shape[0]
    if isinstance(f, LogAffineComposite):
        return constraint_dim(f.inner)
    if isinstance(f, NegEntropy):
        return f.n
    if isinstance(f, NormDistSq):
        return f.center.shape[0]
    return f.rows.shape[1]


def _check_point(f: ConstraintFn, x) -> Array:
    x = np.asarray(x, float)
    if x.shape != (constraint_dim(f),):
        raise DimensionMismatch(
            f"point has shape {x.shape}, constraint expects ({constraint_dim(f)},)"
        )
    return x


def evaluate(f: ConstraintFn, x) -> float:
    """Constraint value at x.  Raises EvaluationDomainError off the analytic domain."""
    x = _check_point(f, x)
    if isinstance(f, Affine):
        return float(f.a @ x + f.b)
    if isinstance(f, Quadratic):
        return float(x @ (f.A @ x) + f.b @ x + f.c)
    if isinstance(f, LogAffineComposite):
        arg = math.e + evaluate(f.inner, x) / f.omega
        if arg <= 0:
            raise EvaluationDomainError("log argument is nonpositive")
        return math.log(arg)
    if isinstance(f, NegEntropy):
        if np.any(x <= 0):
            raise EvaluationDomainError("negative entropy needs strictly positive coordinates")
        return float(np.sum(x * np.log(x)) + f.shift)
    if isinstance(f, NormDistSq):
        d = x - f.center
        return float(d @ d - f.c)
    z = f.rows @ x
    if np.any(z <= 0):
        raise EvaluationDomainError("log barrier row inner product is nonpositive")
    return float(f.level - np.sum(np.log(z)))


def gradient(f: ConstraintFn, x) -> Array:
    """Gradient of the constraint at x (same domain rules as evaluate)."""
    x = _check_point(f, x)
    if isinstance(f, Affine):
        return f.a.copy()
    if isinstance(f, Quadratic):
        return 2.0 * (f.A @ x) + f.b
    if isinstance(f, LogAffineComposite):
        arg = math.e + evaluate(f.inner, x) / f.omega
        if arg <= 0:
            raise EvaluationDomainError("log argument is nonpositive")
        return gradient(f.inner, x) / (f.omega * arg)
    if isinstance(f, NegEntropy):
        if np.any(x <= 0):
            raise EvaluationDomainError("negative entropy needs strictly positive coordinates")
        return 1.0 + np.log(x)
    if isinstance(f, NormDistSq):
        return 2.0 * (x - f.center)
    z = f.rows @ x
    if np.any(z <= 0):
        raise EvaluationDomainError("log barrier row inner product is nonpositive")
    return -(f.rows.T @ (1.0 / z))


def evaluate_batch(f: ConstraintFn, X: Array) -> Array:
    """Vectorized evaluate over rows of X (grid and sampling oracles)."""
    X = np.asarray(X, float)
    if X.ndim != 2 or X.shape[1] != constraint_dim(f):
        raise DimensionMismatch("batch must be (N, n) with matching n")
    if isinstance(f, Affine):
        return X @ f.a + f.b
    if isinstance(f, Quadratic):
        return np.einsum("ni,ij,nj->n", X, f.A, X) + X @ f.b + f.c
    if isinstance(f, LogAffineComposite):
        arg = math.e + evaluate_batch(f.inner, X) / f.omega
        if np.any(arg <= 0):
            raise EvaluationDomainError("log argument is nonpositive")
        return np.log(arg)
    if isinstance(f, NegEntropy):
        if np.any(X <= 0):
            raise EvaluationDomainError("negative entropy needs strictly positive coordinates")
        return np.sum(X * np.log(X), axis=1) + f.shift
    if isinstance(f, NormDistSq):
        D = X - f.center
        return np.sum(D * D, axis=1) - f.c
    Z = X @ f.rows.T
    if np.any(Z <= 0):
        raise EvaluationDomainError("log barrier row inner product is nonpositive")
    return f.level - np.sum(np.log(Z), axis=1)


# ---------------------------------------------------------------------------
# Conservative per-family bounds over a domain (interval arithmetic)


def _affine_interval(a: Array, b: float, domain: Domain) -> tuple[float, float]:
    if isinstance(domain, Simplex):
        return float(np.min(a)) + b, float(np.max(a)) + b
    if isinstance(domain, Ball):
        mid = float(a @ domain.center)
        half = domain.radius * float(np.linalg.norm(a))
        return mid - half + b, mid + half + b
    lo = float(np.sum(np.minimum(a * domain.lo, a * domain.hi)))
    hi = float(np.sum(np.maximum(a * domain.lo, a * domain.hi)))
    return lo + b, hi + b


def _max_dist(center: Array, domain: Domain) -> float:
    lo, hi = bounding_box(domain)
    per = np.maximum(np.abs(lo - center), np.abs(hi - center))
    return float(np.linalg.norm(per))


def _xlogx_interval(lo: float, hi: float) -> tuple[float, float]:
    # t log t on [lo, hi] with lo >= 0; limit value 0 at t = 0
    def val(t):
        return 0.0 if t == 0 else t * math.log(t)

    vmin = min(val(lo), val(hi))
    if lo <= 1.0 / math.e <= hi:
        vmin = min(vmin, -1.0 / math.e)
    return vmin, max(val(lo), val(hi))


def value_interval(f: ConstraintFn, domain: Domain) -> tuple[float, float]:
    """Interval guaranteed to contain f(x) for every x in the domain."""
    if isinstance(f, Affine):
        return _affine_interval(f.a, f.b, domain)
    if isinstance(f, Quadratic):
        M = max_point_norm(domain)
        ev = np.linalg.eigvalsh(f.A)
        qlo = min(0.0, float(ev[0])) * M * M
        qhi = max(0.0, float(ev[-1])) * M * M
        llo, lhi = _affine_interval(f.b, f.c, domain)
        return qlo + llo, qhi + lhi
    if isinstance(f, LogAffineComposite):
        ilo, ihi = value_interval(f.inner, domain)
        lo_arg = max(math.e + ilo / f.omega, GRAD_FLOOR)
        hi_arg = max(math.e + ihi / f.omega, lo_arg)
        return math.log(lo_arg), math.log(hi_arg)
    if isinstance(f, NegEntropy):
        if isinstance(domain, Simplex):
            return -math.log(domain.n) + f.shift if domain.n > 1 else f.shift, f.shift
        lo, hi = bounding_box(domain)
        if np.any(lo < 0):
            raise SetupError("negative entropy over a domain with negative coordinates")
        lo_sum = hi_sum = 0.0
        for li, hi_i in zip(lo, hi):
            a, b = _xlogx_interval(float(li), float(hi_i))
            lo_sum += a
            hi_sum += b
        return lo_sum + f.shift, hi_sum + f.shift
    if isinstance(f, NormDistSq):
        md = _max_dist(f.center, domain)
        return -f.c, md * md - f.c
    # NegLogBarrier
    lo_sum = hi_sum = 0.0
    for k in range(f.rows.shape[0]):
        rlo, rhi = _affine_interval(f.rows[k], 0.0, domain)
        if rhi <= 0:
            raise SetupError("log barrier row is nonpositive over the whole domain")
        lo_sum += math.log(max(rlo, GRAD_FLOOR))
        hi_sum += math.log(rhi)
    return f.level - hi_sum, f.level - lo_sum


def gradient_norm_bound(f: ConstraintFn, domain: Domain) -> float:
    """Conservative upper bound on ||grad f(x)||_2 over the domain."""
    if isinstance(f, Affine):
        return float(np.linalg.norm(f.a))
    if isinstance(f, Quadratic):
        rho = float(np.max(np.abs(np.linalg.eigvalsh(f.A)))) if f.A.size else 0.0
        return 2.0 * rho * max_point_norm(domain) + float(np.linalg.norm(f.b))
    if isinstance(f, LogAffineComposite):
        # |e + inner/omega| >= e - 1 > 1 under the width precondition
        return gradient_norm_bound(f.inner, domain) / f.omega
    if isinstance(f, NegEntropy):
        lo, hi = bounding_box(domain)
        lo = np.maximum(lo, GRAD_FLOOR)
        hi = np.maximum(hi, lo)
        per = np.maximum(np.abs(1.0 + np.log(lo)), np.abs(1.0 + np.log(hi)))
        return float(np.linalg.norm(per))
    if isinstance(f, NormDistSq):
        return 2.0 * _max_dist(f.center, domain)
    total = 0.0
    for k in range(f.rows.shape[0]):
        rlo, _ = _affine_interval(f.rows[k], 0.0, domain)
        total += float(np.linalg.norm(f.rows[k])) / max(rlo, GRAD_FLOOR)
    return total


def smoothness_bound(f: ConstraintFn, domain: Domain) -> float:
    """Upper bound on the Hessian operator norm, or inf where unbounded."""
    if isinstance(f, Affine):
        return 0.0
    if isinstance(f, Quadratic):
        return 2.0 * float(np.max(np.abs(np.linalg.eigvalsh(f.A)))) if f.A.size else 0.0
    if isinstance(f, NormDistSq):
        return 2.0
    if isinstance(f, LogAffineComposite):
        inner_L = smoothness_bound(f.inner, domain)
        if not math.isfinite(inner_L):
            return math.inf
        # |d/dt log(e+t/w)| terms: inner curvature plus rank-one correction
        gi = gradient_norm_bound(f.inner, domain)
        denom = math.e - 1.0
        return inner_L / (f.omega * denom) + (gi / f.omega) ** 2 / (denom * denom)
    return math.inf  # entropy/barrier: unbounded toward the boundary


def curvature_bound(f: ConstraintFn, domain: Domain, sense: str = "min") -> float:
    """Lower bound on the smallest Hessian eigenvalue of the residual form."""
    if sense == "max":
        # residual is 1 - f; convex when f concave, no positive bound claimed
        return 0.0
    if isinstance(f, Affine):
        return 0.0
    if isinstance(f, Quadratic):
        return max(0.0, 2.0 * float(np.min(np.linalg.eigvalsh(f.A))))
    if isinstance(f, NormDistSq):
        return 2.0
    if isinstance(f, NegEntropy):
        _, hi = bounding_box(domain)
        top = float(np.max(hi))
        return 1.0 / top if top > 0 else 0.0
    if isinstance(f, NegLogBarrier):
        # unit rows contribute sum_i e_i e_i^T / x_i^2 >= I when x_i <= 1
        _, hi = bounding_box(domain)
        if float(np.max(hi)) > 1.0 + ZERO_TOL:
            return 0.0
        n = f.rows.shape[1]
        covered = set()
        for k in range(f.rows.shape[0]):
            row = f.rows[k]
            j = int(np.argmax(row))
            if row[j] == 1.0 and np.count_nonzero(row) == 1:
                covered.add(j)
        return 1.0 if len(covered) == n else 0.0
    return 0.0


# ---------------------------------------------------------------------------
# Problems


@dataclass(frozen=True)
class ProblemParams:
    """Conservative instance constants.

    G: euclidean gradient bound over constraints and domain.
    H: strong-convexity modulus common to all constraints (0 when absent).
    omega: width bound, sup |f_j| over the domain.
    D: euclidean diameter of the domain.
    G_inf: entrywise bound on dual payoff gradients (= omega).
    alpha: exp-concavity modulus available to Newton-style learners.
    """

    G: float
    H: float
    omega: float
    D: float
    G_inf: float
    alpha: float

    def __post_init__(self):
        if self.G < 0 or self.H < 0 or self.omega < 0 or self.D < 0:
            raise SetupError("instance constants must be nonnegative")


@dataclass(frozen=True, eq=False)
class Problem:
    """Constraint system over a domain, with its estimated constants."""

    constraints: tuple[ConstraintFn, ...]
    domain: Domain
    params: ProblemParams
    sense: str = "min"

    def __post_init__(self):
        if len(self.constraints) < 1:
            raise SetupError("a problem needs at least one constraint")
        if self.sense not in ("min", "max"):
            raise SetupError("sense must be 'min' or 'max'")
        n = domain_dim(self.domain)
        for j, f in enumerate(self.constraints):
            if constraint_dim(f) != n:
                raise DimensionMismatch(f"constraint {j} has dimension {constraint_dim(f)}, domain has {n}")
        object.__setattr__(self, "constraints", tuple(self.constraints))

    @property
    def m(self) -> int:
        return len(self.constraints)

    @property
    def n(self) -> int:
        return domain_dim(self.domain)


def _estimate(constraints, domain: Domain, sense: str) -> ProblemParams:
    G = max(gradient_norm_bound(f, domain) for f in constraints)
    H = min(curvature_bound(f, domain, sense) for f in constraints)
    widths = []
    for f in constraints:
        lo, hi = value_interval(f, domain)
        if sense == "max":
            lo, hi = 1.0 - hi, 1.0 - lo
        widths.append(max(abs(lo), abs(hi)))
    omega = max(widths)
    D = domain_diameter(domain)
    if sense == "max" and all(
        isinstance(f, LogAffineComposite) and isinstance(f.inner, Affine) for f in constraints
    ):
        alpha = 1.0
    elif H > 0 and G > 0:
        alpha = H / (G * G)
    else:
        alpha = 0.0
    return ProblemParams(G=G, H=H, omega=omega, D=D, G_inf=omega, alpha=alpha)


def estimate_parameters(problem: Problem) -> ProblemParams:
    """Recompute conservative instance constants from the constraints."""
    return _estimate(problem.constraints, problem.domain, problem.sense)


def make_problem(constraints, domain: Domain, params: ProblemParams | None = None,
                 sense: str = "min") -> Problem:
    constraints = tuple(constraints)
    if params is None:
        params = _estimate(constraints, domain, sense)
    return Problem(constraints=constraints, domain=domain, params=params, sense=sense)


# ---------------------------------------------------------------------------
# Residual orientation and oracles


def residual(problem: Problem, j: int, x) -> float:
    """Constraint j's value oriented so that <= 0 means satisfied."""
    v = evaluate(problem.constraints[j], x)
    return v if problem.sense == "min" else 1.0 - v


def residual_gradient(problem: Problem, j: int, x) -> Array:
    g = gradient(problem.constraints[j], x)
    return g if problem.sense == "min" else -g


def residuals(problem: Problem, x) -> Array:
    return np.array([residual(problem, j, x) for j in range(problem.m)])


def check_distribution(p, m: int) -> Array:
    p = np.asarray(p, float)
    if p.shape != (m,):
        raise InvalidDistribution(f"weight vector has shape {p.shape}, expected ({m},)")
    if np.any(p < -ZERO_TOL):
        raise InvalidDistribution("weights must be nonnegative")
    if abs(float(np.sum(p)) - 1.0) > DIST_TOL:
        raise InvalidDistribution("weights must sum to 1")
    return np.maximum(p, 0.0)


def game_loss(problem: Problem, x, p) -> float:
    """Mixed constraint value sum_j p_j r_j(x) for a distribution p."""
    p = check_distribution(p, problem.m)
    return float(p @ residuals(problem, x))


@dataclass(frozen=True)
class Violation:
    """Index and oriented value of a violated constraint."""

    index: int
    value: float


def separation_oracle(problem: Problem, x, eps: float) -> Violation | None:
    """First constraint (ascending index) violated by more than eps.

    Returns None when every residual is <= eps, i.e. x is eps-approximately
    feasible; that is the oracle's FAIL answer in the solver loops.
    """
    if eps < 0:
        raise SetupError("eps must be nonnegative")
    for j in range(problem.m):
        v = residual(problem, j, x)
        if v > eps:
            return Violation(index=j, value=v)
    return None
