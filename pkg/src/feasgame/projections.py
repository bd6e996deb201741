"""Euclidean projections onto the supported domains, plus A-norm projection.

project_simplex is the exact sort-and-threshold procedure: find the unique
shift a with sum_i max(y_i - a, 0) = 1 and clamp.  It is deterministic and
costs O(n log n).  generalized_project minimizes (x - y).A(x - y) over the
domain by projected gradient descent using these Euclidean projections as
the inner step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    Array,
    Ball,
    Box,
    ConvergenceError,
    DimensionMismatch,
    Domain,
    SetupError,
    Simplex,
    ZERO_TOL,
    domain_contains,
    domain_dim,
)


def simplex_threshold(y) -> float:
    """Shift a with sum_i max(y_i - a, 0) = 1; exact up to float arithmetic."""
    y = np.asarray(y, float)
    if y.ndim != 1 or y.size == 0:
        raise DimensionMismatch("expected a nonempty 1-d vector")
    u = np.sort(y)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, y.size + 1)
    cand = (css - 1.0) / j
    rho = int(np.nonzero(u - cand > 0)[0][-1])
    return float(cand[rho])


def project_simplex(y) -> Array:
    """Euclidean projection of y onto the probability simplex."""
    y = np.asarray(y, float)
    a = simplex_threshold(y)
    return np.maximum(y - a, 0.0)


def project_ball(y, radius: float = 1.0, center=None) -> Array:
    """Euclidean projection onto the ball: rescale along the ray from center."""
    y = np.asarray(y, float)
    c = np.zeros_like(y) if center is None else np.asarray(center, float)
    d = y - c
    nrm = float(np.linalg.norm(d))
    if nrm <= radius:
        return y.copy()
    return c + radius * d / nrm


def project_box(y, lo, hi) -> Array:
    """Coordinatewise clamp onto [lo, hi]."""
    return np.clip(np.asarray(y, float), lo, hi)


def project_domain(domain: Domain, y) -> Array:
    if isinstance(domain, Simplex):
        return project_simplex(y)
    if isinstance(domain, Ball):
        return project_ball(y, domain.radius, domain.center)
    return project_box(y, domain.lo, domain.hi)


@dataclass(frozen=True)
class PsdMatrix:
    """Validated carrier for a symmetric PSD matrix and its top eigenvalue."""

    M: Array
    lam_max: float

    @staticmethod
    def check(A) -> "PsdMatrix":
        A = np.asarray(A, float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionMismatch("matrix must be square")
        if float(np.max(np.abs(A - A.T))) > 1e-12 * (1.0 + float(np.max(np.abs(A)))):
            raise SetupError("matrix is not symmetric within 1e-12")
        ev = np.linalg.eigvalsh(A)
        if float(ev[0]) < -1e-10 * max(1.0, float(ev[-1])):
            raise SetupError("matrix is not positive semidefinite")
        return PsdMatrix(M=A, lam_max=float(ev[-1]))


def generalized_project(y, A, domain: Domain, tol: float = 1e-9,
                        max_iters: int = 100_000, x0=None) -> Array:
    """argmin over the domain of (x - y).A(x - y) for symmetric PSD A.

    Projected gradient descent along A(x - y) with step 1/lam_max(A) (the
    gradient of the half-scaled objective, so every eigendirection contracts).
    Stops when the objective decrease falls below tol * 1e-2.  x0, when given,
    must be a domain point and is used as the warm start.
    """
    y = np.asarray(y, float)
    if y.shape != (domain_dim(domain),):
        raise DimensionMismatch("point has wrong dimension for domain")
    psd = PsdMatrix.check(A)
    if psd.M.shape[0] != y.shape[0]:
        raise DimensionMismatch("matrix and point dimensions differ")
    if domain_contains(domain, y):
        return y.copy()
    # scalar multiples of I reduce to the Euclidean projection exactly
    diag = np.diagonal(psd.M)
    if np.allclose(psd.M, np.diag(diag)) and np.ptp(diag) <= ZERO_TOL * (1.0 + abs(float(diag[0]))):
        return project_domain(domain, y)
    if psd.lam_max <= ZERO_TOL:
        return project_domain(domain, y)

    def obj(x):
        d = x - y
        return float(d @ (psd.M @ d))

    x = project_domain(domain, y) if x0 is None else np.asarray(x0, float)
    fx = obj(x)
    step = 1.0 / psd.lam_max
    stop = tol * 1e-2
    for _ in range(max_iters):
        g = psd.M @ (x - y)
        x_new = project_domain(domain, x - step * g)
        f_new = obj(x_new)
        if fx - f_new < stop:
            return x_new if f_new <= fx else x
        x, fx = x_new, f_new
    raise ConvergenceError(
        f"generalized projection did not converge within {max_iters} iterations"
    )
