"""Dense grids over low-dimensional domains, for brute-force oracles."""

from __future__ import annotations

import numpy as np

from .core import Array, Ball, Box, Domain, SetupError, Simplex, domain_dim

# Grids beyond this many points refuse to materialize.
MAX_GRID_POINTS = 20_000_000


def domain_grid(domain: Domain, resolution: float) -> Array:
    """All domain points on a grid of the given coordinate spacing.

    Simplex grids enumerate lattice points with coordinates summing to 1;
    box and ball grids mesh the bounding box and keep members.  Only meant
    for n <= 3 (the size guard trips far earlier than memory does).
    """
    if not 0 < resolution <= 1:
        raise SetupError("resolution must lie in (0, 1]")
    n = domain_dim(domain)
    if n > 3:
        raise SetupError("grids are only supported for n <= 3")
    if isinstance(domain, Simplex):
        k = int(round(1.0 / resolution))
        if (k + 1) ** max(n - 1, 1) > MAX_GRID_POINTS:
            raise SetupError("grid too large; use a coarser resolution")
        if n == 1:
            return np.ones((1, 1))
        t = np.arange(k + 1) / k
        if n == 2:
            return np.column_stack([t, 1.0 - t])
        a, b = np.meshgrid(t, t, indexing="ij")
        a, b = a.ravel(), b.ravel()
        keep = a + b <= 1.0 + 1e-12
        a, b = a[keep], b[keep]
        return np.column_stack([a, b, np.maximum(1.0 - a - b, 0.0)])
    if isinstance(domain, Ball):
        lo = domain.center - domain.radius
        hi = domain.center + domain.radius
    else:
        lo, hi = domain.lo, domain.hi
    axes = []
    total = 1
    for i in range(n):
        steps = max(int(np.ceil((hi[i] - lo[i]) / resolution)), 1)
        total *= steps + 1
        if total > MAX_GRID_POINTS:
            raise SetupError("grid too large; use a coarser resolution")
        axes.append(np.linspace(lo[i], hi[i], steps + 1))
    mesh = np.meshgrid(*axes, indexing="ij")
    X = np.column_stack([m.ravel() for m in mesh])
    if isinstance(domain, Ball):
        keep = np.linalg.norm(X - domain.center, axis=1) <= domain.radius + 1e-12
        X = X[keep]
    return X


def sample_domain(domain: Domain, count: int, seed: int | None = None) -> Array:
    """count points drawn uniformly-ish from the domain, any dimension."""
    if count < 1:
        raise SetupError("count must be >= 1")
    rng = np.random.default_rng(seed)
    n = domain_dim(domain)
    if isinstance(domain, Simplex):
        return rng.dirichlet(np.ones(n), size=count)
    if isinstance(domain, Box):
        return rng.uniform(domain.lo, domain.hi, size=(count, n))
    z = rng.standard_normal((count, n))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    r = domain.radius * rng.uniform(0.0, 1.0, size=(count, 1)) ** (1.0 / n)
    return domain.center + r * z
