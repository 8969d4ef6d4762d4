"""Closed convex feasible sets.

Every set knows its ambient dimension, can test membership, project
Euclidean-ly onto itself and draw random feasible points (used by the
certification samplers).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError

FEAS_TOL = 1e-12


def as_vector(x, dim=None, name="x"):
    """Return `x` as a finite 1-D float64 array, checking `dim` if given."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionError(f"{name} has dim {arr.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


class FeasibleSet:
    dim: int

    def contains(self, x, tol=FEAS_TOL):
        raise NotImplementedError

    def project(self, x):
        raise NotImplementedError

    def sample(self, rng, size):
        """Draw `size` feasible points as a ``(size, dim)`` array."""
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class EuclideanBall(FeasibleSet):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center, name="center"))
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def dim(self):
        return self.center.shape[0]

    def contains(self, x, tol=FEAS_TOL):
        x = np.asarray(x, dtype=float)
        return x.shape == (self.dim,) and np.linalg.norm(x - self.center) <= self.radius + tol

    def project(self, x):
        u = np.asarray(x, dtype=float) - self.center
        nrm = np.linalg.norm(u)
        if nrm <= self.radius:
            return self.center + u
        return self.center + u * (self.radius / nrm)

    def sample(self, rng, size):
        u = rng.standard_normal((size, self.dim))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        r = self.radius * rng.random(size) ** (1.0 / self.dim)
        return self.center + u * r[:, None]


@dataclass(frozen=True, eq=False)
class Box(FeasibleSet):
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = as_vector(self.lower, name="lower")
        hi = as_vector(self.upper, dim=lo.shape[0], name="upper")
        if np.any(lo > hi):
            raise ValueError("box requires lower <= upper componentwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def cube(cls, dim, half_width=1.0):
        return cls(-half_width * np.ones(dim), half_width * np.ones(dim))

    @property
    def dim(self):
        return self.lower.shape[0]

    def contains(self, x, tol=FEAS_TOL):
        x = np.asarray(x, dtype=float)
        return (x.shape == (self.dim,) and bool(np.all(x >= self.lower - tol))
                and bool(np.all(x <= self.upper + tol)))

    def project(self, x):
        return np.clip(np.asarray(x, dtype=float), self.lower, self.upper)

    def sample(self, rng, size):
        return self.lower + (self.upper - self.lower) * rng.random((size, self.dim))


def project_simplex(v):
    """Euclidean projection onto the probability simplex (sort based)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u) - 1.0
    ind = np.arange(1, v.shape[0] + 1)
    rho = np.count_nonzero(u - cssv / ind > 0)
    theta = cssv[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


@dataclass(frozen=True, eq=False)
class Simplex(FeasibleSet):
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("simplex dimension must be positive")

    def contains(self, x, tol=FEAS_TOL):
        x = np.asarray(x, dtype=float)
        return (x.shape == (self.dim,) and bool(np.all(x >= -tol))
                and abs(x.sum() - 1.0) <= tol * max(1, self.dim))

    def project(self, x):
        return project_simplex(x)

    def sample(self, rng, size):
        return rng.dirichlet(np.ones(self.dim), size=size)


@dataclass(frozen=True, eq=False)
class Product(FeasibleSet):
    blocks: tuple = field(default_factory=tuple)

    def __post_init__(self):
        blocks = tuple(self.blocks)
        if not blocks:
            raise ValueError("product needs at least one block")
        object.__setattr__(self, "blocks", blocks)

    @property
    def dim(self):
        return sum(b.dim for b in self.blocks)

    @property
    def offsets(self):
        return np.cumsum([0] + [b.dim for b in self.blocks])

    def split(self, x):
        """Split a point (or a batch along the last axis) into block parts."""
        x = np.asarray(x, dtype=float)
        off = self.offsets
        return [x[..., off[i]:off[i + 1]] for i in range(len(self.blocks))]

    def contains(self, x, tol=FEAS_TOL):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            return False
        return all(b.contains(p, tol) for b, p in zip(self.blocks, self.split(x)))

    def project(self, x):
        return np.concatenate([b.project(p) for b, p in zip(self.blocks, self.split(x))])

    def sample(self, rng, size):
        return np.concatenate([b.sample(rng, size) for b in self.blocks], axis=1)
