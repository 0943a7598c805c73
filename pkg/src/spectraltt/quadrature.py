"""One-dimensional quadrature rules, orthonormal bases and interpolation matrices.

All measures are normalized probability measures: the uniform density
``1/(b-a)`` on a bounded interval and the standard normal on the real line.
Quadrature weights therefore sum to one.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .exceptions import ConfigurationError, DomainError, InvalidInputError

LEGENDRE = "legendre-uniform"
HERMITE = "hermite-gaussian"
TRAPEZOID = "newton-cotes-trapezoid"

REAL_LINE = (-np.inf, np.inf)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights of a 1-D rule for a normalized probability measure."""

    family: str
    nodes: np.ndarray
    weights: np.ndarray
    domain: tuple

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1:
            raise InvalidInputError("nodes and weights must be matching vectors")
        if np.any(np.diff(self.nodes) <= 0):
            raise InvalidInputError("nodes must be strictly ascending")
        if np.any(self.weights <= 0):
            raise InvalidInputError("weights must be strictly positive")
        if abs(self.weights.sum() - 1.0) > 1e-13:
            raise InvalidInputError("weights must sum to one")

    @property
    def size(self):
        return self.nodes.size


@dataclass(frozen=True)
class BasisSpec:
    """Per-dimension basis: orthonormal polynomials, hat functions or Lagrange."""

    kind: str  # "orthonormal-poly" | "hat" | "lagrange"
    family: str
    degree: int
    domain: tuple
    nodes: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.degree < 0:
            raise InvalidInputError("degree must be nonnegative")
        if self.kind in ("hat", "lagrange"):
            if self.nodes is None:
                raise ConfigurationError(f"{self.kind} basis requires explicit nodes")
            object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=float))
        elif self.kind != "orthonormal-poly":
            raise ConfigurationError(f"unknown basis kind {self.kind!r}")

    @property
    def size(self):
        if self.nodes is not None:
            return self.nodes.size
        return self.degree + 1


def _recurrence(family, n):
    """Jacobi-matrix recurrence coefficients (alpha, sqrt(beta)) for n nodes."""
    k = np.arange(1, n)
    if family == LEGENDRE:
        # Monic Legendre on [-1,1], uniform probability measure.
        beta = k**2 / (4.0 * k**2 - 1.0)
    elif family == HERMITE:
        # Probabilists' Hermite, standard normal.
        beta = k.astype(float)
    else:
        raise ConfigurationError(f"unsupported Gauss family {family!r}")
    return np.zeros(n), np.sqrt(beta)


def gauss_rule(family, n, domain=None):
    """n-point Gauss rule for the normalized measure (Golub-Welsch)."""
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    alpha, sqrt_beta = _recurrence(family, n)
    nodes, first = linalg.symtridiag_eig(alpha, sqrt_beta)
    weights = first**2
    weights /= weights.sum()
    if family == HERMITE:
        if domain not in (None, REAL_LINE):
            raise ConfigurationError("hermite rules live on the real line")
        if n % 2 == 1:  # enforce exact symmetry
            nodes[n // 2] = 0.0
        return QuadratureRule(HERMITE, nodes, weights, REAL_LINE)
    a, b = domain if domain is not None else (-1.0, 1.0)
    mapped = a + (b - a) * (nodes + 1.0) / 2.0
    return QuadratureRule(LEGENDRE, mapped, weights, (a, b))


def trapezoid_rule(n, domain=(0.0, 1.0)):
    """Equispaced composite trapezoid rule with normalized weights."""
    if n < 2:
        raise InvalidInputError("trapezoid rule needs n >= 2")
    a, b = domain
    nodes = np.linspace(a, b, n)
    weights = np.ones(n)
    weights[0] = weights[-1] = 0.5
    weights /= weights.sum()
    return QuadratureRule(TRAPEZOID, nodes, weights, (a, b))


def _to_reference(points, domain):
    a, b = domain
    return 2.0 * (points - a) / (b - a) - 1.0


def orthonormal_poly_matrix(family, degree, points, domain=None):
    """Matrix phi[i, j] = phi_j(points[i]) for the orthonormal family."""
    points = np.asarray(points, dtype=float)
    if family == LEGENDRE:
        a, b = domain if domain is not None else (-1.0, 1.0)
        if np.any(points < a - 1e-12) or np.any(points > b + 1e-12):
            raise DomainError("point outside the bounded domain")
        x = _to_reference(points, (a, b))
    elif family == HERMITE:
        x = points
    else:
        raise ConfigurationError(f"unsupported polynomial family {family!r}")
    _, sqrt_beta = _recurrence(family, degree + 1) if degree > 0 else (None, np.empty(0))
    out = np.empty((points.size, degree + 1))
    out[:, 0] = 1.0
    if degree >= 1:
        out[:, 1] = x / sqrt_beta[0]
    for j in range(2, degree + 1):
        out[:, j] = (x * out[:, j - 1] - sqrt_beta[j - 2] * out[:, j - 2]) / sqrt_beta[j - 1]
    return out


def lagrange_matrix(src_nodes, targets):
    """Barycentric Lagrange interpolation matrix from src_nodes to targets."""
    src = np.asarray(src_nodes, dtype=float)
    tgt = np.asarray(targets, dtype=float)
    if src.ndim != 1 or np.unique(src).size != src.size:
        raise InvalidInputError("source nodes must be distinct")
    diff = src[:, None] - src[None, :]
    np.fill_diagonal(diff, 1.0)
    # Scale-invariant barycentric weights.
    scale = 4.0 / (src.max() - src.min()) if src.size > 1 else 1.0
    bary = 1.0 / np.prod(diff * scale, axis=1)
    d = tgt[:, None] - src[None, :]
    exact_i, exact_j = np.nonzero(d == 0.0)
    d[exact_i, :] = 1.0  # avoid division by zero; rows fixed below
    M = (bary[None, :] / d)
    M /= M.sum(axis=1, keepdims=True)
    for i, j in zip(exact_i, exact_j):
        M[i, :] = 0.0
        M[i, j] = 1.0
    return M


def hat_matrix(src_nodes, targets):
    """Piecewise-linear (hat function) interpolation matrix."""
    src = np.asarray(src_nodes, dtype=float)
    tgt = np.asarray(targets, dtype=float)
    if src.ndim != 1 or src.size < 2 or np.any(np.diff(src) <= 0):
        raise InvalidInputError("source nodes must be ascending and distinct")
    if np.any(tgt < src[0] - 1e-12) or np.any(tgt > src[-1] + 1e-12):
        raise DomainError("target outside the convex hull of the nodes")
    tgt = np.clip(tgt, src[0], src[-1])
    cell = np.clip(np.searchsorted(src, tgt, side="right") - 1, 0, src.size - 2)
    t = (tgt - src[cell]) / (src[cell + 1] - src[cell])
    M = np.zeros((tgt.size, src.size))
    rows = np.arange(tgt.size)
    M[rows, cell] = 1.0 - t
    M[rows, cell + 1] += t
    return M


def eval_basis(spec, points):
    """Evaluate every basis function of ``spec`` at ``points``."""
    if spec.kind == "orthonormal-poly":
        return orthonormal_poly_matrix(spec.family, spec.degree, points, spec.domain)
    if spec.kind == "lagrange":
        return lagrange_matrix(spec.nodes, points)
    if spec.kind == "hat":
        return hat_matrix(spec.nodes, points)
    raise ConfigurationError(f"unknown basis kind {spec.kind!r}")
