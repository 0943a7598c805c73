"""Benchmark function families and error metrics.

Includes the six classic product-domain test families with their standard
normalization table, two Fourier-spectrum probes for rank/ordering studies, a
localized Gaussian bump, a Monte-Carlo relative L2 error estimator, and a
small stochastic-diffusion example (squared-exponential random field via
Karhunen-Loeve, 5-point finite-difference Poisson solve).
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from . import quadrature as quad
from .exceptions import ConfigurationError, InvalidInputError, NumericalFailureError

GENZ_FAMILIES = (
    "oscillatory",
    "product-peak",
    "corner-peak",
    "gaussian",
    "continuous",
    "discontinuous",
)
# Standard per-family normalization constants (difficulty b, dimension scaling h).
GENZ_B = dict(zip(GENZ_FAMILIES, (284.6, 725.0, 185.0, 70.3, 2040.0, 430.0)))
GENZ_H = dict(zip(GENZ_FAMILIES, (1.5, 2.0, 2.0, 1.0, 2.0, 2.0)))


@dataclass
class GenzSpec:
    """Parameter set for one test function on [0,1]^d."""

    family: str
    d: int
    c: np.ndarray
    w: np.ndarray
    modified: bool = False

    def __post_init__(self):
        if self.family not in GENZ_FAMILIES:
            raise ConfigurationError(f"unknown family {self.family!r}")
        self.c = np.asarray(self.c, dtype=float)
        self.w = np.asarray(self.w, dtype=float)
        if self.c.shape != (self.d,) or self.w.shape != (self.d,):
            raise InvalidInputError("c and w must have length d")


def genz_make(spec):
    """Vectorized evaluator for a test-function parameter set."""
    c, w = spec.c, spec.w

    def f(X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if spec.family == "oscillatory":
            return np.cos(2.0 * np.pi * w[0] + X @ c)
        if spec.family == "product-peak":
            return np.prod(1.0 / (c**-2 + (X + w) ** 2), axis=1)
        if spec.family == "corner-peak":
            return (1.0 + X @ c) ** (-(spec.d + 1))
        if spec.family == "gaussian":
            return np.exp(-np.sum(c**2 * (X - w) ** 2, axis=1))
        if spec.family == "continuous":
            return np.exp(-np.sum(c**2 * np.abs(X - w), axis=1))
        # discontinuous: zero past the cutoff in the first two coordinates
        vals = np.exp(X @ c)
        dead = X[:, 0] > w[0]
        if spec.d >= 2:
            dead |= X[:, 1] > w[1]
        vals[dead] = 0.0
        return vals

    return f


def genz_sample(family, d, modified=False, seed=0):
    """Draw a reproducible parameter set; classic mode rescales c so that
    d^h * ||c||_1 equals the family constant b."""
    rng = np.random.default_rng(seed)
    c = rng.uniform(0.0, 1.0, size=d)
    w = rng.uniform(0.0, 1.0, size=d)
    if not modified:
        c *= GENZ_B[family] / (d ** GENZ_H[family] * np.sum(c))
    return GenzSpec(family=family, d=d, c=c, w=w, modified=modified)


def fourier_probe(kind, d, J, degrees, Sigma=None):
    """Functions on [-1,1]^d probing Fourier-coefficient decay patterns.

    ``f1`` is a single product of high-degree orthonormal Legendre modes
    (rank one); ``f2`` sums all modes up to ``degrees`` in the dimensions
    ``J`` with Gaussian weights exp(-i^T Sigma i), constant elsewhere.
    """
    J = list(J)
    c = len(J)
    if any(j < 0 or j >= d for j in J) or len(set(J)) != c:
        raise InvalidInputError("J must be distinct dimension indices in range")
    if np.isscalar(degrees):
        degrees = [int(degrees)] * c
    if len(degrees) != c:
        raise InvalidInputError("degrees must match the active dimensions J")
    dom = (-1.0, 1.0)

    if kind == "f1":
        def f(X):
            X = np.atleast_2d(np.asarray(X, dtype=float))
            out = np.ones(X.shape[0])
            for j, l in zip(J, degrees):
                out *= quad.orthonormal_poly_matrix(quad.LEGENDRE, l, X[:, j], dom)[:, l]
            return out

        return f

    if kind != "f2":
        raise ConfigurationError(f"unknown probe kind {kind!r}")
    Sigma = np.asarray(Sigma, dtype=float)
    if Sigma.shape != (c, c) or not np.allclose(Sigma, Sigma.T):
        raise InvalidInputError("Sigma must be a symmetric c-by-c matrix")
    grids = np.meshgrid(*[np.arange(n + 1) for n in degrees], indexing="ij")
    idx = np.stack([g.ravel() for g in grids], axis=1)  # (#modes, c)
    coef = np.exp(-np.einsum("ta,ab,tb->t", idx, Sigma, idx))

    def f(X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        prod = np.tile(coef, (X.shape[0], 1))  # (m, #modes)
        for k, (j, n) in enumerate(zip(J, degrees)):
            Phi = quad.orthonormal_poly_matrix(quad.LEGENDRE, n, X[:, j], dom)
            prod *= Phi[:, idx[:, k]]
        return prod.sum(axis=1)

    return f


def bump(d, x0, l):
    """Gaussian bump exp(-|x - x0|^2 / (2 l^2))."""
    if l <= 0:
        raise InvalidInputError("l must be positive")
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), (d,))

    def f(X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.exp(-np.sum((X - x0) ** 2, axis=1) / (2.0 * l**2))

    return f


def rel_l2_error(f, surrogate, n_samples=10000, seed=0, domains=None):
    """Monte-Carlo relative L2 error ||f - s|| / ||f|| with a standard error.

    Both norms share one sample set drawn from the build measure: uniform on
    each bounded domain, standard normal on unbounded ones. Returns
    ``(error, standard_error)``.
    """
    if n_samples < 100:
        raise InvalidInputError("n_samples must be >= 100")
    domains = domains if domains is not None else surrogate.domains
    rng = np.random.default_rng(seed)
    cols = []
    for a, b in domains:
        if np.isfinite(a) and np.isfinite(b):
            cols.append(rng.uniform(a, b, size=n_samples))
        else:
            cols.append(rng.standard_normal(n_samples))
    X = np.column_stack(cols)
    fv = np.asarray(f(X), dtype=float).reshape(-1)
    sv = np.asarray(surrogate(X), dtype=float).reshape(-1)
    num = (fv - sv) ** 2
    den = fv**2
    B = den.mean()
    if B <= 0.0:
        raise InvalidInputError("reference function is zero on the sample set")
    A = num.mean()
    err = np.sqrt(A / B)
    # Delta method for the ratio-of-means, then for the square root.
    cov = np.cov(num, den) / n_samples
    var_ratio = (cov[0, 0] - 2 * (A / B) * cov[0, 1] + (A / B) ** 2 * cov[1, 1]) / B**2
    se = 0.5 / err * np.sqrt(max(var_ratio, 0.0)) if err > 0 else np.sqrt(max(var_ratio, 0.0))
    return float(err), float(se)


@dataclass
class KLField:
    """Truncated Karhunen-Loeve representation of a Gaussian random field."""

    sigma2: float
    l: float
    points: np.ndarray  # (M, 2) discretization nodes on the unit square
    weights: np.ndarray  # (M,) quadrature weights
    eigvals: np.ndarray  # (d_kl,) descending positive
    eigvecs: np.ndarray  # (M, d_kl), orthonormal in the weighted inner product
    d_kl: int = field(init=False)

    def __post_init__(self):
        self.d_kl = self.eigvals.size
        self._eigfn_cache = {}

    def covariance(self, P, Q):
        d2 = (P**2).sum(axis=1)[:, None] + (Q**2).sum(axis=1)[None, :] - 2.0 * P @ Q.T
        return self.sigma2 * np.exp(-np.maximum(d2, 0.0) / (2.0 * self.l**2))

    def eigenfunctions(self, P):
        """Nystrom extension of the grid eigenvectors to arbitrary points."""
        P = np.atleast_2d(P)
        wv = self.weights[:, None] * self.eigvecs
        out = np.empty((P.shape[0], self.d_kl))
        step = 1 << 14  # bound the covariance block size
        for lo in range(0, P.shape[0], step):
            out[lo : lo + step] = self.covariance(P[lo : lo + step], self.points) @ wv
        return out / self.eigvals[None, :]

    def realize(self, y, P):
        """Field values sum_i sqrt(lambda_i) chi_i(x) y_i at points P."""
        y = np.asarray(y, dtype=float)
        if y.shape != (self.d_kl,):
            raise InvalidInputError(f"y must have length {self.d_kl}")
        return self.eigenfunctions(P) @ (np.sqrt(self.eigvals) * y)


def kl_build(sigma2, l, grid=32, var_fraction=0.95):
    """Discretize the squared-exponential covariance eigenproblem on the unit
    square (Nystrom with tensorized trapezoid weights) and truncate to the
    smallest eigenvalue count capturing ``var_fraction`` of the variance."""
    n = int(grid)
    if n < 16:
        raise InvalidInputError("grid resolution must be at least 16 per side")
    rule = quad.trapezoid_rule(n, (0.0, 1.0))
    XX, YY = np.meshgrid(rule.nodes, rule.nodes, indexing="ij")
    points = np.column_stack([XX.ravel(), YY.ravel()])
    w = np.outer(rule.weights, rule.weights).ravel()
    d2 = ((points[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)
    C = sigma2 * np.exp(-d2 / (2.0 * l**2))
    sw = np.sqrt(w)
    # Symmetrized Nystrom system: same spectrum as C diag(w).
    B = sw[:, None] * C * sw[None, :]
    vals, vecs = np.linalg.eigh(B)
    vals, vecs = vals[::-1], vecs[:, ::-1]
    if vals[-1] < 0:
        if vals[-1] < -1e-12 * sigma2:
            warnings.warn("indefinite discretized kernel; clipping negative eigenvalues")
        vals = np.clip(vals, 0.0, None)
    cum = np.cumsum(vals)
    d_kl = int(np.searchsorted(cum, var_fraction * sigma2) + 1)
    if d_kl > vals.size:
        raise NumericalFailureError("variance fraction unreachable on this grid")
    chi = vecs[:, :d_kl] / sw[:, None]
    return KLField(sigma2=float(sigma2), l=float(l), points=points, weights=w,
                   eigvals=vals[:d_kl], eigvecs=chi)


def poisson_qoi(y, kl, x0=(0.75, 0.25), mesh=64):
    """Solve -div(kappa grad u) = 1 on the unit square with zero boundary and
    return u at ``x0``; kappa = exp(field realization for coordinates y).

    Second-order 5-point finite differences with harmonic averaging of kappa
    at cell interfaces; bilinear interpolation for the point value.
    """
    m = int(mesh)
    if m < 32:
        raise InvalidInputError("mesh must be at least 32 per side")
    h = 1.0 / m
    if m not in kl._eigfn_cache:
        nodes = np.linspace(0.0, 1.0, m + 1)
        XX, YY = np.meshgrid(nodes, nodes, indexing="ij")
        P = np.column_stack([XX.ravel(), YY.ravel()])
        kl._eigfn_cache[m] = kl.eigenfunctions(P)
    y = np.asarray(y, dtype=float)
    if y.shape != (kl.d_kl,):
        raise InvalidInputError(f"y must have length {kl.d_kl}")
    g = kl._eigfn_cache[m] @ (np.sqrt(kl.eigvals) * y)
    kappa = np.exp(g).reshape(m + 1, m + 1)

    def harm(a, b):
        return 2.0 * a * b / (a + b)

    kE = harm(kappa[:-1, :], kappa[1:, :])  # between (i,j) and (i+1,j)
    kN = harm(kappa[:, :-1], kappa[:, 1:])  # between (i,j) and (i,j+1)

    ni = m - 1  # interior nodes per side
    ii, jj = np.meshgrid(np.arange(1, m), np.arange(1, m), indexing="ij")
    rows = ((ii - 1) * ni + (jj - 1)).ravel()
    cW = kE[ii - 1, jj].ravel() / h**2
    cE = kE[ii, jj].ravel() / h**2
    cS = kN[ii, jj - 1].ravel() / h**2
    cN = kN[ii, jj].ravel() / h**2
    I = [rows]
    Jc = [rows]
    V = [cW + cE + cS + cN]
    for coeff, mask, off in ((cW, ii.ravel() > 1, -ni), (cE, ii.ravel() < m - 1, ni),
                             (cS, jj.ravel() > 1, -1), (cN, jj.ravel() < m - 1, 1)):
        I.append(rows[mask]); Jc.append(rows[mask] + off); V.append(-coeff[mask])
    A = scipy.sparse.csr_matrix(
        (np.concatenate(V), (np.concatenate(I), np.concatenate(Jc))),
        shape=(ni * ni, ni * ni))
    rhs = np.ones(ni * ni)
    u_int = scipy.sparse.linalg.spsolve(A, rhs)
    if not np.all(np.isfinite(u_int)):
        raise NumericalFailureError("sparse solve produced non-finite solution")
    U = np.zeros((m + 1, m + 1))
    U[1:m, 1:m] = u_int.reshape(ni, ni)

    x, yq = float(x0[0]), float(x0[1])
    i = min(int(x / h), m - 1)
    j = min(int(yq / h), m - 1)
    tx = x / h - i
    ty = yq / h - j
    return float((1 - tx) * (1 - ty) * U[i, j] + tx * (1 - ty) * U[i + 1, j]
                 + (1 - tx) * ty * U[i, j + 1] + tx * ty * U[i + 1, j + 1])
