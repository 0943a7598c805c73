"""Scikit-learn style front end for spectral TT surrogates.

``SpectralTTRegressor`` wraps the functional constructors with the familiar
``fit``/``predict``/``get_params`` surface so surrogates compose with
scikit-learn tooling. ``fit`` takes the black-box function itself (an (m, d)
array of points mapped to m values) rather than a data matrix.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np
from sklearn.base import BaseEstimator

from . import quadrature as quad
from . import stt
from .cross import CrossConfig
from .exceptions import ConfigurationError, InvalidInputError


def parallel_eval(f, jobs):
    """Split each point batch across ``jobs`` threads; order is preserved."""
    if jobs <= 1:
        return f

    def wrapped(X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[0] < 2 * jobs:
            return np.asarray(f(X), dtype=float).reshape(-1)
        chunks = np.array_split(X, jobs)
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda c: np.asarray(f(c), dtype=float).reshape(-1), chunks))
        return np.concatenate(parts)

    return wrapped


class SpectralTTRegressor(BaseEstimator):
    """Black-box surrogate builder with a scikit-learn parameter surface.

    Parameters mirror the functional API: ``mode`` selects projection onto
    orthonormal polynomials or hat/Lagrange interpolation, ``degree`` the
    per-dimension polynomial degree (grid size minus one in the
    interpolation modes), ``domains`` the per-dimension intervals (``None``
    entries mean a standard-normal dimension in projection mode).
    """

    def __init__(self, mode="projection", degree=7, domains=None, eps=1e-10,
                 seed=0, max_sweeps=25, rank_cap=200, jobs=1):
        self.mode = mode
        self.degree = degree
        self.domains = domains
        self.eps = eps
        self.seed = seed
        self.max_sweeps = max_sweeps
        self.rank_cap = rank_cap
        self.jobs = jobs

    def _config(self):
        return CrossConfig(eps=self.eps, seed=self.seed, max_sweeps=self.max_sweeps,
                           rank_cap=self.rank_cap)

    def fit(self, f, d=None):
        """Build the surrogate for the black-box ``f``.

        ``d`` is required when ``domains`` is not given (defaults then to the
        unit cube).
        """
        if not callable(f):
            raise InvalidInputError("fit expects a callable black box")
        domains = self.domains
        if domains is None:
            if d is None:
                raise ConfigurationError("pass domains or the dimension d")
            domains = [(0.0, 1.0)] * int(d)
        cfg = self._config()
        fp = parallel_eval(f, self.jobs)
        if self.mode == "projection":
            families = [quad.HERMITE if dom is None else quad.LEGENDRE for dom in domains]
            self.surrogate_ = stt.ftt_projection_construct(
                fp, domains, self.degree, cfg, families=families)
        elif self.mode in ("lagrange", "linear"):
            if any(dom is None for dom in domains):
                raise ConfigurationError("interpolation modes need bounded domains")
            n = int(self.degree) + 1
            if self.mode == "lagrange":
                rules = [quad.gauss_rule(quad.LEGENDRE, n, dom) for dom in domains]
                self.surrogate_ = stt.ftt_interpolation_construct(
                    fp, [r.nodes for r in rules], domains, cfg, mode=stt.LAGRANGE,
                    weights=[r.weights for r in rules])
            else:
                nodes = [np.linspace(a, b, n) for a, b in domains]
                self.surrogate_ = stt.ftt_interpolation_construct(
                    fp, nodes, domains, cfg, mode=stt.LINEAR)
        else:
            raise ConfigurationError(f"unknown mode {self.mode!r}")
        self.eval_count_ = self.surrogate_.metadata["eval_count"]
        self.ranks_ = self.surrogate_.ranks
        return self

    def predict(self, X):
        if not hasattr(self, "surrogate_"):
            raise InvalidInputError("regressor is not fitted")
        return self.surrogate_(X)
