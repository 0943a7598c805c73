"""Spectral tensor-train surrogates.

Construction samples the quadrature-weighted value tensor with DMRG cross,
removes the weighting from the cores, and either projects each core onto an
orthonormal polynomial basis (projection mode) or keeps the value cores for
interpolation (Lagrange / piecewise-linear modes). Evaluation applies
one-dimensional basis or interpolation matrices to the cores and contracts
the diagonal of the resulting train.
"""

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from . import quadrature as quad
from .cross import CrossConfig, EvalLedger, cross_on_quantics
from .exceptions import ConfigurationError, FormatError, InvalidInputError

MAGIC = b"STT1"
FORMAT_VERSION = 1

PROJECTION = "projection"
LAGRANGE = "lagrange-interp"
LINEAR = "linear-interp"


@dataclass
class GridSpec:
    """Tensor-product grid: per-dimension nodes, optional weights, domains."""

    nodes: list
    weights: list | None
    domains: list

    def __post_init__(self):
        self.nodes = [np.asarray(x, dtype=float) for x in self.nodes]
        if self.weights is not None:
            self.weights = [np.asarray(w, dtype=float) for w in self.weights]
            for x, w in zip(self.nodes, self.weights):
                if x.shape != w.shape:
                    raise InvalidInputError("node/weight length mismatch")
                if np.any(w <= 0):
                    raise ConfigurationError("quadrature weights must be positive")

    @property
    def shape(self):
        return tuple(x.size for x in self.nodes)

    @property
    def ndim(self):
        return len(self.nodes)


@dataclass
class Surrogate:
    """Evaluable spectral TT approximation of a multivariate function."""

    mode: str
    basis: list
    cores: list
    nodes: list | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def ndim(self):
        return len(self.cores)

    @property
    def ranks(self):
        return tuple([1] + [c.shape[2] for c in self.cores])

    @property
    def max_rank(self):
        return max(self.ranks)

    @property
    def domains(self):
        return [spec.domain for spec in self.basis]

    def __call__(self, points):
        if self.mode == PROJECTION:
            return ftt_projection_eval(self, points)
        return ftt_interpolation_eval(self, points)


def weighted_eval_fn(f, grid):
    """Index callback returning f(x) * sqrt(prod of per-dimension weights)."""
    if grid.weights is None:
        raise ConfigurationError("weighted evaluation requires quadrature weights")
    sqrt_w = [np.sqrt(w) for w in grid.weights]

    def callback(indices):
        indices = np.asarray(indices, dtype=np.int64)
        pts = np.column_stack([x[indices[:, k]] for k, x in enumerate(grid.nodes)])
        factor = np.ones(indices.shape[0])
        for k, sw in enumerate(sqrt_w):
            factor *= sw[indices[:, k]]
        return np.asarray(f(pts), dtype=float).reshape(-1) * factor

    return callback


def plain_eval_fn(f, grid):
    """Index callback returning raw f values on the grid."""

    def callback(indices):
        indices = np.asarray(indices, dtype=np.int64)
        pts = np.column_stack([x[indices[:, k]] for k, x in enumerate(grid.nodes)])
        return np.asarray(f(pts), dtype=float).reshape(-1)

    return callback


def _unweight_cores(cores, weights):
    out = []
    for c, w in zip(cores, weights):
        out.append(c / np.sqrt(w)[None, :, None])
    return out


def _build_value_cores(f, grid, cfg, weighted, ledger):
    """Sample the (optionally weighted) grid tensor with DMRG cross."""
    if ledger is None:
        ledger = EvalLedger()
    if grid.ndim == 1:
        # Degenerate 1-D case: evaluate the full vector, no cross needed.
        cb = plain_eval_fn(f, grid)
        idx = np.arange(grid.shape[0], dtype=np.int64)[:, None]
        vals = ledger.evaluate(cb, idx)
        return [vals.reshape(1, -1, 1)], ledger
    cb = weighted_eval_fn(f, grid) if weighted else plain_eval_fn(f, grid)
    t = cross_on_quantics(grid.shape, cb, cfg, ledger)
    cores = t.cores
    if weighted:
        cores = _unweight_cores(cores, grid.weights)
    return cores, ledger


def _diag_contract(hat_cores):
    """Diagonal of the evaluated train: one value per evaluation point."""
    cur = hat_cores[0][0]  # (m, r1)
    for c in hat_cores[1:]:
        cur = np.einsum("ia,aib->ib", cur, c, optimize=True)
    return cur[:, 0]


def _check_points(points, d):
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[None, :]
    if points.ndim != 2 or points.shape[1] != d:
        raise InvalidInputError(f"points must be an (m, {d}) array")
    return points


def ftt_projection_construct(f, domains, degrees, cfg=None, families=None, ledger=None):
    """Build a pseudospectral TT surrogate on Gauss grids of size degree+1.

    ``f`` maps an (m, d) point array to m values. ``families`` defaults to the
    uniform (Legendre) measure per dimension; pass ``quad.HERMITE`` entries for
    standard-normal dimensions (their domain entries are ignored).
    """
    cfg = cfg or CrossConfig()
    d = len(domains)
    if np.isscalar(degrees):
        degrees = [int(degrees)] * d
    if len(degrees) != d:
        raise ConfigurationError("degrees/domains length mismatch")
    if families is None:
        families = [quad.LEGENDRE] * d
    rules = []
    for fam, dom, N in zip(families, domains, degrees):
        dom = quad.REAL_LINE if fam == quad.HERMITE else tuple(dom)
        rules.append(quad.gauss_rule(fam, int(N) + 1, None if fam == quad.HERMITE else dom))
    grid = GridSpec(
        nodes=[r.nodes for r in rules],
        weights=[r.weights for r in rules],
        domains=[r.domain for r in rules],
    )
    cores, ledger = _build_value_cores(f, grid, cfg, weighted=True, ledger=ledger)
    basis = []
    coeff_cores = []
    for k, (rule, N) in enumerate(zip(rules, degrees)):
        spec = quad.BasisSpec(
            kind="orthonormal-poly", family=rule.family, degree=int(N), domain=rule.domain
        )
        Phi = quad.eval_basis(spec, rule.nodes)  # (N+1 nodes, N+1 funcs)
        coeff_cores.append(
            np.einsum("ajb,ji->aib", cores[k], Phi * rule.weights[:, None], optimize=True)
        )
        basis.append(spec)
    meta = {"eps": cfg.eps, "seed": cfg.seed, "eval_count": ledger.eval_count}
    return Surrogate(PROJECTION, basis, coeff_cores, nodes=None, metadata=meta)


def ftt_projection_eval(s, points):
    """Evaluate a projection surrogate at arbitrary points (Algorithm-2 style)."""
    if s.mode != PROJECTION:
        raise ConfigurationError("surrogate is not in projection mode")
    points = _check_points(points, s.ndim)
    hat = []
    for k, spec in enumerate(s.basis):
        Phi = quad.eval_basis(spec, points[:, k])  # (m, N+1)
        hat.append(np.einsum("ajb,ij->aib", s.cores[k], Phi, optimize=True))
    return _diag_contract(hat)


def ftt_interpolation_construct(f, nodes, domains, cfg=None, mode=LINEAR, weights=None, ledger=None):
    """Build an interpolation surrogate on a given tensor grid of nodes.

    Linear mode on equispaced nodes under the uniform measure skips the
    quadrature weighting (the weighted tensor is proportional to the values);
    otherwise values are sampled through the sqrt-weighted tensor and
    unweighted afterwards.
    """
    cfg = cfg or CrossConfig()
    if mode not in (LINEAR, LAGRANGE):
        raise ConfigurationError(f"unknown interpolation mode {mode!r}")
    nodes = [np.asarray(x, dtype=float) for x in nodes]
    for x in nodes:
        if np.unique(x).size != x.size:
            raise InvalidInputError("interpolation nodes must be distinct")
        if mode == LINEAR and np.any(np.diff(x) <= 0):
            raise InvalidInputError("linear mode requires ascending nodes")
    if weights is None and mode == LINEAR:
        equispaced = all(
            x.size >= 2 and np.allclose(np.diff(x), np.diff(x)[0], rtol=1e-10) for x in nodes
        )
        weighted = not equispaced
        weights = None if equispaced else [quad.trapezoid_rule(x.size, (x[0], x[-1])).weights for x in nodes]
    else:
        weighted = weights is not None
    grid = GridSpec(nodes=nodes, weights=weights, domains=list(domains))
    cores, ledger = _build_value_cores(f, grid, cfg, weighted=weighted, ledger=ledger)
    kind = "hat" if mode == LINEAR else "lagrange"
    basis = [
        quad.BasisSpec(kind=kind, family=quad.LEGENDRE, degree=x.size - 1, domain=tuple(dom), nodes=x)
        for x, dom in zip(nodes, domains)
    ]
    meta = {"eps": cfg.eps, "seed": cfg.seed, "eval_count": ledger.eval_count}
    return Surrogate(mode, basis, cores, nodes=nodes, metadata=meta)


def ftt_interpolation_eval(s, points):
    """Evaluate an interpolation surrogate (Algorithm-3 style)."""
    if s.mode not in (LINEAR, LAGRANGE):
        raise ConfigurationError("surrogate is not in interpolation mode")
    points = _check_points(points, s.ndim)
    hat = []
    for k, spec in enumerate(s.basis):
        L = quad.eval_basis(spec, points[:, k])  # (m, n_k)
        hat.append(np.einsum("ajb,ij->aib", s.cores[k], L, optimize=True))
    return _diag_contract(hat)


# ---------------------------------------------------------------------------
# Persistence: magic "STT1", u64 header length, JSON header, then each core as
# three u64 shape fields followed by little-endian float64 payload.
# ---------------------------------------------------------------------------


def _basis_to_dict(spec):
    out = {
        "kind": spec.kind,
        "family": spec.family,
        "degree": spec.degree,
        "domain": [None if not np.isfinite(v) else v for v in spec.domain],
    }
    if spec.nodes is not None:
        out["nodes"] = list(map(float, spec.nodes))
    return out


def _basis_from_dict(d):
    domain = tuple(-np.inf if v is None and i == 0 else np.inf if v is None else v
                   for i, v in enumerate(d["domain"]))
    nodes = np.asarray(d["nodes"], dtype=float) if "nodes" in d else None
    return quad.BasisSpec(kind=d["kind"], family=d["family"], degree=int(d["degree"]),
                          domain=domain, nodes=nodes)


def save_surrogate(s, sink):
    """Write a surrogate to a binary file path or file-like object."""
    header = {
        "version": FORMAT_VERSION,
        "d": s.ndim,
        "mode": s.mode,
        "shapes": [list(c.shape) for c in s.cores],
        "ranks": list(s.ranks),
        "basis": [_basis_to_dict(b) for b in s.basis],
        "has_nodes": s.nodes is not None,
        "metadata": s.metadata,
    }
    blob = json.dumps(header).encode("utf-8")
    own = isinstance(sink, (str, bytes))
    fh = open(sink, "wb") if own else sink
    try:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for c in s.cores:
            fh.write(struct.pack("<QQQ", *c.shape))
            fh.write(np.ascontiguousarray(c, dtype="<f8").tobytes())
    finally:
        if own:
            fh.close()


def _read_exact(fh, n):
    data = fh.read(n)
    if len(data) != n:
        raise FormatError("truncated surrogate file")
    return data


def load_surrogate(source):
    """Read a surrogate written by :func:`save_surrogate`."""
    own = isinstance(source, (str, bytes))
    fh = open(source, "rb") if own else source
    try:
        if _read_exact(fh, 4) != MAGIC:
            raise FormatError("not a surrogate file (bad magic)")
        (hlen,) = struct.unpack("<Q", _read_exact(fh, 8))
        try:
            header = json.loads(_read_exact(fh, hlen).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise FormatError("corrupt surrogate header") from exc
        if header.get("version") != FORMAT_VERSION:
            raise FormatError(
                f"unsupported surrogate format version {header.get('version')!r}; "
                f"this reader handles version {FORMAT_VERSION}"
            )
        cores = []
        for expect in header["shapes"]:
            shape = struct.unpack("<QQQ", _read_exact(fh, 24))
            if list(shape) != list(expect):
                raise FormatError("core shape mismatch between header and payload")
            n = int(np.prod(shape))
            payload = _read_exact(fh, 8 * n)
            cores.append(np.frombuffer(payload, dtype="<f8").reshape(shape).copy())
        basis = [_basis_from_dict(b) for b in header["basis"]]
        nodes = [b.nodes for b in basis] if header.get("has_nodes") else None
        return Surrogate(header["mode"], basis, cores, nodes=nodes,
                         metadata=header.get("metadata", {}))
    finally:
        if own:
            fh.close()
