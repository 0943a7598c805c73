"""Discrete tensor-train container, TT-SVD, rounding and quantics index folding.

Unfoldings follow the row-major reshape convention: the k-th unfolding groups
the first k axes as rows with the last axis varying fastest, i.e.
``A.reshape(prod(n[:k]), -1)`` on a C-ordered array. This convention is used
consistently everywhere in the package.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import truncated_svd
from .exceptions import InvalidInputError, ResourceLimitError, ConfigurationError

DENSE_CAP = 10**7


class TTTensor:
    """Tensor train: list of 3-way cores, core k of shape (r_{k-1}, n_k, r_k)."""

    def __init__(self, cores):
        if not cores:
            raise InvalidInputError("a TT tensor needs at least one core")
        cores = [np.asarray(c, dtype=float) for c in cores]
        for k, c in enumerate(cores):
            if c.ndim != 3:
                raise InvalidInputError(f"core {k} is not 3-way")
            if not np.all(np.isfinite(c)):
                raise InvalidInputError(f"core {k} contains non-finite entries")
        if cores[0].shape[0] != 1 or cores[-1].shape[2] != 1:
            raise InvalidInputError("boundary ranks must equal 1")
        for k in range(len(cores) - 1):
            if cores[k].shape[2] != cores[k + 1].shape[0]:
                raise InvalidInputError(f"rank mismatch between cores {k} and {k + 1}")
        self.cores = cores

    @property
    def ndim(self):
        return len(self.cores)

    @property
    def shape(self):
        return tuple(c.shape[1] for c in self.cores)

    @property
    def ranks(self):
        return tuple([1] + [c.shape[2] for c in self.cores])

    @property
    def max_rank(self):
        return max(self.ranks)

    @property
    def n_parameters(self):
        return sum(c.size for c in self.cores)

    def __getitem__(self, idx):
        return tt_eval(self, idx)


def tt_svd(full, eps):
    """Deterministic TT decomposition with relative Frobenius tolerance eps."""
    full = np.asarray(full, dtype=float)
    if full.size == 0:
        raise InvalidInputError("empty tensor")
    if not np.all(np.isfinite(full)):
        raise InvalidInputError("tensor contains non-finite entries")
    if eps < 0:
        raise InvalidInputError("eps must be nonnegative")
    shape = full.shape
    d = len(shape)
    norm = np.linalg.norm(full)
    if d == 1:
        return TTTensor([full.reshape(1, -1, 1)])
    delta = eps * norm / np.sqrt(d - 1)
    cores = []
    C = full.reshape(shape[0], -1)
    r_prev = 1
    for k in range(d - 1):
        C = C.reshape(r_prev * shape[k], -1)
        U, s, V, r = truncated_svd(C, delta)
        cores.append(U.reshape(r_prev, shape[k], r))
        C = (s[:, None] * V.T)
        r_prev = r
    cores.append(C.reshape(r_prev, shape[-1], 1))
    return TTTensor(cores)


def tt_eval(t, idx):
    """Entry of the TT at a multi-index, via left-to-right vector products."""
    idx = tuple(int(i) for i in np.atleast_1d(idx))
    if len(idx) != t.ndim:
        raise InvalidInputError("index length does not match tensor order")
    for i, n in zip(idx, t.shape):
        if not 0 <= i < n:
            raise InvalidInputError(f"index {idx} out of range for shape {t.shape}")
    v = t.cores[0][:, idx[0], :]
    for k in range(1, t.ndim):
        v = v @ t.cores[k][:, idx[k], :]
    return float(v[0, 0])


def tt_full(t, cap=DENSE_CAP):
    """Dense reconstruction; refuses tensors above the entry cap."""
    total = int(np.prod(t.shape, dtype=np.int64))
    if total > cap:
        raise ResourceLimitError(f"dense tensor of {total} entries exceeds cap {cap}")
    out = t.cores[0].reshape(t.shape[0], -1)
    for k in range(1, t.ndim):
        r, n, r2 = t.cores[k].shape
        out = out @ t.cores[k].reshape(r, n * r2)
        out = out.reshape(-1, r2)
    return out.reshape(t.shape)


def tt_norm_f(t):
    """Frobenius norm by core-wise Gram accumulation (no densification)."""
    M = np.ones((1, 1))
    for c in t.cores:
        M = np.einsum("ab,aic,bid->cd", M, c, c, optimize=True)
    return float(np.sqrt(max(M[0, 0], 0.0)))


def tt_round(t, eps):
    """Recompress a TT to relative tolerance eps (ranks never grow)."""
    if eps < 0:
        raise InvalidInputError("eps must be nonnegative")
    d = t.ndim
    cores = [c.copy() for c in t.cores]
    if d == 1:
        return TTTensor(cores)
    # Right-to-left orthogonalization (rows of each right unfolding orthonormal).
    for k in range(d - 1, 0, -1):
        r, n, r2 = cores[k].shape
        Q, R = np.linalg.qr(cores[k].reshape(r, n * r2).T)
        rnew = Q.shape[1]
        cores[k] = Q.T.reshape(rnew, n, r2)
        cores[k - 1] = np.einsum("aib,cb->aic", cores[k - 1], R)
    norm = np.linalg.norm(cores[0])
    delta = eps * norm / np.sqrt(d - 1)
    # Left-to-right truncated SVD sweep.
    for k in range(d - 1):
        r, n, r2 = cores[k].shape
        U, s, V, rnew = truncated_svd(cores[k].reshape(r * n, r2), delta)
        rnew = min(rnew, r2)
        cores[k] = U[:, :rnew].reshape(r, n, rnew)
        SV = (s[:rnew, None] * V[:, :rnew].T)
        cores[k + 1] = np.einsum("ab,bic->aic", SV, cores[k + 1])
    return TTTensor(cores)


@dataclass(frozen=True)
class QuanticsMap:
    """Bijection between a physical shape and its base-b digit folding."""

    base: int
    physical_shape: tuple
    digits: tuple  # digits per physical axis

    @property
    def folded_shape(self):
        return tuple(self.base for _ in range(sum(self.digits)))

    def fold_index(self, idx):
        """Physical multi-index -> folded digit multi-index (MSB first)."""
        out = []
        for i, m in zip(idx, self.digits):
            i = int(i)
            digs = []
            for _ in range(m):
                digs.append(i % self.base)
                i //= self.base
            out.extend(reversed(digs))
        return tuple(out)

    def unfold_index(self, folded):
        """Folded digit multi-index -> physical multi-index."""
        out = []
        pos = 0
        for m in self.digits:
            i = 0
            for t in range(m):
                i = i * self.base + int(folded[pos + t])
            out.append(i)
            pos += m
        return tuple(out)

    def unfold_batch(self, folded):
        """Vectorized unfold of an (m, sum(digits)) index array."""
        folded = np.asarray(folded, dtype=np.int64)
        out = np.empty((folded.shape[0], len(self.digits)), dtype=np.int64)
        pos = 0
        for k, m in enumerate(self.digits):
            i = np.zeros(folded.shape[0], dtype=np.int64)
            for t in range(m):
                i = i * self.base + folded[:, pos + t]
            out[:, k] = i
            pos += m
        return out


def quantics_fold(shape, base=2):
    """Folding map for a shape whose sizes are all powers of ``base``.

    Refuses non-power sizes rather than padding; callers fall back to the
    unfolded tensor in that case.
    """
    if base < 2:
        raise ConfigurationError("base must be >= 2")
    digits = []
    for n in shape:
        m = 0
        v = int(n)
        while v > 1 and v % base == 0:
            v //= base
            m += 1
        if v != 1 or m == 0:
            raise ConfigurationError(f"size {n} is not a positive power of base {base}")
        digits.append(m)
    return QuanticsMap(base=base, physical_shape=tuple(shape), digits=tuple(digits))


def merge_quantics_cores(t, qmap):
    """Contract folded cores back into physical cores (inverse of folding)."""
    cores = []
    pos = 0
    for m in qmap.digits:
        block = t.cores[pos]
        for j in range(1, m):
            c = t.cores[pos + j]
            r1, n1, _ = block.shape
            _, n2, r3 = c.shape
            block = np.einsum("aib,bjc->aijc", block, c).reshape(r1, n1 * n2, r3)
        cores.append(block)
        pos += m
    return TTTensor(cores)
