"""Tensor-train vectors and operators with exact (untruncated) arithmetic.

A tensor train (TT) represents a d-way tensor ``v`` through cores
``C_1, ..., C_d`` such that each entry is a product of matrices,

    v(i_1, ..., i_d) = C_1(i_1) C_2(i_2) ... C_d(i_d),

where core ``k`` is an ``r_{k-1} x n_k x r_k`` array and ``r_0 = r_d = 1``.
The vector ``(r_0, ..., r_d)`` is the TT rank (bond dimension) vector.  The
operator analogue (``TTMatrix``, a matrix product operator) uses 4-way cores
``r_{k-1} x n_k x n_k' x r_k`` with row and column physical indices.

All values are immutable after construction and every operation here is a
pure function of its inputs; addition and operator application are exact and
grow ranks according to the usual bookkeeping (sums of ranks for ``add``,
products for ``mpo_apply_exact``).  Rank control lives in
:mod:`ttsubspace.rounding`.

Scalars are complex throughout.  Inner products are conjugate-linear in the
*first* argument.  Norms are evaluated by orthogonalizing first and taking
the Frobenius norm of the center core, which avoids the cancellation the
naive full contraction suffers from.

Site indices are 0-based in code (sites ``0 .. d-1``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "DENSE_GUARD",
    "TensorTrain",
    "TTMatrix",
    "CanonicalForm",
    "max_feasible_ranks",
    "tt_random",
    "tt_zero",
    "tt_from_dense",
    "tt_to_dense",
    "mpo_to_dense",
    "mpo_identity",
    "inner",
    "norm",
    "scale",
    "add",
    "mpo_apply_exact",
    "mpo_inner",
    "mpo_inner2",
    "orthogonalize",
]

# Largest number of entries the dense bridges are willing to materialize.
DENSE_GUARD = 2**24


def _as_core(a, ndim: int) -> np.ndarray:
    c = np.array(a, dtype=np.complex128, copy=True)
    if c.ndim != ndim:
        raise ValueError(f"TT core must be {ndim}-dimensional, got shape {c.shape}")
    c.setflags(write=False)
    return c


def _check_chain(cores: Sequence[np.ndarray], what: str) -> None:
    if len(cores) < 1:
        raise ValueError(f"{what} needs at least one core")
    if cores[0].shape[0] != 1:
        raise ValueError(f"{what}: leading bond dimension must be 1, got {cores[0].shape[0]}")
    if cores[-1].shape[-1] != 1:
        raise ValueError(f"{what}: trailing bond dimension must be 1, got {cores[-1].shape[-1]}")
    for k in range(len(cores) - 1):
        if cores[k].shape[-1] != cores[k + 1].shape[0]:
            raise ValueError(
                f"{what}: bond mismatch between cores {k} and {k + 1}: "
                f"{cores[k].shape[-1]} != {cores[k + 1].shape[0]}"
            )
    for k, c in enumerate(cores):
        if min(c.shape) < 1:
            raise ValueError(f"{what}: core {k} has an empty dimension {c.shape}")


@dataclass(frozen=True, eq=False)
class TensorTrain:
    """A d-core tensor train representing a vector in the product space.

    Parameters
    ----------
    cores
        Sequence of 3-way complex arrays; core ``k`` has shape
        ``(r_{k-1}, n_k, r_k)`` with ``r_0 = r_d = 1``.
    """

    cores: tuple[np.ndarray, ...]

    def __init__(self, cores: Sequence[np.ndarray]):
        object.__setattr__(self, "cores", tuple(_as_core(c, 3) for c in cores))
        _check_chain(self.cores, "TensorTrain")

    @property
    def d(self) -> int:
        return len(self.cores)

    @property
    def mode_sizes(self) -> tuple[int, ...]:
        return tuple(c.shape[1] for c in self.cores)

    @property
    def rank_vector(self) -> tuple[int, ...]:
        return (1,) + tuple(c.shape[2] for c in self.cores)

    @property
    def max_rank(self) -> int:
        return max(self.rank_vector)

    def __add__(self, other: "TensorTrain") -> "TensorTrain":
        return add(self, other)

    def __sub__(self, other: "TensorTrain") -> "TensorTrain":
        return add(self, scale(other, -1.0))

    def __mul__(self, alpha) -> "TensorTrain":
        return scale(self, alpha)

    __rmul__ = __mul__

    def __neg__(self) -> "TensorTrain":
        return scale(self, -1.0)

    def __repr__(self) -> str:
        return f"TensorTrain(d={self.d}, modes={self.mode_sizes}, ranks={self.rank_vector})"


@dataclass(frozen=True, eq=False)
class TTMatrix:
    """A TT-matrix (matrix product operator) with 4-way cores.

    Core ``k`` has shape ``(r_{k-1}, n_k, m_k, r_k)``: ``n_k`` is the row
    (output) size and ``m_k`` the column (input) size of mode ``k``.
    """

    cores: tuple[np.ndarray, ...]

    def __init__(self, cores: Sequence[np.ndarray]):
        object.__setattr__(self, "cores", tuple(_as_core(c, 4) for c in cores))
        _check_chain(self.cores, "TTMatrix")

    @property
    def d(self) -> int:
        return len(self.cores)

    @property
    def row_sizes(self) -> tuple[int, ...]:
        return tuple(c.shape[1] for c in self.cores)

    @property
    def col_sizes(self) -> tuple[int, ...]:
        return tuple(c.shape[2] for c in self.cores)

    @property
    def rank_vector(self) -> tuple[int, ...]:
        return (1,) + tuple(c.shape[3] for c in self.cores)

    @property
    def max_rank(self) -> int:
        return max(self.rank_vector)

    def __matmul__(self, v: TensorTrain) -> TensorTrain:
        return mpo_apply_exact(self, v)

    def __repr__(self) -> str:
        return (
            f"TTMatrix(d={self.d}, rows={self.row_sizes}, cols={self.col_sizes}, "
            f"ranks={self.rank_vector})"
        )


@dataclass(frozen=True)
class CanonicalForm:
    """Gauge record produced by :func:`orthogonalize`.

    ``directions[k]`` is ``'L'`` for a left-orthogonal core (its left
    unfolding is an isometry), ``'R'`` for a right-orthogonal core, and
    ``'C'`` at the orthogonality center.
    """

    center: int
    directions: tuple[str, ...]


def max_feasible_ranks(mode_sizes: Sequence[int]) -> tuple[int, ...]:
    """Maximal bond dimensions ``min(prod(n_{<=k}), prod(n_{>k}))`` per bond."""
    n = list(mode_sizes)
    d = len(n)
    left = np.cumprod(n)
    right = np.cumprod(n[::-1])[::-1]
    out = [1]
    for k in range(1, d):
        out.append(int(min(left[k - 1], right[k])))
    out.append(1)
    return tuple(out)


def tt_zero(mode_sizes: Sequence[int]) -> TensorTrain:
    """Canonical rank-1 representation of the zero tensor."""
    return TensorTrain([np.zeros((1, n, 1)) for n in mode_sizes])


def tt_random(
    mode_sizes: Sequence[int],
    rank_vector: Sequence[int],
    seed: int,
) -> TensorTrain:
    """Random unit-norm TT with i.i.d. standard-normal real/imaginary parts.

    Requested interior ranks are clipped to the maximal feasible bond
    dimension ``min(prod(n_{<=k}), prod(n_{>k}))``.  The same seed always
    yields bitwise-identical cores.
    """
    n = tuple(int(s) for s in mode_sizes)
    r = tuple(int(s) for s in rank_vector)
    if len(r) != len(n) + 1:
        raise ValueError(f"rank_vector must have length d+1={len(n) + 1}, got {len(r)}")
    if r[0] != 1 or r[-1] != 1:
        raise ValueError("boundary ranks must be 1")
    if any(s < 1 for s in r):
        raise ValueError("ranks must be positive")
    feas = max_feasible_ranks(n)
    r = tuple(min(a, b) for a, b in zip(r, feas))
    rng = np.random.default_rng(seed)
    cores = []
    for k, nk in enumerate(n):
        shape = (r[k], nk, r[k + 1])
        cores.append(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    v = TensorTrain(cores)
    nrm = norm(v)
    if nrm == 0.0:  # pragma: no cover - measure-zero event
        raise RuntimeError("random TT drew an exact zero")
    return scale(v, 1.0 / nrm)


def _select_rank(s: np.ndarray, threshold: float, max_rank: int | None) -> int:
    """Smallest rank whose discarded tail satisfies ``sqrt(sum s_i^2) <= threshold``."""
    if threshold > 0:
        tail = np.sqrt(np.cumsum(s[::-1] ** 2))[::-1]  # tail[r] = ||s[r:]||
        keep = int(np.searchsorted(-tail, -threshold))  # first r with tail[r] <= threshold
    else:
        keep = len(s)
    keep = max(1, keep)
    if max_rank is not None:
        keep = min(keep, int(max_rank))
    return keep


def tt_from_dense(
    tensor: np.ndarray,
    tol: float = 0.0,
    max_rank: int | None = None,
) -> TensorTrain:
    """Decompose a dense tensor into TT form by sequential SVDs.

    Singular values are discarded bond-by-bond with per-bond budget
    ``tol * ||tensor||_F / sqrt(d - 1)`` so that the total relative error is
    at most ``tol``; ``max_rank`` additionally caps every bond.
    """
    x = np.asarray(tensor, dtype=np.complex128)
    n = x.shape
    d = x.ndim
    if d < 1:
        raise ValueError("tensor must have at least one mode")
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    nrm = float(np.linalg.norm(x))
    if nrm == 0.0:
        return tt_zero(n)
    if d == 1:
        return TensorTrain([x.reshape(1, n[0], 1)])
    delta = tol * nrm / np.sqrt(d - 1)
    cores = []
    r_prev = 1
    z = x.reshape(n)
    for k in range(d - 1):
        z = z.reshape(r_prev * n[k], -1)
        u, s, vh = np.linalg.svd(z, full_matrices=False)
        r_k = _select_rank(s, delta, max_rank)
        cores.append(u[:, :r_k].reshape(r_prev, n[k], r_k))
        z = s[:r_k, None] * vh[:r_k]
        r_prev = r_k
    cores.append(z.reshape(r_prev, n[-1], 1))
    return TensorTrain(cores)


def tt_to_dense(v: TensorTrain) -> np.ndarray:
    """Dense reconstruction of the matrix-product evaluation.

    Refuses to materialize more than ``DENSE_GUARD`` entries.
    """
    total = int(np.prod(v.mode_sizes, dtype=np.int64))
    if total > DENSE_GUARD:
        raise ValueError(f"dense reconstruction of {total} entries exceeds guard {DENSE_GUARD}")
    t = v.cores[0].reshape(v.mode_sizes[0], -1)
    for c in v.cores[1:]:
        r = c.shape[0]
        t = (t @ c.reshape(r, -1)).reshape(-1, c.shape[2])
    return t.reshape(v.mode_sizes)


def mpo_to_dense(a: TTMatrix) -> np.ndarray:
    """Dense matrix of a TT-matrix, shaped ``prod(rows) x prod(cols)``."""
    nrow = int(np.prod(a.row_sizes, dtype=np.int64))
    ncol = int(np.prod(a.col_sizes, dtype=np.int64))
    if nrow * ncol > DENSE_GUARD:
        raise ValueError(f"dense matrix of {nrow * ncol} entries exceeds guard {DENSE_GUARD}")
    t = a.cores[0].reshape(a.row_sizes[0] * a.col_sizes[0], -1)
    for c in a.cores[1:]:
        r = c.shape[0]
        t = (t @ c.reshape(r, -1)).reshape(-1, c.shape[3])
    # t index order is (i_1, j_1, i_2, j_2, ...); separate rows from columns
    shape = []
    for i, j in zip(a.row_sizes, a.col_sizes):
        shape.extend([i, j])
    t = t.reshape(shape)
    perm = list(range(0, 2 * a.d, 2)) + list(range(1, 2 * a.d, 2))
    return t.transpose(perm).reshape(nrow, ncol)


def mpo_identity(mode_sizes: Sequence[int]) -> TTMatrix:
    """Rank-1 identity operator."""
    return TTMatrix([np.eye(n).reshape(1, n, n, 1) for n in mode_sizes])


def inner(v: TensorTrain, w: TensorTrain) -> complex:
    """Euclidean inner product ``<v, w>``, conjugate-linear in ``v``."""
    if v.mode_sizes != w.mode_sizes:
        raise ValueError(f"mode sizes differ: {v.mode_sizes} vs {w.mode_sizes}")
    env = np.ones((1, 1), dtype=np.complex128)
    for cv, cw in zip(v.cores, w.cores):
        env = np.einsum("ab,aic,bid->cd", env, cv.conj(), cw, optimize=True)
    return complex(env[0, 0])


def scale(v: TensorTrain, alpha) -> TensorTrain:
    """Multiply by a scalar (folded into the first core; ranks unchanged)."""
    cores = list(v.cores)
    cores[0] = cores[0] * complex(alpha)
    return TensorTrain(cores)


def add(v: TensorTrain, w: TensorTrain) -> TensorTrain:
    """Exact sum by core concatenation; interior ranks add."""
    if v.mode_sizes != w.mode_sizes:
        raise ValueError(f"mode sizes differ: {v.mode_sizes} vs {w.mode_sizes}")
    d = v.d
    if d == 1:
        return TensorTrain([v.cores[0] + w.cores[0]])
    cores = []
    for k in range(d):
        cv, cw = v.cores[k], w.cores[k]
        if k == 0:
            cores.append(np.concatenate([cv, cw], axis=2))
        elif k == d - 1:
            cores.append(np.concatenate([cv, cw], axis=0))
        else:
            rl = cv.shape[0] + cw.shape[0]
            rr = cv.shape[2] + cw.shape[2]
            c = np.zeros((rl, cv.shape[1], rr), dtype=np.complex128)
            c[: cv.shape[0], :, : cv.shape[2]] = cv
            c[cv.shape[0] :, :, cv.shape[2] :] = cw
            cores.append(c)
    return TensorTrain(cores)


def mpo_apply_exact(a: TTMatrix, v: TensorTrain) -> TensorTrain:
    """Exact operator application; interior ranks multiply."""
    if a.col_sizes != v.mode_sizes:
        raise ValueError(f"operator columns {a.col_sizes} do not match vector modes {v.mode_sizes}")
    cores = []
    for ca, cv in zip(a.cores, v.cores):
        c = np.einsum("pijq,ajb->paiqb", ca, cv, optimize=True)
        ra, n, _, rb = ca.shape[0], ca.shape[1], ca.shape[2], ca.shape[3]
        cores.append(c.reshape(ra * cv.shape[0], n, rb * cv.shape[2]))
    return TensorTrain(cores)


def mpo_inner(v: TensorTrain, a: TTMatrix, w: TensorTrain) -> complex:
    """Sandwich ``<v, A w>`` contracted core-by-core (no intermediate TT)."""
    if a.col_sizes != w.mode_sizes or a.row_sizes != v.mode_sizes:
        raise ValueError("incompatible sizes in <v, A w>")
    env = np.ones((1, 1, 1), dtype=np.complex128)
    for cv, ca, cw in zip(v.cores, a.cores, w.cores):
        env = np.einsum("apb,aic,pijq,bjd->cqd", env, cv.conj(), ca, cw, optimize=True)
    return complex(env[0, 0, 0])


def mpo_inner2(v: TensorTrain, a: TTMatrix, w: TensorTrain) -> complex:
    """Double sandwich ``<A v, A w>`` without forming either product."""
    env = np.ones((1, 1, 1, 1), dtype=np.complex128)
    for cv, ca, cw in zip(v.cores, a.cores, w.cores):
        env = np.einsum(
            "apqb,pijr,ajc,qiks,bkd->crsd",
            env,
            ca.conj(),
            cv.conj(),
            ca,
            cw,
            optimize=True,
        )
    return complex(env[0, 0, 0, 0])


def _qr_left(core: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Left-orthogonalize one core; returns (isometric core, carry-to-right)."""
    rl, n, rr = core.shape
    q, r = np.linalg.qr(core.reshape(rl * n, rr))
    return q.reshape(rl, n, q.shape[1]), r


def _qr_right(core: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Right-orthogonalize one core; returns (carry-to-left, isometric core)."""
    rl, n, rr = core.shape
    q, r = np.linalg.qr(core.reshape(rl, n * rr).conj().T)
    q = q.conj().T  # q now has orthonormal rows
    return r.conj().T, q.reshape(q.shape[0], n, rr)


def orthogonalize(v: TensorTrain, center: int) -> tuple[TensorTrain, CanonicalForm]:
    """Gauge the TT so cores left of ``center`` are left-orthogonal and cores
    right of it are right-orthogonal.

    The dense reconstruction is unchanged.  Bond dimensions may shrink when
    the input carries infeasibly large ranks (the QR factors are economic).
    """
    d = v.d
    if not 0 <= center < d:
        raise ValueError(f"center must be in [0, {d - 1}], got {center}")
    cores = [np.array(c) for c in v.cores]
    for k in range(center):
        q, r = _qr_left(cores[k])
        cores[k] = q
        cores[k + 1] = np.einsum("ab,bic->aic", r, cores[k + 1])
    for k in range(d - 1, center, -1):
        r, q = _qr_right(cores[k])
        cores[k] = q
        cores[k - 1] = np.einsum("aib,bc->aic", cores[k - 1], r)
    directions = tuple("L" if k < center else "C" if k == center else "R" for k in range(d))
    return TensorTrain(cores), CanonicalForm(center=center, directions=directions)


def norm(v: TensorTrain) -> float:
    """Frobenius norm, computed stably as the center-core norm after
    orthogonalization."""
    w, _ = orthogonalize(v, 0)
    return float(np.linalg.norm(w.cores[0]))
