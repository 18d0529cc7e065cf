"""Rank truncation of tensor trains.

Three realizations of the truncation operator are provided:

``svd``
    Orthogonalize, then sweep bond-by-bond dropping singular values.  This is
    the reference method; it reports the truncation error it committed, which
    (by orthogonality of the per-bond discards) equals the Frobenius distance
    between input and output exactly.

``randomized``
    A one-sided Gaussian-sketch sweep that never forms the SVD of the
    high-rank input.  It exploits the block structure of sums and operator
    products: all work is core-wise contraction against a random rank-``l``
    tensor train (``l = max_rank + oversample``) followed by small QR
    factorizations and an exact projection pass, then a cheap final trim to
    ``max_rank``.  Deterministic for a fixed seed.

``tangent``
    Orthogonal projection onto the tangent space of the fixed-rank TT
    manifold at a base point.  Sums and operator products are contracted
    lazily against the base's orthogonal interfaces, so the high-rank target
    is never materialized.  The projection is representable with bond
    dimensions at most twice the base's, and is trimmed back to the base's
    ranks with an SVD sweep.

``truncated_matvec`` and ``truncated_combine`` are the fused entry points
used by the iterative solvers.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .tt import (
    TensorTrain,
    TTMatrix,
    add,
    max_feasible_ranks,
    mpo_apply_exact,
    orthogonalize,
    scale,
    tt_zero,
    _select_rank,
)

__all__ = [
    "RoundingStrategy",
    "LinearCombination",
    "MatVecSpec",
    "round_svd",
    "round_randomized",
    "tangent_project",
    "truncated_matvec",
    "truncated_combine",
]

_KINDS = ("svd", "randomized", "tangent")


@dataclass(frozen=True)
class RoundingStrategy:
    """How a truncation is carried out.

    At least one of ``max_rank`` and ``tol`` must be set.  When both are set
    the rank cap wins (hard cap) and the achieved error is still reported
    honestly by the operations that compute it.  ``seed``, ``oversample`` and
    ``shared_sketch`` only affect the randomized kind; with ``shared_sketch``
    the Gaussian sketch tensor is reused across calls with identical shapes,
    otherwise every call draws from the same seeded stream independently.
    """

    kind: str = "svd"
    max_rank: int | None = None
    tol: float | None = None
    seed: int = 0
    oversample: int = 5
    shared_sketch: bool = False

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown rounding kind {self.kind!r}; expected one of {_KINDS}")
        if self.max_rank is None and self.tol is None:
            raise ValueError("at least one of max_rank and tol must be set")
        if self.max_rank is not None and self.max_rank < 1:
            raise ValueError("max_rank must be positive")
        if self.tol is not None and self.tol < 0:
            raise ValueError("tol must be nonnegative")
        if self.oversample < 0:
            raise ValueError("oversample must be nonnegative")
        if self.kind == "randomized" and self.max_rank is None:
            raise ValueError("randomized rounding needs a target max_rank")


@dataclass(frozen=True)
class LinearCombination:
    """``sum_j coefficients[j] * terms[j]`` held unevaluated."""

    terms: tuple[TensorTrain, ...]
    coefficients: tuple[complex, ...]

    def __init__(self, terms: Sequence[TensorTrain], coefficients: Sequence[complex]):
        terms = tuple(terms)
        coefficients = tuple(complex(c) for c in coefficients)
        if not terms:
            raise ValueError("LinearCombination needs at least one term")
        if len(terms) != len(coefficients):
            raise ValueError("terms and coefficients must have equal length")
        sizes = terms[0].mode_sizes
        for t in terms[1:]:
            if t.mode_sizes != sizes:
                raise ValueError("all terms must share mode sizes")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def mode_sizes(self) -> tuple[int, ...]:
        return self.terms[0].mode_sizes


@dataclass(frozen=True)
class MatVecSpec:
    """An operator application ``operator @ vector`` held unevaluated."""

    operator: TTMatrix
    vector: TensorTrain

    def __post_init__(self):
        if self.operator.col_sizes != self.vector.mode_sizes:
            raise ValueError("operator columns do not match vector modes")

    @property
    def mode_sizes(self) -> tuple[int, ...]:
        return self.operator.row_sizes


# ---------------------------------------------------------------------------
# SVD rounding
# ---------------------------------------------------------------------------


def _caps_per_bond(d: int, max_rank) -> list[int | None]:
    """Normalize a scalar or per-bond cap into a list over interior bonds."""
    if max_rank is None:
        return [None] * (d - 1)
    if np.isscalar(max_rank):
        return [int(max_rank)] * (d - 1)
    caps = list(max_rank)
    if len(caps) == d + 1:  # full rank vector given; use interior part
        caps = caps[1:-1]
    if len(caps) != d - 1:
        raise ValueError("per-bond cap has wrong length")
    return [int(c) for c in caps]


def _svd_sweep(v: TensorTrain, tol: float | None, max_rank) -> tuple[TensorTrain, float]:
    """Right-orthogonalize then truncate left-to-right.

    The per-bond threshold is ``tol * ||v|| / sqrt(d-1)``; the squared
    discards accumulate to the exact squared truncation error.
    """
    d = v.d
    caps = _caps_per_bond(d, max_rank)
    w, _ = orthogonalize(v, 0)
    nrm = float(np.linalg.norm(w.cores[0]))
    if nrm == 0.0:
        return tt_zero(v.mode_sizes), 0.0
    if d == 1:
        return w, 0.0
    delta = 0.0 if not tol else tol * nrm / np.sqrt(d - 1)
    cores = [np.array(c) for c in w.cores]
    discarded_sq = 0.0
    for k in range(d - 1):
        rl, n, rr = cores[k].shape
        u, s, vh = np.linalg.svd(cores[k].reshape(rl * n, rr), full_matrices=False)
        keep = _select_rank(s, delta, caps[k])
        discarded_sq += float(np.sum(s[keep:] ** 2))
        cores[k] = u[:, :keep].reshape(rl, n, keep)
        carry = s[:keep, None] * vh[:keep]
        cores[k + 1] = np.einsum("ab,bic->aic", carry, cores[k + 1])
    return TensorTrain(cores), float(np.sqrt(discarded_sq))


def round_svd(v: TensorTrain, strategy: RoundingStrategy) -> tuple[TensorTrain, float]:
    """SVD-based rounding.  Returns the truncated TT and the achieved error.

    The reported error equals ``||v - result||_F``; it stays below
    ``tol * ||v||_F`` whenever the rank cap is not the binding constraint.
    """
    if strategy.kind != "svd":
        raise ValueError(f"round_svd called with strategy kind {strategy.kind!r}")
    return _svd_sweep(v, strategy.tol, strategy.max_rank)


# ---------------------------------------------------------------------------
# Randomized rounding
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def _cached_sketch(mode_sizes: tuple, ell: int, seed: int) -> tuple:
    return _make_sketch(mode_sizes, ell, seed)


def _make_sketch(mode_sizes: tuple, ell: int, seed: int) -> tuple:
    rng = np.random.default_rng(seed)
    d = len(mode_sizes)
    r = [1] + [ell] * (d - 1) + [1]
    cores = []
    for k, n in enumerate(mode_sizes):
        shape = (r[k], n, r[k + 1])
        cores.append(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return tuple(cores)


def _randomized_sweep(v: TensorTrain, strategy: RoundingStrategy) -> TensorTrain:
    """Sketch-QR-project sweep; output ranks are at most the sketch size."""
    d = v.d
    if d == 1:
        return v
    ell = strategy.max_rank + strategy.oversample
    if strategy.shared_sketch:
        sketch = _cached_sketch(v.mode_sizes, ell, strategy.seed)
    else:
        sketch = _make_sketch(v.mode_sizes, ell, strategy.seed)
    # right-to-left interfaces between v and the sketch train
    w = [None] * d
    env = np.ones((1, 1), dtype=np.complex128)
    for k in range(d - 1, 0, -1):
        env = np.einsum("xiy,yb,aib->xa", v.cores[k], env, sketch[k], optimize=True)
        w[k - 1] = env
    cores = []
    z = np.array(v.cores[0])
    for k in range(d - 1):
        rl, n, rr = z.shape
        b = z.reshape(rl * n, rr) @ w[k]
        q, _ = np.linalg.qr(b)
        tau = q.shape[1]
        cores.append(q.reshape(rl, n, tau))
        m = q.conj().T @ z.reshape(rl * n, rr)
        z = np.einsum("ax,xiy->aiy", m, v.cores[k + 1])
    cores.append(z)
    return TensorTrain(cores)


def _round_randomized_tt(v: TensorTrain, strategy: RoundingStrategy) -> TensorTrain:
    sketched = _randomized_sweep(v, strategy)
    trimmed, _ = _svd_sweep(sketched, strategy.tol, strategy.max_rank)
    return trimmed


def round_randomized(lc: LinearCombination, strategy: RoundingStrategy) -> TensorTrain:
    """Randomized rounding of a linear combination of TTs.

    The (block-structured) exact sum is assembled core-wise without any SVD
    on it; the sketch sweep reduces it to rank at most
    ``max_rank + oversample`` and a final trim enforces ``max_rank``.
    """
    if strategy.kind != "randomized":
        raise ValueError(f"round_randomized called with strategy kind {strategy.kind!r}")
    acc = scale(lc.terms[0], lc.coefficients[0])
    for t, c in zip(lc.terms[1:], lc.coefficients[1:]):
        acc = add(acc, scale(t, c))
    return _round_randomized_tt(acc, strategy)


# ---------------------------------------------------------------------------
# Tangent-space projection
# ---------------------------------------------------------------------------


def _normalize_target(target) -> list[tuple[complex, object]]:
    """Flatten a target into ``[(coefficient, TensorTrain | MatVecSpec), ...]``."""
    if isinstance(target, TensorTrain) or isinstance(target, MatVecSpec):
        return [(1.0 + 0.0j, target)]
    if isinstance(target, LinearCombination):
        return [(c, t) for c, t in zip(target.coefficients, target.terms)]
    if isinstance(target, (list, tuple)):
        parts = []
        for item in target:
            coeff, term = item
            if not isinstance(term, (TensorTrain, MatVecSpec)):
                raise TypeError(f"unsupported tangent target term {type(term)!r}")
            parts.append((complex(coeff), term))
        if not parts:
            raise ValueError("empty tangent target")
        return parts
    raise TypeError(f"unsupported tangent target {type(target)!r}")


def _term_mode_sizes(term) -> tuple[int, ...]:
    return term.mode_sizes


def _left_interfaces(u_cores, term) -> list[np.ndarray]:
    """L_k = contraction of u*_1..u*_{k-1} with the target's first k-1 cores."""
    d = len(u_cores)
    out = [None] * d
    if isinstance(term, TensorTrain):
        env = np.ones((1, 1), dtype=np.complex128)
        out[0] = env
        for k in range(d - 1):
            env = np.einsum("ab,aic,bid->cd", env, u_cores[k].conj(), term.cores[k], optimize=True)
            out[k + 1] = env
    else:
        env = np.ones((1, 1, 1), dtype=np.complex128)
        out[0] = env
        for k in range(d - 1):
            env = np.einsum(
                "apx,aic,pijq,xjy->cqy",
                env,
                u_cores[k].conj(),
                term.operator.cores[k],
                term.vector.cores[k],
                optimize=True,
            )
            out[k + 1] = env
    return out


def _right_interfaces_tt(v_cores, cores_z) -> list[np.ndarray]:
    """R_k = contraction of the target's trailing cores with v*_{k+1}..v*_d."""
    d = len(v_cores)
    out = [None] * d
    env = np.ones((1, 1), dtype=np.complex128)
    out[d - 1] = env
    for k in range(d - 1, 0, -1):
        env = np.einsum("xiy,ya,bia->xb", cores_z[k], env, v_cores[k].conj(), optimize=True)
        out[k - 1] = env
    return out


def _right_interfaces_mv(v_cores, mpo_cores, w_cores) -> list[np.ndarray]:
    d = len(v_cores)
    out = [None] * d
    env = np.ones((1, 1, 1), dtype=np.complex128)
    out[d - 1] = env
    for k in range(d - 1, 0, -1):
        env = np.einsum(
            "pijq,xjy,qya,bia->pxb",
            mpo_cores[k],
            w_cores[k],
            env,
            v_cores[k].conj(),
            optimize=True,
        )
        out[k - 1] = env
    return out


def _center_block(left, term, k, right) -> np.ndarray:
    """X_k = L_k . z_k . R_k, shaped (r^U_{k-1}, n_k, r^V_k)."""
    if isinstance(term, TensorTrain):
        return np.einsum("ap,piq,qb->aib", left, term.cores[k], right, optimize=True)
    return np.einsum(
        "apx,pijq,xjy,qyb->aib",
        left,
        term.operator.cores[k],
        term.vector.cores[k],
        right,
        optimize=True,
    )


def tangent_project(base: TensorTrain, target, trim: bool = True) -> TensorTrain:
    """Orthogonal projection of ``target`` onto the tangent space of the
    fixed-rank TT manifold at ``base``.

    ``target`` may be a ``TensorTrain``, a ``LinearCombination``, a
    ``MatVecSpec``, or a sequence of ``(coefficient, term)`` pairs mixing the
    latter two.  Sums and operator applications are contracted lazily
    against the base's orthogonal interfaces; the high-rank target is never
    built.  The projection itself has bond dimensions at most twice the
    base's; with ``trim=True`` (the default) it is swept back down to the
    base's rank vector.
    """
    parts = _normalize_target(target)
    for _, term in parts:
        if _term_mode_sizes(term) != base.mode_sizes:
            raise ValueError("tangent target does not match base mode sizes")
    d = base.d
    if d == 1:
        # the whole space is the tangent space
        acc = None
        for coeff, term in parts:
            t = term if isinstance(term, TensorTrain) else mpo_apply_exact(term.operator, term.vector)
            acc = scale(t, coeff) if acc is None else add(acc, scale(t, coeff))
        return acc

    feas = max_feasible_ranks(base.mode_sizes)
    if any(r > f for r, f in zip(base.rank_vector, feas)):
        base, _ = _svd_sweep(base, None, None)  # lossless; shrinks to feasible ranks

    left_tt, _ = orthogonalize(base, d - 1)
    right_tt, _ = orthogonalize(base, 0)
    u_cores = left_tt.cores
    v_cores = right_tt.cores
    ranks = base.rank_vector

    # accumulate the first-order-variation blocks over all target parts
    deltas = [None] * d
    for coeff, term in parts:
        lefts = _left_interfaces(u_cores, term)
        if isinstance(term, TensorTrain):
            rights = _right_interfaces_tt(v_cores, term.cores)
        else:
            rights = _right_interfaces_mv(v_cores, term.operator.cores, term.vector.cores)
        for k in range(d):
            x = coeff * _center_block(lefts[k], term, k, rights[k])
            deltas[k] = x if deltas[k] is None else deltas[k] + x

    # remove the components already covered by the left interfaces
    for k in range(d - 1):
        u = u_cores[k].reshape(-1, ranks[k + 1])
        x = deltas[k].reshape(u.shape[0], -1)
        deltas[k] = (x - u @ (u.conj().T @ x)).reshape(deltas[k].shape)

    # assemble the rank-doubled representation
    cores = []
    n = base.mode_sizes
    first = np.concatenate([deltas[0], u_cores[0]], axis=2)
    cores.append(first)
    for k in range(1, d - 1):
        rl, rr = ranks[k], ranks[k + 1]
        c = np.zeros((2 * rl, n[k], 2 * rr), dtype=np.complex128)
        c[:rl, :, :rr] = v_cores[k]
        c[rl:, :, :rr] = deltas[k]
        c[rl:, :, rr:] = u_cores[k]
        cores.append(c)
    last = np.concatenate([v_cores[d - 1], deltas[d - 1]], axis=0)
    cores.append(last)
    out = TensorTrain(cores)
    if trim:
        out, _ = _svd_sweep(out, None, list(ranks[1:-1]))
    return out


# ---------------------------------------------------------------------------
# Fused operations
# ---------------------------------------------------------------------------


def truncated_matvec(
    a: TTMatrix,
    v: TensorTrain,
    strategy: RoundingStrategy,
    log: list | None = None,
) -> TensorTrain:
    """Rank-controlled operator application ``T(A v)`` under ``strategy``.

    With the svd kind the exact product is formed core-wise and swept; the
    tangent kind projects onto the tangent space at the input vector; the
    randomized kind sketches the block-structured product.  When the
    achieved truncation error is known it is appended to ``log``.
    """
    if strategy.kind == "svd":
        out, err = round_svd(mpo_apply_exact(a, v), strategy)
        if log is not None:
            log.append(err)
        return out
    if strategy.kind == "tangent":
        out = tangent_project(v, MatVecSpec(a, v))
        if log is not None:
            log.append(float("nan"))
        return out
    out = _round_randomized_tt(mpo_apply_exact(a, v), strategy)
    if log is not None:
        log.append(float("nan"))
    return out


def truncated_combine(
    lc: LinearCombination,
    strategy: RoundingStrategy,
    log: list | None = None,
) -> TensorTrain:
    """Rank-controlled linear combination under ``strategy``.

    The svd kind folds terms pairwise in descending ``|coefficient|`` order
    (large contributions anchor the retained bases); the tangent kind
    projects the whole sum at the dominant term; the randomized kind
    sketches the block sum in one pass.
    """
    if len(lc.terms) == 1:
        return scale(lc.terms[0], lc.coefficients[0])
    order = sorted(range(len(lc.terms)), key=lambda i: -abs(lc.coefficients[i]))
    if strategy.kind == "svd":
        acc = scale(lc.terms[order[0]], lc.coefficients[order[0]])
        for i in order[1:]:
            acc, err = round_svd(add(acc, scale(lc.terms[i], lc.coefficients[i])), strategy)
            if log is not None:
                log.append(err)
        return acc
    if strategy.kind == "tangent":
        base = lc.terms[order[0]]
        out = tangent_project(base, lc)
        if log is not None:
            log.append(float("nan"))
        return out
    out = round_randomized(lc, strategy)
    if log is not None:
        log.append(float("nan"))
    return out
