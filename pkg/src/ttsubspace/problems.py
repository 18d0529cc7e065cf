"""Kronecker-structured test operators as TT-matrices.

Three operator families are provided, each Hermitian and expressible as a
short sum of Kronecker products (a CP operator):

* spin-1/2 and spin-1 Heisenberg chains with an external field, open or
  periodic;
* the d-dimensional finite-difference Laplacian (sign convention: positive
  semidefinite, ``-tridiag(1,-2,1)`` per mode);
* a Hamiltonian with a Henon-Heiles potential, discretized by Hermite
  spectral collocation.

``mpo_from_cp`` converts a generic CP operator into a TT-matrix and
compresses it; the chain Hamiltonians are additionally built directly with
the standard nearest-neighbour block construction, which is exact and stays
cheap for long chains.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tt import TensorTrain, TTMatrix
from .rounding import _svd_sweep

__all__ = [
    "CPOperator",
    "ProblemSpec",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "SPIN1_X",
    "SPIN1_Y",
    "SPIN1_Z",
    "mpo_from_cp",
    "mpo_round",
    "heisenberg",
    "laplacian",
    "hermite_collocation",
    "henon_heiles",
    "build_problem",
]

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)

_SQ2 = 1.0 / np.sqrt(2.0)
SPIN1_X = _SQ2 * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=np.complex128)
SPIN1_Y = _SQ2 * np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=np.complex128)
SPIN1_Z = np.array([[1, 0, 0], [0, 0, 0], [0, 0, -1]], dtype=np.complex128)


@dataclass(frozen=True)
class CPOperator:
    """A sum of Kronecker products; ``terms[j][i]`` acts on mode ``i``."""

    terms: tuple[tuple[np.ndarray, ...], ...]

    def __init__(self, terms: Sequence[Sequence[np.ndarray]]):
        terms = tuple(
            tuple(np.array(f, dtype=np.complex128) for f in term) for term in terms
        )
        if not terms:
            raise ValueError("CPOperator needs at least one term")
        d = len(terms[0])
        for term in terms:
            if len(term) != d:
                raise ValueError("all terms must have the same number of factors")
            for i, f in enumerate(term):
                if f.ndim != 2 or f.shape[0] != f.shape[1]:
                    raise ValueError("factors must be square matrices")
                if f.shape != terms[0][i].shape:
                    raise ValueError(f"inconsistent factor size on mode {i}")
        object.__setattr__(self, "terms", terms)

    @property
    def d(self) -> int:
        return len(self.terms[0])

    @property
    def separation_rank(self) -> int:
        return len(self.terms)

    @property
    def mode_sizes(self) -> tuple[int, ...]:
        return tuple(f.shape[0] for f in self.terms[0])

    def to_dense(self) -> np.ndarray:
        out = None
        for term in self.terms:
            m = term[0]
            for f in term[1:]:
                m = np.kron(m, f)
            out = m if out is None else out + m
        return out


def mpo_round(a: TTMatrix, tol: float, max_rank: int | None = None) -> TTMatrix:
    """Compress a TT-matrix by fusing each (row, column) pair and sweeping."""
    fused = TensorTrain(
        [c.reshape(c.shape[0], c.shape[1] * c.shape[2], c.shape[3]) for c in a.cores]
    )
    rounded, _ = _svd_sweep(fused, tol, max_rank)
    cores = []
    for c, orig in zip(rounded.cores, a.cores):
        cores.append(c.reshape(c.shape[0], orig.shape[1], orig.shape[2], c.shape[2]))
    return TTMatrix(cores)


def mpo_from_cp(op: CPOperator, tol: float = 0.0, max_rank: int | None = None) -> TTMatrix:
    """TT-matrix realization of a CP operator.

    The raw construction has every interior bond equal to the separation
    rank; with ``tol > 0`` the result is compressed relative to the operator
    Frobenius norm.
    """
    d = op.d
    r = op.separation_rank
    n = op.mode_sizes
    if d == 1:
        core = sum(term[0] for term in op.terms).reshape(1, n[0], n[0], 1)
        return TTMatrix([core])
    cores = []
    for k in range(d):
        if k == 0:
            c = np.zeros((1, n[k], n[k], r), dtype=np.complex128)
            for j, term in enumerate(op.terms):
                c[0, :, :, j] = term[k]
        elif k == d - 1:
            c = np.zeros((r, n[k], n[k], 1), dtype=np.complex128)
            for j, term in enumerate(op.terms):
                c[j, :, :, 0] = term[k]
        else:
            c = np.zeros((r, n[k], n[k], r), dtype=np.complex128)
            for j, term in enumerate(op.terms):
                c[j, :, :, j] = term[k]
        cores.append(c)
    out = TTMatrix(cores)
    if tol > 0 or max_rank is not None:
        out = mpo_round(out, tol, max_rank)
    return out


def _spin_matrices(spin: str) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    if spin == "half":
        return PAULI_X, PAULI_Y, PAULI_Z, np.eye(2, dtype=np.complex128)
    if spin == "one":
        return SPIN1_X, SPIN1_Y, SPIN1_Z, np.eye(3, dtype=np.complex128)
    raise ValueError(f"spin must be 'half' or 'one', got {spin!r}")


def heisenberg(
    L: int,
    spin: str = "half",
    J: float = 1.0,
    h: float = 1.0,
    boundary: str = "open",
) -> TTMatrix:
    """Heisenberg chain with an external field,

        H = sum_j -J (sx_j sx_{j+1} + sy_j sy_{j+1} + sz_j sz_{j+1}) - h sz_j.

    ``spin='half'`` uses the 2x2 Pauli matrices, ``spin='one'`` the spin-1
    operators.  The open chain couples sites ``1..L-1`` to their right
    neighbours; ``boundary='periodic'`` adds the wrap term coupling sites
    ``L`` and ``1``, realized by three identity-carrying channels (interior
    bond dimension 8 instead of 5).
    """
    if L < 2:
        raise ValueError("L must be at least 2")
    if boundary not in ("open", "periodic"):
        raise ValueError(f"boundary must be 'open' or 'periodic', got {boundary!r}")
    sx, sy, sz, eye = _spin_matrices(spin)
    n = eye.shape[0]
    ops = (sx, sy, sz)
    periodic = boundary == "periodic"
    r = 8 if periodic else 5

    interior = np.zeros((r, n, n, r), dtype=np.complex128)
    interior[0, :, :, 0] = eye
    for a in range(3):
        interior[0, :, :, 1 + a] = ops[a]
        interior[1 + a, :, :, 4] = -J * ops[a]
    interior[0, :, :, 4] = -h * sz
    interior[4, :, :, 4] = eye
    if periodic:
        for a in range(3):
            interior[5 + a, :, :, 5 + a] = eye

    first = interior[0].reshape(1, n, n, r).copy()
    if periodic:
        for a in range(3):
            first[0, :, :, 5 + a] = ops[a]

    last = interior[:, :, :, 4].reshape(r, n, n, 1).copy()
    if periodic:
        for a in range(3):
            last[5 + a, :, :, 0] = -J * ops[a]

    return TTMatrix([first] + [interior] * (L - 2) + [last])


def laplacian(d: int, n: int) -> TTMatrix:
    """Positive finite-difference Laplacian ``-sum_k I x..x tridiag(1,-2,1) x..x I``.

    Eigenvalues are ``sum_k 4 sin^2(i_k pi / (2(n+1)))`` with separable
    (TT rank 1) eigenvectors.
    """
    if d < 1 or n < 2:
        raise ValueError("need d >= 1 and n >= 2")
    negd = (
        2.0 * np.eye(n) - np.diag(np.ones(n - 1), 1) - np.diag(np.ones(n - 1), -1)
    ).astype(np.complex128)
    eye = np.eye(n, dtype=np.complex128)
    if d == 1:
        return TTMatrix([negd.reshape(1, n, n, 1)])
    first = np.zeros((1, n, n, 2), dtype=np.complex128)
    first[0, :, :, 0] = negd
    first[0, :, :, 1] = eye
    interior = np.zeros((2, n, n, 2), dtype=np.complex128)
    interior[0, :, :, 0] = eye
    interior[1, :, :, 0] = negd
    interior[1, :, :, 1] = eye
    last = np.zeros((2, n, n, 1), dtype=np.complex128)
    last[0, :, :, 0] = eye
    last[1, :, :, 0] = negd
    return TTMatrix([first] + [interior] * (d - 2) + [last])


def hermite_collocation(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Hermite nodes and the second-derivative collocation matrix.

    Nodes are the roots of the degree-``n`` Hermite polynomial in ascending
    order.  Differentiation acts on interpolants in the Hermite-function
    (Gaussian-weighted) basis, which keeps the matrices well conditioned at
    large ``n``; consequently ``-D2/2 + diag(q^2)/2`` reproduces the
    harmonic-oscillator spectrum ``k + 1/2`` to spectral accuracy.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    x, w = np.polynomial.hermite.hermgauss(n)
    # derivative ratios of the weight alpha(q) = exp(-q^2/2)
    beta = np.zeros((3, n))
    beta[0] = 1.0
    beta[1] = -x
    beta[2] = -x * beta[1] - beta[0]
    _, d2 = _weighted_derivative_matrices(x, np.exp(-0.5 * x**2), beta[1:])
    # express in weight-normalized cardinals: a diagonal similarity under
    # which d2 becomes exactly symmetric while diagonal potentials commute
    s = np.sqrt(w * np.exp(x**2))
    d2 = (s[:, None] * d2) / s[None, :]
    d2 = 0.5 * (d2 + d2.T)
    return x, d2


def _weighted_derivative_matrices(x, alpha, b):
    """Collocation derivative matrices on nodes ``x`` for the weighted basis
    ``alpha(x) * l_j(x)``; ``b[i-1, j]`` is the i-th derivative of alpha over
    alpha at node j.  Classical barycentric-product recursion."""
    n = x.size
    m = b.shape[0]
    xx = np.tile(x, (n, 1)).T
    dx = xx - xx.T
    np.fill_diagonal(dx, 1.0)
    c = alpha * np.prod(dx, axis=1)
    cm = np.tile(c, (n, 1)).T
    cm = cm / cm.T
    z = 1.0 / dx
    np.fill_diagonal(z, 0.0)
    # column j holds 1/(x_j - x_k) over k != j
    xcomp = np.zeros((n - 1, n))
    for j in range(n):
        xcomp[:, j] = np.delete(z[j], j)
    y = np.ones((n, n))
    dmat = np.eye(n)
    mats = []
    for ell in range(1, m + 1):
        y = np.cumsum(np.vstack([b[ell - 1], ell * y[: n - 1] * xcomp]), axis=0)
        dmat = ell * z * (cm * np.tile(np.diag(dmat), (n, 1)).T - dmat)
        np.fill_diagonal(dmat, y[-1])
        mats.append(dmat.copy())
    return mats


def henon_heiles(d: int, n: int, mu: float = 0.111803, tol: float = 1e-10) -> TTMatrix:
    """Henon-Heiles Hamiltonian on the Gauss-Hermite tensor grid,

        H = -Delta/2 + sum_k q_k^2/2 + mu sum_{k<d} (q_k^2 q_{k+1} - q_{k+1}^3/3),

    built as a CP operator and compressed at ``tol``.
    """
    if d < 2:
        raise ValueError("need d >= 2")
    q, d2 = hermite_collocation(n)
    eye = np.eye(n)
    onesite = -0.5 * d2 + 0.5 * np.diag(q**2)
    q1 = np.diag(q)
    q2 = np.diag(q**2)
    q3 = np.diag(q**3)
    terms = []
    for k in range(d):
        term = [eye] * d
        term[k] = onesite
        terms.append(term)
    for k in range(d - 1):
        term = [eye] * d
        term[k] = mu * q2
        term[k + 1] = q1
        terms.append(term)
        term = [eye] * d
        term[k + 1] = (-mu / 3.0) * q3
        terms.append(term)
    return mpo_from_cp(CPOperator(terms), tol=tol)


@dataclass(frozen=True)
class ProblemSpec:
    """Declarative description of a test operator (the JSON-facing schema).

    ``kind`` selects the family; only the parameters meaningful for that
    family may be set.  ``mpo_tol`` compresses the final operator when
    positive.
    """

    kind: str
    L: int | None = None
    spin: str = "half"
    J: float = 1.0
    h: float = 1.0
    boundary: str = "open"
    d: int | None = None
    n: int | None = None
    mu: float = 0.111803
    mpo_tol: float = 0.0

    def __post_init__(self):
        if self.kind not in ("heisenberg", "laplacian", "henon_heiles"):
            raise ValueError(f"unknown problem kind {self.kind!r}")
        if self.kind == "heisenberg":
            if self.L is None or self.L < 2:
                raise ValueError("heisenberg needs L >= 2")
            if self.spin not in ("half", "one"):
                raise ValueError("spin must be 'half' or 'one'")
            if self.boundary not in ("open", "periodic"):
                raise ValueError("boundary must be 'open' or 'periodic'")
        else:
            if self.d is None or self.n is None:
                raise ValueError(f"{self.kind} needs d and n")
            if self.kind == "laplacian" and (self.d < 1 or self.n < 2):
                raise ValueError("laplacian needs d >= 1 and n >= 2")
            if self.kind == "henon_heiles" and (self.d < 2 or self.n < 2):
                raise ValueError("henon_heiles needs d >= 2 and n >= 2")


def build_problem(spec: ProblemSpec) -> TTMatrix:
    """Construct the TT-matrix described by a ProblemSpec."""
    if spec.kind == "heisenberg":
        a = heisenberg(spec.L, spec.spin, spec.J, spec.h, spec.boundary)
        if spec.mpo_tol > 0:
            a = mpo_round(a, spec.mpo_tol)
        return a
    if spec.kind == "laplacian":
        return laplacian(spec.d, spec.n)
    tol = spec.mpo_tol if spec.mpo_tol > 0 else 1e-10
    return henon_heiles(spec.d, spec.n, spec.mu, tol=tol)
