"""Dense complex tensor algebra: matricization, mode products, Tucker format,
deterministic truncated SVD, and HOSVD rank truncation.

Tensors are plain ``numpy.ndarray`` values of any dimension ``d >= 1``.  The
linear (storage and serialization) order used throughout the package is
"first index fastest", i.e. Fortran raveling: ``x.ravel(order="F")``.

Matricization follows the Kolda/Bader convention.  ``matricize(x, i)`` puts
mode ``i`` (0-based) on the rows; the columns run over the remaining modes
with the lowest remaining mode varying fastest.  Equivalently, entry
``(j_0, ..., j_{d-1})`` lands at row ``j_i`` and column
``sum_{k != i} j_k * J_k`` with ``J_k = prod_{m < k, m != i} n_m``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

__all__ = [
    "TuckerTensor",
    "matricize",
    "dematricize",
    "mode_product",
    "multi_mode_product",
    "tucker_assemble",
    "truncated_svd",
    "hosvd_truncate",
    "multilinear_rank",
    "validate_rank",
]


def _check_mode(ndim: int, mode: int) -> None:
    if not 0 <= mode < ndim:
        raise ValueError(f"mode {mode} out of range for a {ndim}-way tensor")


def matricize(x, mode: int) -> np.ndarray:
    """Mode-``mode`` unfolding of ``x`` into an ``n_mode x prod(n_other)`` matrix."""
    x = np.asarray(x)
    _check_mode(x.ndim, mode)
    return np.moveaxis(x, mode, 0).reshape((x.shape[mode], -1), order="F")


def dematricize(m, mode: int, shape) -> np.ndarray:
    """Inverse of :func:`matricize` for a tensor of the given ``shape``."""
    shape = tuple(int(n) for n in shape)
    _check_mode(len(shape), mode)
    m = np.asarray(m)
    n_cols = int(np.prod(shape)) // shape[mode]
    if m.shape != (shape[mode], n_cols):
        raise ValueError(
            f"matrix shape {m.shape} does not match mode-{mode} unfolding of {shape}"
        )
    moved = (shape[mode],) + tuple(n for k, n in enumerate(shape) if k != mode)
    return np.moveaxis(m.reshape(moved, order="F"), 0, mode)


def mode_product(x, matrix, mode: int) -> np.ndarray:
    """Mode-``mode`` product ``x x_mode M``: ``matricize(out, mode) = M @ matricize(x, mode)``."""
    x = np.asarray(x)
    matrix = np.asarray(matrix)
    _check_mode(x.ndim, mode)
    if matrix.ndim != 2 or matrix.shape[1] != x.shape[mode]:
        raise ValueError(
            f"matrix of shape {matrix.shape} cannot multiply mode {mode} "
            f"of tensor with shape {x.shape}"
        )
    out = np.tensordot(matrix, x, axes=(1, mode))
    return np.moveaxis(out, 0, mode)


def multi_mode_product(x, matrices, skip: int | None = None) -> np.ndarray:
    """Apply ``matrices[i]`` along every mode ``i`` (optionally skipping one).

    ``matrices`` must have one entry per mode of ``x``; the entry at ``skip``
    is ignored and may be ``None``.
    """
    x = np.asarray(x)
    if len(matrices) != x.ndim:
        raise ValueError(f"expected {x.ndim} matrices, got {len(matrices)}")
    out = x
    for mode, matrix in enumerate(matrices):
        if mode == skip:
            continue
        out = mode_product(out, matrix, mode)
    return out


def validate_rank(shape, rank) -> tuple[int, ...]:
    """Check that ``rank`` is a feasible multilinear rank for ``shape``.

    Feasible means ``1 <= r_i <= n_i`` and ``r_i <= prod_{j != i} r_j``.
    """
    shape = tuple(int(n) for n in shape)
    rank = tuple(int(r) for r in rank)
    if len(rank) != len(shape):
        raise ValueError(f"rank {rank} has wrong length for shape {shape}")
    total = int(np.prod(rank))
    for i, (n, r) in enumerate(zip(shape, rank)):
        if not 1 <= r <= n:
            raise ValueError(f"rank[{i}] = {r} infeasible for dimension {n}")
        if r > total // r:
            raise ValueError(
                f"rank[{i}] = {r} exceeds the product of the other rank entries"
            )
    return rank


@dataclass(frozen=True)
class TuckerTensor:
    """Tucker-format tensor: core of shape ``(r_0..r_{d-1})`` and per-mode
    factor matrices of shape ``(n_i, r_i)`` with orthonormal columns."""

    core: np.ndarray
    factors: tuple[np.ndarray, ...]

    _ORTHO_TOL = 1e-10

    def __post_init__(self):
        core = np.asarray(self.core)
        factors = tuple(np.asarray(u) for u in self.factors)
        object.__setattr__(self, "core", core)
        object.__setattr__(self, "factors", factors)
        if len(factors) != core.ndim:
            raise ValueError(
                f"{core.ndim}-way core needs {core.ndim} factors, got {len(factors)}"
            )
        for i, u in enumerate(factors):
            if u.ndim != 2 or u.shape[1] != core.shape[i]:
                raise ValueError(
                    f"factor {i} has shape {u.shape}, expected (n_{i}, {core.shape[i]})"
                )
            gram = u.conj().T @ u
            if np.max(np.abs(gram - np.eye(u.shape[1]))) > self._ORTHO_TOL:
                raise ValueError(f"factor {i} does not have orthonormal columns")
        validate_rank(self.shape, core.shape)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(u.shape[0] for u in self.factors)

    @property
    def rank(self) -> tuple[int, ...]:
        return self.core.shape

    @property
    def ndim(self) -> int:
        return self.core.ndim

    def full(self) -> np.ndarray:
        """Assemble the dense tensor ``core x_0 U_0 x_1 U_1 ...``."""
        return multi_mode_product(self.core, self.factors)


def tucker_assemble(t: TuckerTensor) -> np.ndarray:
    """Dense tensor represented by ``t`` (successive mode products)."""
    return t.full()


def truncated_svd(m, k: int):
    """Rank-``k`` truncated SVD ``(U, s, V)`` with ``M ~ U @ diag(s) @ V.conj().T``.

    ``U`` and ``V`` carry ``k`` orthonormal columns and ``s`` is descending.
    Deterministic output: each left singular vector is phase-rotated so its
    largest-magnitude entry is real and positive; ties in singular values
    keep LAPACK's column order.
    """
    m = np.asarray(m)
    if m.ndim != 2:
        raise ValueError("truncated_svd expects a matrix")
    if not 1 <= k <= min(m.shape):
        raise ValueError(f"k = {k} out of range for matrix of shape {m.shape}")
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    u, s, vh = u[:, :k].copy(), s[:k].copy(), vh[:k].copy()
    for j in range(k):
        pivot = u[np.argmax(np.abs(u[:, j])), j]
        if pivot != 0:
            phase = pivot / abs(pivot)
            u[:, j] *= np.conj(phase)
            vh[j, :] *= phase
    return u, s, vh.conj().T


def hosvd_truncate(x, rank) -> TuckerTensor:
    """Truncate ``x`` to multilinear rank ``rank`` by sequential per-mode
    best rank-``r_i`` projections, applied from mode 0 upward.

    Implemented in sequentially-truncated form (the running tensor is
    compressed after each mode); this is algebraically identical to projecting
    the full tensor in each mode because the accepted factors have orthonormal
    columns.
    """
    x = np.asarray(x)
    rank = validate_rank(x.shape, rank)
    core = x
    factors = []
    for mode in range(x.ndim):
        u, _, _ = truncated_svd(matricize(core, mode), rank[mode])
        factors.append(u)
        core = mode_product(core, u.conj().T, mode)
    return TuckerTensor(core, tuple(factors))


def multilinear_rank(x, rel_tol: float = 1e-10) -> tuple[int, ...]:
    """Multilinear rank of ``x``: per-mode matrix ranks of the unfoldings.

    Singular values below ``rel_tol`` times the largest are treated as zero.
    """
    x = np.asarray(x)
    ranks = []
    for mode in range(x.ndim):
        s = np.linalg.svd(matricize(x, mode), compute_uv=False)
        if s.size == 0 or s[0] == 0:
            ranks.append(0)
        else:
            ranks.append(int(np.count_nonzero(s > rel_tol * s[0])))
    return tuple(ranks)


def kron_chain(matrices) -> np.ndarray:
    """Kronecker product of ``matrices`` taken right-to-left, so the first
    matrix in the list indexes fastest (matches the matricization column
    order used here)."""
    return reduce(np.kron, reversed(list(matrices)))
