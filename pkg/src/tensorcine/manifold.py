"""Geometry of the manifold of tensors with fixed multilinear rank.

A point is held in Tucker form ``x = C x_0 U_0 ... x_{d-1} U_{d-1}`` with
orthonormal factors.  Tangent vectors are parametrized by a free core
perturbation ``G`` and factor perturbations ``V_i`` subject to the gauge
condition ``V_i^H U_i = 0``.  The three operations needed for first-order
optimization are provided: orthogonal projection onto the tangent space,
Riemannian gradient, and the HOSVD retraction.

All inner products and projectors use conjugate transposes; the data this
package cares about is complex-valued.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensors import (
    TuckerTensor,
    hosvd_truncate,
    matricize,
    mode_product,
    multi_mode_product,
    validate_rank,
)

__all__ = [
    "RankDeficientCoreError",
    "ManifoldPoint",
    "TangentVector",
    "manifold_dim",
    "tangent_embed",
    "project_tangent",
    "riemannian_gradient",
    "retract",
    "random_point",
    "random_tangent",
]

#: Core unfoldings whose smallest singular value falls below this fraction of
#: the largest are treated as rank deficient (point too close to the boundary
#: of the fixed-rank set).
CORE_SV_FLOOR = 1e-10


class RankDeficientCoreError(RuntimeError):
    """A core unfolding lost full row rank; tangent-space formulas break down."""


def manifold_dim(shape, rank) -> int:
    """Dimension of the fixed-rank manifold: ``prod(r) + sum_i (r_i n_i - r_i^2)``."""
    rank = validate_rank(shape, rank)
    shape = tuple(int(n) for n in shape)
    return int(np.prod(rank)) + sum(r * n - r * r for n, r in zip(shape, rank))


@dataclass(frozen=True)
class TangentVector:
    """Tangent-space element: core perturbation ``G`` (rank-shaped) and one
    gauge-fixed perturbation ``V_i`` per factor."""

    core_delta: np.ndarray
    factor_deltas: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "core_delta", np.asarray(self.core_delta))
        object.__setattr__(
            self, "factor_deltas", tuple(np.asarray(v) for v in self.factor_deltas)
        )
        if len(self.factor_deltas) != self.core_delta.ndim:
            raise ValueError("need one factor perturbation per mode")

    def scaled(self, alpha) -> "TangentVector":
        return TangentVector(
            alpha * self.core_delta, tuple(alpha * v for v in self.factor_deltas)
        )


class ManifoldPoint:
    """A point on the fixed-rank manifold, with cached core unfoldings.

    Construction verifies that every core unfolding has full row rank
    (smallest singular value above ``CORE_SV_FLOOR`` relative to the largest);
    otherwise :class:`RankDeficientCoreError` is raised.
    """

    def __init__(self, tucker: TuckerTensor):
        self.tucker = tucker
        self._core_mats = [matricize(tucker.core, i) for i in range(tucker.ndim)]
        self._grams = []
        self.core_sv_ratios = []
        for i, c in enumerate(self._core_mats):
            gram = c @ c.conj().T
            # eigenvalues of C C^H are the squared singular values of C
            eigs = np.linalg.eigvalsh(gram)
            largest = max(eigs[-1], 0.0)
            smallest = max(eigs[0], 0.0)
            ratio = np.sqrt(smallest / largest) if largest > 0 else 0.0
            self.core_sv_ratios.append(ratio)
            if ratio <= CORE_SV_FLOOR:
                raise RankDeficientCoreError(
                    f"mode-{i} core unfolding is rank deficient "
                    f"(sv ratio {ratio:.3e} <= {CORE_SV_FLOOR:.0e})"
                )
            self._grams.append(gram)
        self._dense = None

    @classmethod
    def from_dense(cls, x, rank) -> "ManifoldPoint":
        """HOSVD-truncate a dense tensor onto the manifold."""
        return cls(hosvd_truncate(x, rank))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.tucker.shape

    @property
    def rank(self) -> tuple[int, ...]:
        return self.tucker.rank

    @property
    def factors(self) -> tuple[np.ndarray, ...]:
        return self.tucker.factors

    @property
    def core(self) -> np.ndarray:
        return self.tucker.core

    def to_dense(self) -> np.ndarray:
        if self._dense is None:
            self._dense = self.tucker.full()
        return self._dense

    def solve_core_gram(self, mode: int, rhs: np.ndarray) -> np.ndarray:
        """Return ``rhs @ (C_(mode) C_(mode)^H)^{-1}`` via a Hermitian solve."""
        gram = self._grams[mode]
        return np.linalg.solve(gram, rhs.conj().T).conj().T


def tangent_embed(point: ManifoldPoint, tv: TangentVector) -> np.ndarray:
    """Ambient (dense) tensor represented by the tangent parameters:
    ``G x_i U_i (all i) + sum_i C x_i V_i x_{j != i} U_j``."""
    out = multi_mode_product(tv.core_delta, point.factors)
    for i, v in enumerate(tv.factor_deltas):
        mats = list(point.factors)
        mats[i] = v
        out = out + multi_mode_product(point.core, mats)
    return out


def project_tangent(point: ManifoldPoint, ambient) -> TangentVector:
    """Orthogonal projection of an ambient tensor onto the tangent space.

    ``G = A x_j U_j^H`` over all modes; for each mode,
    ``V_i = (I - U_i U_i^H) [A x_{j != i} U_j^H]_(i) C_(i)^+`` with the
    pseudo-inverse evaluated through the full-row-rank Gram solve.  The gauge
    condition holds by construction.
    """
    a = np.asarray(ambient)
    if a.shape != point.shape:
        raise ValueError(f"ambient shape {a.shape} != point shape {point.shape}")
    adjoints = [u.conj().T for u in point.factors]
    core_delta = multi_mode_product(a, adjoints)
    factor_deltas = []
    for i, u in enumerate(point.factors):
        partial = multi_mode_product(a, adjoints, skip=i)
        m = matricize(partial, i) @ point._core_mats[i].conj().T
        w = point.solve_core_gram(i, m)
        factor_deltas.append(w - u @ (u.conj().T @ w))
    return TangentVector(core_delta, tuple(factor_deltas))


def riemannian_gradient(point: ManifoldPoint, euclidean_grad) -> TangentVector:
    """Riemannian gradient: tangent-space projection of the Euclidean gradient."""
    return project_tangent(point, euclidean_grad)


def retract(point: ManifoldPoint, tv: TangentVector, step: float) -> ManifoldPoint:
    """HOSVD retraction of ``x + step * embed(tv)`` back onto the manifold.

    ``step`` may be negative; the solvers pass the descent direction with an
    explicit sign.
    """
    moved = point.to_dense() + step * tangent_embed(point, tv)
    return ManifoldPoint(hosvd_truncate(moved, point.rank))


def random_point(shape, rank, rng: np.random.Generator) -> ManifoldPoint:
    """Random manifold point: Gaussian complex core, orthonormalized factors."""
    rank = validate_rank(shape, rank)
    core = rng.standard_normal(rank) + 1j * rng.standard_normal(rank)
    factors = []
    for n, r in zip(shape, rank):
        g = rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))
        q, _ = np.linalg.qr(g)
        factors.append(q)
    return ManifoldPoint(TuckerTensor(core, tuple(factors)))


def random_tangent(point: ManifoldPoint, rng: np.random.Generator) -> TangentVector:
    """Random gauge-fixed tangent vector at ``point`` (unit Frobenius norm)."""
    g = rng.standard_normal(point.rank) + 1j * rng.standard_normal(point.rank)
    deltas = []
    for u in point.factors:
        v = rng.standard_normal(u.shape) + 1j * rng.standard_normal(u.shape)
        v = v - u @ (u.conj().T @ v)
        deltas.append(v)
    tv = TangentVector(g, tuple(deltas))
    nrm = np.linalg.norm(tangent_embed(point, tv))
    return tv.scaled(1.0 / nrm) if nrm > 0 else tv
