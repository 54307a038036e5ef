"""Reconstruction solvers under a fixed multilinear-rank constraint.

Two algorithms over the same problem object:

* iterative hard thresholding: Euclidean gradient step followed by HOSVD
  truncation back to rank ``r``;
* Riemannian gradient descent: the Euclidean gradient is projected onto the
  tangent space at the current (Tucker-form) iterate and the step is mapped
  back to the manifold by the HOSVD retraction, so every iterate stays on
  the manifold.

Both support a fixed step size or Armijo backtracking, stop on an iterate
relative-change tolerance, and log per-iteration telemetry in a
:class:`SolveReport`.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .manifold import (
    ManifoldPoint,
    RankDeficientCoreError,
    project_tangent,
    tangent_embed,
)
from .mri import RegularizerConfig, regularizer_gradient, regularizer_value
from .tensors import hosvd_truncate, multilinear_rank, validate_rank

__all__ = [
    "SolverConfig",
    "ReconProblem",
    "SolveReport",
    "objective",
    "solve",
    "solve_iht",
    "solve_riemannian_gd",
]

STEP_FLOOR = 1e-12
_TINY = 1e-300


@dataclass(frozen=True)
class SolverConfig:
    """Algorithm selection and iteration controls.

    ``step_rule`` is ``"armijo"`` (backtracking with sufficient-decrease
    constant ``armijo_c``, shrink factor ``armijo_beta``, initial step
    ``eta0``) or ``"fixed"`` (always ``eta0``).  ``tolerance`` stops the
    solver once the relative iterate change drops below it; 0 disables the
    check.  ``validate=True`` turns on in-loop manifold feasibility and
    sufficient-decrease assertions (test instrumentation).
    """

    algorithm: str = "rgd"
    max_iterations: int = 10
    step_rule: str = "armijo"
    eta0: float = 1.0
    armijo_c: float = 1e-4
    armijo_beta: float = 0.5
    tolerance: float = 0.0
    seed: int = 0
    validate: bool = False

    def __post_init__(self):
        if self.algorithm not in ("rgd", "iht"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.step_rule not in ("armijo", "fixed"):
            raise ValueError(f"unknown step rule {self.step_rule!r}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.eta0 <= 0:
            raise ValueError("eta0 must be positive")
        if not 0 < self.armijo_beta < 1:
            raise ValueError("armijo_beta must lie in (0, 1)")
        if not 0 < self.armijo_c < 1:
            raise ValueError("armijo_c must lie in (0, 1)")
        if self.tolerance < 0:
            raise ValueError("tolerance must be nonnegative")


@dataclass(frozen=True)
class ReconProblem:
    """Measurements plus model: encoding operator, measured data ``y``, the
    target multilinear rank, and the regularizer (its ``weight`` is the
    lambda of the objective)."""

    operator: object
    kspace: np.ndarray
    rank: tuple = None
    regularizer: RegularizerConfig = RegularizerConfig(kind="none")

    def __post_init__(self):
        object.__setattr__(self, "kspace", np.asarray(self.kspace))
        if self.rank is None:
            # truncate the temporal mode only (the spatial modes stay full)
            n_x, n_y, n_t = self.operator.shape
            object.__setattr__(self, "rank", (n_x, n_y, min(13, n_t)))
        object.__setattr__(
            self, "rank", validate_rank(self.operator.shape, self.rank)
        )
        if self.kspace.shape != tuple(self.operator.shape):
            raise ValueError("measurement shape does not match operator shape")

    def zero_filled(self) -> np.ndarray:
        """Adjoint applied to the data: baseline image and initializer."""
        return self.operator.adjoint(self.kspace)


@dataclass
class SolveReport:
    """Per-iteration telemetry and solve outcome.

    Row ``k`` logs values at the start of iteration ``k``: objective and
    fidelity of ``x_k``, the (Riemannian or Euclidean) gradient norm, the
    accepted step size, wall-clock ms, and operation counts.  ``wall_ms`` is
    the only field exempt from determinism guarantees.
    """

    algorithm: str
    status: str = "max_iterations"
    message: str = ""
    iterations: int = 0
    objective: list = field(default_factory=list)
    fidelity: list = field(default_factory=list)
    grad_norm: list = field(default_factory=list)
    step_size: list = field(default_factory=list)
    rel_change: list = field(default_factory=list)
    wall_ms: list = field(default_factory=list)
    forward_evals: list = field(default_factory=list)
    adjoint_evals: list = field(default_factory=list)
    projections: list = field(default_factory=list)
    truncations: list = field(default_factory=list)
    linesearch_evals: list = field(default_factory=list)
    final_objective: float = float("nan")
    final_fidelity: float = float("nan")

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def signature(self) -> dict:
        """Deterministic content (everything except wall-clock timings)."""
        d = {k: v for k, v in self.__dict__.items() if k != "wall_ms"}
        return d


def objective(x, problem: ReconProblem) -> float:
    """``0.5 * ||A x - y||^2 + weight * D_eps(x)`` for the problem's model."""
    residual = problem.operator.forward(x) - problem.kspace
    return 0.5 * float(np.linalg.norm(residual) ** 2) + regularizer_value(
        x, problem.regularizer
    )


def solve(problem: ReconProblem, cfg: SolverConfig, callback=None):
    """Dispatch on ``cfg.algorithm``."""
    if cfg.algorithm == "iht":
        return solve_iht(problem, cfg, callback)
    return solve_riemannian_gd(problem, cfg, callback)


def _objective_terms(problem, x):
    residual = problem.operator.forward(x) - problem.kspace
    fid = 0.5 * float(np.linalg.norm(residual) ** 2)
    return residual, fid, fid + regularizer_value(x, problem.regularizer)


def _full_gradient(problem, residual, x):
    g = problem.operator.adjoint(residual)
    reg = problem.regularizer
    if reg.kind != "none" and reg.weight > 0:
        g = g + regularizer_gradient(x, reg)
    return g


def _initial_iterate(problem: ReconProblem):
    """HOSVD-truncated zero-filled start; at full rank the truncation is the
    identity, so the zero-filled tensor is returned unchanged (bit-exact)."""
    zf = problem.zero_filled()
    if tuple(problem.rank) == tuple(zf.shape):
        return zf, None
    t = hosvd_truncate(zf, problem.rank)
    return t.full(), t


def solve_iht(problem: ReconProblem, cfg: SolverConfig, callback=None):
    """Iterative hard thresholding: ``x_{k+1} = HOSVD_r(x_k - eta_k grad f)``."""
    if cfg.algorithm != "iht":
        raise ValueError("config algorithm is not 'iht'")
    report = SolveReport(algorithm="iht")
    x, _ = _initial_iterate(problem)
    f_init = None
    y_norm = float(np.linalg.norm(problem.kspace))
    div_floor = 1e-12 * (1.0 + y_norm**2)
    grad_floor = 1e-14 * (1.0 + y_norm)

    for k in range(cfg.max_iterations):
        t0 = time.perf_counter()
        n_fwd = n_adj = n_trunc = n_ls = 0
        residual, fid, f_x = _objective_terms(problem, x)
        n_fwd += 1
        if f_init is None:
            f_init = f_x
        if f_x > 1e3 * (f_init + div_floor):
            report.status = "diverged"
            report.message = f"objective {f_x:.3e} exceeds 1e3 x initial {f_init:.3e}"
            break
        g = _full_gradient(problem, residual, x)
        n_adj += 1
        gn = float(np.linalg.norm(g))

        if gn <= grad_floor:
            report.status = "converged"
            report.message = "gradient vanished"
            report.objective.append(f_x)
            report.fidelity.append(fid)
            report.grad_norm.append(gn)
            report.step_size.append(0.0)
            report.rel_change.append(0.0)
            report.wall_ms.append(1e3 * (time.perf_counter() - t0))
            report.forward_evals.append(n_fwd)
            report.adjoint_evals.append(n_adj)
            report.projections.append(0)
            report.truncations.append(0)
            report.linesearch_evals.append(0)
            report.iterations += 1
            break

        if cfg.step_rule == "fixed":
            eta = cfg.eta0
            cand = hosvd_truncate(x - eta * g, problem.rank).full()
            n_trunc += 1
        else:
            eta = cfg.eta0
            cand = None
            while eta >= STEP_FLOOR:
                trial = hosvd_truncate(x - eta * g, problem.rank).full()
                n_trunc += 1
                _, _, f_trial = _objective_terms(problem, trial)
                n_fwd += 1
                n_ls += 1
                if f_trial <= f_x - cfg.armijo_c * eta * gn**2:
                    cand = trial
                    break
                eta *= cfg.armijo_beta
            if cand is None:
                report.status = "stalled"
                report.message = f"backtracking fell below {STEP_FLOOR:.0e}"
                break

        rel = float(np.linalg.norm(cand - x) / max(np.linalg.norm(x), _TINY))
        x = cand
        report.objective.append(f_x)
        report.fidelity.append(fid)
        report.grad_norm.append(gn)
        report.step_size.append(eta)
        report.rel_change.append(rel)
        report.wall_ms.append(1e3 * (time.perf_counter() - t0))
        report.forward_evals.append(n_fwd)
        report.adjoint_evals.append(n_adj)
        report.projections.append(0)
        report.truncations.append(n_trunc)
        report.linesearch_evals.append(n_ls)
        report.iterations += 1
        if callback is not None:
            callback(report.iterations, x)
        if cfg.tolerance > 0 and rel < cfg.tolerance:
            report.status = "converged"
            break

    _, report.final_fidelity, report.final_objective = _objective_terms(problem, x)
    return x, report


def solve_riemannian_gd(problem: ReconProblem, cfg: SolverConfig, callback=None):
    """Riemannian gradient descent on the fixed-rank manifold.

    Per iteration: ambient gradient ``A^H(Ax - y) + weight * grad D``,
    tangent-space projection, then the HOSVD retraction along the negative
    projected gradient with the configured step rule.
    """
    if cfg.algorithm != "rgd":
        raise ValueError("config algorithm is not 'rgd'")
    report = SolveReport(algorithm="rgd")
    y_norm = float(np.linalg.norm(problem.kspace))
    div_floor = 1e-12 * (1.0 + y_norm**2)
    grad_floor = 1e-14 * (1.0 + y_norm)

    x0, tucker0 = _initial_iterate(problem)

    # critical initializer: nothing to do, and no tangent space is needed
    # (covers the full-mask / full-rank identity case exactly)
    residual0, fid0, f0 = _objective_terms(problem, x0)
    g0 = _full_gradient(problem, residual0, x0)
    if float(np.linalg.norm(g0)) <= grad_floor:
        report.status = "converged"
        report.message = "gradient vanished at the initial iterate"
        report.objective.append(f0)
        report.fidelity.append(fid0)
        report.grad_norm.append(float(np.linalg.norm(g0)))
        report.step_size.append(0.0)
        report.rel_change.append(0.0)
        report.wall_ms.append(0.0)
        report.forward_evals.append(1)
        report.adjoint_evals.append(1)
        report.projections.append(0)
        report.truncations.append(0)
        report.linesearch_evals.append(0)
        report.iterations = 1
        report.final_fidelity, report.final_objective = fid0, f0
        return x0, report

    try:
        if tucker0 is None:
            point = ManifoldPoint.from_dense(x0, problem.rank)
        else:
            point = ManifoldPoint(tucker0)
    except RankDeficientCoreError as err:
        report.status = "rank_deficient"
        report.message = str(err)
        report.final_fidelity, report.final_objective = fid0, f0
        return x0, report

    f_init = None
    for k in range(cfg.max_iterations):
        t0 = time.perf_counter()
        n_fwd = n_adj = n_proj = n_retr = n_ls = 0
        x = point.to_dense()
        residual, fid, f_x = _objective_terms(problem, x)
        n_fwd += 1
        if f_init is None:
            f_init = f_x
        if f_x > 1e3 * (f_init + div_floor):
            report.status = "diverged"
            report.message = f"objective {f_x:.3e} exceeds 1e3 x initial {f_init:.3e}"
            break
        g = _full_gradient(problem, residual, x)
        n_adj += 1
        xi = project_tangent(point, g)
        n_proj += 1
        xi_ambient = tangent_embed(point, xi)
        gn = float(np.linalg.norm(xi_ambient))

        if gn <= grad_floor:
            report.status = "converged"
            report.message = "Riemannian gradient vanished"
            report.objective.append(f_x)
            report.fidelity.append(fid)
            report.grad_norm.append(gn)
            report.step_size.append(0.0)
            report.rel_change.append(0.0)
            report.wall_ms.append(1e3 * (time.perf_counter() - t0))
            report.forward_evals.append(n_fwd)
            report.adjoint_evals.append(n_adj)
            report.projections.append(n_proj)
            report.truncations.append(0)
            report.linesearch_evals.append(0)
            report.iterations += 1
            break

        try:
            if cfg.step_rule == "fixed":
                eta = cfg.eta0
                cand = _retract_dense(point, xi_ambient, -eta, problem.rank)
                n_retr += 1
            else:
                eta = cfg.eta0
                cand = None
                while eta >= STEP_FLOOR:
                    trial = _retract_dense(point, xi_ambient, -eta, problem.rank)
                    n_retr += 1
                    _, _, f_trial = _objective_terms(problem, trial.to_dense())
                    n_fwd += 1
                    n_ls += 1
                    if f_trial <= f_x - cfg.armijo_c * eta * gn**2:
                        cand = trial
                        break
                    eta *= cfg.armijo_beta
                if cand is None:
                    report.status = "stalled"
                    report.message = f"backtracking fell below {STEP_FLOOR:.0e}"
                    break
        except RankDeficientCoreError as err:
            report.status = "rank_deficient"
            report.message = str(err)
            break

        if cfg.validate:
            _validate_iterate(cand, problem.rank)
            if cfg.step_rule == "armijo":
                _, _, f_cand = _objective_terms(problem, cand.to_dense())
                assert f_cand <= f_x - cfg.armijo_c * eta * gn**2 + 1e-9 * (1 + abs(f_x))

        rel = float(
            np.linalg.norm(cand.to_dense() - x) / max(np.linalg.norm(x), _TINY)
        )
        point = cand
        report.objective.append(f_x)
        report.fidelity.append(fid)
        report.grad_norm.append(gn)
        report.step_size.append(eta)
        report.rel_change.append(rel)
        report.wall_ms.append(1e3 * (time.perf_counter() - t0))
        report.forward_evals.append(n_fwd)
        report.adjoint_evals.append(n_adj)
        report.projections.append(n_proj)
        report.truncations.append(n_retr)
        report.linesearch_evals.append(n_ls)
        report.iterations += 1
        if callback is not None:
            callback(report.iterations, point.to_dense())
        if cfg.tolerance > 0 and rel < cfg.tolerance:
            report.status = "converged"
            break

    x = point.to_dense()
    _, report.final_fidelity, report.final_objective = _objective_terms(problem, x)
    return x, report


def _retract_dense(point, xi_ambient, step, rank) -> ManifoldPoint:
    # dense-path retraction; xi_ambient is the already-embedded tangent tensor
    return ManifoldPoint(hosvd_truncate(point.to_dense() + step * xi_ambient, rank))


def _validate_iterate(point: ManifoldPoint, rank):
    for i, u in enumerate(point.factors):
        gap = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[1])))
        assert gap <= 1e-10, f"factor {i} lost orthonormality ({gap:.2e})"
    assert multilinear_rank(point.to_dense()) == tuple(rank)
