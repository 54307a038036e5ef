"""Dynamic MRI reconstruction on low-multilinear-rank tensor manifolds.

Reconstructs 2-D+time image series from undersampled k-space by Riemannian
gradient descent on the manifold of fixed-multilinear-rank tensors, with an
iterative hard thresholding baseline, simulated Cartesian/radial sampling,
a dynamic phantom, and image-quality metrics.
"""

from .tensors import (
    TuckerTensor,
    dematricize,
    hosvd_truncate,
    kron_chain,
    matricize,
    mode_product,
    multi_mode_product,
    multilinear_rank,
    truncated_svd,
    tucker_assemble,
    validate_rank,
)
from .manifold import (
    CORE_SV_FLOOR,
    ManifoldPoint,
    RankDeficientCoreError,
    TangentVector,
    manifold_dim,
    project_tangent,
    random_point,
    random_tangent,
    retract,
    riemannian_gradient,
    tangent_embed,
)
from .mri import (
    FourierEncoding,
    PointwiseSampling,
    RegularizerConfig,
    SamplingMask,
    adjoint,
    data_gradient,
    fft2c,
    forward,
    gen_mask_gaussian,
    gen_mask_radial,
    gen_mask_uniform_interleaved,
    gen_phantom,
    ifft2c,
    regularizer_gradient,
    regularizer_value,
)
from .solvers import (
    ReconProblem,
    SolveReport,
    SolverConfig,
    objective,
    solve,
    solve_iht,
    solve_riemannian_gd,
)
from .metrics import MetricReport, evaluate, mse, psnr, ssim
from .fileio import (
    read_cten,
    read_ctkr,
    read_mask,
    write_cten,
    write_ctkr,
    write_mask,
    write_metrics_csv,
    write_metrics_json,
    write_report_csv,
    write_report_json,
)

__version__ = "0.1.0"

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
    "kron_chain",
    "ManifoldPoint",
    "TangentVector",
    "RankDeficientCoreError",
    "CORE_SV_FLOOR",
    "manifold_dim",
    "project_tangent",
    "riemannian_gradient",
    "tangent_embed",
    "retract",
    "random_point",
    "random_tangent",
    "SamplingMask",
    "FourierEncoding",
    "PointwiseSampling",
    "RegularizerConfig",
    "fft2c",
    "ifft2c",
    "forward",
    "adjoint",
    "data_gradient",
    "regularizer_value",
    "regularizer_gradient",
    "gen_mask_gaussian",
    "gen_mask_radial",
    "gen_mask_uniform_interleaved",
    "gen_phantom",
    "ReconProblem",
    "SolverConfig",
    "SolveReport",
    "objective",
    "solve",
    "solve_iht",
    "solve_riemannian_gd",
    "MetricReport",
    "mse",
    "psnr",
    "ssim",
    "evaluate",
    "read_cten",
    "write_cten",
    "read_ctkr",
    "write_ctkr",
    "read_mask",
    "write_mask",
    "write_report_csv",
    "write_report_json",
    "write_metrics_csv",
    "write_metrics_json",
    "__version__",
]
