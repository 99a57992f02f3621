"""Low-tubal-rank plus sparse tensor decomposition toolkit."""

from .errors import (
    BadDtype,
    BadMagic,
    BadMaxval,
    DimMismatch,
    ImagResidualTooLarge,
    InvalidParam,
    InvalidSpec,
    NoConvergence,
    NonFinite,
    SizeMismatch,
    TooSmall,
    TrpcaError,
    TruncatedFile,
    ZeroReference,
    ZeroTensor,
)
from .experiments import (
    ConvergenceCurves,
    SuccessGrid,
    SyntheticSpec,
    capture_convergence,
    gen_low_rank,
    gen_sparse,
    run_grid,
)
from .metrics import psnr, rse, ssim
from .prox import RatioScaleSolution, ratio_scale, shrink
from .solvers import (
    IterTrace,
    SolverConfig,
    SolverResult,
    SolverState,
    check_convergence,
    default_lambda,
    lagrangian_value,
    solve_tnf,
    solve_tnf_plus,
    solve_tnn,
)
from .tensor import (
    Dims,
    bcirc,
    conj_transpose,
    fft_mode3,
    fold,
    fro,
    identity_tensor,
    ifft_mode3,
    inner,
    l1,
    linf,
    t_product,
    unfold,
)
from .tensorio import corrupt_salt, load_ppm, read_tns, save_ppm, write_tns
from .tsvd import (
    IncoherenceReport,
    TSvdFactors,
    complex_svd,
    incoherence,
    t_svd,
    t_svt,
    tnf,
    tnn,
    tubal_rank,
)

__version__ = "0.1.0"
