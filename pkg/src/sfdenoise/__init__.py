"""Distribution-agnostic risk estimation and spatially-varying Gaussian denoising."""

from sfdenoise.imagecore import (
    PGMError,
    Region,
    as_image,
    convolve,
    load_pgm,
    mse,
    psnr,
    save_pgm,
)
from sfdenoise.kernels import Kernel, KernelParams, make_kernel
from sfdenoise.noise import NoiseSpec, corrupt, estimate_sigma, sigma_for_psnr
from sfdenoise.optimizer import OptimizerSettings, finite_diff_gradient, minimize
from sfdenoise.risk import RiskEstimate, filter_divergence, lsi_divergence, oracle_mse, stein_free_risk
from sfdenoise.svgs import (
    BlockLayout,
    BlockRecord,
    DenoiseConfig,
    block_layout,
    denoise,
    estimate_orientation,
    optimize_block,
)

__version__ = "0.1.0"

__all__ = [
    "BlockLayout",
    "BlockRecord",
    "DenoiseConfig",
    "Kernel",
    "KernelParams",
    "NoiseSpec",
    "OptimizerSettings",
    "PGMError",
    "Region",
    "RiskEstimate",
    "as_image",
    "block_layout",
    "convolve",
    "corrupt",
    "denoise",
    "estimate_orientation",
    "estimate_sigma",
    "filter_divergence",
    "finite_diff_gradient",
    "load_pgm",
    "lsi_divergence",
    "make_kernel",
    "minimize",
    "mse",
    "optimize_block",
    "oracle_mse",
    "psnr",
    "save_pgm",
    "sigma_for_psnr",
    "stein_free_risk",
]
