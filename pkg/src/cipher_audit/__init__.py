"""Bit-permutation image cipher and its statistical audit harness."""

from .cipher import (
    BLOCK_BYTES,
    CipherKey,
    DimensionError,
    build_diffusion_matrix,
    cat_map_point,
    decrypt,
    derive_trial_key,
    diffuse,
    encrypt,
    from_bitplanes,
    gf2_inverse,
    gf2_rank,
    inverse_permute_bits,
    key_bits,
    key_from_hex,
    key_to_hex,
    param_bits,
    permute_bits,
    to_bitplanes,
)
from .experiments import (
    ExperimentConfig,
    avalanche_sweep,
    error_propagation,
    keyspace_report,
    uniformity_sweep,
)
from .metrics import CHI2_THRESHOLD, chi_square, hamming_percent, psnr, ssim

__all__ = [
    "BLOCK_BYTES",
    "CHI2_THRESHOLD",
    "CipherKey",
    "DimensionError",
    "ExperimentConfig",
    "avalanche_sweep",
    "build_diffusion_matrix",
    "cat_map_point",
    "chi_square",
    "decrypt",
    "derive_trial_key",
    "diffuse",
    "encrypt",
    "error_propagation",
    "from_bitplanes",
    "gf2_inverse",
    "gf2_rank",
    "hamming_percent",
    "inverse_permute_bits",
    "key_bits",
    "key_from_hex",
    "key_to_hex",
    "keyspace_report",
    "param_bits",
    "permute_bits",
    "psnr",
    "ssim",
    "to_bitplanes",
    "uniformity_sweep",
]

__version__ = "0.1.0"
