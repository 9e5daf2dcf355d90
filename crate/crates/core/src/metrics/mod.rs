//! Measurement surface: image quality, error structure, transmitter
//! complexity and coverage.

mod complexity;
mod coverage;
mod errors;
mod quality;

pub use complexity::{
    tx_flops, ComplexityModel, SourceCoding, TxConfig, DCT_OPS_PER_BLOCK, LPF_MULTIPLIES_PER_BLOCK,
};
pub use coverage::{coverage, min_usable_snr, CoverageCurve, Crossing, INFINITE_QUALITY_CAP};
pub use errors::{run_length_stats, ErrorAccumulator, ErrorStats};
pub use quality::{mse, psnr, ssim, SSIM_C1, SSIM_C2, SSIM_WINDOW};
