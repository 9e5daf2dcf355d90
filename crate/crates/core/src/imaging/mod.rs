//! Images, the block-mean (LPF) codec and the baseline DCT codec.

mod container;
pub mod dct;
mod image;
pub mod lpf;

pub use container::{Codec, CompressedImage, Header, HEADER_LEN, MAGIC};
pub use dct::{dct_decode, dct_decode_partial, dct_encode, DctConfig, PartialDecode};
pub use image::{BlockGrid, Image};
pub use lpf::{bilinear_upscale, block_grid, lpf_encode, lpf_reconstruct, LpfConfig, Reconstruction};

/// Integer division rounding to nearest, ties to even.
#[inline]
pub(crate) fn div_round_half_even(num: u64, den: u64) -> u64 {
    let q = num / den;
    let r = num % den;
    if 2 * r > den || (2 * r == den && q & 1 == 1) {
        q + 1
    } else {
        q
    }
}

/// Rounds to the nearest integer, ties to even, and clamps to a sample.
#[inline]
pub(crate) fn to_sample(v: f64) -> u8 {
    let r = libm::rint(v);
    if r <= 0.0 {
        0
    } else if r >= 255.0 {
        255
    } else {
        r as u8
    }
}
