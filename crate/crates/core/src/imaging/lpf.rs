//! Block-mean low-pass source coding.
//!
//! The image is split into non-overlapping `b×b` blocks (edges padded by
//! replication) and each block is replaced by its rounded mean. The payload is
//! one byte per block per channel, so the compression ratio is exactly `b²`
//! when `b` divides both dimensions.

use alloc::vec::Vec;

use super::{div_round_half_even, to_sample, BlockGrid, Codec, CompressedImage, Header, Image};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reconstruction {
    /// Tile each block mean over its block.
    Replicate,
    /// Interpolate between block centres.
    Bilinear,
}

impl Reconstruction {
    fn flag(self) -> u8 {
        match self {
            Reconstruction::Replicate => 0,
            Reconstruction::Bilinear => 1,
        }
    }

    fn from_flag(flag: u8) -> Self {
        if flag & 1 == 1 {
            Reconstruction::Bilinear
        } else {
            Reconstruction::Replicate
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LpfConfig {
    pub block_size: usize,
    pub reconstruction: Reconstruction,
}

impl LpfConfig {
    pub fn new(block_size: usize, reconstruction: Reconstruction) -> Result<Self> {
        if block_size == 0 || block_size > u8::MAX as usize {
            return Err(Error::InvalidConfig("LPF block size must be in 1..=255"));
        }
        Ok(LpfConfig {
            block_size,
            reconstruction,
        })
    }
}

pub fn lpf_encode(image: &Image, config: &LpfConfig) -> CompressedImage {
    let b = config.block_size.max(1);
    let (w, h, ch) = (image.width(), image.height(), image.channels());
    let (gw, gh) = (w.div_ceil(b), h.div_ceil(b));
    let area = (b * b) as u64;
    let mut payload = Vec::with_capacity(gw * gh * ch);
    for by in 0..gh {
        for bx in 0..gw {
            for c in 0..ch {
                let mut sum = 0u64;
                for y in by * b..(by + 1) * b {
                    for x in bx * b..(bx + 1) * b {
                        sum += image.get_clamped(x, y, c) as u64;
                    }
                }
                payload.push(div_round_half_even(sum, area) as u8);
            }
        }
    }
    CompressedImage {
        header: Header {
            codec: Codec::Lpf,
            param: b as u8,
            width: w as u32,
            height: h as u32,
            channels: ch as u8,
            flags: config.reconstruction.flag(),
        },
        payload,
    }
}

/// Extracts the block-mean grid from an LPF payload.
pub fn block_grid(compressed: &CompressedImage) -> Result<BlockGrid> {
    let header = &compressed.header;
    if header.codec != Codec::Lpf {
        return Err(Error::InvalidConfig("expected an LPF payload"));
    }
    if header.param == 0 {
        return Err(Error::InvalidConfig("LPF block size must be in 1..=255"));
    }
    let (gw, gh) = header.grid_dims();
    BlockGrid::new(gw, gh, header.channels(), compressed.payload.clone())
}

pub fn lpf_reconstruct(compressed: &CompressedImage) -> Result<Image> {
    let grid = block_grid(compressed)?;
    let header = &compressed.header;
    let b = header.param as usize;
    let (w, h) = (header.width(), header.height());
    match Reconstruction::from_flag(header.flags) {
        Reconstruction::Replicate => {
            Image::from_fn(w, h, grid.channels, |x, y, c| grid.get(x / b, y / b, c))
        }
        Reconstruction::Bilinear => bilinear_upscale(&grid, b, (w, h), (w, h)),
    }
}

/// Bilinear interpolation of block means, anchored at block centres.
///
/// `original` is the size of the image the grid was computed from and
/// `target` the size of the output. Block `i` has its centre at pixel
/// `i·b + (b−1)/2` of the original; coordinates beyond the outermost centres
/// are clamped.
pub fn bilinear_upscale(
    grid: &BlockGrid,
    block_size: usize,
    original: (usize, usize),
    target: (usize, usize),
) -> Result<Image> {
    let b = block_size.max(1) as f64;
    let sx = original.0 as f64 / target.0 as f64;
    let sy = original.1 as f64 / target.1 as f64;
    let axis = |p: usize, scale: f64, cells: usize| -> (usize, usize, f64) {
        let u = ((p as f64 + 0.5) * scale) / b - 0.5;
        let u = u.clamp(0.0, (cells - 1) as f64);
        let i0 = libm::floor(u) as usize;
        let i1 = (i0 + 1).min(cells - 1);
        (i0, i1, u - i0 as f64)
    };
    let xs: Vec<_> = (0..target.0).map(|x| axis(x, sx, grid.width)).collect();
    let ys: Vec<_> = (0..target.1).map(|y| axis(y, sy, grid.height)).collect();
    Image::from_fn(target.0, target.1, grid.channels, |x, y, c| {
        let (x0, x1, tx) = xs[x];
        let (y0, y1, ty) = ys[y];
        let top = grid.get(x0, y0, c) as f64 * (1.0 - tx) + grid.get(x1, y0, c) as f64 * tx;
        let bottom = grid.get(x0, y1, c) as f64 * (1.0 - tx) + grid.get(x1, y1, c) as f64 * tx;
        to_sample(top * (1.0 - ty) + bottom * ty)
    })
}
