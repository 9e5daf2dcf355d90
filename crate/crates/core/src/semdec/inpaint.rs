use alloc::vec::Vec;

use super::mask::{estimate_error_mask, median, neighbours, ErrorMask, DEFAULT_DELTA};
use super::{upscale_grid, Capabilities, SemanticDecoder};
use crate::error::{Error, Result};
use crate::imaging::{block_grid, to_sample, BlockGrid, CompressedImage, Image};

pub const DEFAULT_MAX_PASSES: usize = 5;

/// Replaces flagged cells by the median of their unflagged neighbours.
///
/// Each pass reads the grid and mask as they were at the start of the pass;
/// repaired cells count as unflagged from the next pass on. Stops after
/// `max_passes` or when no flagged cell has an unflagged neighbour. Cells
/// that are never reached keep their received value.
pub fn inpaint_grid(grid: &BlockGrid, mask: &ErrorMask, max_passes: usize) -> Result<BlockGrid> {
    if !mask.aligned_with(grid) {
        return Err(Error::DimensionMismatch);
    }
    let mut values = grid.values.clone();
    let mut flags = mask.flags.clone();
    let mut buf = [0u8; 8];
    for _ in 0..max_passes {
        let mut updates: Vec<(usize, u8)> = Vec::new();
        for y in 0..grid.height {
            for x in 0..grid.width {
                for c in 0..grid.channels {
                    let idx = grid.index(x, y, c);
                    if !flags[idx] {
                        continue;
                    }
                    let mut n = 0;
                    for (nx, ny) in neighbours(grid.width, grid.height, x, y) {
                        let j = grid.index(nx, ny, c);
                        if !flags[j] {
                            buf[n] = values[j];
                            n += 1;
                        }
                    }
                    if n > 0 {
                        updates.push((idx, to_sample(median(&mut buf[..n]))));
                    }
                }
            }
        }
        if updates.is_empty() {
            break;
        }
        for (idx, v) in updates {
            values[idx] = v;
            flags[idx] = false;
        }
    }
    BlockGrid::new(grid.width, grid.height, grid.channels, values)
}

/// Outlier-mask inpainting followed by bilinear upscaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InpaintDecoder {
    pub delta: u8,
    pub max_passes: usize,
}

impl Default for InpaintDecoder {
    fn default() -> Self {
        InpaintDecoder {
            delta: DEFAULT_DELTA,
            max_passes: DEFAULT_MAX_PASSES,
        }
    }
}

impl SemanticDecoder for InpaintDecoder {
    fn id(&self) -> &str {
        "inpaint"
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            handles_error_mask: true,
            target_upscale: 0,
        }
    }

    /// Without a mask one is estimated from the received grid.
    fn restore(
        &self,
        received: &CompressedImage,
        mask: Option<&ErrorMask>,
        width: usize,
        height: usize,
    ) -> Result<Image> {
        let grid = block_grid(received)?;
        let repaired = match mask {
            Some(m) => inpaint_grid(&grid, m, self.max_passes)?,
            None => inpaint_grid(&grid, &estimate_error_mask(&grid, self.delta), self.max_passes)?,
        };
        upscale_grid(received, &repaired, width, height)
    }
}

#[cfg(test)]
mod tests {
    use super::super::UpsampleDecoder;
    use super::*;
    use crate::imaging::{lpf_encode, LpfConfig, Reconstruction};
    use crate::metrics::psnr;
    use crate::rng::CounterRng;
    use alloc::vec;

    #[test]
    fn constant_grid_single_corruption() {
        let mut values = vec![100u8; 36];
        values[14] = 3;
        let g = BlockGrid::new(6, 6, 1, values).unwrap();
        let m = estimate_error_mask(&g, DEFAULT_DELTA);
        let r = inpaint_grid(&g, &m, DEFAULT_MAX_PASSES).unwrap();
        assert!(r.values.iter().all(|&v| v == 100));
    }

    #[test]
    fn clean_mask_matches_upsample() {
        let img = Image::from_fn(40, 24, 1, |x, y, _| ((x * 7) ^ (y * 3)) as u8).unwrap();
        let c = lpf_encode(&img, &LpfConfig::new(4, Reconstruction::Bilinear).unwrap());
        let g = block_grid(&c).unwrap();
        let clean = ErrorMask::clean(g.width, g.height, g.channels);
        assert_eq!(
            InpaintDecoder::default().restore(&c, Some(&clean), 40, 24).unwrap(),
            UpsampleDecoder.restore(&c, None, 40, 24).unwrap()
        );
    }

    #[test]
    fn fully_flagged_grid_keeps_values() {
        let g = BlockGrid::new(3, 3, 1, (0..9).map(|v| v * 20).collect()).unwrap();
        let m = ErrorMask {
            width: 3,
            height: 3,
            channels: 1,
            flags: vec![true; 9],
        };
        assert_eq!(inpaint_grid(&g, &m, 5).unwrap(), g);
    }

    #[test]
    fn fills_a_hole_from_the_outside_in() {
        // A 3×3 hole in a constant field needs two passes to close.
        let mut values = vec![50u8; 49];
        let mut flags = vec![false; 49];
        for y in 2..5 {
            for x in 2..5 {
                values[y * 7 + x] = 250;
                flags[y * 7 + x] = true;
            }
        }
        let g = BlockGrid::new(7, 7, 1, values).unwrap();
        let m = ErrorMask {
            width: 7,
            height: 7,
            channels: 1,
            flags,
        };
        assert_eq!(inpaint_grid(&g, &m, 1).unwrap().values[3 * 7 + 3], 250);
        assert!(inpaint_grid(&g, &m, 2).unwrap().values.iter().all(|&v| v == 50));
    }

    #[test]
    fn misaligned_mask() {
        let g = BlockGrid::new(3, 3, 1, vec![0; 9]).unwrap();
        assert!(inpaint_grid(&g, &ErrorMask::clean(3, 2, 1), 5).is_err());
    }

    #[test]
    fn sparse_corruption_improves_psnr() {
        let img = Image::from_fn(128, 128, 1, |x, y, _| {
            let fx = x as f64 / 128.0;
            let fy = y as f64 / 128.0;
            to_sample(128.0 + 70.0 * libm::sin(3.0 * fx + 1.5 * fy) + 30.0 * libm::cos(5.0 * fy))
        })
        .unwrap();
        let c = lpf_encode(&img, &LpfConfig::new(4, Reconstruction::Bilinear).unwrap());
        let mut rng = CounterRng::new(17);
        let (mut before, mut after) = (0.0, 0.0);
        for _ in 0..20 {
            let mut payload = c.payload.clone();
            for v in payload.iter_mut() {
                if rng.next_f64() < 0.05 {
                    *v ^= 1 << rng.below(8);
                }
            }
            let rx = c.with_payload(payload);
            before += psnr(&img, &UpsampleDecoder.restore(&rx, None, 128, 128).unwrap()).unwrap();
            after += psnr(&img, &InpaintDecoder::default().restore(&rx, None, 128, 128).unwrap()).unwrap();
        }
        assert!(after > before, "{after} vs {before}");
    }
}
