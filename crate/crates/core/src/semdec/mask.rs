use alloc::vec::Vec;

use crate::imaging::BlockGrid;

pub const DEFAULT_DELTA: u8 = 32;

/// Per-cell "suspected corrupted" flags over a block-mean grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorMask {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub flags: Vec<bool>,
}

impl ErrorMask {
    pub fn clean(width: usize, height: usize, channels: usize) -> Self {
        ErrorMask {
            width,
            height,
            channels,
            flags: alloc::vec![false; width * height * channels],
        }
    }

    pub fn flagged(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    /// Corruption fraction `f = flagged / cells`.
    pub fn fraction(&self) -> f64 {
        if self.flags.is_empty() {
            0.0
        } else {
            self.flagged() as f64 / self.flags.len() as f64
        }
    }

    pub fn aligned_with(&self, grid: &BlockGrid) -> bool {
        self.width == grid.width && self.height == grid.height && self.channels == grid.channels
    }
}

/// Indices of the in-bounds 8-neighbours of `(x, y)`.
pub(super) fn neighbours(
    width: usize,
    height: usize,
    x: usize,
    y: usize,
) -> impl Iterator<Item = (usize, usize)> {
    let xs = x.saturating_sub(1)..=(x + 1).min(width - 1);
    xs.flat_map(move |nx| {
        (y.saturating_sub(1)..=(y + 1).min(height - 1)).map(move |ny| (nx, ny))
    })
    .filter(move |&(nx, ny)| (nx, ny) != (x, y))
}

/// Median of a small sample; an even count averages the middle pair.
pub(super) fn median(values: &mut [u8]) -> f64 {
    values.sort_unstable();
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2] as f64
    } else {
        (values[n / 2 - 1] as f64 + values[n / 2] as f64) / 2.0
    }
}

/// Flags a cell when it differs from the median of its in-bounds 3×3
/// neighbours (itself excluded, per channel) by more than `delta`.
pub fn estimate_error_mask(grid: &BlockGrid, delta: u8) -> ErrorMask {
    let mut mask = ErrorMask::clean(grid.width, grid.height, grid.channels);
    let mut buf = [0u8; 8];
    for y in 0..grid.height {
        for x in 0..grid.width {
            for c in 0..grid.channels {
                let mut n = 0;
                for (nx, ny) in neighbours(grid.width, grid.height, x, y) {
                    buf[n] = grid.get(nx, ny, c);
                    n += 1;
                }
                if n == 0 {
                    continue;
                }
                let med = median(&mut buf[..n]);
                let v = grid.get(x, y, c) as f64;
                mask.flags[grid.index(x, y, c)] = libm::fabs(v - med) > delta as f64;
            }
        }
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;
    use alloc::vec;

    fn grid(w: usize, h: usize, f: impl Fn(usize, usize) -> u8) -> BlockGrid {
        let values = (0..h).flat_map(|y| (0..w).map(move |x| (x, y))).map(|(x, y)| f(x, y)).collect();
        BlockGrid::new(w, h, 1, values).unwrap()
    }

    #[test]
    fn smooth_ramp_unflagged() {
        let g = grid(16, 16, |x, y| (x * 10 + y * 5) as u8);
        // Independent check: the largest step between any cell and any
        // neighbour is 15, so no median can be further than δ away.
        let max_step = (0..16usize)
            .flat_map(|y| (0..16usize).map(move |x| (x, y)))
            .flat_map(|(x, y)| neighbours(16, 16, x, y).map(move |n| (x, y, n)))
            .map(|(x, y, (nx, ny))| (g.get(x, y, 0) as i32 - g.get(nx, ny, 0) as i32).abs())
            .max()
            .unwrap();
        assert!(max_step < DEFAULT_DELTA as i32);
        assert_eq!(estimate_error_mask(&g, DEFAULT_DELTA).fraction(), 0.0);
    }

    #[test]
    fn isolated_outlier_flagged_alone() {
        for (px, py) in [(3, 4), (0, 0), (7, 2), (0, 5)] {
            let g = grid(8, 6, |x, y| if (x, y) == (px, py) { 255 } else { 90 });
            let m = estimate_error_mask(&g, DEFAULT_DELTA);
            assert_eq!(m.flagged(), 1);
            assert!(m.flags[g.index(px, py, 0)]);
        }
    }

    #[test]
    fn random_grid_total() {
        let mut rng = CounterRng::new(8);
        let g = grid(20, 20, |_, _| 0).values.iter().map(|_| rng.below(256) as u8).collect();
        let g = BlockGrid::new(20, 20, 1, g).unwrap();
        let f = estimate_error_mask(&g, DEFAULT_DELTA).fraction();
        assert!((0.0..=1.0).contains(&f));
        assert!(f > 0.3);
    }

    #[test]
    fn border_median_of_even_count() {
        // Corner (0,0) has neighbours 10, 10, 60: median 10.
        let g = BlockGrid::new(2, 2, 1, vec![50, 10, 10, 60]).unwrap();
        let m = estimate_error_mask(&g, 32);
        assert!(m.flags[0]);
        // Cell (1,1) = 60 with neighbours 50, 10, 10: median 10, flagged.
        assert!(m.flags[3]);
        let mut v = [4u8, 1, 3, 2];
        assert_eq!(median(&mut v), 2.5);
    }

    #[test]
    fn channels_are_independent() {
        let mut values = vec![100u8; 5 * 5 * 3];
        values[(2 * 5 + 2) * 3 + 1] = 0;
        let g = BlockGrid::new(5, 5, 3, values).unwrap();
        let m = estimate_error_mask(&g, 32);
        assert_eq!(m.flagged(), 1);
        assert!(m.flags[(2 * 5 + 2) * 3 + 1]);
    }
}
