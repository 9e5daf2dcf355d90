use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::imaging::Image;

pub const SSIM_WINDOW: usize = 8;
/// `(0.01·255)²`
pub const SSIM_C1: f64 = 6.5025;
/// `(0.03·255)²`
pub const SSIM_C2: f64 = 58.5225;

pub fn mse(a: &Image, b: &Image) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::DimensionMismatch);
    }
    let sum: u64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = x as i64 - y as i64;
            (d * d) as u64
        })
        .sum();
    Ok(sum as f64 / a.pixels().len() as f64)
}

/// Peak 255. Identical images give `f64::INFINITY`.
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    let m = mse(a, b)?;
    if m == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * libm::log10(255.0 * 255.0 / m))
}

/// Mean SSIM over all fully contained 8×8 windows (stride 1, uniform
/// weights, population statistics), averaged over channels. Images smaller
/// than the window use a window clipped to the image.
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::DimensionMismatch);
    }
    let (w, h, ch) = (a.width(), a.height(), a.channels());
    let (ww, wh) = (SSIM_WINDOW.min(w), SSIM_WINDOW.min(h));
    let n = (ww * wh) as f64;
    let mut total = 0.0;
    for c in 0..ch {
        let x: Vec<f64> = (0..w * h).map(|i| a.pixels()[i * ch + c] as f64).collect();
        let y: Vec<f64> = (0..w * h).map(|i| b.pixels()[i * ch + c] as f64).collect();
        let sx = Integral::new(w, h, |i| x[i]);
        let sy = Integral::new(w, h, |i| y[i]);
        let sxx = Integral::new(w, h, |i| x[i] * x[i]);
        let syy = Integral::new(w, h, |i| y[i] * y[i]);
        let sxy = Integral::new(w, h, |i| x[i] * y[i]);
        let mut acc = 0.0;
        let mut count = 0usize;
        for y0 in 0..=h - wh {
            for x0 in 0..=w - ww {
                let mx = sx.sum(x0, y0, ww, wh) / n;
                let my = sy.sum(x0, y0, ww, wh) / n;
                let vx = (sxx.sum(x0, y0, ww, wh) / n - mx * mx).max(0.0);
                let vy = (syy.sum(x0, y0, ww, wh) / n - my * my).max(0.0);
                let cxy = sxy.sum(x0, y0, ww, wh) / n - mx * my;
                acc += ((2.0 * mx * my + SSIM_C1) * (2.0 * cxy + SSIM_C2))
                    / ((mx * mx + my * my + SSIM_C1) * (vx + vy + SSIM_C2));
                count += 1;
            }
        }
        total += acc / count as f64;
    }
    Ok(total / ch as f64)
}

/// Summed-area table with a zero first row and column.
struct Integral {
    stride: usize,
    table: Vec<f64>,
}

impl Integral {
    fn new(w: usize, h: usize, f: impl Fn(usize) -> f64) -> Self {
        let stride = w + 1;
        let mut table = vec![0.0; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0.0;
            for x in 0..w {
                row += f(y * w + x);
                table[(y + 1) * stride + x + 1] = table[y * stride + x + 1] + row;
            }
        }
        Integral { stride, table }
    }

    fn sum(&self, x: usize, y: usize, w: usize, h: usize) -> f64 {
        let s = self.stride;
        self.table[(y + h) * s + x + w] - self.table[y * s + x + w] - self.table[(y + h) * s + x]
            + self.table[y * s + x]
    }
}
