use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Infinite quality samples (lossless PSNR) are replaced by this value
/// before interpolation.
pub const INFINITE_QUALITY_CAP: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Crossing {
    pub min_usable_snr_db: f64,
    /// Quality decreased somewhere along increasing SNR.
    pub non_monotone: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CoverageCurve {
    pub metric: String,
    pub threshold: f64,
    pub gencom: Crossing,
    pub baseline: Crossing,
    /// `baseline − gencom`; positive means GenCom reaches further.
    pub extension_db: f64,
}

impl CoverageCurve {
    pub fn warning(&self) -> bool {
        self.gencom.non_monotone || self.baseline.non_monotone
    }
}

/// Lowest SNR at which quality reaches `threshold`.
///
/// Points are sorted by SNR and scanned downward from the highest SNR; the
/// first sample below threshold and its upper neighbour are linearly
/// interpolated. Fails when the curve is never above threshold or never
/// below it on the sampled range.
// NaN quality counts as below threshold, hence the negated comparisons.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn min_usable_snr(points: &[(f64, f64)], threshold: f64) -> Result<Crossing> {
    if points.len() < 2 {
        return Err(Error::CoverageUndefined);
    }
    let mut pts: Vec<(f64, f64)> = points
        .iter()
        .map(|&(s, q)| (s, if q.is_infinite() && q > 0.0 { INFINITE_QUALITY_CAP } else { q }))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let non_monotone = pts.windows(2).any(|w| w[1].1 < w[0].1);
    let top = pts.len() - 1;
    if !(pts[top].1 >= threshold) {
        return Err(Error::CoverageUndefined);
    }
    for i in (0..top).rev() {
        let (s0, q0) = pts[i];
        if !(q0 >= threshold) {
            let (s1, q1) = pts[i + 1];
            let t = (threshold - q0) / (q1 - q0);
            return Ok(Crossing {
                min_usable_snr_db: s0 + t * (s1 - s0),
                non_monotone,
            });
        }
    }
    Err(Error::CoverageUndefined)
}

pub fn coverage(
    metric: &str,
    gencom: &[(f64, f64)],
    baseline: &[(f64, f64)],
    threshold: f64,
) -> Result<CoverageCurve> {
    let g = min_usable_snr(gencom, threshold)?;
    let b = min_usable_snr(baseline, threshold)?;
    Ok(CoverageCurve {
        metric: String::from(metric),
        threshold,
        gencom: g,
        baseline: b,
        extension_db: b.min_usable_snr_db - g.min_usable_snr_db,
    })
}
