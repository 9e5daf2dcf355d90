use alloc::collections::BTreeMap;

use crate::error::{Error, Result};

/// Residual-error structure of one or more bit streams.
///
/// `burstiness` is the squared coefficient of variation of the gaps between
/// consecutive error positions, `var(g)/mean(g)²`. Geometric gaps from i.i.d.
/// errors give `(1 − p) ≈ 1`; clustered errors give values above 1. It is 0
/// when fewer than two gaps were observed.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ErrorStats {
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub run_histogram: BTreeMap<u64, u64>,
    pub mean_run_len: f64,
    pub burstiness: f64,
}

/// Mergeable sufficient statistics. Streams are never joined across
/// boundaries, so merging is associative and commutative.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorAccumulator {
    bits: u64,
    errors: u64,
    runs: BTreeMap<u64, u64>,
    gaps: u64,
    gap_sum: f64,
    gap_sq_sum: f64,
}

impl ErrorAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, tx: &[u8], rx: &[u8]) -> Result<()> {
        if tx.len() != rx.len() {
            return Err(Error::LengthMismatch {
                expected: tx.len(),
                actual: rx.len(),
            });
        }
        self.add_indicator(tx.iter().zip(rx).map(|(a, b)| (a != b) as u8));
        Ok(())
    }

    /// Adds a precomputed 0/1 error indicator sequence.
    pub fn add_indicator(&mut self, indicator: impl IntoIterator<Item = u8>) {
        let mut run = 0u64;
        let mut last: Option<u64> = None;
        let mut pos = 0u64;
        for e in indicator {
            if e != 0 {
                self.errors += 1;
                run += 1;
                if let Some(prev) = last {
                    let g = (pos - prev) as f64;
                    self.gaps += 1;
                    self.gap_sum += g;
                    self.gap_sq_sum += g * g;
                }
                last = Some(pos);
            } else if run > 0 {
                *self.runs.entry(run).or_insert(0) += 1;
                run = 0;
            }
            pos += 1;
        }
        if run > 0 {
            *self.runs.entry(run).or_insert(0) += 1;
        }
        self.bits += pos;
    }

    pub fn merge(&mut self, other: &ErrorAccumulator) {
        self.bits += other.bits;
        self.errors += other.errors;
        for (&len, &count) in &other.runs {
            *self.runs.entry(len).or_insert(0) += count;
        }
        self.gaps += other.gaps;
        self.gap_sum += other.gap_sum;
        self.gap_sq_sum += other.gap_sq_sum;
    }

    pub fn stats(&self) -> ErrorStats {
        let run_count: u64 = self.runs.values().sum();
        let burstiness = if self.gaps >= 2 {
            let n = self.gaps as f64;
            let mean = self.gap_sum / n;
            let var = (self.gap_sq_sum / n - mean * mean).max(0.0);
            var / (mean * mean)
        } else {
            0.0
        };
        ErrorStats {
            bits: self.bits,
            errors: self.errors,
            ber: if self.bits == 0 {
                0.0
            } else {
                self.errors as f64 / self.bits as f64
            },
            run_histogram: self.runs.clone(),
            mean_run_len: if run_count == 0 {
                0.0
            } else {
                self.errors as f64 / run_count as f64
            },
            burstiness,
        }
    }
}

pub fn run_length_stats(tx: &[u8], rx: &[u8]) -> Result<ErrorStats> {
    let mut acc = ErrorAccumulator::new();
    acc.add(tx, rx)?;
    Ok(acc.stats())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;
    use alloc::vec;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    #[test]
    fn no_errors() {
        let s = run_length_stats(&[0, 1, 1, 0], &[0, 1, 1, 0]).unwrap();
        assert_eq!(s.ber, 0.0);
        assert!(s.run_histogram.is_empty());
        assert_eq!(s.mean_run_len, 0.0);
    }

    #[test]
    fn hand_counted_runs() {
        let tx = [0u8; 7];
        let rx = [0u8, 1, 1, 0, 1, 1, 1];
        let s = run_length_stats(&tx, &rx).unwrap();
        assert_eq!(s.errors, 5);
        assert_eq!(s.run_histogram, BTreeMap::from([(2, 1), (3, 1)]));
        assert!((s.mean_run_len - 2.5).abs() < 1e-12);
        // Gaps 1, 2, 1, 1: mean 1.25, var 0.1875.
        assert!((s.burstiness - 0.1875 / 1.5625).abs() < 1e-12);
    }

    #[test]
    fn length_mismatch() {
        assert!(run_length_stats(&[0, 1], &[0]).is_err());
    }

    #[test]
    fn iid_errors_are_not_bursty() {
        let n = 1_000_000;
        let p = 0.01;
        let mut rng = CounterRng::new(99);
        let ind: Vec<u8> = (0..n).map(|_| (rng.next_f64() < p) as u8).collect();
        let mut acc = ErrorAccumulator::new();
        acc.add_indicator(ind.iter().copied());
        let s = acc.stats();
        assert!((s.burstiness - 1.0).abs() < 0.1, "{}", s.burstiness);
        assert!((s.mean_run_len - 1.0 / (1.0 - p)).abs() < 0.1 / (1.0 - p));
    }

    #[test]
    fn clustered_errors_are_bursty() {
        let mut ind = vec![0u8; 100_000];
        let mut rng = CounterRng::new(5);
        for _ in 0..100 {
            let start = rng.below(99_000) as usize;
            for b in &mut ind[start..start + 8] {
                *b = 1;
            }
        }
        let mut acc = ErrorAccumulator::new();
        acc.add_indicator(ind);
        assert!(acc.stats().burstiness > 1.5);
    }

    proptest! {
        #[test]
        fn histogram_accounts_for_all_errors(a in proptest::collection::vec(0u8..2, 0..400), b in proptest::collection::vec(0u8..2, 0..400)) {
            let n = a.len().min(b.len());
            let s = run_length_stats(&a[..n], &b[..n]).unwrap();
            let total: u64 = s.run_histogram.iter().map(|(l, c)| l * c).sum();
            prop_assert_eq!(total, s.errors);
            prop_assert!((0.0..=1.0).contains(&s.ber));
        }

        #[test]
        fn merge_is_order_insensitive(parts in proptest::collection::vec(proptest::collection::vec(0u8..2, 0..60), 1..6)) {
            let accs: Vec<ErrorAccumulator> = parts.iter().map(|p| {
                let mut a = ErrorAccumulator::new();
                a.add_indicator(p.iter().copied());
                a
            }).collect();
            let mut fwd = ErrorAccumulator::new();
            for a in &accs { fwd.merge(a); }
            let mut rev = ErrorAccumulator::new();
            for a in accs.iter().rev() { rev.merge(a); }
            prop_assert_eq!(fwd.bits, rev.bits);
            prop_assert_eq!(fwd.errors, rev.errors);
            prop_assert_eq!(&fwd.runs, &rev.runs);
            prop_assert_eq!(fwd.gaps, rev.gaps);
        }
    }
}
