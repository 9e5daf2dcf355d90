use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Relative transmit power per bit-significance position (MSB first).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PowerProfile {
    weights: Vec<f64>,
}

/// How transmitted bits map onto sample significance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitLayout {
    /// Bit `j` has significance `(j / repeat) % weights.len()`.
    Samples { repeat: usize },
    /// No positional meaning; every bit gets the same power.
    Flat,
}

impl PowerProfile {
    /// MSB→LSB weights used when nothing else is configured.
    pub const DEFAULT_WEIGHTS: [f64; 8] = [8.0, 6.0, 4.0, 3.0, 2.0, 1.0, 1.0, 1.0];

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidConfig("power weights must be positive and finite"));
        }
        Ok(PowerProfile { weights })
    }

    pub fn uniform() -> Self {
        PowerProfile { weights: alloc::vec![1.0] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_uniform(&self) -> bool {
        self.weights.windows(2).all(|w| w[0] == w[1])
    }

    /// Per-bit powers for a frame, normalized so their mean is exactly 1.
    ///
    /// The frame is first padded to an even length (the QPSK pad bit takes
    /// the next significance slot), so the returned vector may be one longer
    /// than `bit_len`.
    pub fn frame_powers(&self, bit_len: usize, layout: BitLayout) -> Vec<f64> {
        let len = bit_len + bit_len % 2;
        if len == 0 {
            return Vec::new();
        }
        let raw: Vec<f64> = match layout {
            BitLayout::Flat => alloc::vec![1.0; len],
            BitLayout::Samples { repeat } => {
                let repeat = repeat.max(1);
                (0..len).map(|j| self.weights[(j / repeat) % self.weights.len()]).collect()
            }
        };
        let mean = raw.iter().sum::<f64>() / len as f64;
        raw.into_iter().map(|w| w / mean).collect()
    }
}

impl Default for PowerProfile {
    fn default() -> Self {
        PowerProfile {
            weights: Self::DEFAULT_WEIGHTS.to_vec(),
        }
    }
}
