use alloc::vec::Vec;

use num_complex::Complex64;

use crate::rng::{derive, gaussian_pair_at};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelModel {
    Awgn,
    /// Unit-variance complex Gaussian gain held for `block_len` symbols.
    RayleighBlock { block_len: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub model: ChannelModel,
    /// Es/N0 in dB.
    pub snr_db: f64,
    pub seed: u64,
}

impl ChannelConfig {
    pub fn awgn(snr_db: f64, seed: u64) -> Self {
        ChannelConfig {
            model: ChannelModel::Awgn,
            snr_db,
            seed,
        }
    }

    /// Noise spectral density for Es = 1.
    pub fn n0(&self) -> f64 {
        libm::pow(10.0, -self.snr_db / 10.0)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        ChannelConfig { seed, ..*self }
    }

    fn noise_key(&self) -> u64 {
        derive(self.seed, 1)
    }

    fn fading_key(&self) -> u64 {
        derive(self.seed, 2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelOutput {
    pub symbols: Vec<Complex64>,
    /// Per-symbol gains; present only for fading channels.
    pub gains: Option<Vec<Complex64>>,
}

/// `y = h·x + n` with `n ~ CN(0, N0)`, i.e. variance `N0/2` per dimension.
///
/// Noise for symbol `i` is Box–Muller on counters `2i, 2i+1` of the noise
/// stream, so identical seeds give bit-identical output.
pub fn apply_channel(symbols: &[Complex64], config: &ChannelConfig) -> ChannelOutput {
    let sigma = libm::sqrt(config.n0() / 2.0);
    let noise_key = config.noise_key();
    let noise = |i: usize| {
        let (a, b) = gaussian_pair_at(noise_key, i as u64);
        Complex64::new(sigma * a, sigma * b)
    };
    match config.model {
        ChannelModel::Awgn => ChannelOutput {
            symbols: symbols.iter().enumerate().map(|(i, &x)| x + noise(i)).collect(),
            gains: None,
        },
        ChannelModel::RayleighBlock { block_len } => {
            let block_len = block_len.max(1);
            let fading_key = config.fading_key();
            let scale = core::f64::consts::FRAC_1_SQRT_2;
            let gains: Vec<Complex64> = (0..symbols.len())
                .map(|i| {
                    let (a, b) = gaussian_pair_at(fading_key, (i / block_len) as u64);
                    Complex64::new(scale * a, scale * b)
                })
                .collect();
            let out = symbols
                .iter()
                .zip(&gains)
                .enumerate()
                .map(|(i, (&x, &h))| h * x + noise(i))
                .collect();
            ChannelOutput {
                symbols: out,
                gains: Some(gains),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn same_seed_same_output() {
        let x = vec![Complex64::new(0.7, -0.7); 100];
        let cfg = ChannelConfig::awgn(0.0, 77);
        assert_eq!(apply_channel(&x, &cfg), apply_channel(&x, &cfg));
        assert_ne!(apply_channel(&x, &cfg), apply_channel(&x, &cfg.with_seed(78)));
    }

    #[test]
    fn huge_snr_is_noiseless() {
        let x = vec![Complex64::new(0.7, -0.7); 10];
        let y = apply_channel(&x, &ChannelConfig::awgn(300.0, 1));
        for (a, b) in x.iter().zip(&y.symbols) {
            assert!((a - b).norm_sqr() < 1e-24);
        }
    }

    #[test]
    fn per_dimension_noise_variance_at_zero_db() {
        let n = 1_000_000;
        let x = vec![Complex64::new(0.0, 0.0); n];
        let y = apply_channel(&x, &ChannelConfig::awgn(0.0, 2024));
        let (mut s, mut s2) = (0.0, 0.0);
        for v in &y.symbols {
            s += v.re + v.im;
            s2 += v.re * v.re + v.im * v.im;
        }
        let m = s / (2 * n) as f64;
        let var = s2 / (2 * n) as f64 - m * m;
        assert!((var - 0.5).abs() < 0.005, "variance {var}");
    }

    #[test]
    fn rayleigh_gains_held_per_block() {
        let x = vec![Complex64::new(1.0, 0.0); 64];
        let cfg = ChannelConfig {
            model: ChannelModel::RayleighBlock { block_len: 16 },
            snr_db: 10.0,
            seed: 5,
        };
        let out = apply_channel(&x, &cfg);
        let g = out.gains.unwrap();
        assert!(g[..16].iter().all(|&h| h == g[0]));
        assert_ne!(g[0], g[16]);
    }

    #[test]
    fn rayleigh_gain_unit_power() {
        let n = 200_000;
        let x = vec![Complex64::new(1.0, 0.0); n];
        let cfg = ChannelConfig {
            model: ChannelModel::RayleighBlock { block_len: 1 },
            snr_db: 0.0,
            seed: 11,
        };
        let g = apply_channel(&x, &cfg).gains.unwrap();
        let p = g.iter().map(|h| h.norm_sqr()).sum::<f64>() / n as f64;
        assert!((p - 1.0).abs() < 0.01, "{p}");
    }
}
