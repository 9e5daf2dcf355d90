//! Gray QPSK.
//!
//! Bit pair `(b₁ b₀)` maps `b₁` to the in-phase sign and `b₀` to the
//! quadrature sign, `0 → +`, each with amplitude `√pᵢ/√2`:
//!
//! | bits | symbol        |
//! |------|---------------|
//! | 00   | (+1 + j)/√2   |
//! | 01   | (+1 − j)/√2   |
//! | 11   | (−1 − j)/√2   |
//! | 10   | (−1 + j)/√2   |
//!
//! The LLR of a bit carried with amplitude `a` on a dimension is
//! `4·a·Re/Im(h*·y)/N0` (positive favours `0`).

use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::channel::{ChannelConfig, ChannelModel, ChannelOutput};
use crate::bits::LlrStream;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Modulated {
    pub symbols: Vec<Complex64>,
    /// Bits before the pad bit, if one was added.
    pub bit_len: usize,
}

impl Modulated {
    pub fn padded(&self) -> bool {
        self.bit_len % 2 == 1
    }

    pub fn average_power(&self) -> f64 {
        if self.symbols.is_empty() {
            return 0.0;
        }
        self.symbols.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.symbols.len() as f64
    }
}

fn check_powers(powers: Option<&[f64]>, padded_len: usize) -> Result<()> {
    match powers {
        Some(p) if p.len() != padded_len => Err(Error::LengthMismatch {
            expected: padded_len,
            actual: p.len(),
        }),
        _ => Ok(()),
    }
}

#[inline]
fn amplitude(powers: Option<&[f64]>, i: usize) -> f64 {
    match powers {
        Some(p) => libm::sqrt(p[i]) * FRAC_1_SQRT_2,
        None => FRAC_1_SQRT_2,
    }
}

/// `powers`, when given, must cover the even-padded frame (see
/// [`super::PowerProfile::frame_powers`]).
pub fn qpsk_modulate(bits: &[u8], powers: Option<&[f64]>) -> Result<Modulated> {
    let padded_len = bits.len() + bits.len() % 2;
    check_powers(powers, padded_len)?;
    let bit = |i: usize| bits.get(i).copied().unwrap_or(0);
    let sign = |b: u8| if b == 0 { 1.0 } else { -1.0 };
    let symbols = (0..padded_len / 2)
        .map(|s| {
            let (i, q) = (2 * s, 2 * s + 1);
            Complex64::new(
                sign(bit(i)) * amplitude(powers, i),
                sign(bit(q)) * amplitude(powers, q),
            )
        })
        .collect();
    Ok(Modulated {
        symbols,
        bit_len: bits.len(),
    })
}

/// Coherent soft demodulation; returns exactly `bit_len` LLRs.
pub fn qpsk_demodulate(
    received: &ChannelOutput,
    channel: &ChannelConfig,
    powers: Option<&[f64]>,
    bit_len: usize,
) -> Result<LlrStream> {
    let padded_len = bit_len + bit_len % 2;
    if received.symbols.len() * 2 != padded_len {
        return Err(Error::LengthMismatch {
            expected: padded_len / 2,
            actual: received.symbols.len(),
        });
    }
    check_powers(powers, padded_len)?;
    let gains = match (channel.model, &received.gains) {
        (ChannelModel::RayleighBlock { .. }, None) => return Err(Error::MissingGains),
        (_, g) => g.as_deref(),
    };
    let scale = 4.0 / channel.n0();
    let mut llrs = Vec::with_capacity(padded_len);
    for (s, &y) in received.symbols.iter().enumerate() {
        let z = match gains {
            Some(g) => g[s].conj() * y,
            None => y,
        };
        llrs.push(scale * amplitude(powers, 2 * s) * z.re);
        llrs.push(scale * amplitude(powers, 2 * s + 1) * z.im);
    }
    llrs.truncate(bit_len);
    Ok(LlrStream::new(llrs))
}

/// Element-wise sum of equally long LLR streams.
pub fn chase_combine(streams: &[LlrStream]) -> Result<LlrStream> {
    let (first, rest) = streams.split_first().ok_or(Error::EmptyInput)?;
    let mut acc = first.clone();
    for s in rest {
        acc.accumulate(s)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::super::{apply_channel, BitLayout, PowerProfile};
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    #[allow(clippy::approx_constant)]
    fn gray_mapping_table() {
        let m = qpsk_modulate(&[0, 0, 0, 1, 1, 1, 1, 0], None).unwrap();
        let r = FRAC_1_SQRT_2;
        let expected = [(r, r), (r, -r), (-r, -r), (-r, r)];
        for (s, (re, im)) in m.symbols.iter().zip(expected) {
            assert!((s.re - re).abs() < 1e-15 && (s.im - im).abs() < 1e-15);
        }
        assert!((m.symbols[0].re - 0.7071).abs() < 1e-4);
    }

    #[test]
    fn uniform_symbols_have_unit_energy() {
        let m = qpsk_modulate(&[0, 1, 1, 0, 1, 1, 0, 0], None).unwrap();
        assert!(m.symbols.iter().all(|s| (s.norm_sqr() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn odd_length_pads_one_bit() {
        let m = qpsk_modulate(&[1, 0, 1], None).unwrap();
        assert_eq!(m.symbols.len(), 2);
        assert!(m.padded());
        let out = ChannelOutput {
            symbols: m.symbols.clone(),
            gains: None,
        };
        let llr = qpsk_demodulate(&out, &ChannelConfig::awgn(10.0, 0), None, 3).unwrap();
        assert_eq!(llr.len(), 3);
        assert_eq!(&llr.hard_decisions()[..], &[1, 0, 1]);
    }

    #[test]
    fn power_allocation_keeps_unit_average() {
        let p = PowerProfile::new(vec![4.0, 1.0]).unwrap();
        let bits: Vec<u8> = (0..1000).map(|i| ((i * 13) % 7 % 2) as u8).collect();
        let powers = p.frame_powers(bits.len(), BitLayout::Samples { repeat: 1 });
        let m = qpsk_modulate(&bits, Some(&powers)).unwrap();
        assert!((m.average_power() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn noiseless_zero_symbol_positive_llrs() {
        let m = qpsk_modulate(&[0, 0], None).unwrap();
        let out = ChannelOutput {
            symbols: m.symbols,
            gains: None,
        };
        let llr = qpsk_demodulate(&out, &ChannelConfig::awgn(0.0, 0), None, 2).unwrap();
        assert!(llr.iter().all(|&l| l > 0.0));
        // 4·a·y/N0 with a = y = 1/√2 and N0 = 1.
        assert!((llr[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn fading_requires_gains() {
        let cfg = ChannelConfig {
            model: ChannelModel::RayleighBlock { block_len: 4 },
            snr_db: 5.0,
            seed: 1,
        };
        let out = ChannelOutput {
            symbols: vec![Complex64::new(1.0, 0.0)],
            gains: None,
        };
        assert_eq!(qpsk_demodulate(&out, &cfg, None, 2), Err(Error::MissingGains));
    }

    #[test]
    fn coherent_fading_noiseless_recovers_bits() {
        let bits: Vec<u8> = (0..256).map(|i| ((i * 5 + 3) % 11 % 2) as u8).collect();
        let m = qpsk_modulate(&bits, None).unwrap();
        let cfg = ChannelConfig {
            model: ChannelModel::RayleighBlock { block_len: 8 },
            snr_db: 300.0,
            seed: 9,
        };
        let y = apply_channel(&m.symbols, &cfg);
        let llr = qpsk_demodulate(&y, &cfg, None, bits.len()).unwrap();
        assert_eq!(&llr.hard_decisions()[..], &bits[..]);
    }

    #[test]
    fn chase_combine_contract() {
        let l = LlrStream::new(vec![1.0, -2.0, 0.5]);
        assert_eq!(chase_combine(core::slice::from_ref(&l)).unwrap(), l);
        let neg = LlrStream::new(l.iter().map(|x| -x).collect());
        assert!(chase_combine(&[l.clone(), neg]).unwrap().iter().all(|&x| x == 0.0));
        assert!(chase_combine(&[l, LlrStream::zeros(2)]).is_err());
        assert_eq!(chase_combine(&[]), Err(Error::EmptyInput));
    }

    #[test]
    fn heavier_weight_gives_larger_llrs() {
        let n = 200_000;
        let bits = vec![0u8; n];
        let cfg = ChannelConfig::awgn(0.0, 31);
        let mean_abs = |w: f64| {
            let p = PowerProfile::new(vec![w, 1.0]).unwrap();
            let powers = p.frame_powers(n, BitLayout::Samples { repeat: 1 });
            let m = qpsk_modulate(&bits, Some(&powers)).unwrap();
            let y = apply_channel(&m.symbols, &cfg);
            let llr = qpsk_demodulate(&y, &cfg, Some(&powers), n).unwrap();
            llr.iter().step_by(2).map(|l| l.abs()).sum::<f64>() / (n / 2) as f64
        };
        assert!(mean_abs(2.0) > mean_abs(1.0));
    }

    proptest! {
        #[test]
        fn noiseless_round_trip(bits in proptest::collection::vec(0u8..2, 0..300), weights in proptest::collection::vec(0.1f64..10.0, 1..9)) {
            let p = PowerProfile::new(weights).unwrap();
            let powers = p.frame_powers(bits.len(), BitLayout::Samples { repeat: 1 });
            let m = qpsk_modulate(&bits, Some(&powers)).unwrap();
            let cfg = ChannelConfig::awgn(300.0, 0);
            let y = apply_channel(&m.symbols, &cfg);
            let llr = qpsk_demodulate(&y, &cfg, Some(&powers), bits.len()).unwrap();
            prop_assert_eq!(&llr.hard_decisions()[..], &bits[..]);
        }
    }
}
