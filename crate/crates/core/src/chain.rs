//! Bit-level transmit/receive path shared by both chains:
//! code → interleave → power-weighted QPSK → channel → soft demod →
//! deinterleave.
//!
//! LLRs leave [`Link::send`] in coded-bit order so retransmissions of the
//! same frame can be Chase-combined directly.

use alloc::vec::Vec;

use crate::bits::{BitStream, LlrStream};
use crate::error::Result;
use crate::fec::{deinterleave, interleave, CodeSpec, Codec, InterleaverSpec, Received};
use crate::phy::{apply_channel, qpsk_demodulate, qpsk_modulate, BitLayout, ChannelConfig, PowerProfile};

#[derive(Debug, Clone)]
pub struct Link {
    pub codec: Codec,
    pub interleaver: InterleaverSpec,
    /// `None` is uniform power.
    pub power: Option<PowerProfile>,
}

/// A coded frame ready for (re)transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub message_len: usize,
    /// Coded bits before interleaving.
    pub coded: BitStream,
    /// Bits in transmission order.
    pub tx_bits: Vec<u8>,
    /// Per-bit powers in transmission order, padded to even length.
    pub powers: Option<Vec<f64>>,
}

impl Link {
    pub fn new(code: CodeSpec) -> Result<Self> {
        Ok(Link {
            codec: Codec::new(code)?,
            interleaver: InterleaverSpec::None,
            power: None,
        })
    }

    pub fn with_power(mut self, profile: PowerProfile) -> Self {
        self.power = Some(profile);
        self
    }

    pub fn with_interleaver(mut self, spec: InterleaverSpec) -> Self {
        self.interleaver = spec;
        self
    }

    /// Bit significance is only meaningful while coded bits stay aligned
    /// with sample bits.
    pub fn layout(&self) -> BitLayout {
        match self.codec.spec() {
            CodeSpec::Uncoded => BitLayout::Samples { repeat: 1 },
            CodeSpec::Repetition { k } => BitLayout::Samples { repeat: k },
            _ => BitLayout::Flat,
        }
    }

    pub fn coded_len(&self, message_len: usize) -> usize {
        self.codec.coded_len(message_len)
    }

    pub fn prepare(&self, message: &[u8]) -> Result<Frame> {
        let coded = self.codec.encode(message);
        let tx_bits = interleave(&coded, &self.interleaver)?;
        let powers = match &self.power {
            None => None,
            Some(profile) => {
                let natural = profile.frame_powers(coded.len(), self.layout());
                let mut p = interleave(&natural[..coded.len()], &self.interleaver)?;
                p.extend_from_slice(&natural[coded.len()..]);
                Some(p)
            }
        };
        Ok(Frame {
            message_len: message.len(),
            coded,
            tx_bits,
            powers,
        })
    }

    /// One pass over the channel; returns LLRs in coded-bit order.
    pub fn send(&self, frame: &Frame, channel: &ChannelConfig) -> Result<LlrStream> {
        let powers = frame.powers.as_deref();
        let modulated = qpsk_modulate(&frame.tx_bits, powers)?;
        let received = apply_channel(&modulated.symbols, channel);
        let llrs = qpsk_demodulate(&received, channel, powers, frame.tx_bits.len())?;
        Ok(LlrStream::new(deinterleave(&llrs, &self.interleaver)?))
    }

    pub fn decode(&self, llrs: &[f64], message_len: usize) -> Result<BitStream> {
        self.codec.decode(Received::Soft(llrs), message_len)
    }
}

/// Fraction of positions where `a` and `b` differ.
pub fn bit_error_rate(a: &[u8], b: &[u8]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    crate::bits::hamming_distance(a, b) as f64 / a.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::qpsk_ber;
    use alloc::vec;

    fn message(n: usize) -> Vec<u8> {
        (0..n).map(|i| ((i * 7 + i / 3) % 5 % 2) as u8).collect()
    }

    #[test]
    fn noiseless_round_trip_every_code() {
        let msg = message(301);
        for code in ["uncoded", "repetition:3", "hamming74", "conv", "ldpc:256"] {
            let link = Link::new(CodeSpec::parse(code).unwrap())
                .unwrap()
                .with_power(PowerProfile::default())
                .with_interleaver(InterleaverSpec::Random { seed: 4 });
            let frame = link.prepare(&msg).unwrap();
            let llrs = link.send(&frame, &ChannelConfig::awgn(300.0, 1)).unwrap();
            assert_eq!(llrs.len(), link.coded_len(msg.len()));
            assert_eq!(&link.decode(&llrs, msg.len()).unwrap()[..], &msg[..], "{code}");
        }
    }

    #[test]
    fn powers_follow_bits_through_interleaver() {
        let link = Link::new(CodeSpec::Uncoded)
            .unwrap()
            .with_power(PowerProfile::default())
            .with_interleaver(InterleaverSpec::Random { seed: 9 });
        let frame = link.prepare(&message(64)).unwrap();
        let natural = PowerProfile::default().frame_powers(64, BitLayout::Samples { repeat: 1 });
        let perm = InterleaverSpec::Random { seed: 9 }.permutation(64).unwrap();
        let p = frame.powers.unwrap();
        for (pos, &src) in perm.iter().enumerate() {
            assert_eq!(p[pos], natural[src]);
        }
    }

    #[test]
    fn uncoded_ber_near_analytic() {
        let link = Link::new(CodeSpec::Uncoded).unwrap();
        let msg = message(200_000);
        let frame = link.prepare(&msg).unwrap();
        let ch = ChannelConfig::awgn(4.0, 12);
        let rx = link.decode(&link.send(&frame, &ch).unwrap(), msg.len()).unwrap();
        let ber = bit_error_rate(&msg, &rx);
        let expected = qpsk_ber(4.0);
        assert!((ber - expected).abs() / expected < 0.1, "{ber} vs {expected}");
    }

    #[test]
    fn ber_helper() {
        assert_eq!(bit_error_rate(&[0, 1, 1, 0], &[0, 1, 0, 1]), 0.5);
        assert_eq!(bit_error_rate(&[], &[]), 0.0);
        let _ = vec![0u8];
    }
}
