//! Channel codes from strong to weak, CRC and interleavers.

pub mod conv;
pub mod crc;
pub mod hamming;
mod interleave;
pub mod ldpc;
pub mod repetition;

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

pub use crc::{crc16, crc_append, crc_check, CRC_BITS};
pub use interleave::{deinterleave, interleave, InterleaverSpec};
pub use ldpc::LdpcCode;

use crate::bits::BitStream;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodeSpec {
    Uncoded,
    Repetition { k: usize },
    Hamming74,
    /// K = 7, rate 1/2, generators 171/133.
    Convolutional,
    /// Regular (3,6) code of length `n`.
    Ldpc { n: usize },
}

impl CodeSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CodeSpec::Repetition { k: 0 } => Err(Error::InvalidConfig("repetition factor must be ≥ 1")),
            CodeSpec::Ldpc { n } if n < 12 || n % 2 != 0 => {
                Err(Error::InvalidConfig("LDPC length must be even and at least 12"))
            }
            _ => Ok(()),
        }
    }

    /// Nominal rate. For LDPC this is the design rate 1/2; the exact rate of a
    /// constructed code is [`Codec::rate`].
    pub fn nominal_rate(&self) -> f64 {
        match *self {
            CodeSpec::Uncoded => 1.0,
            CodeSpec::Repetition { k } => 1.0 / k as f64,
            CodeSpec::Hamming74 => 4.0 / 7.0,
            CodeSpec::Convolutional => 0.5,
            CodeSpec::Ldpc { .. } => 0.5,
        }
    }

    /// Parses `uncoded`, `repetition:<k>`, `hamming74`, `conv` or `ldpc:<n>`.
    pub fn parse(s: &str) -> Result<CodeSpec> {
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let number = |arg: Option<&str>| -> Result<usize> {
            arg.and_then(|a| a.trim().parse().ok())
                .ok_or(Error::InvalidConfig("code parameter must be a positive integer"))
        };
        let spec = match name {
            "uncoded" | "none" => CodeSpec::Uncoded,
            "repetition" | "rep" => CodeSpec::Repetition { k: number(arg)? },
            "hamming74" | "hamming" => CodeSpec::Hamming74,
            "conv" | "convolutional" => CodeSpec::Convolutional,
            "ldpc" => CodeSpec::Ldpc { n: number(arg)? },
            _ => return Err(Error::InvalidConfig("unknown code; expected uncoded, repetition:k, hamming74, conv or ldpc:n")),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeSpec::Uncoded => f.write_str("uncoded"),
            CodeSpec::Repetition { k } => write!(f, "repetition:{k}"),
            CodeSpec::Hamming74 => f.write_str("hamming74"),
            CodeSpec::Convolutional => f.write_str("conv"),
            CodeSpec::Ldpc { n } => write!(f, "ldpc:{n}"),
        }
    }
}

impl serde::Serialize for CodeSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        let mut text = String::new();
        let _ = fmt::write(&mut text, format_args!("{self}"));
        s.serialize_str(&text)
    }
}

impl<'de> serde::Deserialize<'de> for CodeSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let text = <String as serde::Deserialize>::deserialize(d)?;
        CodeSpec::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// What the decoder gets to see.
#[derive(Debug, Clone, Copy)]
pub enum Received<'a> {
    Hard(&'a [u8]),
    Soft(&'a [f64]),
}

impl Received<'_> {
    fn len(&self) -> usize {
        match self {
            Received::Hard(b) => b.len(),
            Received::Soft(l) => l.len(),
        }
    }

    fn to_llrs(self) -> Vec<f64> {
        match self {
            Received::Hard(bits) => bits.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 }).collect(),
            Received::Soft(l) => l.to_vec(),
        }
    }
}

/// A code ready to use: the spec plus any constructed state (the LDPC graph).
///
/// Messages of any length are accepted. Block codes zero-pad the last block;
/// the decoder needs the original message length to strip it.
#[derive(Debug, Clone)]
pub struct Codec {
    spec: CodeSpec,
    ldpc: Option<Arc<LdpcCode>>,
}

impl Codec {
    pub fn new(spec: CodeSpec) -> Result<Self> {
        Codec::with_seed(spec, ldpc::DEFAULT_SEED)
    }

    pub fn with_seed(spec: CodeSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let ldpc = match spec {
            CodeSpec::Ldpc { n } => Some(Arc::new(LdpcCode::new(n, seed)?)),
            _ => None,
        };
        Ok(Codec { spec, ldpc })
    }

    pub fn spec(&self) -> CodeSpec {
        self.spec
    }

    pub fn ldpc(&self) -> Option<&LdpcCode> {
        self.ldpc.as_deref()
    }

    pub fn rate(&self) -> f64 {
        match &self.ldpc {
            Some(code) => code.rate(),
            None => self.spec.nominal_rate(),
        }
    }

    /// Coded length for a message of `len` bits, including pad and flush.
    pub fn coded_len(&self, len: usize) -> usize {
        match self.spec {
            CodeSpec::Uncoded => len,
            CodeSpec::Repetition { k } => len * k,
            CodeSpec::Hamming74 => len.div_ceil(4) * 7,
            CodeSpec::Convolutional => conv::coded_len(len),
            CodeSpec::Ldpc { .. } => {
                let code = self.ldpc.as_ref().expect("ldpc codec");
                len.div_ceil(code.k()) * code.n()
            }
        }
    }

    pub fn encode(&self, message: &[u8]) -> BitStream {
        let bits = match self.spec {
            CodeSpec::Uncoded => message.to_vec(),
            CodeSpec::Repetition { k } => repetition::encode(message, k),
            CodeSpec::Hamming74 => hamming::encode(&padded(message, 4)),
            CodeSpec::Convolutional => conv::encode(message),
            CodeSpec::Ldpc { .. } => {
                let code = self.ldpc.as_ref().expect("ldpc codec");
                padded(message, code.k())
                    .chunks(code.k())
                    .flat_map(|block| code.encode_block(block))
                    .collect()
            }
        };
        BitStream::from_bits(bits)
    }

    /// Decodes back to `message_len` bits.
    pub fn decode(&self, received: Received<'_>, message_len: usize) -> Result<BitStream> {
        let expected = self.coded_len(message_len);
        if received.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: received.len(),
            });
        }
        let mut bits = match (self.spec, received) {
            (CodeSpec::Uncoded, Received::Hard(b)) => b.to_vec(),
            (CodeSpec::Uncoded, Received::Soft(l)) => l.iter().map(|&x| (x < 0.0) as u8).collect(),
            (CodeSpec::Repetition { k }, Received::Hard(b)) => repetition::decode_hard(b, k),
            (CodeSpec::Repetition { k }, Received::Soft(l)) => repetition::decode_soft(l, k),
            (CodeSpec::Hamming74, Received::Hard(b)) => hamming::decode_hard(b),
            (CodeSpec::Hamming74, Received::Soft(l)) => hamming::decode_soft(l),
            (CodeSpec::Convolutional, Received::Hard(b)) => conv::decode_hard(b),
            (CodeSpec::Convolutional, Received::Soft(l)) => conv::decode_soft(l),
            (CodeSpec::Ldpc { .. }, rx) => {
                let code = self.ldpc.as_ref().expect("ldpc codec");
                let llrs = rx.to_llrs();
                let mut out = Vec::with_capacity(expected / code.n() * code.k());
                for block in llrs.chunks(code.n()) {
                    let decoded = code.decode_block(block, ldpc::MAX_ITERATIONS);
                    out.extend(code.extract_message(&decoded.codeword));
                }
                out
            }
        };
        bits.truncate(message_len);
        Ok(BitStream::from_bits(bits))
    }
}

fn padded(message: &[u8], block: usize) -> Vec<u8> {
    let mut v = message.to_vec();
    v.resize(message.len().next_multiple_of(block), 0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    #[test]
    fn parse_and_display() {
        for text in ["uncoded", "repetition:3", "hamming74", "conv", "ldpc:1024"] {
            assert_eq!(CodeSpec::parse(text).unwrap().to_string(), text);
        }
        assert!(CodeSpec::parse("ldpc:11").is_err());
        assert!(CodeSpec::parse("repetition:0").is_err());
        assert!(CodeSpec::parse("turbo").is_err());
    }

    #[test]
    fn coded_lengths() {
        let msg = [1u8; 10];
        for spec in [
            CodeSpec::Uncoded,
            CodeSpec::Repetition { k: 3 },
            CodeSpec::Hamming74,
            CodeSpec::Convolutional,
            CodeSpec::Ldpc { n: 64 },
        ] {
            let codec = Codec::new(spec).unwrap();
            assert_eq!(codec.encode(&msg).len(), codec.coded_len(msg.len()), "{spec}");
        }
        assert_eq!(Codec::new(CodeSpec::Hamming74).unwrap().coded_len(10), 21);
        assert_eq!(Codec::new(CodeSpec::Convolutional).unwrap().coded_len(10), 32);
    }

    #[test]
    fn wrong_length_is_contract_violation() {
        let codec = Codec::new(CodeSpec::Hamming74).unwrap();
        assert!(matches!(
            codec.decode(Received::Hard(&[0; 13]), 8),
            Err(Error::LengthMismatch { expected: 14, actual: 13 })
        ));
    }

    fn identity_on_noiseless(spec: CodeSpec, message: &[u8]) {
        let codec = Codec::new(spec).unwrap();
        let coded = codec.encode(message);
        let hard = codec.decode(Received::Hard(&coded), message.len()).unwrap();
        assert_eq!(&hard[..], message, "{spec} hard");
        let llrs: Vec<f64> = coded.iter().map(|&b| if b == 0 { 4.0 } else { -4.0 }).collect();
        let soft = codec.decode(Received::Soft(&llrs), message.len()).unwrap();
        assert_eq!(&soft[..], message, "{spec} soft");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn all_codes_identity_on_noiseless(message in proptest::collection::vec(0u8..2, 0..200), k in 1usize..6) {
            for spec in [CodeSpec::Uncoded, CodeSpec::Repetition { k }, CodeSpec::Hamming74, CodeSpec::Convolutional, CodeSpec::Ldpc { n: 96 }] {
                identity_on_noiseless(spec, &message);
            }
        }
    }
}
