//! Transmitter operation counts.
//!
//! Every add, multiply, compare, XOR and table lookup costs 1.
//!
//! | stage        | rule                                                        |
//! |--------------|-------------------------------------------------------------|
//! | LPF          | `b² − 1` adds + 1 multiply per block per channel            |
//! | DCT codec    | 2048 transform + 128 quantize + 256 entropy per 8×8 block   |
//! | CRC-16       | 2 per message bit                                           |
//! | uncoded      | 0                                                           |
//! | repetition   | 1 per output bit                                            |
//! | Hamming(7,4) | 6 XORs per codeword                                         |
//! | conv K=7     | `2·(K−1)` XORs per input bit, flush bits included          |
//! | LDPC         | `2·N·(K/2)` per codeword (dense parity generator rows)      |
//!
//! Modulation is common to both chains and not counted.

use crate::fec::CodeSpec;

pub const LPF_MULTIPLIES_PER_BLOCK: u64 = 1;
/// Separable 8×8 transform `2·(8·8·8·2)`, plus `2·64` for quantization and
/// `4·64` for entropy coding.
pub const DCT_OPS_PER_BLOCK: u64 = 2 * (8 * 8 * 8 * 2) + 2 * 64 + 4 * 64;

const CONV_MEMORY: u64 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceCoding {
    Lpf { block_size: usize },
    Dct { quality: u8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TxConfig {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub source: SourceCoding,
    pub code: CodeSpec,
    pub crc: bool,
    /// Source payload length fed to the channel coder. The DCT payload is
    /// data-dependent, so it is supplied by the caller.
    pub payload_bits: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub struct ComplexityModel {
    pub source: u64,
    pub crc: u64,
    pub channel: u64,
    pub total: u64,
}

fn blocks(len: usize, b: usize) -> u64 {
    len.div_ceil(b) as u64
}

fn source_ops(cfg: &TxConfig) -> u64 {
    let ch = cfg.channels as u64;
    match cfg.source {
        SourceCoding::Lpf { block_size } => {
            let b = block_size.max(1);
            let n = blocks(cfg.width, b) * blocks(cfg.height, b) * ch;
            n * ((b * b) as u64 - 1 + LPF_MULTIPLIES_PER_BLOCK)
        }
        SourceCoding::Dct { .. } => {
            blocks(cfg.width, 8) * blocks(cfg.height, 8) * ch * DCT_OPS_PER_BLOCK
        }
    }
}

fn channel_ops(code: CodeSpec, bits: u64) -> u64 {
    match code {
        CodeSpec::Uncoded => 0,
        CodeSpec::Repetition { k } => bits * k as u64,
        CodeSpec::Hamming74 => bits.div_ceil(4) * 6,
        CodeSpec::Convolutional => 2 * CONV_MEMORY * (bits + CONV_MEMORY),
        CodeSpec::Ldpc { n } => {
            let n = n as u64;
            let k = n / 2;
            bits.div_ceil(k.max(1)) * 2 * n * (k / 2)
        }
    }
}

pub fn tx_flops(cfg: &TxConfig) -> ComplexityModel {
    let source = source_ops(cfg);
    let crc = if cfg.crc { 2 * cfg.payload_bits as u64 } else { 0 };
    let coded_input = cfg.payload_bits as u64 + if cfg.crc { 16 } else { 0 };
    let channel = channel_ops(cfg.code, coded_input);
    ComplexityModel {
        source,
        crc,
        channel,
        total: source + crc + channel,
    }
}
