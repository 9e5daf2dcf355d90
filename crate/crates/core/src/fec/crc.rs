//! CRC-16/CCITT-FALSE over arbitrary-length bit streams.
//!
//! Polynomial 0x1021, initial value 0xFFFF, no reflection, no final XOR.
//! The 16 check bits are appended MSB-first.

use crate::bits::BitStream;
use crate::error::{Error, Result};

pub const CRC_BITS: usize = 16;
const POLY: u16 = 0x1021;
const INIT: u16 = 0xFFFF;

/// Register value after shifting in `bits`.
pub fn crc16(bits: &[u8]) -> u16 {
    bits.iter().fold(INIT, |reg, &b| {
        let feedback = ((reg >> 15) as u8 ^ (b & 1)) != 0;
        let reg = reg << 1;
        if feedback {
            reg ^ POLY
        } else {
            reg
        }
    })
}

pub fn crc_append(message: &[u8]) -> BitStream {
    let crc = crc16(message);
    let mut out = BitStream::from_bits(message.to_vec());
    out.extend((0..CRC_BITS).rev().map(|i| ((crc >> i) & 1) as u8));
    out
}

/// `Ok(true)` when the trailing 16 bits match the CRC of everything before.
pub fn crc_check(stream: &[u8]) -> Result<bool> {
    if stream.len() < CRC_BITS {
        return Err(Error::StreamTooShort);
    }
    let (message, check) = stream.split_at(stream.len() - CRC_BITS);
    let received = check.iter().fold(0u16, |acc, &b| (acc << 1) | (b & 1) as u16);
    Ok(crc16(message) == received)
}
