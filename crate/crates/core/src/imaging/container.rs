//! Serialized form of a compressed image.
//!
//! Layout (16 bytes, little-endian):
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 4    | magic `GCIM`                            |
//! | 4      | 1    | codec id (1 = LPF, 2 = DCT)             |
//! | 5      | 1    | block size (LPF) or quality (DCT)       |
//! | 6      | 4    | original width                          |
//! | 10     | 4    | original height                         |
//! | 14     | 1    | channels                                |
//! | 15     | 1    | flags (LPF: 0 = replicate, 1 = bilinear) |
//!
//! The payload follows immediately.

use alloc::vec::Vec;

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"GCIM";
pub const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Codec {
    Lpf,
    Dct,
}

impl Codec {
    pub fn id(self) -> u8 {
        match self {
            Codec::Lpf => 1,
            Codec::Dct => 2,
        }
    }

    pub fn from_id(id: u8) -> Option<Codec> {
        match id {
            1 => Some(Codec::Lpf),
            2 => Some(Codec::Dct),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Header {
    pub codec: Codec,
    /// Block size for LPF, quality for DCT.
    pub param: u8,
    pub width: u32,
    pub height: u32,
    pub channels: u8,
    pub flags: u8,
}

impl Header {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[..4].copy_from_slice(&MAGIC);
        out[4] = self.codec.id();
        out[5] = self.param;
        out[6..10].copy_from_slice(&self.width.to_le_bytes());
        out[10..14].copy_from_slice(&self.height.to_le_bytes());
        out[14] = self.channels;
        out[15] = self.flags;
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Header> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::MalformedContainer("header shorter than 16 bytes"));
        }
        if bytes[..4] != MAGIC {
            return Err(Error::MalformedContainer("bad magic"));
        }
        let codec = Codec::from_id(bytes[4]).ok_or(Error::MalformedContainer("unknown codec id"))?;
        let word = |at: usize| u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]]);
        Ok(Header {
            codec,
            param: bytes[5],
            width: word(6),
            height: word(10),
            channels: bytes[14],
            flags: bytes[15],
        })
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn height(&self) -> usize {
        self.height as usize
    }

    pub fn channels(&self) -> usize {
        self.channels as usize
    }

    /// Block-mean grid dimensions for an LPF header.
    pub fn grid_dims(&self) -> (usize, usize) {
        let b = self.param.max(1) as usize;
        (self.width().div_ceil(b), self.height().div_ceil(b))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CompressedImage {
    pub header: Header,
    pub payload: Vec<u8>,
}

impl CompressedImage {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.extend_from_slice(&self.header.to_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let header = Header::from_bytes(bytes)?;
        Ok(CompressedImage {
            header,
            payload: bytes[HEADER_LEN..].to_vec(),
        })
    }

    /// Same header, different payload. Used on the receive side.
    pub fn with_payload(&self, payload: Vec<u8>) -> Self {
        CompressedImage {
            header: self.header,
            payload,
        }
    }

    pub fn payload_bits(&self) -> usize {
        self.payload.len() * 8
    }
}
