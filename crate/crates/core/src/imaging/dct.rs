//! JPEG-like baseline codec.
//!
//! Per channel: edge-replicated padding to a multiple of 8, level shift by
//! −128, orthonormal 8×8 DCT-II, quantization by the Annex K luminance table
//! scaled with the IJG quality formula (ties to even), zigzag scan, then DC
//! differences and AC run/size symbols coded with the Annex K luminance
//! Huffman tables. Channels are coded one after another with independent DC
//! predictors. The stream is padded with `1` bits to a byte boundary.
//!
//! There are no markers, so a single corrupted bit can desynchronise the rest
//! of the stream. That fragility is intended.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{to_sample, Codec, CompressedImage, Header, Image};
use crate::error::{Error, Result};

const ZIGZAG: [usize; 64] = [
    0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5, 12, 19, 26, 33, 40, 48, 41, 34, 27,
    20, 13, 6, 7, 14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51, 58,
    59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
];

const LUMA_QUANT: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

const DC_BITS: [u8; 16] = [0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
const DC_VALS: [u8; 12] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];
const AC_BITS: [u8; 16] = [0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d];
const AC_VALS: [u8; 162] = [
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61, 0x07,
    0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xA1, 0x08, 0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52, 0xD1, 0xF0,
    0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0A, 0x16, 0x17, 0x18, 0x19, 0x1A, 0x25, 0x26, 0x27, 0x28,
    0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49,
    0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69,
    0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7A, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
    0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7,
    0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5,
    0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1, 0xE2,
    0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF1, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8,
    0xF9, 0xFA,
];

const EOB: u8 = 0x00;
const ZRL: u8 = 0xF0;
const MAX_DC: i32 = 2047;
const MAX_AC: i32 = 1023;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DctConfig {
    pub quality: u8,
}

impl DctConfig {
    pub fn new(quality: u8) -> Result<Self> {
        if !(1..=100).contains(&quality) {
            return Err(Error::InvalidConfig("DCT quality must be in 1..=100"));
        }
        Ok(DctConfig { quality })
    }

    /// Quantizer steps in natural (row-major) order.
    pub fn quant_table(&self) -> [u16; 64] {
        let q = self.quality.clamp(1, 100) as u32;
        let scale = if q < 50 { 5000 / q } else { 200 - 2 * q };
        let mut table = [0u16; 64];
        for (t, &base) in table.iter_mut().zip(LUMA_QUANT.iter()) {
            *t = ((base as u32 * scale + 50) / 100).clamp(1, 255) as u16;
        }
        table
    }
}

struct HuffTable {
    // Encoder side, indexed by symbol.
    code: [u16; 256],
    len: [u8; 256],
    // Decoder side, per code length 1..=16.
    min_code: [i32; 17],
    max_code: [i32; 17],
    val_ptr: [usize; 17],
    vals: &'static [u8],
}

impl HuffTable {
    fn build(bits: &[u8; 16], vals: &'static [u8]) -> Self {
        let mut t = HuffTable {
            code: [0; 256],
            len: [0; 256],
            min_code: [0; 17],
            max_code: [-1; 17],
            val_ptr: [0; 17],
            vals,
        };
        let mut code = 0i32;
        let mut k = 0usize;
        for l in 1..=16 {
            let n = bits[l - 1] as usize;
            t.val_ptr[l] = k;
            t.min_code[l] = code;
            for _ in 0..n {
                let sym = vals[k] as usize;
                t.code[sym] = code as u16;
                t.len[sym] = l as u8;
                code += 1;
                k += 1;
            }
            t.max_code[l] = if n > 0 { code - 1 } else { -1 };
            code <<= 1;
        }
        t
    }

    fn decode(&self, reader: &mut BitReader<'_>) -> Result<u8> {
        let mut code = 0i32;
        for l in 1..=16 {
            code = (code << 1) | reader.bit()? as i32;
            if self.max_code[l] >= 0 && code <= self.max_code[l] && code >= self.min_code[l] {
                return Ok(self.vals[self.val_ptr[l] + (code - self.min_code[l]) as usize]);
            }
        }
        Err(Error::DecodeFailure("invalid Huffman code"))
    }
}

struct Tables {
    dc: HuffTable,
    ac: HuffTable,
    basis: [[f64; 8]; 8],
}

impl Tables {
    fn new() -> Self {
        let mut basis = [[0.0; 8]; 8];
        for (u, row) in basis.iter_mut().enumerate() {
            let cu = if u == 0 { libm::sqrt(0.5) } else { 1.0 };
            for (x, v) in row.iter_mut().enumerate() {
                *v = 0.5 * cu * libm::cos((2 * x + 1) as f64 * u as f64 * PI / 16.0);
            }
        }
        Tables {
            dc: HuffTable::build(&DC_BITS, &DC_VALS),
            ac: HuffTable::build(&AC_BITS, &AC_VALS),
            basis,
        }
    }

    fn forward(&self, block: &[f64; 64]) -> [f64; 64] {
        let mut tmp = [0.0; 64];
        for y in 0..8 {
            for u in 0..8 {
                tmp[y * 8 + u] = (0..8).map(|x| self.basis[u][x] * block[y * 8 + x]).sum();
            }
        }
        let mut out = [0.0; 64];
        for v in 0..8 {
            for u in 0..8 {
                out[v * 8 + u] = (0..8).map(|y| self.basis[v][y] * tmp[y * 8 + u]).sum();
            }
        }
        out
    }

    fn inverse(&self, coeffs: &[f64; 64]) -> [f64; 64] {
        let mut tmp = [0.0; 64];
        for v in 0..8 {
            for x in 0..8 {
                tmp[v * 8 + x] = (0..8).map(|u| self.basis[u][x] * coeffs[v * 8 + u]).sum();
            }
        }
        let mut out = [0.0; 64];
        for y in 0..8 {
            for x in 0..8 {
                out[y * 8 + x] = (0..8).map(|v| self.basis[v][y] * tmp[v * 8 + x]).sum();
            }
        }
        out
    }
}

struct BitWriter {
    bytes: Vec<u8>,
    acc: u32,
    n: u32,
}

impl BitWriter {
    fn new() -> Self {
        BitWriter {
            bytes: Vec::new(),
            acc: 0,
            n: 0,
        }
    }

    fn put(&mut self, value: u32, len: u8) {
        for i in (0..len).rev() {
            self.acc = (self.acc << 1) | ((value >> i) & 1);
            self.n += 1;
            if self.n == 8 {
                self.bytes.push(self.acc as u8);
                self.acc = 0;
                self.n = 0;
            }
        }
    }

    fn finish(mut self) -> Vec<u8> {
        while self.n != 0 {
            self.put(1, 1);
        }
        self.bytes
    }
}

struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl BitReader<'_> {
    fn bit(&mut self) -> Result<u8> {
        let byte = *self
            .bytes
            .get(self.pos / 8)
            .ok_or(Error::DecodeFailure("truncated entropy stream"))?;
        let b = (byte >> (7 - self.pos % 8)) & 1;
        self.pos += 1;
        Ok(b)
    }

    fn bits(&mut self, len: u8) -> Result<u32> {
        let mut v = 0u32;
        for _ in 0..len {
            v = (v << 1) | self.bit()? as u32;
        }
        Ok(v)
    }
}

fn magnitude_category(v: i32) -> u8 {
    (32 - v.unsigned_abs().leading_zeros()) as u8
}

fn amplitude_bits(v: i32, size: u8) -> u32 {
    if v >= 0 {
        v as u32
    } else {
        (v + (1 << size) - 1) as u32
    }
}

fn extend(bits: u32, size: u8) -> i32 {
    if size == 0 {
        0
    } else if bits < (1 << (size - 1)) {
        bits as i32 - (1 << size) + 1
    } else {
        bits as i32
    }
}

fn round_half_even(v: f64) -> i32 {
    libm::rint(v) as i32
}

pub fn dct_encode(image: &Image, config: &DctConfig) -> CompressedImage {
    let tables = Tables::new();
    let quant = config.quant_table();
    let (w, h, ch) = (image.width(), image.height(), image.channels());
    let (bw, bh) = (w.div_ceil(8), h.div_ceil(8));
    let mut out = BitWriter::new();
    for c in 0..ch {
        let mut prev_dc = 0i32;
        for by in 0..bh {
            for bx in 0..bw {
                let mut block = [0.0; 64];
                for y in 0..8 {
                    for x in 0..8 {
                        block[y * 8 + x] = image.get_clamped(bx * 8 + x, by * 8 + y, c) as f64 - 128.0;
                    }
                }
                let coeffs = tables.forward(&block);
                let mut zz = [0i32; 64];
                for (k, &pos) in ZIGZAG.iter().enumerate() {
                    zz[k] = round_half_even(coeffs[pos] / quant[pos] as f64);
                }

                let dc = zz[0].clamp(prev_dc - MAX_DC, prev_dc + MAX_DC);
                let diff = dc - prev_dc;
                prev_dc = dc;
                let size = magnitude_category(diff);
                out.put(tables.dc.code[size as usize] as u32, tables.dc.len[size as usize]);
                out.put(amplitude_bits(diff, size), size);

                let mut run = 0u8;
                for &coef in &zz[1..] {
                    let v = coef.clamp(-MAX_AC, MAX_AC);
                    if v == 0 {
                        run += 1;
                        continue;
                    }
                    while run > 15 {
                        out.put(tables.ac.code[ZRL as usize] as u32, tables.ac.len[ZRL as usize]);
                        run -= 16;
                    }
                    let size = magnitude_category(v);
                    let sym = ((run << 4) | size) as usize;
                    out.put(tables.ac.code[sym] as u32, tables.ac.len[sym]);
                    out.put(amplitude_bits(v, size), size);
                    run = 0;
                }
                if run > 0 {
                    out.put(tables.ac.code[EOB as usize] as u32, tables.ac.len[EOB as usize]);
                }
            }
        }
    }
    CompressedImage {
        header: Header {
            codec: Codec::Dct,
            param: config.quality,
            width: w as u32,
            height: h as u32,
            channels: ch as u8,
            flags: 0,
        },
        payload: out.finish(),
    }
}

/// Outcome of a best-effort decode.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialDecode {
    /// Reconstructed image; blocks after a failure are mid-grey.
    pub image: Image,
    /// First error hit, if any.
    pub error: Option<Error>,
    /// Number of 8×8 blocks decoded before the failure (over all channels).
    pub blocks_decoded: usize,
}

/// Decodes as far as the stream allows. Never panics on corrupted input.
pub fn dct_decode_partial(compressed: &CompressedImage) -> Result<PartialDecode> {
    let header = &compressed.header;
    if header.codec != Codec::Dct {
        return Err(Error::InvalidConfig("expected a DCT payload"));
    }
    let (w, h, ch) = (header.width(), header.height(), header.channels());
    if w == 0 || h == 0 || (ch != 1 && ch != 3) {
        return Err(Error::MalformedContainer("bad image dimensions"));
    }
    let quant = DctConfig {
        quality: header.param.clamp(1, 100),
    }
    .quant_table();
    let tables = Tables::new();
    let (bw, bh) = (w.div_ceil(8), h.div_ceil(8));
    let mut pixels = vec![128u8; w * h * ch];
    let mut reader = BitReader {
        bytes: &compressed.payload,
        pos: 0,
    };
    let mut blocks_decoded = 0;
    let mut error = None;

    'channels: for c in 0..ch {
        let mut prev_dc = 0i32;
        for by in 0..bh {
            for bx in 0..bw {
                let zz = match decode_block(&tables, &mut reader, &mut prev_dc) {
                    Ok(zz) => zz,
                    Err(e) => {
                        error = Some(e);
                        break 'channels;
                    }
                };
                let mut coeffs = [0.0; 64];
                for (k, &pos) in ZIGZAG.iter().enumerate() {
                    coeffs[pos] = zz[k] as f64 * quant[pos] as f64;
                }
                let block = tables.inverse(&coeffs);
                for y in 0..8 {
                    for x in 0..8 {
                        let (px, py) = (bx * 8 + x, by * 8 + y);
                        if px < w && py < h {
                            pixels[(py * w + px) * ch + c] = to_sample(block[y * 8 + x] + 128.0);
                        }
                    }
                }
                blocks_decoded += 1;
            }
        }
    }
    Ok(PartialDecode {
        image: Image::new(w, h, ch, pixels)?,
        error,
        blocks_decoded,
    })
}

fn decode_block(tables: &Tables, reader: &mut BitReader<'_>, prev_dc: &mut i32) -> Result<[i32; 64]> {
    let mut zz = [0i32; 64];
    let size = tables.dc.decode(reader)?;
    if size > 11 {
        return Err(Error::DecodeFailure("DC category out of range"));
    }
    let diff = extend(reader.bits(size)?, size);
    *prev_dc += diff;
    zz[0] = *prev_dc;
    let mut k = 1;
    while k < 64 {
        let sym = tables.ac.decode(reader)?;
        if sym == EOB {
            break;
        }
        if sym == ZRL {
            k += 16;
            if k > 64 {
                return Err(Error::DecodeFailure("zero run past end of block"));
            }
            continue;
        }
        let run = (sym >> 4) as usize;
        let size = sym & 0x0F;
        k += run;
        if k >= 64 {
            return Err(Error::DecodeFailure("AC run past end of block"));
        }
        zz[k] = extend(reader.bits(size)?, size);
        k += 1;
    }
    Ok(zz)
}

/// Strict decode: any entropy-stream error is a decode failure.
pub fn dct_decode(compressed: &CompressedImage) -> Result<Image> {
    let partial = dct_decode_partial(compressed)?;
    match partial.error {
        Some(e) => Err(e),
        None => Ok(partial.image),
    }
}
