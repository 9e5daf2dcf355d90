//! Binary PGM (P5) and PPM (P6) images with 8-bit samples.

use std::fs;
use std::path::Path;

use gencom_core::Image;

#[derive(Debug, thiserror::Error)]
pub enum PnmError {
    #[error("malformed PNM header: {0}")]
    MalformedHeader(&'static str),
    #[error("unsupported PNM variant {0:?}; expected P5 or P6")]
    UnsupportedFormat(String),
    #[error("unsupported maxval {0}; expected 1..=255")]
    UnsupportedMaxval(u32),
    #[error("truncated pixel data: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("invalid image: {0}")]
    Image(#[from] gencom_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|b| !b.is_ascii_whitespace()) {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &'static str) -> Result<u32, PnmError> {
        let tok = self.token().ok_or(PnmError::MalformedHeader(what))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or(PnmError::MalformedHeader(what))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Image, PnmError> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.token().ok_or(PnmError::MalformedHeader("missing magic"))?;
    let channels = match magic {
        b"P5" => 1,
        b"P6" => 3,
        other => return Err(PnmError::UnsupportedFormat(String::from_utf8_lossy(other).into_owned())),
    };
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(PnmError::UnsupportedMaxval(maxval));
    }
    if width == 0 || height == 0 {
        return Err(PnmError::MalformedHeader("zero dimension"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if !bytes.get(cur.pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err(PnmError::MalformedHeader("missing separator before raster"));
    }
    let data = &bytes[cur.pos + 1..];
    let expected = width * height * channels;
    if data.len() < expected {
        return Err(PnmError::Truncated {
            expected,
            found: data.len(),
        });
    }
    let mut pixels = data[..expected].to_vec();
    if maxval != 255 {
        for p in &mut pixels {
            *p = (((*p as u32).min(maxval) * 255 + maxval / 2) / maxval) as u8;
        }
    }
    Ok(Image::new(width, height, channels, pixels)?)
}

pub fn encode(image: &Image) -> Vec<u8> {
    let magic = if image.channels() == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.pixels());
    out
}

pub fn read(path: &Path) -> Result<Image, PnmError> {
    decode(&fs::read(path)?)
}

pub fn write(path: &Path, image: &Image) -> Result<(), PnmError> {
    fs::write(path, encode(image))?;
    Ok(())
}
