use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Row-major 8-bit image, channels interleaved.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<u8>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidConfig("channels must be 1 or 3"));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidConfig("image dimensions must be non-zero"));
        }
        if pixels.len() != width * height * channels {
            return Err(Error::DimensionMismatch);
        }
        Ok(Image {
            width,
            height,
            channels,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Result<Self> {
        Image::new(width, height, channels, alloc::vec![value; width * height * channels])
    }

    /// Builds an image from a per-pixel function `f(x, y, channel)`.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> u8,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    pixels.push(f(x, y, c));
                }
            }
        }
        Image::new(width, height, channels, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> u8 {
        self.pixels[(y * self.width + x) * self.channels + c]
    }

    /// Sample with coordinates clamped into the image (edge replication).
    #[inline]
    pub fn get_clamped(&self, x: usize, y: usize, c: usize) -> u8 {
        self.get(x.min(self.width - 1), y.min(self.height - 1), c)
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }
}

/// Grid of block means as carried by an LPF payload; same layout as [`Image`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockGrid {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub values: Vec<u8>,
}

impl BlockGrid {
    pub fn new(width: usize, height: usize, channels: usize, values: Vec<u8>) -> Result<Self> {
        if values.len() != width * height * channels {
            return Err(Error::LengthMismatch {
                expected: width * height * channels,
                actual: values.len(),
            });
        }
        Ok(BlockGrid {
            width,
            height,
            channels,
            values,
        })
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, c: usize) -> usize {
        (y * self.width + x) * self.channels + c
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> u8 {
        self.values[self.index(x, y, c)]
    }

    pub fn cells(&self) -> usize {
        self.values.len()
    }
}
