//! Semantic decoders: the receiver-side contract plus deterministic
//! reference implementations.
//!
//! A decoder receives the (possibly corrupted) compressed payload, an
//! optional error mask and the output size. The reference decoders are pure
//! functions of these inputs.

mod inpaint;
mod mask;

pub use inpaint::{inpaint_grid, InpaintDecoder, DEFAULT_MAX_PASSES};
pub use mask::{estimate_error_mask, ErrorMask, DEFAULT_DELTA};

use alloc::boxed::Box;

use crate::error::Result;
use crate::imaging::{bilinear_upscale, block_grid, BlockGrid, CompressedImage, Image};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capabilities {
    pub handles_error_mask: bool,
    /// Upscale factor the decoder is built for; 0 means any.
    pub target_upscale: usize,
}

pub trait SemanticDecoder: Send + Sync {
    /// Stable identifier written to result tables.
    fn id(&self) -> &str;

    fn capabilities(&self) -> Capabilities;

    /// Reconstructs a `width × height` image from a received payload.
    fn restore(
        &self,
        received: &CompressedImage,
        mask: Option<&ErrorMask>,
        width: usize,
        height: usize,
    ) -> Result<Image>;
}

impl<D: SemanticDecoder + ?Sized> SemanticDecoder for Box<D> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn capabilities(&self) -> Capabilities {
        (**self).capabilities()
    }

    fn restore(
        &self,
        received: &CompressedImage,
        mask: Option<&ErrorMask>,
        width: usize,
        height: usize,
    ) -> Result<Image> {
        (**self).restore(received, mask, width, height)
    }
}

/// Bilinear interpolation of the received block means; ignores any mask.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UpsampleDecoder;

impl SemanticDecoder for UpsampleDecoder {
    fn id(&self) -> &str {
        "upsample"
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            handles_error_mask: false,
            target_upscale: 0,
        }
    }

    fn restore(
        &self,
        received: &CompressedImage,
        _mask: Option<&ErrorMask>,
        width: usize,
        height: usize,
    ) -> Result<Image> {
        upscale_grid(received, &block_grid(received)?, width, height)
    }
}

/// Upscales a grid that came from `received` to `width × height`.
pub fn upscale_grid(
    received: &CompressedImage,
    grid: &BlockGrid,
    width: usize,
    height: usize,
) -> Result<Image> {
    let h = &received.header;
    bilinear_upscale(grid, h.param as usize, (h.width(), h.height()), (width, height))
}
