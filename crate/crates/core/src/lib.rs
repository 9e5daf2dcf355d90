//! Link-level building blocks for a generative-decoder uplink.
//!
//! The transmitter side is deliberately light: block-mean (LPF) source coding,
//! weak or no channel coding, and QPSK with per-bit importance power
//! allocation. The receiver side combines soft values across retransmissions
//! and hands the received block grid to a [`semdec::SemanticDecoder`].
//!
//! A conventional separated chain (8×8 DCT codec, regular LDPC, CRC HARQ) is
//! provided alongside for comparison, together with the metrics used to
//! compare the two: error-run statistics, PSNR/SSIM, a transmitter FLOP model
//! and coverage summaries.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and the
//! external decoder client live in the `gencom` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bits;
pub mod chain;
pub mod error;
pub mod fec;
pub mod harq;
pub mod imaging;
pub mod metrics;
pub mod phy;
pub mod rng;
pub mod semdec;

pub use bits::{BitStream, LlrStream};
pub use error::{Error, Result};
pub use imaging::{CompressedImage, Image};
