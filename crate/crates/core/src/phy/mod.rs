//! QPSK with importance-aware power allocation, channel models, soft
//! demodulation and Chase combining.
//!
//! SNR is Es/N0 per QPSK symbol everywhere, with Es = 1 before allocation.

mod channel;
mod power;
mod qpsk;

pub use channel::{apply_channel, ChannelConfig, ChannelModel, ChannelOutput};
pub use num_complex::Complex64;
pub use power::{BitLayout, PowerProfile};
pub use qpsk::{chase_combine, qpsk_demodulate, qpsk_modulate, Modulated};

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / core::f64::consts::SQRT_2)
}

/// Analytic per-bit error rate of Gray QPSK on AWGN: `Q(√(Es/N0))`.
pub fn qpsk_ber(snr_db: f64) -> f64 {
    q_function(libm::sqrt(db_to_linear(snr_db)))
}

pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

/// Eb/N0 in dB for a given Es/N0, code rate, and 2 coded bits per symbol.
pub fn esn0_to_ebn0_db(esn0_db: f64, rate: f64) -> f64 {
    esn0_db - 10.0 * libm::log10(2.0) - 10.0 * libm::log10(rate)
}
