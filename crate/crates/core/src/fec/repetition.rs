use alloc::vec::Vec;

/// Each bit repeated `k` times back to back.
pub fn encode(message: &[u8], k: usize) -> Vec<u8> {
    message.iter().flat_map(|&b| core::iter::repeat(b).take(k)).collect()
}

/// Majority vote per group; ties (even `k`) decide `0`.
pub fn decode_hard(coded: &[u8], k: usize) -> Vec<u8> {
    coded
        .chunks(k)
        .map(|g| (2 * g.iter().filter(|&&b| b != 0).count() > k) as u8)
        .collect()
}

/// Sum of LLRs per group, then sign.
pub fn decode_soft(llrs: &[f64], k: usize) -> Vec<u8> {
    llrs.chunks(k).map(|g| (g.iter().sum::<f64>() < 0.0) as u8).collect()
}
