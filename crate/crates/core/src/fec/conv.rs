//! Rate-1/2, K=7 convolutional code with generators 171/133 (octal) and a
//! Viterbi decoder.
//!
//! The shift register holds the current input in bit 6 and the six previous
//! inputs below it. Each input bit produces `parity(reg & 0o171)` followed by
//! `parity(reg & 0o133)`. Encoding appends `K−1` zero flush bits so the
//! trellis terminates in state 0, and the decoder traces back from there over
//! the whole block.

use alloc::vec::Vec;

pub const CONSTRAINT_LENGTH: usize = 7;
pub const MEMORY: usize = CONSTRAINT_LENGTH - 1;
pub const G0: u32 = 0o171;
pub const G1: u32 = 0o133;
const STATES: usize = 1 << MEMORY;

#[inline]
fn outputs(reg: u32) -> (u8, u8) {
    (((reg & G0).count_ones() & 1) as u8, ((reg & G1).count_ones() & 1) as u8)
}

/// Coded length for a message of `len` bits.
pub fn coded_len(len: usize) -> usize {
    2 * (len + MEMORY)
}

pub fn encode(message: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(coded_len(message.len()));
    let mut state = 0u32;
    for &bit in message.iter().chain(core::iter::repeat(&0).take(MEMORY)) {
        let reg = ((bit as u32 & 1) << MEMORY) | state;
        let (a, b) = outputs(reg);
        out.push(a);
        out.push(b);
        state = reg >> 1;
    }
    out
}

/// Hard-decision Viterbi.
///
/// Uses the correlation metric on ±1 values, which ranks paths exactly as the
/// Hamming distance does (`correlation = n − 2·distance`).
pub fn decode_hard(coded: &[u8]) -> Vec<u8> {
    let llrs: Vec<f64> = coded.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 }).collect();
    decode_soft(&llrs)
}

/// Soft-decision Viterbi on LLRs (positive favours `0`).
///
/// `llrs.len()` must be even; the returned message excludes flush bits.
// State indices double as bit patterns, so the loops index by state.
#[allow(clippy::needless_range_loop)]
pub fn decode_soft(llrs: &[f64]) -> Vec<u8> {
    let steps = llrs.len() / 2;
    if steps == 0 {
        return Vec::new();
    }
    let mut table = [(0u8, 0u8); 2 * STATES];
    for (reg, t) in table.iter_mut().enumerate() {
        *t = outputs(reg as u32);
    }

    let mut metric = [f64::NEG_INFINITY; STATES];
    metric[0] = 0.0;
    let mut next = [0.0f64; STATES];
    let mut decisions: Vec<u64> = Vec::with_capacity(steps);

    for t in 0..steps {
        let (l0, l1) = (llrs[2 * t], llrs[2 * t + 1]);
        let mut word = 0u64;
        for ns in 0..STATES {
            let input = ns >> (MEMORY - 1);
            let base = (ns & (STATES / 2 - 1)) << 1;
            let mut best = f64::NEG_INFINITY;
            let mut choice = 0;
            for x in 0..2 {
                let prev = base | x;
                let reg = (input << MEMORY) | prev;
                let (c0, c1) = table[reg];
                let bm = if c0 == 0 { l0 } else { -l0 } + if c1 == 0 { l1 } else { -l1 };
                let m = metric[prev] + bm;
                if m > best {
                    best = m;
                    choice = x;
                }
            }
            next[ns] = best;
            word |= (choice as u64) << ns;
        }
        decisions.push(word);
        // Keep metrics bounded over long blocks.
        let top = next.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for (m, n) in metric.iter_mut().zip(next.iter()) {
            *m = n - top;
        }
    }

    let mut bits = alloc::vec![0u8; steps];
    let mut state = 0usize;
    for t in (0..steps).rev() {
        bits[t] = (state >> (MEMORY - 1)) as u8;
        let x = ((decisions[t] >> state) & 1) as usize;
        state = ((state & (STATES / 2 - 1)) << 1) | x;
    }
    bits.truncate(steps.saturating_sub(MEMORY));
    bits
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn impulse_response_matches_generators() {
        let coded = encode(&[1]);
        assert_eq!(coded.len(), 14);
        // Output pair at time t taps register bit (6 − t).
        for t in 0..7 {
            let tap = 1u32 << (6 - t);
            assert_eq!(coded[2 * t], ((G0 & tap) != 0) as u8);
            assert_eq!(coded[2 * t + 1], ((G1 & tap) != 0) as u8);
        }
    }

    #[test]
    fn zero_input_zero_output() {
        let coded = encode(&[0; 64]);
        assert_eq!(coded.len(), 2 * 70);
        assert!(coded.iter().all(|&b| b == 0));
        assert_eq!(decode_hard(&coded), vec![0; 64]);
    }

    #[test]
    fn free_distance_is_ten() {
        // The weight of the impulse response equals d_free for this code.
        assert_eq!(encode(&[1]).iter().filter(|&&b| b == 1).count(), 10);
    }

    #[test]
    fn corrects_scattered_errors() {
        let msg: Vec<u8> = (0..200).map(|i| ((i * 7 + i / 3) % 2) as u8).collect();
        let mut coded = encode(&msg);
        for i in (5..coded.len()).step_by(37) {
            coded[i] ^= 1;
        }
        assert_eq!(decode_hard(&coded), msg);
    }
}
