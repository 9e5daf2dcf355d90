//! Hamming(7,4), systematic: `[d1 d2 d3 d4 p1 p2 p3]` with
//! `p1 = d1⊕d2⊕d4`, `p2 = d1⊕d3⊕d4`, `p3 = d2⊕d3⊕d4`.

use alloc::vec::Vec;

fn codeword(d: [u8; 4]) -> [u8; 7] {
    [
        d[0],
        d[1],
        d[2],
        d[3],
        d[0] ^ d[1] ^ d[3],
        d[0] ^ d[2] ^ d[3],
        d[1] ^ d[2] ^ d[3],
    ]
}

/// Syndrome (p1 p2 p3 check failures) to the flipped position.
const SYNDROME_POSITION: [Option<usize>; 8] = {
    // Column of H for each position: d1=110 d2=101 d3=011 d4=111 p1=100 p2=010 p3=001
    let mut t = [None; 8];
    t[0b110] = Some(0);
    t[0b101] = Some(1);
    t[0b011] = Some(2);
    t[0b111] = Some(3);
    t[0b100] = Some(4);
    t[0b010] = Some(5);
    t[0b001] = Some(6);
    t
};

/// `message.len()` must be a multiple of 4.
pub fn encode(message: &[u8]) -> Vec<u8> {
    message
        .chunks_exact(4)
        .flat_map(|d| codeword([d[0], d[1], d[2], d[3]]))
        .collect()
}

/// Syndrome decoding; corrects any single error per block.
pub fn decode_hard(coded: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(coded.len() / 7 * 4);
    for c in coded.chunks_exact(7) {
        let mut c: [u8; 7] = [c[0], c[1], c[2], c[3], c[4], c[5], c[6]];
        let s1 = c[0] ^ c[1] ^ c[3] ^ c[4];
        let s2 = c[0] ^ c[2] ^ c[3] ^ c[5];
        let s3 = c[1] ^ c[2] ^ c[3] ^ c[6];
        let syndrome = ((s1 << 2) | (s2 << 1) | s3) as usize;
        if let Some(pos) = SYNDROME_POSITION[syndrome] {
            c[pos] ^= 1;
        }
        out.extend_from_slice(&c[..4]);
    }
    out
}

/// Maximum-likelihood decoding over the 16 codewords by LLR correlation.
pub fn decode_soft(llrs: &[f64]) -> Vec<u8> {
    let book: Vec<([u8; 4], [u8; 7])> = (0..16u8)
        .map(|m| {
            let d = [(m >> 3) & 1, (m >> 2) & 1, (m >> 1) & 1, m & 1];
            (d, codeword(d))
        })
        .collect();
    let mut out = Vec::with_capacity(llrs.len() / 7 * 4);
    for l in llrs.chunks_exact(7) {
        let metric = |cw: &[u8; 7]| -> f64 {
            cw.iter()
                .zip(l)
                .map(|(&b, &llr)| if b == 0 { llr } else { -llr })
                .sum()
        };
        let mut best = &book[0];
        let mut best_metric = metric(&best.1);
        for entry in &book[1..] {
            let m = metric(&entry.1);
            if m > best_metric {
                best = entry;
                best_metric = m;
            }
        }
        out.extend_from_slice(&best.0);
    }
    out
}
