//! Regular (3,6) LDPC code.
//!
//! The parity-check matrix has `N/2` rows, three ones per column and six per
//! row. It is grown column by column from a seeded random graph: each column
//! picks its three rows among the least-filled rows that do not close a
//! 4-cycle, relaxing the cycle rule only when no such row is left.
//!
//! Encoding is systematic. Gauss–Jordan elimination over GF(2) brings `H` to
//! reduced row-echelon form; pivot columns carry parity, the remaining `K`
//! columns carry the message. If `H` is rank deficient, `K > N/2`.
//!
//! Decoding is flooding normalized min-sum (factor 0.75) with early exit once
//! every parity check is satisfied.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::error::{Error, Result};
use crate::rng::CounterRng;

pub const COLUMN_WEIGHT: usize = 3;
pub const ROW_WEIGHT: usize = 6;
pub const MIN_SUM_SCALE: f64 = 0.75;
pub const MAX_ITERATIONS: usize = 50;
/// Seed used when a code is built from its length alone.
pub const DEFAULT_SEED: u64 = 0x1D9C_5EED;

#[derive(Debug, Clone)]
pub struct LdpcCode {
    n: usize,
    k: usize,
    /// Rows of `H` as column lists.
    check_vars: Vec<Vec<u32>>,
    /// Columns of `H` as row lists.
    var_checks: Vec<Vec<u32>>,
    /// Flattened edge view: edges of check `c` are `offsets[c]..offsets[c+1]`.
    offsets: Vec<usize>,
    edge_var: Vec<u32>,
    /// For each variable, the edge indices touching it.
    var_edges: Vec<Vec<u32>>,
    info_positions: Vec<usize>,
    /// `(pivot column, reduced row bits)` for each parity bit.
    parity_rows: Vec<(usize, Vec<u64>)>,
}

/// Result of decoding one codeword.
#[derive(Debug, Clone, PartialEq)]
pub struct LdpcDecode {
    pub codeword: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
}

impl LdpcCode {
    pub fn new(n: usize, seed: u64) -> Result<Self> {
        if n < 12 || n % 2 != 0 {
            return Err(Error::InvalidConfig("LDPC length must be even and at least 12"));
        }
        let m = n / 2;
        let var_checks = build_graph(n, m, seed);
        let mut check_vars = vec![Vec::new(); m];
        for (v, rows) in var_checks.iter().enumerate() {
            for &r in rows {
                check_vars[r as usize].push(v as u32);
            }
        }
        let mut offsets = Vec::with_capacity(m + 1);
        let mut edge_var = Vec::new();
        let mut var_edges = vec![Vec::new(); n];
        offsets.push(0);
        for vars in &check_vars {
            for &v in vars {
                var_edges[v as usize].push(edge_var.len() as u32);
                edge_var.push(v);
            }
            offsets.push(edge_var.len());
        }

        let (info_positions, parity_rows) = systematic_form(n, &check_vars);
        Ok(LdpcCode {
            n,
            k: info_positions.len(),
            check_vars,
            var_checks,
            offsets,
            edge_var,
            var_edges,
            info_positions,
            parity_rows,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn checks(&self) -> usize {
        self.check_vars.len()
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn check_rows(&self) -> &[Vec<u32>] {
        &self.check_vars
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    /// Encodes exactly `k` message bits into an `n`-bit codeword.
    pub fn encode_block(&self, message: &[u8]) -> Vec<u8> {
        debug_assert_eq!(message.len(), self.k);
        let words = self.n.div_ceil(64);
        let mut cw = vec![0u64; words];
        for (&pos, &b) in self.info_positions.iter().zip(message) {
            if b != 0 {
                cw[pos / 64] |= 1 << (pos % 64);
            }
        }
        let mut parity = Vec::with_capacity(self.parity_rows.len());
        for (pivot, row) in &self.parity_rows {
            let ones: u32 = row.iter().zip(&cw).map(|(r, c)| (r & c).count_ones()).sum();
            parity.push((*pivot, ones & 1));
        }
        for (pivot, p) in parity {
            if p != 0 {
                cw[pivot / 64] |= 1 << (pivot % 64);
            }
        }
        (0..self.n).map(|i| ((cw[i / 64] >> (i % 64)) & 1) as u8).collect()
    }

    pub fn extract_message(&self, codeword: &[u8]) -> Vec<u8> {
        self.info_positions.iter().map(|&p| codeword[p]).collect()
    }

    /// `H·c` over GF(2), one entry per check.
    pub fn syndrome(&self, codeword: &[u8]) -> Vec<u8> {
        self.check_vars
            .iter()
            .map(|vars| vars.iter().fold(0u8, |acc, &v| acc ^ codeword[v as usize]))
            .collect()
    }

    pub fn is_codeword(&self, codeword: &[u8]) -> bool {
        codeword.len() == self.n && self.syndrome(codeword).iter().all(|&s| s == 0)
    }

    /// Normalized min-sum over one codeword's LLRs.
    pub fn decode_block(&self, llrs: &[f64], max_iterations: usize) -> LdpcDecode {
        debug_assert_eq!(llrs.len(), self.n);
        let mut hard: Vec<u8> = llrs.iter().map(|&l| (l < 0.0) as u8).collect();
        if self.is_codeword(&hard) {
            return LdpcDecode {
                codeword: hard,
                converged: true,
                iterations: 0,
            };
        }
        let edges = self.edge_var.len();
        let mut v2c: Vec<f64> = self.edge_var.iter().map(|&v| llrs[v as usize]).collect();
        let mut c2v = vec![0.0f64; edges];
        let mut total = llrs.to_vec();

        for it in 1..=max_iterations {
            for c in 0..self.check_vars.len() {
                let range = self.offsets[c]..self.offsets[c + 1];
                let mut sign_neg = false;
                let (mut min1, mut min2) = (f64::INFINITY, f64::INFINITY);
                let mut argmin = usize::MAX;
                for e in range.clone() {
                    let q = v2c[e];
                    sign_neg ^= q < 0.0;
                    let a = q.abs();
                    if a < min1 {
                        min2 = min1;
                        min1 = a;
                        argmin = e;
                    } else if a < min2 {
                        min2 = a;
                    }
                }
                for e in range {
                    let mag = if e == argmin { min2 } else { min1 };
                    let neg = sign_neg ^ (v2c[e] < 0.0);
                    c2v[e] = MIN_SUM_SCALE * if neg { -mag } else { mag };
                }
            }
            for v in 0..self.n {
                let t = llrs[v] + self.var_edges[v].iter().map(|&e| c2v[e as usize]).sum::<f64>();
                total[v] = t;
                hard[v] = (t < 0.0) as u8;
            }
            if self.is_codeword(&hard) {
                return LdpcDecode {
                    codeword: hard,
                    converged: true,
                    iterations: it,
                };
            }
            for (e, &v) in self.edge_var.iter().enumerate() {
                v2c[e] = total[v as usize] - c2v[e];
            }
        }
        LdpcDecode {
            codeword: hard,
            converged: false,
            iterations: max_iterations,
        }
    }

    /// Number of 4-cycles in the Tanner graph (pairs of rows sharing two columns).
    pub fn four_cycles(&self) -> usize {
        let mut count = 0;
        let m = self.check_vars.len();
        let mut shared = vec![0u32; m];
        for r in 0..m {
            for s in shared.iter_mut() {
                *s = 0;
            }
            for &v in &self.check_vars[r] {
                for &other in &self.var_checks[v as usize] {
                    if other as usize > r {
                        shared[other as usize] += 1;
                    }
                }
            }
            count += shared.iter().map(|&s| (s as usize * s.saturating_sub(1) as usize) / 2).sum::<usize>();
        }
        count
    }

    /// MacKay alist representation of `H` (1-based indices, zero padded).
    pub fn to_alist(&self) -> String {
        let m = self.check_vars.len();
        let max_col = self.var_checks.iter().map(Vec::len).max().unwrap_or(0);
        let max_row = self.check_vars.iter().map(Vec::len).max().unwrap_or(0);
        let mut s = String::new();
        let join = |s: &mut String, items: &mut dyn Iterator<Item = usize>| {
            let mut first = true;
            for i in items {
                if !first {
                    s.push(' ');
                }
                let _ = write!(s, "{i}");
                first = false;
            }
            s.push('\n');
        };
        let _ = writeln!(s, "{} {}", self.n, m);
        let _ = writeln!(s, "{max_col} {max_row}");
        join(&mut s, &mut self.var_checks.iter().map(Vec::len));
        join(&mut s, &mut self.check_vars.iter().map(Vec::len));
        for rows in &self.var_checks {
            let mut sorted: Vec<usize> = rows.iter().map(|&r| r as usize + 1).collect();
            sorted.sort_unstable();
            sorted.resize(max_col, 0);
            join(&mut s, &mut sorted.into_iter());
        }
        for cols in &self.check_vars {
            let mut sorted: Vec<usize> = cols.iter().map(|&c| c as usize + 1).collect();
            sorted.sort_unstable();
            sorted.resize(max_row, 0);
            join(&mut s, &mut sorted.into_iter());
        }
        s
    }
}

fn build_graph(n: usize, m: usize, seed: u64) -> Vec<Vec<u32>> {
    let mut rng = CounterRng::new(seed);
    let mut degree = vec![0usize; m];
    let mut row_cols: Vec<Vec<u32>> = vec![Vec::new(); m];
    let mut col_rows: Vec<Vec<u32>> = Vec::with_capacity(n);
    let mut blocked = vec![false; m];
    let mut candidates = Vec::with_capacity(m);

    for col in 0..n {
        let mut chosen: Vec<u32> = Vec::with_capacity(COLUMN_WEIGHT);
        for _ in 0..COLUMN_WEIGHT {
            for b in blocked.iter_mut() {
                *b = false;
            }
            // Rows already sharing a column with a chosen row would close a 4-cycle.
            for &r in &chosen {
                blocked[r as usize] = true;
                for &c in &row_cols[r as usize] {
                    for &other in &col_rows[c as usize] {
                        blocked[other as usize] = true;
                    }
                }
            }
            let open = |r: usize| degree[r] < ROW_WEIGHT && !chosen.contains(&(r as u32));
            let tiers: [&dyn Fn(usize) -> bool; 2] = [&|r| open(r) && !blocked[r], &|r| open(r)];
            let mut pick = None;
            for tier in tiers {
                candidates.clear();
                let min_deg = (0..m).filter(|&r| tier(r)).map(|r| degree[r]).min();
                if let Some(d) = min_deg {
                    candidates.extend((0..m).filter(|&r| tier(r) && degree[r] == d));
                    pick = Some(candidates[rng.below(candidates.len() as u64) as usize]);
                    break;
                }
            }
            // Only reachable in the last few columns of tiny codes.
            let r = pick.unwrap_or_else(|| {
                let free: Vec<usize> = (0..m).filter(|&r| !chosen.contains(&(r as u32))).collect();
                free[rng.below(free.len() as u64) as usize]
            });
            chosen.push(r as u32);
            degree[r] += 1;
        }
        for &r in &chosen {
            row_cols[r as usize].push(col as u32);
        }
        col_rows.push(chosen);
    }
    col_rows
}

/// Reduced row-echelon form of `H`; returns message positions and parity rows.
fn systematic_form(n: usize, check_vars: &[Vec<u32>]) -> (Vec<usize>, Vec<(usize, Vec<u64>)>) {
    let words = n.div_ceil(64);
    let mut rows: Vec<Vec<u64>> = check_vars
        .iter()
        .map(|vars| {
            let mut row = vec![0u64; words];
            for &v in vars {
                row[v as usize / 64] ^= 1 << (v % 64);
            }
            row
        })
        .collect();
    let m = rows.len();
    let mut rank = 0;
    let mut pivots = Vec::with_capacity(m);
    for col in 0..n {
        if rank == m {
            break;
        }
        let (w, bit) = (col / 64, 1u64 << (col % 64));
        let Some(p) = (rank..m).find(|&r| rows[r][w] & bit != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[w] & bit != 0 {
                for (a, b) in row.iter_mut().zip(&pivot_row) {
                    *a ^= b;
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let info = (0..n).filter(|&c| !is_pivot[c]).collect();
    let parity = pivots.into_iter().zip(rows).collect();
    (info, parity)
}
