use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::CounterRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterleaverSpec {
    None,
    /// Write row-wise into `rows × cols`, read column-wise. Applied per chunk
    /// of `rows·cols`, so the stream length must be a multiple of it.
    Block { rows: usize, cols: usize },
    /// Fisher–Yates shuffle driven by the counter-based generator.
    Random { seed: u64 },
}

impl InterleaverSpec {
    /// `perm[i]` is the input index that lands at output position `i`.
    pub fn permutation(&self, len: usize) -> Result<Vec<usize>> {
        match *self {
            InterleaverSpec::None => Ok((0..len).collect()),
            InterleaverSpec::Block { rows, cols } => {
                let chunk = rows * cols;
                if chunk == 0 {
                    return Err(Error::InvalidConfig("block interleaver needs rows, cols > 0"));
                }
                if len % chunk != 0 {
                    return Err(Error::LengthMismatch {
                        expected: len.next_multiple_of(chunk),
                        actual: len,
                    });
                }
                let mut perm = Vec::with_capacity(len);
                for base in (0..len).step_by(chunk) {
                    for c in 0..cols {
                        for r in 0..rows {
                            perm.push(base + r * cols + c);
                        }
                    }
                }
                Ok(perm)
            }
            InterleaverSpec::Random { seed } => {
                let mut perm: Vec<usize> = (0..len).collect();
                let mut rng = CounterRng::new(seed);
                for i in (1..len).rev() {
                    let j = rng.below(i as u64 + 1) as usize;
                    perm.swap(i, j);
                }
                Ok(perm)
            }
        }
    }
}

pub fn interleave<T: Copy>(data: &[T], spec: &InterleaverSpec) -> Result<Vec<T>> {
    let perm = spec.permutation(data.len())?;
    Ok(perm.iter().map(|&i| data[i]).collect())
}

pub fn deinterleave<T: Copy + Default>(data: &[T], spec: &InterleaverSpec) -> Result<Vec<T>> {
    let perm = spec.permutation(data.len())?;
    let mut out = alloc::vec![T::default(); data.len()];
    for (pos, &src) in perm.iter().enumerate() {
        out[src] = data[pos];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn none_is_identity() {
        let data = vec![1, 0, 0, 1, 1];
        assert_eq!(interleave(&data, &InterleaverSpec::None).unwrap(), data);
    }

    #[test]
    fn block_two_by_three() {
        let data = ["b0", "b1", "b2", "b3", "b4", "b5"];
        let out = interleave(&data, &InterleaverSpec::Block { rows: 2, cols: 3 }).unwrap();
        assert_eq!(out, ["b0", "b3", "b1", "b4", "b2", "b5"]);
    }

    #[test]
    fn block_length_mismatch() {
        assert!(matches!(
            interleave(&[0u8; 7], &InterleaverSpec::Block { rows: 2, cols: 3 }),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn random_seed_seven_round_trip() {
        let data: Vec<u8> = (0..1024).map(|i| (i % 2) as u8).collect();
        let spec = InterleaverSpec::Random { seed: 7 };
        let mixed = interleave(&data, &spec).unwrap();
        assert_ne!(mixed, data);
        assert_eq!(deinterleave(&mixed, &spec).unwrap(), data);
    }

    proptest! {
        #[test]
        fn permutations_are_bijections(len in 1usize..600, seed in any::<u64>(), rows in 1usize..6, cols in 1usize..6) {
            for spec in [InterleaverSpec::None, InterleaverSpec::Random { seed }] {
                let mut perm = spec.permutation(len).unwrap();
                perm.sort_unstable();
                prop_assert!(perm.iter().enumerate().all(|(i, &p)| i == p));
            }
            let block = InterleaverSpec::Block { rows, cols };
            let n = len - len % (rows * cols);
            let data: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let back = deinterleave(&interleave(&data, &block).unwrap(), &block).unwrap();
            prop_assert_eq!(back, data);
        }
    }
}
