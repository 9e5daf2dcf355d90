//! Properties checked on the shipped test images.

use gencom::testimages::all_builtin;
use gencom_core::bits::BitStream;
use gencom_core::chain::Link;
use gencom_core::fec::CodeSpec;
use gencom_core::imaging::{block_grid, dct_decode, dct_encode, lpf_encode, lpf_reconstruct, DctConfig, LpfConfig, Reconstruction};
use gencom_core::metrics::psnr;
use gencom_core::phy::{ChannelConfig, PowerProfile};
use gencom_core::semdec::{estimate_error_mask, DEFAULT_DELTA};

#[test]
fn lpf_quality_non_increasing_in_block_size() {
    for (name, img) in all_builtin() {
        for mode in [Reconstruction::Replicate, Reconstruction::Bilinear] {
            let q: Vec<f64> = [1, 2, 4, 8, 16]
                .iter()
                .map(|&b| {
                    let c = lpf_encode(&img, &LpfConfig::new(b, mode).unwrap());
                    psnr(&img, &lpf_reconstruct(&c).unwrap()).unwrap()
                })
                .collect();
            assert_eq!(q[0], f64::INFINITY);
            assert!(q.windows(2).all(|w| w[1] <= w[0]), "{name} {mode:?}: {q:?}");
        }
    }
}

#[test]
fn dct_quality_100_is_at_least_40_db() {
    for (name, img) in all_builtin() {
        let c = dct_encode(&img, &DctConfig::new(100).unwrap());
        let p = psnr(&img, &dct_decode(&c).unwrap()).unwrap();
        assert!(p >= 40.0, "{name}: {p}");
    }
}

#[test]
fn clean_grids_rarely_flag() {
    for (name, img) in all_builtin() {
        for b in [2, 4, 8] {
            let c = lpf_encode(&img, &LpfConfig::new(b, Reconstruction::Bilinear).unwrap());
            let f = estimate_error_mask(&block_grid(&c).unwrap(), DEFAULT_DELTA).fraction();
            assert!(f < 0.01, "{name} b={b}: false-flag rate {f}");
        }
    }
}

#[test]
fn msb_weighted_power_lowers_pixel_mse_at_minus_three_db() {
    let uniform = Link::new(CodeSpec::Uncoded).unwrap();
    let weighted = Link::new(CodeSpec::Uncoded).unwrap().with_power(PowerProfile::default());
    let (mut mse_u, mut mse_w) = (0.0, 0.0);
    for (i, (_, img)) in all_builtin().into_iter().enumerate() {
        let c = lpf_encode(&img, &LpfConfig::new(4, Reconstruction::Bilinear).unwrap());
        let msg = BitStream::from_bytes(&c.payload);
        for trial in 0..10u64 {
            // Paired: both links see the same noise realization.
            let ch = ChannelConfig::awgn(-3.0, 100 * i as u64 + trial);
            for (link, acc) in [(&uniform, &mut mse_u), (&weighted, &mut mse_w)] {
                let llrs = link.send(&link.prepare(&msg).unwrap(), &ch).unwrap();
                let rx = link.decode(&llrs, msg.len()).unwrap().to_bytes();
                *acc += c
                    .payload
                    .iter()
                    .zip(&rx)
                    .map(|(&a, &b)| (a as f64 - b as f64).powi(2))
                    .sum::<f64>()
                    / rx.len() as f64;
            }
        }
    }
    assert!(mse_w < mse_u, "weighted {mse_w} vs uniform {mse_u}");
}
