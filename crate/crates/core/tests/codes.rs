use gencom_core::chain::{bit_error_rate, Link};
use gencom_core::fec::{CodeSpec, LdpcCode, Received};
use gencom_core::phy::ChannelConfig;
use gencom_core::rng::CounterRng;
use proptest::prelude::*;

fn random_bits(len: usize, seed: u64) -> Vec<u8> {
    let mut rng = CounterRng::new(seed);
    (0..len).map(|_| (rng.next_u64() & 1) as u8).collect()
}

#[test]
fn soft_viterbi_beats_hard_on_the_same_noise() {
    let link = Link::new(CodeSpec::Convolutional).unwrap();
    let (mut soft_errors, mut hard_errors, mut total) = (0usize, 0usize, 0usize);
    for block in 0..100u64 {
        let msg = random_bits(10_000, block);
        let frame = link.prepare(&msg).unwrap();
        let llrs = link.send(&frame, &ChannelConfig::awgn(2.0, 1000 + block)).unwrap();
        let soft = link.decode(&llrs, msg.len()).unwrap();
        let hard_in = llrs.hard_decisions();
        let hard = link.codec.decode(Received::Hard(&hard_in), msg.len()).unwrap();
        soft_errors += (bit_error_rate(&msg, &soft) * msg.len() as f64).round() as usize;
        hard_errors += (bit_error_rate(&msg, &hard) * msg.len() as f64).round() as usize;
        total += msg.len();
    }
    assert!(total >= 1_000_000);
    assert!(soft_errors < hard_errors, "soft {soft_errors} vs hard {hard_errors}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn ldpc_encoder_output_is_a_codeword(seed in any::<u64>(), n_half in 6usize..200) {
        let code = LdpcCode::new(2 * n_half, 7).unwrap();
        let msg = random_bits(code.k(), seed);
        let cw = code.encode_block(&msg);
        prop_assert!(code.syndrome(&cw).iter().all(|&s| s == 0));
        prop_assert_eq!(code.extract_message(&cw), msg);
    }
}
