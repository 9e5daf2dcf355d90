use super::{round_channel, HarqKind, HarqPolicy, HarqSession, Outcome, RoundAction, RoundRecord};
use crate::bits::{BitStream, LlrStream};
use crate::chain::{bit_error_rate, Frame, Link};
use crate::error::{Error, Result};
use crate::imaging::{block_grid, lpf_encode, CompressedImage, Image, LpfConfig};
use crate::phy::{chase_combine, ChannelConfig};
use crate::semdec::{estimate_error_mask, SemanticDecoder};

struct Payload {
    config: LpfConfig,
    compressed: CompressedImage,
    message: BitStream,
    frame: Frame,
}

impl Payload {
    fn new(image: &Image, config: LpfConfig, link: &Link) -> Result<Self> {
        let compressed = lpf_encode(image, &config);
        let message = BitStream::from_bytes(&compressed.payload);
        let frame = link.prepare(&message)?;
        Ok(Payload {
            config,
            compressed,
            message,
            frame,
        })
    }
}

/// Semantic-aware HARQ over the LPF chain.
///
/// Round 1 sends the LPF payload. Every round decodes the Chase-combined
/// LLRs, rebuilds the block-mean grid and estimates its corruption fraction
/// `f`; the session acknowledges iff `f ≤ τ`. After a NACK the policy ladder
/// picks the next step. The final image is `decoder.restore` on the accepted
/// grid, or on the last grid when the rounds run out.
pub fn run_semantic_harq(
    image: &Image,
    lpf: &LpfConfig,
    link: &Link,
    channel: &ChannelConfig,
    policy: &HarqPolicy,
    decoder: &dyn SemanticDecoder,
) -> Result<HarqSession> {
    policy.validate()?;
    if policy.kind != HarqKind::SemanticAware {
        return Err(Error::InvalidConfig("semantic HARQ needs a semantic_aware policy"));
    }
    let mut payload = Payload::new(image, *lpf, link)?;
    let mut buffer: Option<LlrStream> = None;
    let mut combined_rounds = 0;
    let mut records = alloc::vec::Vec::new();
    for round in 1..=policy.max_rounds {
        let mut action = policy.action(round);
        if action == RoundAction::Recompress {
            let b = (payload.config.block_size / 2).max(1);
            if b == payload.config.block_size {
                action = RoundAction::Chase;
            } else {
                let cfg = LpfConfig::new(b, payload.config.reconstruction)?;
                payload = Payload::new(image, cfg, link)?;
                buffer = None;
                combined_rounds = 0;
            }
        }
        let ch = round_channel(channel, round);
        let llrs = link.send(&payload.frame, &ch)?;
        let ber_pre = bit_error_rate(&payload.frame.coded, &llrs.hard_decisions());
        let combined = match buffer.take() {
            None => llrs,
            Some(prev) => chase_combine(&[prev, llrs])?,
        };
        combined_rounds += 1;
        let decoded = link.decode(&combined, payload.message.len())?;
        let received = payload.compressed.with_payload(decoded.to_bytes());
        let grid = block_grid(&received)?;
        let mask = estimate_error_mask(&grid, policy.delta);
        let f = mask.fraction();
        let ack = f <= policy.tau;
        records.push(RoundRecord {
            round,
            action,
            snr_db: ch.snr_db,
            seed: ch.seed,
            block_size: Some(payload.config.block_size),
            message_bits: payload.message.len(),
            coded_bits: payload.frame.coded.len(),
            ber_pre,
            ber_post: bit_error_rate(&payload.message, &decoded),
            combined: combined_rounds,
            crc_ok: None,
            corruption: Some(f),
            ack,
        });
        if ack || round == policy.max_rounds {
            let mask_arg = decoder.capabilities().handles_error_mask.then_some(&mask);
            let restored = decoder.restore(&received, mask_arg, image.width(), image.height())?;
            return Ok(HarqSession {
                kind: HarqKind::SemanticAware,
                records,
                outcome: if ack { Outcome::Ack } else { Outcome::NackExhausted },
                buffer: combined,
                sent: payload.message,
                decoded,
                image: Some(restored),
            });
        }
        buffer = Some(combined);
    }
    unreachable!("loop returns on the last round")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fec::CodeSpec;
    use crate::imaging::{to_sample, Reconstruction};
    use crate::phy::PowerProfile;
    use crate::semdec::{InpaintDecoder, UpsampleDecoder};
    use alloc::vec::Vec;

    fn scene() -> Image {
        Image::from_fn(128, 96, 1, |x, y, _| {
            let fx = x as f64 / 128.0;
            let fy = y as f64 / 96.0;
            to_sample(120.0 + 60.0 * libm::sin(4.0 * fx + 2.0 * fy) + 40.0 * libm::cos(3.0 * fy - fx))
        })
        .unwrap()
    }

    fn lpf(b: usize) -> LpfConfig {
        LpfConfig::new(b, Reconstruction::Bilinear).unwrap()
    }

    fn uncoded() -> Link {
        Link::new(CodeSpec::Uncoded).unwrap()
    }

    #[test]
    fn noiseless_acks_immediately() {
        let img = scene();
        let s = run_semantic_harq(
            &img,
            &lpf(8),
            &uncoded(),
            &ChannelConfig::awgn(300.0, 1),
            &HarqPolicy::default(),
            &InpaintDecoder::default(),
        )
        .unwrap();
        assert_eq!(s.outcome, Outcome::Ack);
        assert_eq!(s.rounds(), 1);
        assert_eq!(s.final_corruption(), Some(0.0));
        let out = s.image.unwrap();
        assert_eq!((out.width(), out.height()), (128, 96));
        let clean = lpf_encode(&img, &lpf(8));
        assert_eq!(out, UpsampleDecoder.restore(&clean, None, 128, 96).unwrap());
    }

    #[test]
    fn ladder_recompresses_on_round_three() {
        let s = run_semantic_harq(
            &scene(),
            &lpf(8),
            &uncoded(),
            &ChannelConfig::awgn(-30.0, 2),
            &HarqPolicy::default(),
            &UpsampleDecoder,
        )
        .unwrap();
        assert_eq!(s.outcome, Outcome::NackExhausted);
        let r = &s.records;
        assert_eq!(r.len(), 4);
        assert_eq!(r[0].block_size, Some(8));
        assert_eq!(r[1].action, RoundAction::Chase);
        assert_eq!(r[1].combined, 2);
        assert_eq!(r[2].action, RoundAction::Recompress);
        assert_eq!(r[2].block_size, Some(4));
        assert_eq!(r[2].message_bits, 4 * r[0].message_bits);
        assert_eq!(r[2].combined, 1);
        assert_eq!(r[3].combined, 2);
        assert_eq!(s.buffer.len(), r[3].coded_bits);
    }

    #[test]
    fn recompress_at_block_one_is_a_chase() {
        let policy = HarqPolicy {
            ladder: alloc::vec![super::super::LadderStep::Recompress],
            max_rounds: 3,
            ..HarqPolicy::default()
        };
        let s = run_semantic_harq(
            &scene(),
            &lpf(2),
            &uncoded(),
            &ChannelConfig::awgn(-30.0, 2),
            &policy,
            &UpsampleDecoder,
        )
        .unwrap();
        let actions: Vec<_> = s.records.iter().map(|r| (r.action, r.block_size, r.combined)).collect();
        assert_eq!(
            actions,
            [
                (RoundAction::Initial, Some(2), 1),
                (RoundAction::Recompress, Some(1), 1),
                (RoundAction::Chase, Some(1), 2)
            ]
        );
    }

    #[test]
    fn chase_round_lowers_corruption() {
        let img = scene();
        let link = uncoded().with_power(PowerProfile::default());
        let policy = HarqPolicy {
            max_rounds: 2,
            tau: 1e-9,
            ..HarqPolicy::default()
        };
        let (mut f1, mut f2) = (0.0, 0.0);
        for t in 0..20 {
            let s = run_semantic_harq(
                &img,
                &lpf(8),
                &link,
                &ChannelConfig::awgn(-2.0, t),
                &policy,
                &UpsampleDecoder,
            )
            .unwrap();
            f1 += s.records[0].corruption.unwrap();
            f2 += s.records[1].corruption.unwrap();
        }
        assert!(f2 < f1, "{f2} !< {f1}");
    }

    #[test]
    fn rejects_crc_policy() {
        let r = run_semantic_harq(
            &scene(),
            &lpf(8),
            &uncoded(),
            &ChannelConfig::awgn(0.0, 0),
            &HarqPolicy::crc_based(4),
            &UpsampleDecoder,
        );
        assert!(r.is_err());
    }

    #[test]
    fn deterministic_sessions() {
        let img = scene();
        let run = || {
            run_semantic_harq(
                &img,
                &lpf(4),
                &uncoded().with_power(PowerProfile::default()),
                &ChannelConfig::awgn(0.0, 99),
                &HarqPolicy::default(),
                &InpaintDecoder::default(),
            )
            .unwrap()
        };
        assert_eq!(run(), run());
    }
}
