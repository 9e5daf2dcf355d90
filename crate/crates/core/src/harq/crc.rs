use super::{round_channel, HarqKind, HarqSession, Outcome, RoundAction, RoundRecord};
use crate::bits::LlrStream;
use crate::chain::{bit_error_rate, Link};
use crate::error::{Error, Result};
use crate::fec::{crc_check, CRC_BITS};
use crate::phy::{chase_combine, ChannelConfig};

/// CRC-triggered HARQ with Chase combining. `message` must already carry its
/// CRC. Exhaustion is an outcome, not an error.
pub fn run_crc_harq(
    message: &[u8],
    link: &Link,
    channel: &ChannelConfig,
    max_rounds: usize,
) -> Result<HarqSession> {
    if max_rounds == 0 {
        return Err(Error::InvalidConfig("max_rounds must be at least 1"));
    }
    if message.len() < CRC_BITS {
        return Err(Error::StreamTooShort);
    }
    let frame = link.prepare(message)?;
    let mut buffer: Option<LlrStream> = None;
    let mut records = alloc::vec::Vec::new();
    for round in 1..=max_rounds {
        let ch = round_channel(channel, round);
        let llrs = link.send(&frame, &ch)?;
        let ber_pre = bit_error_rate(&frame.coded, &llrs.hard_decisions());
        let combined = match buffer.take() {
            None => llrs,
            Some(prev) => chase_combine(&[prev, llrs])?,
        };
        let decoded = link.decode(&combined, message.len())?;
        let ok = crc_check(&decoded)?;
        records.push(RoundRecord {
            round,
            action: if round == 1 { RoundAction::Initial } else { RoundAction::Chase },
            snr_db: ch.snr_db,
            seed: ch.seed,
            block_size: None,
            message_bits: message.len(),
            coded_bits: frame.coded.len(),
            ber_pre,
            ber_post: bit_error_rate(message, &decoded),
            combined: round,
            crc_ok: Some(ok),
            corruption: None,
            ack: ok,
        });
        if ok || round == max_rounds {
            return Ok(HarqSession {
                kind: HarqKind::CrcBased,
                records,
                outcome: if ok { Outcome::Ack } else { Outcome::NackExhausted },
                buffer: combined,
                sent: crate::bits::BitStream::from_bits(message.to_vec()),
                decoded,
                image: None,
            });
        }
        buffer = Some(combined);
    }
    unreachable!("loop returns on the last round")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fec::{crc_append, CodeSpec};
    use alloc::vec::Vec;

    fn message(n: usize, seed: u64) -> Vec<u8> {
        let mut rng = crate::rng::CounterRng::new(seed);
        let bits: Vec<u8> = (0..n).map(|_| rng.below(2) as u8).collect();
        crc_append(&bits).into_inner()
    }

    #[test]
    fn noiseless_acks_first_round() {
        let link = Link::new(CodeSpec::Hamming74).unwrap();
        let s = run_crc_harq(&message(500, 1), &link, &ChannelConfig::awgn(300.0, 3), 4).unwrap();
        assert_eq!(s.outcome, Outcome::Ack);
        assert_eq!(s.rounds(), 1);
    }

    #[test]
    fn hopeless_channel_exhausts() {
        let link = Link::new(CodeSpec::Uncoded).unwrap();
        let s = run_crc_harq(&message(2000, 2), &link, &ChannelConfig::awgn(-30.0, 3), 2).unwrap();
        assert_eq!(s.outcome, Outcome::NackExhausted);
        assert_eq!(s.rounds(), 2);
        assert_eq!(s.records[1].combined, 2);
        assert_eq!(s.buffer.len(), 2016);
    }

    #[test]
    fn rounds_fall_with_snr() {
        let link = Link::new(CodeSpec::Uncoded).unwrap();
        let msg = message(1000, 5);
        let mean_rounds = |snr: f64| {
            (0..40u64)
                .map(|t| run_crc_harq(&msg, &link, &ChannelConfig::awgn(snr, t), 4).unwrap().rounds())
                .sum::<usize>() as f64
                / 40.0
        };
        let r: Vec<f64> = [3.0, 5.0, 7.0, 9.0].iter().map(|&s| mean_rounds(s)).collect();
        assert!(r.windows(2).all(|w| w[1] <= w[0]), "{r:?}");
        assert!(r[0] > r[3]);
    }

    #[test]
    fn rejects_bad_arguments() {
        let link = Link::new(CodeSpec::Uncoded).unwrap();
        assert!(run_crc_harq(&[0; 40], &link, &ChannelConfig::awgn(0.0, 0), 0).is_err());
        assert_eq!(
            run_crc_harq(&[0; 8], &link, &ChannelConfig::awgn(0.0, 0), 1),
            Err(Error::StreamTooShort)
        );
    }
}
