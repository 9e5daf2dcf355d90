//! One Monte-Carlo trial of a configured scheme.

use std::sync::Arc;

use gencom_core::bits::BitStream;
use gencom_core::chain::Link;
use gencom_core::fec::{crc_append, CodeSpec, CRC_BITS};
use gencom_core::harq::{run_crc_harq, run_semantic_harq, HarqKind, HarqSession, RoundRecord};
use gencom_core::imaging::{
    block_grid, dct_decode_partial, dct_encode, lpf_encode, CompressedImage, Image, LpfConfig,
};
use gencom_core::metrics::{psnr, run_length_stats, ssim, tx_flops, SourceCoding, TxConfig};
use gencom_core::phy::ChannelConfig;
use gencom_core::semdec::{estimate_error_mask, SemanticDecoder};

use crate::config::{BaselineScheme, GencomScheme};

/// Measurements of a single trial, before run bookkeeping is attached.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub ber_pre: f64,
    pub ber_post: f64,
    pub corruption: Option<f64>,
    pub psnr: f64,
    pub ssim: f64,
    pub retx_rounds: usize,
    pub flops_tx: u64,
    pub mean_run_len: f64,
    pub burstiness: f64,
    pub rounds: Vec<RoundRecord>,
    pub image: Image,
}

/// A baseline scheme bound to one source image.
pub struct PreparedBaseline {
    pub compressed: CompressedImage,
    pub message: BitStream,
    pub link: Link,
    pub max_rounds: usize,
    pub flops_tx: u64,
}

impl PreparedBaseline {
    pub fn new(scheme: &BaselineScheme, image: &Image) -> gencom_core::Result<Self> {
        Self::with_link(scheme, image, Link::new(CodeSpec::Ldpc { n: scheme.ldpc_n })?)
    }

    /// Reuses an already constructed LDPC link.
    pub fn with_link(scheme: &BaselineScheme, image: &Image, link: Link) -> gencom_core::Result<Self> {
        let compressed = dct_encode(image, &scheme.dct()?);
        let message = crc_append(&BitStream::from_bytes(&compressed.payload));
        let flops_tx = tx_flops(&TxConfig {
            width: image.width(),
            height: image.height(),
            channels: image.channels(),
            source: SourceCoding::Dct {
                quality: scheme.quality,
            },
            code: link.codec.spec(),
            crc: true,
            payload_bits: compressed.payload_bits(),
        })
        .total;
        Ok(PreparedBaseline {
            compressed,
            message,
            link,
            max_rounds: scheme.max_rounds,
            flops_tx,
        })
    }

    /// Channel bits of one transmission.
    pub fn channel_bits(&self) -> usize {
        self.link.coded_len(self.message.len())
    }

    pub fn run(&self, image: &Image, channel: &ChannelConfig) -> gencom_core::Result<TrialOutcome> {
        let session = run_crc_harq(&self.message, &self.link, channel, self.max_rounds)?;
        let payload = &session.decoded[..session.decoded.len() - CRC_BITS];
        let received = self
            .compressed
            .with_payload(BitStream::from_bits(payload.to_vec()).to_bytes());
        let restored = dct_decode_partial(&received)?.image;
        finish(image, restored, &session, None, self.flops_tx)
    }
}

/// A GenCom scheme bound to one source image.
pub struct PreparedGencom {
    pub lpf: LpfConfig,
    pub link: Link,
    pub scheme: GencomScheme,
    pub flops_tx: u64,
}

impl PreparedGencom {
    /// `budget` is the channel-bit budget to fill when the scheme matches
    /// bandwidth with a baseline.
    pub fn new(scheme: &GencomScheme, image: &Image, budget: Option<usize>) -> gencom_core::Result<Self> {
        let lpf = scheme.lpf()?;
        let payload_bits = lpf_encode(image, &lpf).payload_bits();
        let code = match budget {
            Some(bits) => match (bits / payload_bits).max(1) {
                1 => CodeSpec::Uncoded,
                k => CodeSpec::Repetition { k },
            },
            None => scheme.code,
        };
        let mut link = Link::new(code)?.with_interleaver(scheme.interleaver);
        if let Some(profile) = scheme.power.profile()? {
            link = link.with_power(profile);
        }
        let crc = scheme.harq.kind == HarqKind::CrcBased;
        let flops_tx = tx_flops(&TxConfig {
            width: image.width(),
            height: image.height(),
            channels: image.channels(),
            source: SourceCoding::Lpf {
                block_size: lpf.block_size,
            },
            code,
            crc,
            payload_bits,
        })
        .total;
        Ok(PreparedGencom {
            lpf,
            link,
            scheme: scheme.clone(),
            flops_tx,
        })
    }

    pub fn run(
        &self,
        image: &Image,
        channel: &ChannelConfig,
        decoder: &dyn SemanticDecoder,
    ) -> gencom_core::Result<TrialOutcome> {
        match self.scheme.harq.kind {
            HarqKind::SemanticAware => {
                let session = run_semantic_harq(image, &self.lpf, &self.link, channel, &self.scheme.harq, decoder)?;
                let restored = session.image.clone().expect("semantic session restores");
                let f = session.final_corruption();
                finish(image, restored, &session, f, self.flops_tx)
            }
            HarqKind::CrcBased => {
                let compressed = lpf_encode(image, &self.lpf);
                let message = crc_append(&BitStream::from_bytes(&compressed.payload));
                let session = run_crc_harq(&message, &self.link, channel, self.scheme.harq.max_rounds)?;
                let payload = &session.decoded[..session.decoded.len() - CRC_BITS];
                let received = compressed.with_payload(BitStream::from_bits(payload.to_vec()).to_bytes());
                let mask = estimate_error_mask(&block_grid(&received)?, self.scheme.harq.delta);
                let mask_arg = decoder.capabilities().handles_error_mask.then_some(&mask);
                let restored = decoder.restore(&received, mask_arg, image.width(), image.height())?;
                finish(image, restored, &session, Some(mask.fraction()), self.flops_tx)
            }
        }
    }
}

fn finish(
    original: &Image,
    restored: Image,
    session: &HarqSession,
    corruption: Option<f64>,
    flops_tx: u64,
) -> gencom_core::Result<TrialOutcome> {
    let stats = run_length_stats(&session.sent, &session.decoded)?;
    Ok(TrialOutcome {
        ber_pre: session.records.first().map_or(0.0, |r| r.ber_pre),
        ber_post: stats.ber,
        corruption,
        psnr: psnr(original, &restored)?,
        ssim: ssim(original, &restored)?,
        retx_rounds: session.retransmissions(),
        flops_tx,
        mean_run_len: stats.mean_run_len,
        burstiness: stats.burstiness,
        rounds: session.records.clone(),
        image: restored,
    })
}

/// Shared, thread-safe decoder handle.
pub type DecoderHandle = Arc<dyn SemanticDecoder>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{PowerName, PowerSetting};
    use gencom_core::fec::InterleaverSpec;
    use gencom_core::harq::HarqPolicy;
    use gencom_core::imaging::Reconstruction;
    use gencom_core::semdec::InpaintDecoder;

    fn gencom(b: usize) -> GencomScheme {
        GencomScheme {
            id: "g".into(),
            block_size: b,
            reconstruction: Reconstruction::Bilinear,
            code: CodeSpec::Uncoded,
            interleaver: InterleaverSpec::None,
            power: PowerSetting::Named(PowerName::Importance),
            harq: HarqPolicy {
                max_rounds: 1,
                ..HarqPolicy::default()
            },
            decoder: crate::config::DecoderId::Inpaint,
            match_bandwidth: None,
        }
    }

    fn image() -> Image {
        crate::testimages::builtin("cells").unwrap()
    }

    #[test]
    fn lossless_noiseless_gencom() {
        let img = image();
        let p = PreparedGencom::new(&gencom(1), &img, None).unwrap();
        let out = p.run(&img, &ChannelConfig::awgn(300.0, 1), &InpaintDecoder::default()).unwrap();
        assert_eq!(out.psnr, f64::INFINITY);
        assert_eq!(out.retx_rounds, 0);
        assert_eq!(out.ber_post, 0.0);
    }

    #[test]
    fn match_bandwidth_fills_budget() {
        let img = image();
        let p = PreparedGencom::new(&gencom(8), &img, Some(8192 * 7 + 100)).unwrap();
        assert_eq!(p.link.codec.spec(), CodeSpec::Repetition { k: 7 });
        let p = PreparedGencom::new(&gencom(8), &img, Some(100)).unwrap();
        assert_eq!(p.link.codec.spec(), CodeSpec::Uncoded);
    }

    #[test]
    fn noiseless_baseline_matches_codec() {
        let img = image();
        let scheme = BaselineScheme {
            id: "b".into(),
            quality: 75,
            ldpc_n: 256,
            max_rounds: 2,
        };
        let p = PreparedBaseline::new(&scheme, &img).unwrap();
        let out = p.run(&img, &ChannelConfig::awgn(300.0, 3)).unwrap();
        let direct = gencom_core::imaging::dct_decode(&p.compressed).unwrap();
        assert_eq!(out.image, direct);
        assert_eq!(out.retx_rounds, 0);
        assert!(out.psnr > 35.0);
    }

    #[test]
    fn crc_policy_on_gencom_payload() {
        let img = image();
        let mut s = gencom(8);
        s.harq = HarqPolicy::crc_based(3);
        let p = PreparedGencom::new(&s, &img, None).unwrap();
        let out = p.run(&img, &ChannelConfig::awgn(0.0, 3), &InpaintDecoder::default()).unwrap();
        assert_eq!(out.retx_rounds, 2);
        assert!(out.corruption.is_some());
    }
}
