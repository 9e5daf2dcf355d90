//! Experiment orchestration: seeded parallel trials and CSV output.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use gencom_core::chain::Link;
use gencom_core::fec::CodeSpec;
use gencom_core::harq::RoundRecord;
use gencom_core::imaging::Image;
use gencom_core::metrics::INFINITE_QUALITY_CAP;
use gencom_core::phy::ChannelConfig;
use gencom_core::rng::derive;
use gencom_core::semdec::{InpaintDecoder, UpsampleDecoder, DEFAULT_MAX_PASSES};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, DecoderId, ExperimentConfig, Scheme};
use crate::sidecar::{ClientOptions, ExternalDecoder, SidecarClient};
use crate::trial::{DecoderHandle, PreparedBaseline, PreparedGencom, TrialOutcome};

/// Bumped whenever the column set or order changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("image {name}: {message}")]
    Image { name: String, message: String },
    #[error("malformed table {path}: {message}")]
    Table { path: PathBuf, message: String },
    #[error("sidecar unavailable and fallback disabled: {0}")]
    SidecarUnavailable(String),
    #[error("pipeline failure in {context}: {source}")]
    Pipeline {
        context: String,
        source: gencom_core::Error,
    },
}

impl RunError {
    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(ConfigError::Read { .. }) => 3,
            RunError::Config(_) => 2,
            RunError::Io { .. } | RunError::Image { .. } | RunError::Table { .. } => 3,
            RunError::SidecarUnavailable(_) => 4,
            RunError::Pipeline { .. } => 1,
        }
    }
}

/// Maps an I/O error on `path` to [`RunError::Io`].
pub fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// One row of the per-trial table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub scheme: String,
    pub kind: String,
    pub image: String,
    pub snr_db: f64,
    pub trial: usize,
    pub seed: u64,
    pub ber_pre: f64,
    pub ber_post: f64,
    /// Estimated corrupted-block fraction; empty for the baseline.
    pub f: Option<f64>,
    pub psnr: f64,
    pub ssim: f64,
    pub retx_rounds: usize,
    pub flops_tx: u64,
    pub mean_run_len: f64,
    pub burstiness: f64,
    pub decoder: String,
    /// Empty unless timing is enabled; timing breaks byte-identical output.
    pub wall_ms: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanCi {
    pub mean: f64,
    /// Half-width of the normal-approximation 95% interval.
    pub ci95: f64,
}

impl MeanCi {
    pub fn of(values: &[f64]) -> MeanCi {
        let n = values.len();
        if n == 0 {
            return MeanCi { mean: f64::NAN, ci95: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let ci95 = if n < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            1.96 * (var / n as f64).sqrt()
        };
        MeanCi { mean, ci95 }
    }
}

/// Aggregate over all trials of one (scheme, snr) point. Infinite PSNR is
/// capped at 100 dB before averaging.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scheme: String,
    pub kind: String,
    pub snr_db: f64,
    pub trials: usize,
    pub ber_pre: f64,
    pub ber_pre_ci95: f64,
    pub ber_post: f64,
    pub ber_post_ci95: f64,
    pub f: Option<f64>,
    pub f_ci95: Option<f64>,
    pub psnr: f64,
    pub psnr_ci95: f64,
    pub ssim: f64,
    pub ssim_ci95: f64,
    pub retx_rounds: f64,
    pub retx_rounds_ci95: f64,
    pub flops_tx: f64,
    pub mean_run_len: f64,
    pub burstiness: f64,
}

pub fn summarize(records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut order: Vec<(&str, u64)> = Vec::new();
    let mut groups: BTreeMap<(&str, u64), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        let key = (r.scheme.as_str(), r.snr_db.to_bits());
        let entry = groups.entry(key).or_default();
        if entry.is_empty() {
            order.push(key);
        }
        entry.push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let rows = &groups[&key];
            let col = |f: &dyn Fn(&TrialRecord) -> f64| -> MeanCi {
                MeanCi::of(&rows.iter().map(|r| f(r)).collect::<Vec<_>>())
            };
            let fs: Vec<f64> = rows.iter().filter_map(|r| r.f).collect();
            let f = (!fs.is_empty()).then(|| MeanCi::of(&fs));
            let ber_pre = col(&|r| r.ber_pre);
            let ber_post = col(&|r| r.ber_post);
            let psnr = col(&|r| r.psnr.min(INFINITE_QUALITY_CAP));
            let ssim = col(&|r| r.ssim);
            let retx = col(&|r| r.retx_rounds as f64);
            SummaryRow {
                scheme: rows[0].scheme.clone(),
                kind: rows[0].kind.clone(),
                snr_db: rows[0].snr_db,
                trials: rows.len(),
                ber_pre: ber_pre.mean,
                ber_pre_ci95: ber_pre.ci95,
                ber_post: ber_post.mean,
                ber_post_ci95: ber_post.ci95,
                f: f.map(|m| m.mean),
                f_ci95: f.map(|m| m.ci95),
                psnr: psnr.mean,
                psnr_ci95: psnr.ci95,
                ssim: ssim.mean,
                ssim_ci95: ssim.ci95,
                retx_rounds: retx.mean,
                retx_rounds_ci95: retx.ci95,
                flops_tx: col(&|r| r.flops_tx as f64).mean,
                mean_run_len: col(&|r| r.mean_run_len).mean,
                burstiness: col(&|r| r.burstiness).mean,
            }
        })
        .collect()
}

/// FNV-1a, used to turn a scheme id into a seed label.
pub fn fnv1a(text: &str) -> u64 {
    text.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Seed of one trial. Depends only on its own coordinates, so adding
/// schemes, SNR points or trials never changes existing rows.
pub fn trial_seed(base: u64, scheme_id: &str, snr_index: usize, trial: usize) -> u64 {
    derive(derive(derive(base, fnv1a(scheme_id)), snr_index as u64), trial as u64)
}

/// Resolves `builtin:<name>` or a PGM/PPM path.
pub fn load_image(name: &str) -> Result<Image, RunError> {
    if let Some(builtin) = name.strip_prefix("builtin:") {
        return crate::testimages::builtin(builtin).ok_or_else(|| RunError::Image {
            name: name.into(),
            message: format!("unknown builtin; available: {}", crate::testimages::NAMES.join(", ")),
        });
    }
    crate::pnm::read(Path::new(name)).map_err(|e| RunError::Image {
        name: name.into(),
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses every core.
    pub jobs: Option<usize>,
}

pub struct Trace {
    pub scheme: String,
    pub snr_db: f64,
    pub trial: usize,
    pub rounds: Vec<RoundRecord>,
}

pub struct RunOutput {
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
    pub traces: Vec<Trace>,
    /// Restores the external decoder handed to its inpaint fallback.
    pub sidecar_fallbacks: usize,
}

enum Prepared {
    Gencom {
        per_image: Vec<PreparedGencom>,
        decoder: DecoderHandle,
    },
    Baseline {
        per_image: Vec<PreparedBaseline>,
    },
}

struct Plan {
    prepared: Vec<Prepared>,
    external: Option<Arc<ExternalDecoder>>,
}

fn pipeline(context: impl Into<String>) -> impl FnOnce(gencom_core::Error) -> RunError {
    let context = context.into();
    move |source| RunError::Pipeline { context, source }
}

fn plan(cfg: &ExperimentConfig, images: &[Image]) -> Result<Plan, RunError> {
    let e = &cfg.experiment;
    let needs_sidecar = cfg
        .schemes
        .iter()
        .any(|s| matches!(s, Scheme::Gencom(g) if g.decoder == DecoderId::External));
    let external = if needs_sidecar {
        let options = ClientOptions {
            timeout: Duration::from_millis(e.sidecar_timeout_ms),
            max_in_flight: e.sidecar_max_in_flight,
        };
        let client = match SidecarClient::from_env(options) {
            Some(Ok(c)) => Some(Arc::new(c)),
            Some(Err(err)) => sidecar_missing(e.sidecar_fallback, err.to_string())?,
            None => sidecar_missing(
                e.sidecar_fallback,
                format!("{} is not set", crate::sidecar::ADDR_ENV),
            )?,
        };
        Some(Arc::new(ExternalDecoder::new(client)))
    } else {
        None
    };

    let mut baselines: BTreeMap<&str, Vec<PreparedBaseline>> = BTreeMap::new();
    let mut prepared = Vec::with_capacity(cfg.schemes.len());
    for scheme in &cfg.schemes {
        if let Scheme::Baseline(b) = scheme {
            let link = Link::new(CodeSpec::Ldpc { n: b.ldpc_n }).map_err(pipeline(&b.id))?;
            let per_image = images
                .iter()
                .map(|img| PreparedBaseline::with_link(b, img, link.clone()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(pipeline(&b.id))?;
            baselines.insert(&b.id, per_image);
        }
    }
    for scheme in &cfg.schemes {
        match scheme {
            Scheme::Baseline(b) => prepared.push(Prepared::Baseline {
                per_image: baselines.remove(b.id.as_str()).unwrap_or_else(|| {
                    images
                        .iter()
                        .map(|img| PreparedBaseline::new(b, img).expect("prepared once already"))
                        .collect()
                }),
            }),
            Scheme::Gencom(g) => {
                let per_image = images
                    .iter()
                    .map(|img| {
                        let budget = g.match_bandwidth.as_deref().map(|target| {
                            let base = cfg
                                .schemes
                                .iter()
                                .find_map(|s| match s {
                                    Scheme::Baseline(b) if b.id == target => Some(b),
                                    _ => None,
                                })
                                .expect("validated target");
                            PreparedBaseline::new(base, img).map(|p| p.channel_bits())
                        });
                        PreparedGencom::new(g, img, budget.transpose()?)
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(pipeline(&g.id))?;
                let decoder: DecoderHandle = match g.decoder {
                    DecoderId::Inpaint => Arc::new(InpaintDecoder {
                        delta: g.harq.delta,
                        max_passes: DEFAULT_MAX_PASSES,
                    }),
                    DecoderId::Upsample => Arc::new(UpsampleDecoder),
                    DecoderId::External => external.clone().expect("created above"),
                };
                prepared.push(Prepared::Gencom { per_image, decoder });
            }
        }
    }
    Ok(Plan { prepared, external })
}

fn sidecar_missing<T>(fallback: bool, why: String) -> Result<Option<T>, RunError> {
    if fallback {
        log::warn!("sidecar unavailable ({why}); external decoder falls back to inpaint");
        Ok(None)
    } else {
        Err(RunError::SidecarUnavailable(why))
    }
}

/// Runs every (scheme, snr, trial) of the experiment.
///
/// Rows come out in scheme, SNR, trial order regardless of the thread count.
pub fn run_experiment(cfg: &ExperimentConfig, options: &RunOptions) -> Result<RunOutput, RunError> {
    cfg.validate()?;
    let e = &cfg.experiment;
    let images = e.images.iter().map(|n| load_image(n)).collect::<Result<Vec<_>, _>>()?;
    let plan = plan(cfg, &images)?;

    let mut jobs = Vec::with_capacity(cfg.schemes.len() * e.snr_db.len() * e.trials);
    for si in 0..cfg.schemes.len() {
        for ni in 0..e.snr_db.len() {
            for t in 0..e.trials {
                jobs.push((si, ni, t));
            }
        }
    }
    log::info!(
        "{}: {} trials on {} image(s)",
        e.name,
        jobs.len(),
        images.len()
    );

    let run_one = |&(si, ni, t): &(usize, usize, usize)| -> Result<(TrialRecord, Trace), RunError> {
        let scheme = &cfg.schemes[si];
        let snr_db = e.snr_db[ni];
        let seed = trial_seed(e.seed, scheme.id(), ni, t);
        let img_idx = t % images.len();
        let image = &images[img_idx];
        let channel = ChannelConfig {
            model: e.channel,
            snr_db,
            seed,
        };
        let started = Instant::now();
        let out: TrialOutcome = match &plan.prepared[si] {
            Prepared::Gencom { per_image, decoder } => per_image[img_idx].run(image, &channel, decoder.as_ref()),
            Prepared::Baseline { per_image } => per_image[img_idx].run(image, &channel),
        }
        .map_err(pipeline(format!("{} snr={snr_db} trial={t}", scheme.id())))?;
        let decoder = decoder_name(&plan.prepared[si]);
        let wall_ms = e.timing.then(|| started.elapsed().as_secs_f64() * 1e3);
        let record = TrialRecord {
            scheme: scheme.id().to_string(),
            kind: scheme.kind().to_string(),
            image: e.images[img_idx].clone(),
            snr_db,
            trial: t,
            seed,
            ber_pre: out.ber_pre,
            ber_post: out.ber_post,
            f: out.corruption,
            psnr: out.psnr,
            ssim: out.ssim,
            retx_rounds: out.retx_rounds,
            flops_tx: out.flops_tx,
            mean_run_len: out.mean_run_len,
            burstiness: out.burstiness,
            decoder,
            wall_ms,
        };
        let trace = Trace {
            scheme: record.scheme.clone(),
            snr_db,
            trial: t,
            rounds: out.rounds,
        };
        Ok((record, trace))
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs.unwrap_or(0))
        .build()
        .expect("thread pool");
    let results: Vec<(TrialRecord, Trace)> =
        pool.install(|| jobs.par_iter().map(run_one).collect::<Result<Vec<_>, _>>())?;
    let (records, traces): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let summary = summarize(&records);
    let sidecar_fallbacks = plan.external.as_ref().map_or(0, |d| d.fallback_count());
    if sidecar_fallbacks > 0 && !e.sidecar_fallback {
        return Err(RunError::SidecarUnavailable(format!(
            "{sidecar_fallbacks} restore(s) could not be served by the sidecar"
        )));
    }
    Ok(RunOutput {
        records,
        summary,
        traces,
        sidecar_fallbacks,
    })
}

fn decoder_name(p: &Prepared) -> String {
    match p {
        Prepared::Gencom { decoder, .. } => decoder.id().to_string(),
        Prepared::Baseline { .. } => "dct".into(),
    }
}

/// The `#` line above the header: schema version plus the two conventions
/// a reader cannot infer from the numbers.
fn header_comment(table: &str) -> String {
    format!(
        "# gencom {table} schema_version={SCHEMA_VERSION} snr_db=Es/N0-per-symbol \
         f=flagged-block-fraction(semantic-sufficiency-proxy)\n"
    )
}

fn to_csv<T: Serialize>(table: &str, rows: &[T], columns: &[&str]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(columns).expect("in-memory write");
    for row in rows {
        w.serialize(row).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8");
    header_comment(table) + &body
}

pub const TRIAL_COLUMNS: [&str; 17] = [
    "scheme", "kind", "image", "snr_db", "trial", "seed", "ber_pre", "ber_post", "f", "psnr", "ssim",
    "retx_rounds", "flops_tx", "mean_run_len", "burstiness", "decoder", "wall_ms",
];

pub const SUMMARY_COLUMNS: [&str; 19] = [
    "scheme", "kind", "snr_db", "trials", "ber_pre", "ber_pre_ci95", "ber_post", "ber_post_ci95", "f",
    "f_ci95", "psnr", "psnr_ci95", "ssim", "ssim_ci95", "retx_rounds", "retx_rounds_ci95", "flops_tx",
    "mean_run_len", "burstiness",
];

/// The per-trial table as CSV text, preceded by a `#` schema line.
pub fn trials_csv(records: &[TrialRecord]) -> String {
    to_csv("trials", records, &TRIAL_COLUMNS)
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    to_csv("summary", rows, &SUMMARY_COLUMNS)
}

/// Reads a per-trial table written by [`trials_csv`].
pub fn read_trials(path: &Path) -> Result<Vec<TrialRecord>, RunError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_trials(&text).map_err(|message| RunError::Table {
        path: path.to_path_buf(),
        message,
    })
}

pub fn parse_trials(text: &str) -> Result<Vec<TrialRecord>, String> {
    if let Some(line) = text.lines().next().filter(|l| l.starts_with('#')) {
        let version = line
            .split_whitespace()
            .find_map(|w| w.strip_prefix("schema_version="))
            .and_then(|v| v.parse::<u32>().ok());
        if version.is_some_and(|v| v != SCHEMA_VERSION) {
            return Err(format!("unsupported schema ({line}); expected version {SCHEMA_VERSION}"));
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    let missing: Vec<&str> = TRIAL_COLUMNS
        .iter()
        .copied()
        .filter(|c| !headers.iter().any(|h| h == *c))
        .collect();
    if !missing.is_empty() {
        return Err(format!("missing column(s): {}", missing.join(", ")));
    }
    reader
        .deserialize()
        .collect::<Result<Vec<TrialRecord>, _>>()
        .map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct TraceLine<'a> {
    scheme: &'a str,
    trial: usize,
    #[serde(flatten)]
    round: &'a RoundRecord,
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), RunError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    std::fs::write(path, contents).map_err(io_err(path))
}

/// Writes the trial CSV, its summary and, if configured, per-scheme traces.
/// Returns the paths written.
pub fn write_outputs(cfg: &ExperimentConfig, out: &RunOutput) -> Result<Vec<PathBuf>, RunError> {
    let e = &cfg.experiment;
    let mut written = vec![e.output.clone(), cfg.summary_path()];
    write_file(&e.output, trials_csv(&out.records).as_bytes())?;
    write_file(&cfg.summary_path(), summary_csv(&out.summary).as_bytes())?;
    if let Some(dir) = &e.trace_dir {
        for scheme in &cfg.schemes {
            let mut buf = Vec::new();
            for t in out.traces.iter().filter(|t| t.scheme == scheme.id()) {
                for round in &t.rounds {
                    let line = TraceLine {
                        scheme: &t.scheme,
                        trial: t.trial,
                        round,
                    };
                    serde_json::to_writer(&mut buf, &line).expect("in-memory write");
                    buf.write_all(b"\n").expect("in-memory write");
                }
            }
            let path = dir.join(format!("{}.jsonl", scheme.id()));
            write_file(&path, &buf)?;
            written.push(path);
        }
    }
    Ok(written)
}
