//! Plot data (CSV) and simple SVG figures from a per-trial table.
//!
//! Each kind needs only a few columns, so tables are read generically and
//! the missing ones are named in the error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use gencom_core::metrics::{coverage, CoverageCurve, INFINITE_QUALITY_CAP};

use crate::runner::{io_err, RunError};

pub const SNR_AXIS: &str = "Es/N0 (dB)";
pub const DEFAULT_THRESHOLD: f64 = 22.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum PlotKind {
    QualityVsSnr,
    FlopsBar,
    Coverage,
    RetxVsSnr,
}

impl PlotKind {
    pub fn name(self) -> &'static str {
        match self {
            PlotKind::QualityVsSnr => "quality_vs_snr",
            PlotKind::FlopsBar => "flops_bar",
            PlotKind::Coverage => "coverage",
            PlotKind::RetxVsSnr => "retx_vs_snr",
        }
    }

    pub fn required_columns(self) -> &'static [&'static str] {
        match self {
            PlotKind::QualityVsSnr => &["scheme", "snr_db", "psnr", "ssim"],
            PlotKind::FlopsBar => &["scheme", "flops_tx"],
            PlotKind::Coverage => &["scheme", "kind", "snr_db", "psnr"],
            PlotKind::RetxVsSnr => &["scheme", "snr_db", "retx_rounds"],
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PlotError {
    #[error("table has no data rows")]
    EmptyTable,
    #[error("table lacks column(s) required by {kind}: {}", missing.join(", "))]
    MissingColumns { kind: &'static str, missing: Vec<String> },
    #[error("column {column}, row {row}: {value:?} is not a number")]
    NotNumeric { column: String, row: usize, value: String },
    #[error("coverage needs at least one gencom and one baseline scheme")]
    NoPair,
    #[error("malformed CSV: {0}")]
    Csv(String),
}

/// A CSV table held as strings.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    /// Parses CSV text; lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Table, PlotError> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let csv_err = |e: csv::Error| PlotError::Csv(e.to_string());
        let headers = reader.headers().map_err(csv_err)?.iter().map(String::from).collect();
        let rows = reader
            .records()
            .map(|r| r.map(|r| r.iter().map(String::from).collect()))
            .collect::<Result<_, _>>()
            .map_err(csv_err)?;
        Ok(Table { headers, rows })
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn check(&self, kind: PlotKind) -> Result<(), PlotError> {
        let missing: Vec<String> = kind
            .required_columns()
            .iter()
            .filter(|c| self.index(c).is_none())
            .map(|c| c.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(PlotError::MissingColumns {
                kind: kind.name(),
                missing,
            });
        }
        if self.rows.is_empty() {
            return Err(PlotError::EmptyTable);
        }
        Ok(())
    }

    fn text(&self, row: usize, column: &str) -> &str {
        &self.rows[row][self.index(column).expect("checked column")]
    }

    fn number(&self, row: usize, column: &str) -> Result<f64, PlotError> {
        let v = self.text(row, column);
        v.trim().parse().map_err(|_| PlotError::NotNumeric {
            column: column.into(),
            row,
            value: v.into(),
        })
    }
}

/// Per-scheme series of (snr, mean value), schemes in first-seen order.
type Series = Vec<(String, Vec<(f64, f64)>)>;

fn mean_by_snr(table: &Table, column: &str, cap: f64) -> Result<Series, PlotError> {
    let mut order: Vec<String> = Vec::new();
    let mut acc: BTreeMap<&str, BTreeMap<u64, (f64, f64, usize)>> = BTreeMap::new();
    for row in 0..table.rows.len() {
        let scheme = table.text(row, "scheme");
        let snr = table.number(row, "snr_db")?;
        let v = table.number(row, column)?.min(cap);
        if !acc.contains_key(scheme) {
            order.push(scheme.to_string());
        }
        let e = acc.entry(scheme).or_default().entry(sortable(snr)).or_insert((snr, 0.0, 0));
        e.1 += v;
        e.2 += 1;
    }
    Ok(order
        .into_iter()
        .map(|s| {
            let pts = acc[s.as_str()].values().map(|&(x, sum, n)| (x, sum / n as f64)).collect();
            (s, pts)
        })
        .collect())
}

/// Order-preserving bit pattern for finite floats.
fn sortable(x: f64) -> u64 {
    let b = x.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

/// Files produced for one panel.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotFiles {
    pub csv: PathBuf,
    pub svg: PathBuf,
}

/// Rendered panel before it is written.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub csv: String,
    pub svg: String,
    /// Only filled for the coverage kind.
    pub coverage: Vec<(String, String, Option<CoverageCurve>)>,
}

pub fn render(table: &Table, kind: PlotKind, threshold: f64) -> Result<Panel, PlotError> {
    table.check(kind)?;
    match kind {
        PlotKind::QualityVsSnr => {
            let psnr = mean_by_snr(table, "psnr", INFINITE_QUALITY_CAP)?;
            let ssim = mean_by_snr(table, "ssim", f64::INFINITY)?;
            let mut csv = String::from("scheme,snr_db,psnr,ssim\n");
            for ((name, p), (_, s)) in psnr.iter().zip(&ssim) {
                for (&(x, yp), &(_, ys)) in p.iter().zip(s) {
                    let _ = writeln!(csv, "{name},{x},{yp},{ys}");
                }
            }
            let svg = line_chart(&LineChart {
                title: "Reconstructed quality",
                y_label: "PSNR (dB)",
                series: &psnr,
                threshold: None,
                notes: &[],
            });
            Ok(Panel { csv, svg, coverage: vec![] })
        }
        PlotKind::RetxVsSnr => {
            let retx = mean_by_snr(table, "retx_rounds", f64::INFINITY)?;
            let mut csv = String::from("scheme,snr_db,retx_rounds\n");
            for (name, pts) in &retx {
                for (x, y) in pts {
                    let _ = writeln!(csv, "{name},{x},{y}");
                }
            }
            let svg = line_chart(&LineChart {
                title: "Retransmissions",
                y_label: "mean retransmissions",
                series: &retx,
                threshold: None,
                notes: &[],
            });
            Ok(Panel { csv, svg, coverage: vec![] })
        }
        PlotKind::FlopsBar => {
            let mut order: Vec<String> = Vec::new();
            let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
            for row in 0..table.rows.len() {
                let scheme = table.text(row, "scheme").to_string();
                let v = table.number(row, "flops_tx")?;
                if !acc.contains_key(&scheme) {
                    order.push(scheme.clone());
                }
                let e = acc.entry(scheme).or_insert((0.0, 0));
                e.0 += v;
                e.1 += 1;
            }
            let bars: Vec<(String, f64)> = order
                .into_iter()
                .map(|s| {
                    let (sum, n) = acc[&s];
                    (s, sum / n as f64)
                })
                .collect();
            let mut csv = String::from("scheme,flops_tx\n");
            for (s, v) in &bars {
                let _ = writeln!(csv, "{s},{v}");
            }
            Ok(Panel {
                csv,
                svg: bar_chart("Transmitter complexity", "operations per image", &bars),
                coverage: vec![],
            })
        }
        PlotKind::Coverage => {
            let psnr = mean_by_snr(table, "psnr", INFINITE_QUALITY_CAP)?;
            let mut kinds: BTreeMap<&str, &str> = BTreeMap::new();
            for row in 0..table.rows.len() {
                kinds.insert(table.text(row, "scheme"), table.text(row, "kind"));
            }
            let of_kind = |k: &str| -> Vec<&(String, Vec<(f64, f64)>)> {
                psnr.iter().filter(|(s, _)| kinds[s.as_str()] == k).collect()
            };
            let (gencom, baselines) = (of_kind("gencom"), of_kind("baseline"));
            let Some(baseline) = baselines.first() else {
                return Err(PlotError::NoPair);
            };
            if gencom.is_empty() {
                return Err(PlotError::NoPair);
            }
            let mut csv = String::from(
                "gencom,baseline,metric,threshold,gencom_min_snr_db,baseline_min_snr_db,extension_db,non_monotone\n",
            );
            let mut curves = Vec::new();
            let mut notes = Vec::new();
            for (name, pts) in gencom {
                let result = coverage("psnr", pts, &baseline.1, threshold).ok();
                match &result {
                    Some(c) => {
                        let _ = writeln!(
                            csv,
                            "{name},{},psnr,{threshold},{},{},{},{}",
                            baseline.0,
                            c.gencom.min_usable_snr_db,
                            c.baseline.min_usable_snr_db,
                            c.extension_db,
                            c.warning()
                        );
                        notes.push(format!("{name}: extension_db = {:+.2} dB", c.extension_db));
                    }
                    None => {
                        log::warn!("coverage of {name} vs {} is undefined on the sampled range", baseline.0);
                        let _ = writeln!(csv, "{name},{},psnr,{threshold},,,,", baseline.0);
                        notes.push(format!("{name}: extension_db undefined"));
                    }
                }
                curves.push((name.clone(), baseline.0.clone(), result));
            }
            let series: Series = psnr
                .iter()
                .filter(|(s, _)| kinds[s.as_str()] == "gencom" || s == &baseline.0)
                .cloned()
                .collect();
            let svg = line_chart(&LineChart {
                title: "Coverage",
                y_label: "PSNR (dB)",
                series: &series,
                threshold: Some(threshold),
                notes: &notes,
            });
            Ok(Panel { csv, svg, coverage: curves })
        }
    }
}

/// Reads `table`, renders `kind` and writes `<prefix>.<kind>.csv|svg`.
/// The prefix defaults to the table path without its extension.
pub fn emit_plot(
    table: &Path,
    kind: PlotKind,
    out_prefix: Option<&Path>,
    threshold: f64,
) -> Result<PlotFiles, RunError> {
    let text = std::fs::read_to_string(table).map_err(io_err(table))?;
    let plot_err = |e: PlotError| RunError::Table {
        path: table.to_path_buf(),
        message: e.to_string(),
    };
    let parsed = Table::parse(&text).map_err(plot_err)?;
    let panel = render(&parsed, kind, threshold).map_err(plot_err)?;
    let prefix = out_prefix.map_or_else(|| table.with_extension(""), Path::to_path_buf);
    let with = |ext: &str| {
        let mut name = prefix.file_name().unwrap_or_default().to_os_string();
        name.push(format!(".{}.{ext}", kind.name()));
        prefix.with_file_name(name)
    };
    let files = PlotFiles {
        csv: with("csv"),
        svg: with("svg"),
    };
    if let Some(dir) = files.csv.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    std::fs::write(&files.csv, panel.csv).map_err(io_err(&files.csv))?;
    std::fs::write(&files.svg, panel.svg).map_err(io_err(&files.svg))?;
    Ok(files)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 40.0, 60.0); // left, right, top, bottom
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

struct LineChart<'a> {
    title: &'a str,
    y_label: &'a str,
    series: &'a [(String, Vec<(f64, f64)>)],
    threshold: Option<f64>,
    notes: &'a [String],
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn frame(svg: &mut String, title: &str, x_label: &str, y_label: &str, x: (f64, f64), y: (f64, f64)) {
    let (l, r, t, b) = MARGIN;
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - l - r,
        HEIGHT - t - b
    );
    for i in 0..=4 {
        let fx = i as f64 / 4.0;
        let px = l + fx * (WIDTH - l - r);
        let py = HEIGHT - b - fx * (HEIGHT - t - b);
        if !x_label.is_empty() {
            let _ = writeln!(
                svg,
                r#"<text x="{px}" y="{}" text-anchor="middle">{}</text>"#,
                HEIGHT - b + 16.0,
                tick_label(x.0 + fx * (x.1 - x.0))
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            l - 6.0,
            py + 4.0,
            tick_label(y.0 + fx * (y.1 - y.0))
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        l + (WIDTH - l - r) / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        t + (HEIGHT - t - b) / 2.0,
        escape(y_label)
    );
}

fn line_chart(c: &LineChart) -> String {
    let (l, r, t, b) = MARGIN;
    let x = bounds(c.series.iter().flat_map(|(_, p)| p.iter().map(|q| q.0)));
    let y = bounds(
        c.series
            .iter()
            .flat_map(|(_, p)| p.iter().map(|q| q.1))
            .chain(c.threshold),
    );
    let px = |v: f64| l + (v - x.0) / (x.1 - x.0) * (WIDTH - l - r);
    let py = |v: f64| HEIGHT - b - (v - y.0) / (y.1 - y.0) * (HEIGHT - t - b);
    let mut svg = String::new();
    frame(&mut svg, c.title, SNR_AXIS, c.y_label, x, y);
    if let Some(th) = c.threshold {
        let _ = writeln!(
            svg,
            r##"<line class="threshold" x1="{l}" x2="{0}" y1="{1}" y2="{1}" stroke="#444" stroke-dasharray="5,4"/>"##,
            WIDTH - r,
            py(th)
        );
    }
    for (i, (name, pts)) in c.series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts
            .iter()
            .filter(|p| p.1.is_finite())
            .map(|&(a, v)| format!("{:.2},{:.2}", px(a), py(v)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="series" data-name="{}" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            escape(name),
            path.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            l + 8.0,
            t + 16.0 + 14.0 * i as f64,
            escape(name)
        );
    }
    for (i, note) in c.notes.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<text class="annotation" x="{}" y="{}" text-anchor="end">{}</text>"#,
            WIDTH - r - 8.0,
            HEIGHT - b - 10.0 - 14.0 * (c.notes.len() - 1 - i) as f64,
            escape(note)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn bar_chart(title: &str, y_label: &str, bars: &[(String, f64)]) -> String {
    let (l, r, t, b) = MARGIN;
    let top = bars.iter().map(|b| b.1).fold(0.0, f64::max).max(1.0) * 1.05;
    let mut svg = String::new();
    frame(&mut svg, title, "", y_label, (0.0, 1.0), (0.0, top));
    let slot = (WIDTH - l - r) / bars.len().max(1) as f64;
    for (i, (name, v)) in bars.iter().enumerate() {
        let h = v / top * (HEIGHT - t - b);
        let x = l + slot * (i as f64 + 0.2);
        let _ = writeln!(
            svg,
            r#"<rect class="bar" data-name="{}" data-value="{v}" x="{x:.2}" y="{:.2}" width="{:.2}" height="{h:.2}" fill="{}"/>"#,
            escape(name),
            HEIGHT - b - h,
            slot * 0.6,
            COLORS[i % COLORS.len()]
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            x + slot * 0.3,
            HEIGHT - b + 16.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sortable_orders_floats() {
        let xs = [-6.0, -0.5, 0.0, 0.25, 3.0];
        for w in xs.windows(2) {
            assert!(sortable(w[0]) < sortable(w[1]));
        }
    }

    #[test]
    fn means_grouped_per_snr() {
        let t = Table::parse("scheme,snr_db,psnr\na,0,10\na,0,20\na,-2,inf\n").unwrap();
        let s = mean_by_snr(&t, "psnr", 100.0).unwrap();
        assert_eq!(s, vec![("a".to_string(), vec![(-2.0, 100.0), (0.0, 15.0)])]);
    }

    #[test]
    fn non_numeric_cell() {
        let t = Table::parse("scheme,snr_db,retx_rounds\na,x,1\n").unwrap();
        assert!(matches!(render(&t, PlotKind::RetxVsSnr, 22.0), Err(PlotError::NotNumeric { .. })));
    }
}
