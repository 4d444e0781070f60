//! End-to-end run: prices in, TE series, metrics, networks and a manifest out.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::market::{compute_log_returns, load_price_panel, segment_by_calendar, write_return_csv, MarketMeta};
use crate::metrics::{
    activity, asi_series, avi_series, detect_peaks, lowpass_trend, mean_std, pearson, ActivityStats, MetricSeries,
    PeakReport,
};
use crate::netgraph::{
    influential_network, influential_pair_network, pair_correlations, GraphDocument, GraphFormat, InfluenceGraph,
    LinkKind, PairCorrMatrix, PairGraph,
};
use crate::par::Execution;
use crate::te::{te_series, write_te_series, Provenance, TeMatrixSeries};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const PEAKS_FILE: &str = "peaks.json";

/// Bins in `te_distribution.csv`.
const DISTRIBUTION_BINS: usize = 40;
/// Strongest influences listed in the summary.
const TOP_INFLUENCES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Config,
    Ingest,
    Returns,
    Segment,
    TransferEntropy,
    Metrics,
    Trend,
    Peaks,
    Networks,
    Export,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("stage serialises");
        f.write_str(s.as_str().unwrap_or("?"))
    }
}

/// A run that stopped part-way; artifacts written before `stage` are kept.
#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed: {error}")]
pub struct RunFailure {
    pub stage: Stage,
    #[source]
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub status: RunStatus,
    #[serde(default)]
    pub failed_stage: Option<Stage>,
    #[serde(default)]
    pub error: Option<String>,
    pub config: RunConfig,
    #[serde(default)]
    pub provenance: Option<Provenance>,
    pub markets: Vec<String>,
    pub artifacts: Vec<Artifact>,
}

impl Manifest {
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let path = dir.as_ref().join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::Config(format!("{} has no {MANIFEST_FILE}; not a run directory", dir.as_ref().display()))
            } else {
                Error::io(&path, e)
            }
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    /// `(file, sha256)` for every artifact, in write order.
    pub fn checksums(&self) -> Vec<(String, String)> {
        self.artifacts.iter().map(|a| (a.file.clone(), a.sha256.clone())).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl Stats {
    fn of(values: &[f64]) -> Option<Self> {
        let (mean, std) = mean_std(values)?;
        let n = values.len() as f64;
        let (m3, m4) = values.iter().fold((0.0, 0.0), |(a, b), v| {
            let d = v - mean;
            (a + d * d * d, b + d * d * d * d)
        });
        let (skewness, excess_kurtosis) = if std > 0.0 {
            (m3 / n / std.powi(3), m4 / n / std.powi(4) - 3.0)
        } else {
            (0.0, 0.0)
        };
        Some(Stats {
            count: values.len(),
            mean,
            std,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            skewness,
            excess_kurtosis,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Influence {
    pub source: String,
    pub target: String,
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindCount {
    pub kind: String,
    pub count: usize,
}

/// Reference figures for the 1992–2017 ten-market panel, kept for comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub te_mean: f64,
    pub te_std: f64,
    pub avi_range: (f64, f64),
    pub asi_range: (f64, f64),
    pub avi_asi_pearson: f64,
    pub grand_mean: f64,
    pub pair_corr_mean: f64,
    pub pair_corr_std: f64,
    pub pair_links: usize,
    pub peak_leads: Vec<(String, i64)>,
}

impl Default for Reference {
    fn default() -> Self {
        Reference {
            te_mean: 0.214,
            te_std: 0.043,
            avi_range: (0.190, 0.255),
            asi_range: (0.01, 0.04),
            avi_asi_pearson: 0.074,
            grand_mean: 0.214,
            pair_corr_mean: 0.074,
            pair_corr_std: 0.3225,
            pair_links: 20,
            peak_leads: [("C1", 8), ("C2", 3), ("C3", 16), ("C4", 20), ("C5", 17), ("C6", 3), ("C7", 0)]
                .into_iter()
                .map(|(id, lead)| (id.to_string(), lead))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub markets: Vec<String>,
    pub return_days: usize,
    pub segments: usize,
    pub window_months: usize,
    pub step_months: usize,
    pub invalid_cells: usize,
    pub te: Option<Stats>,
    pub avi_range: Option<(f64, f64)>,
    pub asi_range: Option<(f64, f64)>,
    pub avi_asi_pearson: Option<f64>,
    pub grand_mean: f64,
    pub influence_threshold: f64,
    pub influence_edges: usize,
    pub top_influences: Vec<Influence>,
    pub pair_corr_mean: f64,
    pub pair_corr_std: f64,
    pub flagged_pairs: usize,
    pub pair_filter: String,
    pub pair_links: usize,
    pub low_band_links: usize,
    pub link_kinds: Vec<KindCount>,
    pub peak_leads: Vec<(String, i64)>,
    pub unmatched_events: Vec<String>,
    pub reference: Reference,
}

/// Everything a completed run computed, kept in memory for callers.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub out_dir: PathBuf,
    pub markets: Vec<MarketMeta>,
    pub te: TeMatrixSeries,
    pub avi: MetricSeries,
    pub asi: MetricSeries,
    pub avi_trend: MetricSeries,
    pub peaks: PeakReport,
    pub activity: ActivityStats,
    pub influence: InfluenceGraph,
    pub pair_corr: PairCorrMatrix,
    pub pair_graph: PairGraph,
    pub summary: Summary,
    pub manifest: Manifest,
}

struct Writer {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
}

impl Writer {
    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.artifacts.retain(|a| a.file != name);
        self.artifacts.push(Artifact {
            file: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(())
    }
}

/// Runs the whole pipeline and writes every artifact plus `manifest.json`.
///
/// On failure the manifest records the failing stage and the artifacts that
/// were already written.
pub fn run(config: &RunConfig, exec: Execution) -> std::result::Result<RunOutput, RunFailure> {
    let fail = |stage| move |error| RunFailure { stage, error };
    config.validate().map_err(fail(Stage::Config))?;
    let dir = config.out.clone();
    fs::create_dir_all(&dir)
        .map_err(|e| Error::io(&dir, e))
        .map_err(fail(Stage::Config))?;
    let _ = fs::remove_file(dir.join(MANIFEST_FILE));
    let mut w = Writer {
        dir: dir.clone(),
        artifacts: Vec::new(),
    };
    let mut state = Partial::default();
    match stages(config, exec, &mut w, &mut state) {
        Ok(mut out) => {
            let manifest = manifest(config, &state, &w, None);
            write_manifest(&dir, &manifest).map_err(fail(Stage::Export))?;
            out.manifest = manifest;
            Ok(out)
        }
        Err(failure) => {
            let manifest = manifest(config, &state, &w, Some(&failure));
            // the original failure is what matters to the caller
            let _ = write_manifest(&dir, &manifest);
            Err(failure)
        }
    }
}

#[derive(Default)]
struct Partial {
    markets: Vec<MarketMeta>,
    provenance: Option<Provenance>,
}

fn manifest(config: &RunConfig, state: &Partial, w: &Writer, failure: Option<&RunFailure>) -> Manifest {
    Manifest {
        tool: "tecnet".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        status: if failure.is_some() { RunStatus::Failed } else { RunStatus::Ok },
        failed_stage: failure.map(|f| f.stage),
        error: failure.map(|f| f.error.to_string()),
        config: config.clone(),
        provenance: state.provenance.clone(),
        markets: state.markets.iter().map(|m| m.market_id.clone()).collect(),
        artifacts: w.artifacts.clone(),
    }
}

fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<()> {
    let path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text.into_bytes())
}

fn stages(
    config: &RunConfig,
    exec: Execution,
    w: &mut Writer,
    state: &mut Partial,
) -> std::result::Result<RunOutput, RunFailure> {
    let fail = |stage| move |error| RunFailure { stage, error };

    let markets = config.resolve_markets().map_err(fail(Stage::Config))?;
    let calendar = config.resolve_calendar().map_err(fail(Stage::Config))?;
    let prices = load_price_panel(&config.input, &markets, config.missing).map_err(fail(Stage::Ingest))?;
    let markets = prices.markets().to_vec();
    state.markets = markets.clone();

    let returns = compute_log_returns(&prices).map_err(fail(Stage::Returns))?;
    if config.dump_returns {
        let mut buf = Vec::new();
        write_return_csv(&mut buf, &returns).map_err(fail(Stage::Returns))?;
        w.put("returns.csv", &buf).map_err(fail(Stage::Export))?;
    }
    let return_days = returns.len();

    let segs = segment_by_calendar(&returns, config.window_months, config.step_months).map_err(fail(Stage::Segment))?;
    let te = te_series(&segs, &config.lag_policy, &config.te_config(), exec).map_err(fail(Stage::TransferEntropy))?;
    state.provenance = Some(te.provenance.clone());
    let mut buf = Vec::new();
    write_te_series(&mut buf, &te).map_err(fail(Stage::Export))?;
    w.put("te_series.txt", &buf).map_err(fail(Stage::Export))?;
    let pooled = te.pooled_values();
    w.put("te_distribution.csv", distribution_csv(&pooled).as_bytes())
        .map_err(fail(Stage::Export))?;

    let avi = avi_series(&te).map_err(fail(Stage::Metrics))?;
    let asi = asi_series(&te).map_err(fail(Stage::Metrics))?;
    w.put("avi.csv", avi.to_csv().as_bytes()).map_err(fail(Stage::Export))?;
    w.put("asi.csv", asi.to_csv().as_bytes()).map_err(fail(Stage::Export))?;
    let act = activity(&te).map_err(fail(Stage::Metrics))?;
    w.put("activity.csv", activity_csv(&act, &markets).as_bytes())
        .map_err(fail(Stage::Export))?;

    let avi_trend = lowpass_trend(&avi, config.trend_cutoff_months).map_err(fail(Stage::Trend))?;
    w.put("avi_trend.csv", avi_trend.to_csv().as_bytes())
        .map_err(fail(Stage::Export))?;
    let peaks = detect_peaks(&avi_trend, &calendar, config.max_lead_months).map_err(fail(Stage::Peaks))?;
    w.put(PEAKS_FILE, &json_bytes(&peaks).map_err(fail(Stage::Export))?)
        .map_err(fail(Stage::Export))?;

    let influence = influential_network(&act, &markets, config.influence_threshold);
    let doc = GraphDocument::from(&influence);
    for format in GraphFormat::ALL {
        let name = format!("influential_network.{}", format.extension());
        w.put(&name, doc.render(format).as_bytes()).map_err(fail(Stage::Export))?;
    }
    let pair_corr = pair_correlations(&te, exec).map_err(fail(Stage::Networks))?;
    w.put("pair_correlations.csv", pair_corr_csv(&pair_corr).as_bytes())
        .map_err(fail(Stage::Export))?;
    let filter = config.pair_links.resolve(&pair_corr);
    let pair_graph = influential_pair_network(&pair_corr, &markets, Some(filter));
    let doc = GraphDocument::from_pair_graph(&pair_graph, &markets);
    for format in GraphFormat::ALL {
        let name = format!("influential_pair_network.{}", format.extension());
        w.put(&name, doc.render(format).as_bytes()).map_err(fail(Stage::Export))?;
    }

    let summary = summarize(SummaryInputs {
        markets: &markets,
        return_days,
        te: &te,
        pooled: &pooled,
        avi: &avi,
        asi: &asi,
        act: &act,
        influence: &influence,
        pair_corr: &pair_corr,
        pair_graph: &pair_graph,
        peaks: &peaks,
    });
    w.put(SUMMARY_FILE, &json_bytes(&summary).map_err(fail(Stage::Export))?)
        .map_err(fail(Stage::Export))?;

    Ok(RunOutput {
        out_dir: w.dir.clone(),
        markets,
        te,
        avi,
        asi,
        avi_trend,
        peaks,
        activity: act,
        influence,
        pair_corr,
        pair_graph,
        summary,
        manifest: manifest(config, state, w, None),
    })
}

struct SummaryInputs<'a> {
    markets: &'a [MarketMeta],
    return_days: usize,
    te: &'a TeMatrixSeries,
    pooled: &'a [f64],
    avi: &'a MetricSeries,
    asi: &'a MetricSeries,
    act: &'a ActivityStats,
    influence: &'a InfluenceGraph,
    pair_corr: &'a PairCorrMatrix,
    pair_graph: &'a PairGraph,
    peaks: &'a PeakReport,
}

fn summarize(s: SummaryInputs<'_>) -> Summary {
    let ids = |i: usize| s.markets[i].market_id.clone();
    let mut top: Vec<Influence> = s
        .influence
        .edges
        .iter()
        .map(|e| Influence {
            source: ids(e.source),
            target: ids(e.target),
            strength: e.weight,
        })
        .collect();
    top.sort_by(|a, b| b.strength.total_cmp(&a.strength));
    top.truncate(TOP_INFLUENCES);
    Summary {
        markets: s.markets.iter().map(|m| m.market_id.clone()).collect(),
        return_days: s.return_days,
        segments: s.te.len(),
        window_months: s.te.provenance.window_months,
        step_months: s.te.provenance.step_months,
        invalid_cells: s.te.matrices.iter().map(|m| m.invalid_cells()).sum(),
        te: Stats::of(s.pooled),
        avi_range: s.avi.range(),
        asi_range: s.asi.range(),
        avi_asi_pearson: pearson(&s.avi.values, &s.asi.values),
        grand_mean: s.act.grand_mean,
        influence_threshold: s.influence.threshold,
        influence_edges: s.influence.edges.len(),
        top_influences: top,
        pair_corr_mean: s.pair_corr.mean,
        pair_corr_std: s.pair_corr.std,
        flagged_pairs: s.pair_corr.flagged.iter().filter(|&&f| f).count(),
        pair_filter: s.pair_graph.filter.to_string(),
        pair_links: s.pair_graph.edges.len(),
        low_band_links: s.pair_graph.edges.iter().filter(|e| e.low_band).count(),
        link_kinds: LinkKind::ALL
            .iter()
            .map(|&k| KindCount {
                kind: k.as_str().to_string(),
                count: s.pair_graph.count_kind(k),
            })
            .collect(),
        peak_leads: s
            .peaks
            .matches
            .iter()
            .map(|m| (m.event_id.clone(), m.lead_months))
            .collect(),
        unmatched_events: s.peaks.unmatched_events.clone(),
        reference: Reference::default(),
    }
}

fn distribution_csv(values: &[f64]) -> String {
    let mut out = String::from("bin_start,bin_end,count\n");
    let Some(stats) = Stats::of(values) else {
        return out;
    };
    let width = (stats.max - stats.min) / DISTRIBUTION_BINS as f64;
    let mut counts = [0usize; DISTRIBUTION_BINS];
    for &v in values {
        let k = if width > 0.0 {
            (((v - stats.min) / width) as usize).min(DISTRIBUTION_BINS - 1)
        } else {
            0
        };
        counts[k] += 1;
    }
    for (k, c) in counts.iter().enumerate() {
        let lo = stats.min + width * k as f64;
        let hi = if k + 1 == DISTRIBUTION_BINS { stats.max } else { stats.min + width * (k + 1) as f64 };
        out.push_str(&format!("{lo},{hi},{c}\n"));
    }
    out
}

fn activity_csv(act: &ActivityStats, markets: &[MarketMeta]) -> String {
    let m = markets.len();
    let mut out = String::from("source,target,a_str,a_flu\n");
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let cell = |v: f64| if v.is_finite() { v.to_string() } else { "NA".into() };
            out.push_str(&format!(
                "{},{},{},{}\n",
                markets[i].market_id,
                markets[j].market_id,
                cell(act.a_str[[i, j]]),
                cell(act.a_flu[[i, j]])
            ));
        }
    }
    out
}

fn pair_corr_csv(corr: &PairCorrMatrix) -> String {
    let mut out = String::from("pair_id");
    for p in &corr.pairs {
        out.push_str(&format!(",{}", p.id));
    }
    out.push('\n');
    for (i, p) in corr.pairs.iter().enumerate() {
        out.push_str(&p.id.to_string());
        for j in 0..corr.size() {
            match corr.get(i, j) {
                Some(v) => out.push_str(&format!(",{v}")),
                None => out.push_str(",NA"),
            }
        }
        out.push('\n');
    }
    out
}

/// Loads the summary of a completed run.
pub fn load_summary(dir: impl AsRef<Path>) -> Result<Summary> {
    let path = dir.as_ref().join(SUMMARY_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// 303 months of 21 synthetic trading days: the span that yields 292 windows.
pub const DEFAULT_SYNTH_LENGTH: usize = 303 * crate::synthetic::TRADING_DAYS_PER_MONTH;

/// Writes a simulated price panel and, optionally, the matching market list.
pub fn synthesize(
    spec: &crate::synthetic::CouplingSpec,
    length: usize,
    prices_out: &Path,
    markets_out: Option<&Path>,
) -> Result<()> {
    let panel = crate::synthetic::generate_var_prices(spec, length, 100.0)?;
    if let Some(dir) = prices_out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = fs::File::create(prices_out).map_err(|e| Error::io(prices_out, e))?;
    crate::market::write_price_csv(std::io::BufWriter::new(file), &panel)?;
    if let Some(path) = markets_out {
        let text = crate::market::market_meta_to_toml(panel.markets());
        fs::write(path, text).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}
