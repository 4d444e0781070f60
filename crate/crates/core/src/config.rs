//! The single TOML file that drives a run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{canonical_markets, load_market_meta, validate_markets, MarketMeta, MissingPolicy};
use crate::metrics::{CrisisCalendar, DEFAULT_CUTOFF_MONTHS, DEFAULT_MAX_LEAD_MONTHS};
use crate::netgraph::{PairCorrMatrix, PairFilter};
use crate::te::{BiasCorrection, BinningScheme, LagPolicy, TeConfig, DEFAULT_BINS, DEFAULT_MIN_SAMPLES};

/// How the influential-pair network's links are selected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum PairLinkRule {
    /// Discard |C| inside [μ_C − k·σ_C, μ_C + k·σ_C].
    SigmaBand { k: f64 },
    /// Discard |C| inside an explicit [lo, hi].
    Band { lo: f64, hi: f64 },
    /// Keep only |C| ≥ μ_C + k·σ_C.
    SigmaAbove { k: f64 },
}

impl Default for PairLinkRule {
    fn default() -> Self {
        PairLinkRule::SigmaBand { k: 1.0 }
    }
}

impl PairLinkRule {
    pub fn resolve(&self, corr: &PairCorrMatrix) -> PairFilter {
        match *self {
            PairLinkRule::SigmaBand { k } => PairFilter::Band {
                lo: corr.mean - k * corr.std,
                hi: corr.mean + k * corr.std,
            },
            PairLinkRule::Band { lo, hi } => PairFilter::Band { lo, hi },
            PairLinkRule::SigmaAbove { k } => PairFilter::sigma_above(corr, k),
        }
    }
}

fn default_out() -> PathBuf {
    PathBuf::from("tecnet-run")
}
fn default_window() -> usize {
    12
}
fn default_step() -> usize {
    1
}
fn default_bins() -> usize {
    DEFAULT_BINS
}
fn default_min_samples() -> usize {
    DEFAULT_MIN_SAMPLES
}
fn default_cutoff() -> usize {
    DEFAULT_CUTOFF_MONTHS
}
fn default_max_lead() -> usize {
    DEFAULT_MAX_LEAD_MONTHS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Price file: `date,<id1>,...,<idM>`.
    pub input: PathBuf,
    /// TOML file with `[[markets]]`; mutually exclusive with `markets`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub markets_file: Option<PathBuf>,
    /// Inline market list; the canonical ten are used when neither is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub markets: Option<Vec<MarketMeta>>,
    #[serde(default)]
    pub missing: MissingPolicy,
    #[serde(default = "default_window")]
    pub window_months: usize,
    #[serde(default = "default_step")]
    pub step_months: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default)]
    pub scheme: BinningScheme,
    #[serde(default = "default_min_samples")]
    pub min_samples: usize,
    #[serde(default)]
    pub bias_correction: BiasCorrection,
    #[serde(default)]
    pub lag_policy: LagPolicy,
    #[serde(default = "default_cutoff")]
    pub trend_cutoff_months: usize,
    #[serde(default = "default_max_lead")]
    pub max_lead_months: usize,
    /// Influential-network threshold; the grand mean of A_str when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub influence_threshold: Option<f64>,
    #[serde(default)]
    pub pair_links: PairLinkRule,
    /// Crisis calendar TOML; the built-in 1992–2017 table when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crises: Option<PathBuf>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Seed for synthetic generation.
    #[serde(default)]
    pub seed: u64,
    /// Also write the return panel as `returns.csv`.
    #[serde(default)]
    pub dump_returns: bool,
}

impl RunConfig {
    /// A config with every knob at its default.
    pub fn with_input(input: impl Into<PathBuf>) -> Self {
        let mut cfg: RunConfig = toml::from_str("input = \"\"").expect("defaults parse");
        cfg.input = input.into();
        cfg
    }

    /// Parses a config file, resolving relative paths against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::Config(format!("config file {} not found", path.display()))
            } else {
                Error::io(path, e)
            }
        })?;
        let mut cfg: RunConfig = toml::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.input);
        resolve(&mut cfg.out);
        if let Some(p) = cfg.markets_file.as_mut() {
            resolve(p);
        }
        if let Some(p) = cfg.crises.as_mut() {
            resolve(p);
        }
        Ok(cfg)
    }

    pub fn te_config(&self) -> TeConfig {
        TeConfig {
            bins: self.bins,
            scheme: self.scheme,
            min_samples: self.min_samples,
            bias_correction: self.bias_correction,
        }
    }

    /// Checks referenced files exist and numeric knobs are in range.
    pub fn validate(&self) -> Result<()> {
        let must_exist = |p: &Path, what: &str| {
            if p.is_file() {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} {} does not exist", p.display())))
            }
        };
        must_exist(&self.input, "input file")?;
        if let Some(p) = &self.markets_file {
            must_exist(p, "markets file")?;
        }
        if let Some(p) = &self.crises {
            must_exist(p, "crisis calendar")?;
        }
        if self.markets.is_some() && self.markets_file.is_some() {
            return Err(Error::Config("give either `markets` or `markets_file`, not both".into()));
        }
        if !(1..=600).contains(&self.window_months) {
            return Err(Error::Config(format!("window_months {} out of range 1..=600", self.window_months)));
        }
        if !(1..=self.window_months.max(1)).contains(&self.step_months) {
            return Err(Error::Config(format!(
                "step_months {} must be in 1..=window_months",
                self.step_months
            )));
        }
        self.te_config().validate()?;
        if self.trend_cutoff_months < 2 {
            return Err(Error::Config("trend_cutoff_months must be at least 2".into()));
        }
        match self.pair_links {
            PairLinkRule::SigmaBand { k } | PairLinkRule::SigmaAbove { k } if !(k.is_finite() && k >= 0.0) => {
                return Err(Error::Config(format!("pair link k must be non-negative, got {k}")));
            }
            PairLinkRule::Band { lo, hi } if lo.is_nan() || hi.is_nan() || lo > hi => {
                return Err(Error::Config(format!("pair link band [{lo}, {hi}] is empty")));
            }
            _ => {}
        }
        if let Some(t) = self.influence_threshold {
            if !t.is_finite() {
                return Err(Error::Config("influence_threshold must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn resolve_markets(&self) -> Result<Vec<MarketMeta>> {
        match (&self.markets, &self.markets_file) {
            (Some(inline), _) => validate_markets(inline),
            (None, Some(path)) => load_market_meta(path),
            (None, None) => Ok(canonical_markets()),
        }
    }

    pub fn resolve_calendar(&self) -> Result<CrisisCalendar> {
        match &self.crises {
            Some(path) => CrisisCalendar::load(path),
            None => Ok(CrisisCalendar::builtin()),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serialises")
    }
}
