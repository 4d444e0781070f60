//! Market metadata, aligned price and return panels, and calendar segmentation.

mod ingest;
mod segment;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ingest::{
    load_price_panel, read_price_panel, write_price_csv, write_return_csv, IngestOptions,
    MissingPolicy,
};
pub use segment::{segment_by_calendar, Segment, SegmentSeries, YearMonth};

/// Trading-session group. Ordered by when the group's sessions open within
/// one calendar day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Zone {
    #[serde(alias = "asia", alias = "ASIA")]
    Asia,
    #[serde(alias = "europe", alias = "EUROPE")]
    Europe,
    #[serde(alias = "america", alias = "AMERICA")]
    America,
}

impl Zone {
    pub const ALL: [Zone; 3] = [Zone::Asia, Zone::Europe, Zone::America];

    pub fn index(self) -> usize {
        match self {
            Zone::Asia => 0,
            Zone::Europe => 1,
            Zone::America => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Zone::Asia => "Asia",
            Zone::Europe => "Europe",
            Zone::America => "America",
        }
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Zone {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "asia" => Ok(Zone::Asia),
            "europe" => Ok(Zone::Europe),
            "america" => Ok(Zone::America),
            other => Err(Error::Config(format!("unknown zone '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarketMeta {
    #[serde(rename = "id")]
    pub market_id: String,
    #[serde(rename = "name", default)]
    pub display_name: String,
    pub zone: Zone,
    /// 1-based position in the canonical ordering.
    pub order_index: usize,
}

impl MarketMeta {
    pub fn new(id: &str, name: &str, zone: Zone, order_index: usize) -> Self {
        Self {
            market_id: id.to_string(),
            display_name: name.to_string(),
            zone,
            order_index,
        }
    }
}

/// The ten-index default ordering: DJI, NASD, NIKK, HSI, SHI, SZI, TWII, DAX, FTSE, CAC.
pub fn canonical_markets() -> Vec<MarketMeta> {
    [
        ("DJI", "Dow Jones Industrial Average", Zone::America),
        ("NASD", "NASDAQ Composite", Zone::America),
        ("NIKK", "Nikkei 225", Zone::Asia),
        ("HSI", "Hang Seng", Zone::Asia),
        ("SHI", "Shanghai Composite", Zone::Asia),
        ("SZI", "Shenzhen Component", Zone::Asia),
        ("TWII", "Taiwan Weighted", Zone::Asia),
        ("DAX", "DAX", Zone::Europe),
        ("FTSE", "FTSE 100", Zone::Europe),
        ("CAC", "CAC 40", Zone::Europe),
    ]
    .iter()
    .enumerate()
    .map(|(i, (id, name, zone))| MarketMeta::new(id, name, *zone, i + 1))
    .collect()
}

/// Checks id uniqueness and that `order_index` is a permutation of `1..=M`,
/// then returns the markets sorted by `order_index`.
pub fn validate_markets(markets: &[MarketMeta]) -> Result<Vec<MarketMeta>> {
    if markets.is_empty() {
        return Err(Error::Config("market list is empty".into()));
    }
    let m = markets.len();
    let mut seen_idx = vec![false; m];
    for meta in markets {
        if meta.market_id.trim().is_empty() {
            return Err(Error::Config("market id must not be empty".into()));
        }
        let i = meta.order_index;
        if i == 0 || i > m || seen_idx[i - 1] {
            return Err(Error::Config(format!(
                "order_index values must be a permutation of 1..={m} (market '{}' has {i})",
                meta.market_id
            )));
        }
        seen_idx[i - 1] = true;
    }
    let mut sorted = markets.to_vec();
    sorted.sort_by_key(|meta| meta.order_index);
    for (i, a) in sorted.iter().enumerate() {
        if sorted[..i].iter().any(|b| b.market_id == a.market_id) {
            return Err(Error::Config(format!("duplicate market id '{}'", a.market_id)));
        }
    }
    Ok(sorted)
}

#[derive(Debug, Deserialize, Serialize)]
struct MarketsFile {
    markets: Vec<MarketMeta>,
}

/// Reads a TOML file holding `[[markets]]` tables with `id`, `name`, `zone`, `order_index`.
pub fn load_market_meta(path: impl AsRef<Path>) -> Result<Vec<MarketMeta>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: MarketsFile = toml::from_str(&text)?;
    validate_markets(&file.markets)
}

pub fn market_meta_to_toml(markets: &[MarketMeta]) -> String {
    let file = MarketsFile {
        markets: markets.to_vec(),
    };
    toml::to_string(&file).expect("market metadata always serialises")
}

fn check_dates(dates: &[NaiveDate]) -> Result<()> {
    if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::Data(format!(
            "dates must be strictly increasing ({} followed by {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// M aligned daily index series; row `m` belongs to `markets[m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    markets: Vec<MarketMeta>,
    dates: Vec<NaiveDate>,
    prices: Array2<f64>,
}

impl PricePanel {
    pub fn new(markets: Vec<MarketMeta>, dates: Vec<NaiveDate>, prices: Array2<f64>) -> Result<Self> {
        let markets = validate_markets(&markets)?;
        check_dates(&dates)?;
        if prices.dim() != (markets.len(), dates.len()) {
            return Err(Error::Data(format!(
                "price matrix is {:?}, expected ({}, {})",
                prices.dim(),
                markets.len(),
                dates.len()
            )));
        }
        for ((m, t), &p) in prices.indexed_iter() {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::DataAt {
                    row: t,
                    column: markets[m].market_id.clone(),
                    message: format!("price must be finite and positive, got {p}"),
                });
            }
        }
        Ok(Self {
            markets,
            dates,
            prices,
        })
    }

    pub fn markets(&self) -> &[MarketMeta] {
        &self.markets
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn prices(&self) -> &Array2<f64> {
        &self.prices
    }

    pub fn n_markets(&self) -> usize {
        self.markets.len()
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

/// M×T log returns, dated by the later price of each difference.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    markets: Vec<MarketMeta>,
    dates: Vec<NaiveDate>,
    returns: Array2<f64>,
}

impl ReturnPanel {
    pub fn new(markets: Vec<MarketMeta>, dates: Vec<NaiveDate>, returns: Array2<f64>) -> Result<Self> {
        let markets = validate_markets(&markets)?;
        check_dates(&dates)?;
        if returns.dim() != (markets.len(), dates.len()) {
            return Err(Error::Data(format!(
                "return matrix is {:?}, expected ({}, {})",
                returns.dim(),
                markets.len(),
                dates.len()
            )));
        }
        if returns.iter().any(|r| !r.is_finite()) {
            return Err(Error::Data("returns must be finite".into()));
        }
        Ok(Self {
            markets,
            dates,
            returns,
        })
    }

    pub fn markets(&self) -> &[MarketMeta] {
        &self.markets
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn returns(&self) -> &Array2<f64> {
        &self.returns
    }

    pub fn row(&self, m: usize) -> ArrayView1<'_, f64> {
        self.returns.row(m)
    }

    pub fn n_markets(&self) -> usize {
        self.markets.len()
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Rebuilds a price panel whose first column is `base` and whose first date is `base_date`.
    pub fn to_prices(&self, base_date: NaiveDate, base: f64) -> Result<PricePanel> {
        let (m, t) = self.returns.dim();
        let mut prices = Array2::zeros((m, t + 1));
        for i in 0..m {
            let mut level = base.ln();
            prices[[i, 0]] = base;
            for j in 0..t {
                level += self.returns[[i, j]];
                prices[[i, j + 1]] = level.exp();
            }
        }
        let mut dates = Vec::with_capacity(t + 1);
        dates.push(base_date);
        dates.extend_from_slice(&self.dates);
        PricePanel::new(self.markets.clone(), dates, prices)
    }
}

/// `r[m][t] = ln P[m][t+1] − ln P[m][t]`.
pub fn compute_log_returns(panel: &PricePanel) -> Result<ReturnPanel> {
    let (m, len) = panel.prices.dim();
    if len < 2 {
        return Err(Error::InsufficientData(format!(
            "log returns need at least 2 prices per market, got {len}"
        )));
    }
    let logs = panel.prices.mapv(f64::ln);
    let mut returns = Array2::zeros((m, len - 1));
    for i in 0..m {
        for t in 0..len - 1 {
            returns[[i, t]] = logs[[i, t + 1]] - logs[[i, t]];
        }
    }
    Ok(ReturnPanel {
        markets: panel.markets.clone(),
        dates: panel.dates[1..].to_vec(),
        returns,
    })
}
