use std::path::Path;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{canonical_markets, validate_markets, MarketMeta, PricePanel, ReturnPanel, YearMonth, Zone};

pub const BURN_IN: usize = 200;
pub const TRADING_DAYS_PER_MONTH: usize = 21;
pub const MIN_LENGTH: usize = 100;

fn default_start_year() -> i32 {
    1992
}

fn default_start_month() -> u32 {
    1
}

/// VAR(1) with planted lag-1 couplings:
/// `r_t[n] = self_ar[n]·r_{t-1}[n] + Σ_m coupling[m][n]·r_{t-1}[m] + noise_std[n]·ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingSpec {
    pub markets: Vec<MarketMeta>,
    /// `coupling[m][n]`: strength of market m's lag-1 influence on market n.
    pub coupling: Vec<Vec<f64>>,
    pub self_ar: Vec<f64>,
    pub noise_std: Vec<f64>,
    pub seed: u64,
    #[serde(default = "default_start_year")]
    pub start_year: i32,
    #[serde(default = "default_start_month")]
    pub start_month: u32,
}

impl CouplingSpec {
    /// M independent unit-variance white-noise markets.
    pub fn independent(markets: Vec<MarketMeta>, seed: u64) -> Self {
        let m = markets.len();
        Self {
            markets,
            coupling: vec![vec![0.0; m]; m],
            self_ar: vec![0.0; m],
            noise_std: vec![1.0; m],
            seed,
            start_year: default_start_year(),
            start_month: default_start_month(),
        }
    }

    /// Anonymous markets `M1..Mm`, all in one zone.
    pub fn anonymous(m: usize, seed: u64) -> Self {
        let markets = (0..m)
            .map(|i| MarketMeta::new(&format!("M{}", i + 1), "", Zone::Asia, i + 1))
            .collect();
        Self::independent(markets, seed)
    }

    pub fn with_coupling(mut self, source: usize, target: usize, strength: f64) -> Self {
        self.coupling[source][target] = strength;
        self
    }

    /// The canonical ten markets with Europe → America couplings, a weaker
    /// Asia → Europe link and mild own-market persistence.
    pub fn ten_market_demo(seed: u64) -> Self {
        let markets = canonical_markets();
        let id = |s: &str| markets.iter().position(|m| m.market_id == s).expect("canonical id");
        let mut spec = Self::independent(markets.clone(), seed);
        for eu in ["DAX", "FTSE", "CAC"] {
            for am in ["DJI", "NASD"] {
                spec.coupling[id(eu)][id(am)] = 0.25;
            }
        }
        spec.coupling[id("HSI")][id("FTSE")] = 0.2;
        spec.coupling[id("NIKK")][id("DAX")] = 0.2;
        spec.coupling[id("DJI")][id("NASD")] = 0.15;
        spec.self_ar = vec![0.05; markets.len()];
        spec
    }

    pub fn n_markets(&self) -> usize {
        self.markets.len()
    }

    /// Lag matrix A with `r_t = A·r_{t-1} + noise`.
    fn lag_matrix(&self) -> DMatrix<f64> {
        let m = self.n_markets();
        DMatrix::from_fn(m, m, |n, src| {
            self.coupling[src][n] + if n == src { self.self_ar[n] } else { 0.0 }
        })
    }

    pub fn spectral_radius(&self) -> f64 {
        self.lag_matrix()
            .complex_eigenvalues()
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.n_markets();
        validate_markets(&self.markets)?;
        if self.coupling.len() != m || self.coupling.iter().any(|r| r.len() != m) {
            return Err(Error::Config(format!("coupling must be {m}×{m}")));
        }
        if self.self_ar.len() != m || self.noise_std.len() != m {
            return Err(Error::Config(format!("self_ar and noise_std need {m} entries")));
        }
        let finite = self
            .coupling
            .iter()
            .flatten()
            .chain(&self.self_ar)
            .chain(&self.noise_std)
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("coupling spec contains non-finite values".into()));
        }
        if self.noise_std.iter().any(|&s| s <= 0.0) {
            return Err(Error::Config("noise_std must be positive".into()));
        }
        if !(1..=12).contains(&self.start_month) {
            return Err(Error::Config(format!("start_month {} out of range", self.start_month)));
        }
        let rho = self.spectral_radius();
        if rho >= 1.0 {
            return Err(Error::Config(format!(
                "coupling spec is not stationary (spectral radius {rho:.4} ≥ 1)"
            )));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: CouplingSpec = toml::from_str(&text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("coupling spec serialises")
    }

    fn start(&self) -> YearMonth {
        YearMonth {
            year: self.start_year,
            month: self.start_month,
        }
    }
}

/// `count` trading dates: days 1..=21 of consecutive months from `start`.
pub fn synthetic_calendar(start: YearMonth, count: usize) -> Vec<NaiveDate> {
    (0..count)
        .map(|k| {
            let ym = start.plus((k / TRADING_DAYS_PER_MONTH) as i64);
            NaiveDate::from_ymd_opt(ym.year, ym.month, (k % TRADING_DAYS_PER_MONTH) as u32 + 1)
                .expect("day ≤ 21 exists in every month")
        })
        .collect()
}

/// Raw VAR draws, markets × length, after discarding the burn-in.
pub(crate) fn simulate(spec: &CouplingSpec, length: usize) -> Array2<f64> {
    let m = spec.n_markets();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Array2::zeros((m, length));
    let mut prev = vec![0.0; m];
    let mut next = vec![0.0; m];
    for step in 0..BURN_IN + length {
        for n in 0..m {
            let mut v = spec.self_ar[n] * prev[n];
            for (src, p) in prev.iter().enumerate() {
                v += spec.coupling[src][n] * p;
            }
            let eps: f64 = StandardNormal.sample(&mut rng);
            next[n] = v + spec.noise_std[n] * eps;
        }
        std::mem::swap(&mut prev, &mut next);
        if step >= BURN_IN {
            out.column_mut(step - BURN_IN)
                .iter_mut()
                .zip(&prev)
                .for_each(|(o, v)| *o = *v);
        }
    }
    out
}

/// Simulates `length` steps on the synthetic monthly calendar.
pub fn generate_var_returns(spec: &CouplingSpec, length: usize) -> Result<ReturnPanel> {
    spec.validate()?;
    if length < MIN_LENGTH {
        return Err(Error::Config(format!(
            "synthetic length must be at least {MIN_LENGTH}, got {length}"
        )));
    }
    let data = simulate(spec, length);
    ReturnPanel::new(spec.markets.clone(), synthetic_calendar(spec.start(), length), data)
}

/// [`generate_var_returns`] compounded into index levels starting at `base`,
/// with the base price dated the day before the first synthetic session.
pub fn generate_var_prices(spec: &CouplingSpec, length: usize, base: f64) -> Result<PricePanel> {
    let rp = generate_var_returns(spec, length)?;
    let base_date = spec.start().first_day().pred_opt().expect("valid date");
    rp.to_prices(base_date, base)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Stationary covariance Σ = Σ_k A^k Aᵀ^k · diag(σ²), summed until negligible.
    fn lyapunov(a: &DMatrix<f64>, noise: &[f64]) -> DMatrix<f64> {
        let q = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            noise.len(),
            noise.iter().map(|s| s * s),
        ));
        let mut sigma = q.clone();
        let mut ak = a.clone();
        for _ in 0..500 {
            sigma += &ak * &q * ak.transpose();
            ak = &ak * a;
        }
        sigma
    }

    #[test]
    fn white_noise_has_no_lag_one_autocorrelation() {
        let spec = CouplingSpec::anonymous(3, 17);
        let n = 5000;
        let rp = generate_var_returns(&spec, n).unwrap();
        for m in 0..3 {
            let r = rp.row(m).to_vec();
            let ac = crate::metrics::pearson(&r[1..], &r[..n - 1]).unwrap();
            assert!(ac.abs() <= 3.0 / (n as f64).sqrt(), "{ac}");
        }
    }

    #[test]
    fn lag_one_cross_correlation_matches_var_theory() {
        let spec = CouplingSpec::anonymous(2, 23).with_coupling(0, 1, 0.8);
        let n = 10_000;
        let rp = generate_var_returns(&spec, n).unwrap();
        let a = spec.lag_matrix();
        let sigma = lyapunov(&a, &spec.noise_std);
        // Γ(1) = A Σ: E[r_t r_{t-1}ᵀ]
        let gamma1 = &a * &sigma;
        let expected = gamma1[(1, 0)] / (sigma[(0, 0)] * sigma[(1, 1)]).sqrt();
        // by hand for this spec: 0.8 / sqrt(1.64)
        assert!((expected - 0.8 / 1.64f64.sqrt()).abs() < 1e-12);
        let r0 = rp.row(0).to_vec();
        let r1 = rp.row(1).to_vec();
        let observed = crate::metrics::pearson(&r0[..n - 1], &r1[1..]).unwrap();
        assert!((observed - expected).abs() < 0.03, "{observed} vs {expected}");
    }

    #[test]
    fn same_seed_same_panel() {
        let spec = CouplingSpec::ten_market_demo(5);
        let a = generate_var_returns(&spec, 300).unwrap();
        let b = generate_var_returns(&spec, 300).unwrap();
        assert!(a.returns().iter().zip(b.returns().iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
        let c = generate_var_returns(&CouplingSpec::ten_market_demo(6), 300).unwrap();
        assert_ne!(a.returns(), c.returns());
    }

    #[test]
    fn rejects_invalid_specs() {
        let explosive = CouplingSpec::anonymous(2, 0).with_coupling(0, 1, 1.5).with_coupling(1, 0, 1.5);
        assert!(matches!(explosive.validate(), Err(Error::Config(_))));
        let mut zero_noise = CouplingSpec::anonymous(2, 0);
        zero_noise.noise_std[1] = 0.0;
        assert!(zero_noise.validate().is_err());
        assert!(generate_var_returns(&CouplingSpec::anonymous(2, 0), 99).is_err());
    }

    #[test]
    fn calendar_has_21_days_per_month() {
        let dates = synthetic_calendar(YearMonth { year: 1992, month: 1 }, 42);
        assert_eq!(dates[0], NaiveDate::from_ymd_opt(1992, 1, 1).unwrap());
        assert_eq!(dates[20], NaiveDate::from_ymd_opt(1992, 1, 21).unwrap());
        assert_eq!(dates[21], NaiveDate::from_ymd_opt(1992, 2, 1).unwrap());
    }

    #[test]
    fn prices_round_trip_to_returns() {
        let spec = CouplingSpec::ten_market_demo(1);
        let prices = generate_var_prices(&spec, 200, 100.0).unwrap();
        let rp = crate::market::compute_log_returns(&prices).unwrap();
        let direct = generate_var_returns(&spec, 200).unwrap();
        assert_eq!(rp.dates(), direct.dates());
        for (a, b) in rp.returns().iter().zip(direct.returns().iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn spec_toml_round_trip() {
        let spec = CouplingSpec::ten_market_demo(3);
        let back: CouplingSpec = toml::from_str(&spec.to_toml()).unwrap();
        assert_eq!(back, spec);
    }
}
