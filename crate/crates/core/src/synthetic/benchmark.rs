use serde::{Deserialize, Serialize};

use super::var::{simulate, CouplingSpec};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::te::{transfer_entropy, Lag, TeConfig};

/// Per ordered pair over all trials: how often TE(source→target) beat the reverse direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDetection {
    pub source: usize,
    pub target: usize,
    pub coupling: f64,
    pub trials: usize,
    pub detections: usize,
    pub rate: f64,
    pub mean_forward: f64,
    pub mean_backward: f64,
    /// Mean of TE(source→target) − TE(target→source).
    pub mean_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionalityReport {
    pub length: usize,
    pub trials: usize,
    /// Pairs with a planted coupling and none in reverse.
    pub planted: Vec<PairDetection>,
    /// Pairs (source < target) with no direct coupling either way.
    pub null_pairs: Vec<PairDetection>,
}

/// Runs `trials` independent draws (seed `base_seed + t`) of a source/target
/// pair and tallies how often TE with τ=1 is larger forward than backward.
pub fn detection_rate<G>(
    trials: usize,
    base_seed: u64,
    config: &TeConfig,
    exec: Execution,
    generate: G,
) -> Result<PairDetection>
where
    G: Fn(u64) -> (Vec<f64>, Vec<f64>) + Sync + Send,
{
    let results = exec.map(trials, |t| {
        let (x, y) = generate(base_seed.wrapping_add(t as u64));
        let fwd = transfer_entropy(&x, &y, Lag::PreviousDay, config)?;
        let back = transfer_entropy(&y, &x, Lag::PreviousDay, config)?;
        Ok((fwd, back))
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(tally(0, 1, 0.0, &results))
}

fn tally(source: usize, target: usize, coupling: f64, results: &[(f64, f64)]) -> PairDetection {
    let trials = results.len();
    let detections = results.iter().filter(|(f, b)| f > b).count();
    let n = trials.max(1) as f64;
    let mean_forward = results.iter().map(|r| r.0).sum::<f64>() / n;
    let mean_backward = results.iter().map(|r| r.1).sum::<f64>() / n;
    PairDetection {
        source,
        target,
        coupling,
        trials,
        detections,
        rate: detections as f64 / n,
        mean_forward,
        mean_backward,
        mean_gap: mean_forward - mean_backward,
    }
}

/// For every planted one-way edge and every uncoupled pair of `spec`, the
/// fraction of `trials` simulations in which TE(m→n, τ=1) > TE(n→m, τ=1).
pub fn directionality_benchmark(
    spec: &CouplingSpec,
    trials: usize,
    length: usize,
    config: &TeConfig,
    exec: Execution,
) -> Result<DirectionalityReport> {
    spec.validate()?;
    config.validate()?;
    if trials == 0 {
        return Err(Error::Config("benchmark needs at least one trial".into()));
    }
    let m = spec.n_markets();
    let c = &spec.coupling;
    let planted: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && c[i][j] != 0.0 && c[j][i] == 0.0)
        .collect();
    if planted.is_empty() {
        return Err(Error::Config(
            "spec has no coupled pair with zero reverse coupling".into(),
        ));
    }
    let null: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .filter(|&(i, j)| c[i][j] == 0.0 && c[j][i] == 0.0)
        .collect();
    let pairs: Vec<(usize, usize)> = planted.iter().chain(&null).copied().collect();

    let per_trial = exec.map(trials, |t| {
        let trial_spec = CouplingSpec {
            seed: spec.seed.wrapping_add(t as u64),
            ..spec.clone()
        };
        let data = simulate(&trial_spec, length);
        pairs
            .iter()
            .map(|&(i, j)| {
                let x = data.row(i).to_vec();
                let y = data.row(j).to_vec();
                Ok((
                    transfer_entropy(&x, &y, Lag::PreviousDay, config)?,
                    transfer_entropy(&y, &x, Lag::PreviousDay, config)?,
                ))
            })
            .collect::<Result<Vec<_>>>()
    });
    let per_trial = per_trial.into_iter().collect::<Result<Vec<_>>>()?;

    let summarise = |k: usize, (i, j): (usize, usize)| {
        let results: Vec<(f64, f64)> = per_trial.iter().map(|row| row[k]).collect();
        tally(i, j, c[i][j], &results)
    };
    Ok(DirectionalityReport {
        length,
        trials,
        planted: planted
            .iter()
            .enumerate()
            .map(|(k, &p)| summarise(k, p))
            .collect(),
        null_pairs: null
            .iter()
            .enumerate()
            .map(|(k, &p)| summarise(planted.len() + k, p))
            .collect(),
    })
}

/// Two-sided acceptance region `[lo, hi]` for a Binomial(n, p) count: each
/// tail outside it has probability at most (1 − level)/2.
pub fn binomial_acceptance(n: usize, p: f64, level: f64) -> (usize, usize) {
    let alpha = (1.0 - level) / 2.0;
    let mut pmf = vec![0.0; n + 1];
    // log-space to stay finite for large n
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut log_choose = 0.0;
    for (k, slot) in pmf.iter_mut().enumerate() {
        if k > 0 {
            log_choose += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        *slot = (log_choose + k as f64 * lp + (n - k) as f64 * lq).exp();
    }
    let mut lo = 0;
    let mut tail = 0.0;
    while lo < n && tail + pmf[lo] <= alpha {
        tail += pmf[lo];
        lo += 1;
    }
    let mut hi = n;
    let mut tail = 0.0;
    while hi > 0 && tail + pmf[hi] <= alpha {
        tail += pmf[hi];
        hi -= 1;
    }
    (lo, hi)
}
