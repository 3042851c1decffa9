//! Chain diagnostics: autocovariance, effective sample size, ESS gate.

use super::{ChainSamples, SamplerError};

/// Biased sample autocovariance of one coordinate's post-burn-in series.
pub fn autocovariance(
    chain: &ChainSamples,
    param: usize,
    lag: usize,
) -> Result<f64, SamplerError> {
    if param >= chain.dim() {
        return Err(SamplerError::Config(format!(
            "parameter index {param} out of range for dimension {}",
            chain.dim()
        )));
    }
    let series = chain.retained_series(param);
    if lag >= series.len() {
        return Err(SamplerError::Config(format!(
            "lag {lag} not below series length {}",
            series.len()
        )));
    }
    Ok(autocov_series(&series, lag))
}

pub(crate) fn autocov_series(series: &[f64], lag: usize) -> f64 {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let mut acc = 0.0;
    for t in 0..(n - lag) {
        acc += (series[t] - mean) * (series[t + lag] - mean);
    }
    acc / n as f64
}

/// Effective sample size of one coordinate: `N / (1 + 2 sum rho_k)` with
/// the autocorrelation sum truncated by Geyer's initial positive sequence.
/// A zero-variance series reports zero.
pub fn effective_sample_size(chain: &ChainSamples, param: usize) -> Result<f64, SamplerError> {
    if param >= chain.dim() {
        return Err(SamplerError::Config(format!(
            "parameter index {param} out of range for dimension {}",
            chain.dim()
        )));
    }
    let series = chain.retained_series(param);
    if series.len() < 10 {
        return Err(SamplerError::Config(format!(
            "need at least 10 retained draws, have {}",
            series.len()
        )));
    }
    Ok(ess_series(&series))
}

pub(crate) fn ess_series(series: &[f64]) -> f64 {
    let n = series.len();
    let c0 = autocov_series(series, 0);
    if c0 <= 0.0 || !c0.is_finite() {
        return 0.0; // degenerate: constant chain
    }
    // Sum autocorrelations in consecutive pairs while the pair sums stay
    // positive (initial positive sequence).
    let mut rho_sum = 0.0;
    let mut lag = 1;
    loop {
        if lag + 1 >= n {
            break;
        }
        let g = (autocov_series(series, lag) + autocov_series(series, lag + 1)) / c0;
        if g <= 0.0 {
            break;
        }
        rho_sum += g;
        lag += 2;
    }
    let denom = 1.0 + 2.0 * rho_sum;
    (n as f64 / denom).min(n as f64)
}

/// Per-parameter ESS gate result.
#[derive(Debug, Clone)]
pub struct EssReport {
    pub per_param: Vec<f64>,
    pub mean_ess: f64,
    pub min_ess: f64,
    /// Parameters below the target, by index.
    pub failing: Vec<usize>,
    pub target: f64,
    pub pass: bool,
}

impl EssReport {
    pub fn describe(&self) -> String {
        if self.pass {
            format!(
                "ESS gate pass: min {:.1}, mean {:.1} (target {})",
                self.min_ess, self.mean_ess, self.target
            )
        } else {
            format!(
                "ESS gate FAIL: parameters {:?} below target {} (min {:.1}, mean {:.1})",
                self.failing, self.target, self.min_ess, self.mean_ess
            )
        }
    }
}

/// Evaluate the ESS gate over every coordinate of the chain.
pub fn check_ess_gate(chain: &ChainSamples, target_min_ess: f64) -> EssReport {
    let d = chain.dim();
    let per_param: Vec<f64> = (0..d)
        .map(|p| ess_series(&chain.retained_series(p)))
        .collect();
    let mean_ess = per_param.iter().sum::<f64>() / d as f64;
    let min_ess = per_param.iter().cloned().fold(f64::INFINITY, f64::min);
    let failing: Vec<usize> = per_param
        .iter()
        .enumerate()
        .filter(|(_, &e)| e < target_min_ess)
        .map(|(i, _)| i)
        .collect();
    EssReport {
        pass: failing.is_empty(),
        per_param,
        mean_ess,
        min_ess,
        failing,
        target: target_min_ess,
    }
}
