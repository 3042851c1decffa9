//! Evaluation metrics, the least-squares baseline, and the comparison
//! report across prior types.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

mod report;

pub use report::{
    build_report, reference_benchmark, ApproachMetrics, EvalReport, ReportInputs, APPROACH_ORDER,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
    #[error("rank deficient regressor: rank {rank} < {cols} columns")]
    RankDeficient { rank: usize, cols: usize },
    #[error("input mismatch: {0}")]
    InputMismatch(String),
}

/// Mean absolute error of `a` against reference `b`, as a percentage of
/// the mean absolute reference value.
pub fn mae_percent(a: &[f64], b: &[f64]) -> Result<f64, EvalError> {
    if a.len() != b.len() || a.is_empty() {
        return Err(EvalError::InputMismatch(format!(
            "mae_percent needs equal nonempty lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let denom = b.iter().map(|v| v.abs()).sum::<f64>() / b.len() as f64;
    if denom <= 0.0 {
        return Err(EvalError::UndefinedMetric(
            "mae_percent reference has zero mean magnitude".into(),
        ));
    }
    let num = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
        / a.len() as f64;
    Ok(100.0 * num / denom)
}

/// Cosine similarity of two vectors.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64, EvalError> {
    if a.len() != b.len() || a.is_empty() {
        return Err(EvalError::InputMismatch(
            "cosine_similarity needs equal nonempty lengths".into(),
        ));
    }
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(EvalError::UndefinedMetric(
            "cosine_similarity of a zero vector".into(),
        ));
    }
    let dot = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Root-mean-square error of predictions against measurements, as a
/// percentage of the measurement RMS.
pub fn rmse_percent(pred: &[f64], meas: &[f64]) -> Result<f64, EvalError> {
    if pred.len() != meas.len() || pred.is_empty() {
        return Err(EvalError::InputMismatch(
            "rmse_percent needs equal nonempty lengths".into(),
        ));
    }
    let n = meas.len() as f64;
    let rms_meas = (meas.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    if rms_meas <= 0.0 {
        return Err(EvalError::UndefinedMetric(
            "rmse_percent measurement RMS is zero".into(),
        ));
    }
    let rms_err = (pred
        .iter()
        .zip(meas)
        .map(|(p, m)| (p - m) * (p - m))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(100.0 * rms_err / rms_meas)
}

/// Total variation distance between two sample sets, estimated from
/// normalized histograms with shared bin edges spanning the union range.
pub fn tvd(prior_draws: &[f64], post_draws: &[f64], n_bins: usize) -> f64 {
    assert!(n_bins >= 2, "tvd needs at least 2 bins");
    assert!(
        !prior_draws.is_empty() && !post_draws.is_empty(),
        "tvd needs nonempty sample sets"
    );
    let lo = prior_draws
        .iter()
        .chain(post_draws)
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let hi = prior_draws
        .iter()
        .chain(post_draws)
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return 0.0; // all mass in one bin for both sets
    }
    let width = (hi - lo) / n_bins as f64;
    let bin_of = |x: f64| (((x - lo) / width) as usize).min(n_bins - 1);
    let mut p = vec![0.0; n_bins];
    let mut q = vec![0.0; n_bins];
    for &x in prior_draws {
        p[bin_of(x)] += 1.0 / prior_draws.len() as f64;
    }
    for &x in post_draws {
        q[bin_of(x)] += 1.0 / post_draws.len() as f64;
    }
    0.5 * p.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Default bin count for TVD histograms.
pub const TVD_DEFAULT_BINS: usize = 64;

/// Least-squares fit of base parameter values from inertia measurements.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OlsResult {
    pub lambda: Vec<f64>,
    pub residual_rms: f64,
    /// Largest absolute normal-equation residual, `|Y^T (Y x - b)|_inf`.
    pub normal_eq_residual: f64,
    pub condition: f64,
}

/// Solve the stacked reduced regressor system by SVD. Requires full column
/// rank; rank deficiency is an explicit error here because the baseline has
/// no prior to fall back on.
pub fn ols_fit(stacked: &DMatrix<f64>, measurements: &[f64]) -> Result<OlsResult, EvalError> {
    if stacked.nrows() != measurements.len() {
        return Err(EvalError::InputMismatch(format!(
            "regressor has {} rows but {} measurements",
            stacked.nrows(),
            measurements.len()
        )));
    }
    let cols = stacked.ncols();
    let svd = stacked.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = smax * 1e-10;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    if rank < cols {
        return Err(EvalError::RankDeficient { rank, cols });
    }
    let b = nalgebra::DVector::from_column_slice(measurements);
    let x = svd
        .solve(&b, tol)
        .map_err(|e| EvalError::InputMismatch(e.to_string()))?;
    let resid = stacked * &x - &b;
    let normal_eq = (stacked.transpose() * &resid).abs().max();
    Ok(OlsResult {
        lambda: x.iter().cloned().collect(),
        residual_rms: (resid.norm_squared() / measurements.len() as f64).sqrt(),
        normal_eq_residual: normal_eq,
        condition: smax / svd.singular_values.min(),
    })
}

/// Linear-interpolation quantile of a sorted slice.
pub(crate) fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    if sorted.len() == 1 {
        return sorted[0];
    }
    let h = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Empirical central interval from draws.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lo: f64,
    pub hi: f64,
    /// Set when the draw count is too small for the requested level to be
    /// trustworthy.
    pub precision_warning: bool,
}

/// Percentile confidence interval at the given level; `level = 1.0` gives
/// the full sample range. Fewer than 40 draws attaches a precision warning
/// for the usual 95% use.
pub fn confidence_interval(draws: &[f64], level: f64) -> ConfidenceInterval {
    assert!(!draws.is_empty(), "confidence_interval needs draws");
    let mut sorted = draws.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let alpha = (1.0 - level.clamp(0.0, 1.0)) / 2.0;
    ConfidenceInterval {
        lo: quantile_sorted(&sorted, alpha),
        hi: quantile_sorted(&sorted, 1.0 - alpha),
        precision_warning: draws.len() < 40,
    }
}
