//! Per-parameter prior distributions and the catalogs combining them.

use nalgebra::Vector3;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as StdNormal};
use thiserror::Error;

mod catalog;
mod feasibility;

pub use catalog::{
    build_prior, empirical_prior_from_cad, DonorAxis, DonorRobot, EmpiricalAxisRow,
    EmpiricalTable, LinkPriorSpecs, PriorCatalog, PriorInputs, PriorType,
};
pub use feasibility::{
    default_check_poses, feasibility_log_factor, soft_constraint_log_factor, SoftConstraintKind,
};

#[derive(Debug, Error)]
pub enum PriorError {
    #[error("invalid distribution spec: {0}")]
    InvalidSpec(String),
    #[error("prior configuration error: {0}")]
    Config(String),
}

const LN_2PI: f64 = 1.8378770664093453;

fn std_normal() -> StdNormal {
    StdNormal::new(0.0, 1.0).expect("standard normal")
}

/// One-dimensional prior distribution. `Normal` and `Lognormal` carry
/// optional hard truncation bounds; `TruncNormal` requires them.
/// `Lognormal` is parameterized in log space. `Point` is the degenerate
/// zero-spread case used by point-mass CAD catalogs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    Uniform {
        a: f64,
        b: f64,
    },
    Normal {
        mu: f64,
        sigma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<f64>,
    },
    TruncNormal {
        mu: f64,
        sigma: f64,
        a: f64,
        b: f64,
    },
    Lognormal {
        mu: f64,
        sigma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<f64>,
    },
    Point {
        value: f64,
    },
}

impl DistributionSpec {
    /// Lognormal spec whose physical-unit mean and standard deviation match
    /// the given moments. A non-positive mean falls back to `mean = sd`
    /// (unit coefficient of variation), which arises for tabulated rows
    /// that report a zero mean with a positive spread.
    pub fn lognormal_from_moments(
        mean: f64,
        sd: f64,
        bounds: Option<(f64, f64)>,
    ) -> Result<Self, PriorError> {
        if !(sd > 0.0) {
            return Err(PriorError::InvalidSpec(format!(
                "lognormal moment sd must be > 0, got {sd}"
            )));
        }
        let mean = if mean > 0.0 { mean } else { sd };
        let sigma2 = (1.0 + (sd / mean).powi(2)).ln();
        let mu = mean.ln() - 0.5 * sigma2;
        Ok(DistributionSpec::Lognormal {
            mu,
            sigma: sigma2.sqrt(),
            a: bounds.map(|(a, _)| a),
            b: bounds.map(|(_, b)| b),
        })
    }

    pub fn validate(&self) -> Result<(), PriorError> {
        let bad = |msg: String| Err(PriorError::InvalidSpec(msg));
        match *self {
            DistributionSpec::Uniform { a, b } => {
                if !(a < b) || !a.is_finite() || !b.is_finite() {
                    return bad(format!("Uniform requires finite a < b, got [{a}, {b}]"));
                }
            }
            DistributionSpec::Normal { sigma, a, b, .. } => {
                if !(sigma > 0.0) {
                    return bad(format!("Normal requires sigma > 0, got {sigma}"));
                }
                if let (Some(a), Some(b)) = (a, b) {
                    if !(a < b) {
                        return bad(format!("Normal bounds require a < b, got [{a}, {b}]"));
                    }
                }
            }
            DistributionSpec::TruncNormal { sigma, a, b, .. } => {
                if !(sigma > 0.0) || !(a < b) {
                    return bad(format!(
                        "TruncNormal requires sigma > 0 and a < b, got sigma={sigma}, [{a}, {b}]"
                    ));
                }
            }
            DistributionSpec::Lognormal { sigma, a, b, .. } => {
                if !(sigma > 0.0) {
                    return bad(format!("Lognormal requires sigma > 0, got {sigma}"));
                }
                if let (Some(a), Some(b)) = (a, b) {
                    if !(a < b) {
                        return bad(format!("Lognormal bounds require a < b, got [{a}, {b}]"));
                    }
                }
            }
            DistributionSpec::Point { value } => {
                if !value.is_finite() {
                    return bad("Point requires a finite value".into());
                }
            }
        }
        Ok(())
    }

    /// Natural-log density; negative infinity outside the support.
    /// Truncated variants are renormalized over their bounds. `Point`
    /// returns 0 at its atom by convention.
    pub fn log_pdf(&self, x: f64) -> f64 {
        match *self {
            DistributionSpec::Uniform { a, b } => {
                if x >= a && x <= b {
                    -(b - a).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            DistributionSpec::Normal { mu, sigma, a, b } => {
                trunc_normal_log_pdf(x, mu, sigma, a.unwrap_or(f64::NEG_INFINITY), b.unwrap_or(f64::INFINITY))
            }
            DistributionSpec::TruncNormal { mu, sigma, a, b } => {
                trunc_normal_log_pdf(x, mu, sigma, a, b)
            }
            DistributionSpec::Lognormal { mu, sigma, a, b } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let lo = a.unwrap_or(0.0).max(0.0);
                let hi = b.unwrap_or(f64::INFINITY);
                if x < lo || x > hi {
                    return f64::NEG_INFINITY;
                }
                let z = (x.ln() - mu) / sigma;
                let mut lp = -x.ln() - sigma.ln() - 0.5 * LN_2PI - 0.5 * z * z;
                let n = std_normal();
                let cdf_hi = if hi.is_finite() { n.cdf((hi.ln() - mu) / sigma) } else { 1.0 };
                let cdf_lo = if lo > 0.0 { n.cdf((lo.ln() - mu) / sigma) } else { 0.0 };
                let mass = cdf_hi - cdf_lo;
                if mass > 0.0 {
                    lp -= mass.ln();
                }
                lp
            }
            DistributionSpec::Point { value } => {
                if x == value {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    /// Draw from the distribution. Bounded normal variants use the inverse
    /// CDF, which stays well behaved for narrow bounds.
    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            DistributionSpec::Uniform { a, b } => a + rng.random::<f64>() * (b - a),
            DistributionSpec::Normal { mu, sigma, a, b } => match (a, b) {
                (None, None) => {
                    let z: f64 = rng.sample(rand_distr::StandardNormal);
                    mu + sigma * z
                }
                _ => sample_trunc_normal(
                    rng,
                    mu,
                    sigma,
                    a.unwrap_or(f64::NEG_INFINITY),
                    b.unwrap_or(f64::INFINITY),
                ),
            },
            DistributionSpec::TruncNormal { mu, sigma, a, b } => {
                sample_trunc_normal(rng, mu, sigma, a, b)
            }
            DistributionSpec::Lognormal { mu, sigma, a, b } => {
                let lo = a.unwrap_or(0.0).max(0.0);
                let hi = b.unwrap_or(f64::INFINITY);
                if lo <= 0.0 && !hi.is_finite() {
                    let z: f64 = rng.sample(rand_distr::StandardNormal);
                    (mu + sigma * z).exp()
                } else {
                    let log_lo = if lo > 0.0 { lo.ln() } else { f64::NEG_INFINITY };
                    let log_hi = if hi.is_finite() { hi.ln() } else { f64::INFINITY };
                    sample_trunc_normal(rng, mu, sigma, log_lo, log_hi).exp()
                }
            }
            DistributionSpec::Point { value } => value,
        }
    }

    /// Location used for sampling-space centering.
    pub fn mean(&self) -> f64 {
        match *self {
            DistributionSpec::Uniform { a, b } => 0.5 * (a + b),
            DistributionSpec::Normal { mu, .. } => mu,
            DistributionSpec::TruncNormal { mu, .. } => mu,
            DistributionSpec::Lognormal { mu, sigma, .. } => (mu + 0.5 * sigma * sigma).exp(),
            DistributionSpec::Point { value } => value,
        }
    }

    /// Scale used for sampling-space rescaling. Truncation is ignored
    /// here; the value is a step-size heuristic, not a moment.
    pub fn stddev(&self) -> f64 {
        match *self {
            DistributionSpec::Uniform { a, b } => (b - a) / 12f64.sqrt(),
            DistributionSpec::Normal { sigma, .. } => sigma,
            DistributionSpec::TruncNormal { sigma, .. } => sigma,
            DistributionSpec::Lognormal { mu, sigma, .. } => {
                let mean = (mu + 0.5 * sigma * sigma).exp();
                mean * ((sigma * sigma).exp() - 1.0).sqrt()
            }
            DistributionSpec::Point { .. } => 0.0,
        }
    }

    /// Hard support bounds where the density is positive.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            DistributionSpec::Uniform { a, b } => (a, b),
            DistributionSpec::Normal { a, b, .. } => {
                (a.unwrap_or(f64::NEG_INFINITY), b.unwrap_or(f64::INFINITY))
            }
            DistributionSpec::TruncNormal { a, b, .. } => (a, b),
            DistributionSpec::Lognormal { a, b, .. } => {
                (a.unwrap_or(0.0).max(0.0), b.unwrap_or(f64::INFINITY))
            }
            DistributionSpec::Point { value } => (value, value),
        }
    }
}

fn trunc_normal_log_pdf(x: f64, mu: f64, sigma: f64, a: f64, b: f64) -> f64 {
    if x < a || x > b {
        return f64::NEG_INFINITY;
    }
    let z = (x - mu) / sigma;
    let mut lp = -0.5 * z * z - sigma.ln() - 0.5 * LN_2PI;
    let n = std_normal();
    let cdf_hi = if b.is_finite() { n.cdf((b - mu) / sigma) } else { 1.0 };
    let cdf_lo = if a.is_finite() { n.cdf((a - mu) / sigma) } else { 0.0 };
    let mass = cdf_hi - cdf_lo;
    if mass > 0.0 {
        lp -= mass.ln();
    }
    lp
}

fn sample_trunc_normal(rng: &mut impl Rng, mu: f64, sigma: f64, a: f64, b: f64) -> f64 {
    let n = std_normal();
    let cdf_lo = if a.is_finite() { n.cdf((a - mu) / sigma) } else { 0.0 };
    let cdf_hi = if b.is_finite() { n.cdf((b - mu) / sigma) } else { 1.0 };
    let u: f64 = rng.random();
    let p = (cdf_lo + u * (cdf_hi - cdf_lo)).clamp(1e-300, 1.0 - 1e-16);
    let x = mu + sigma * n.inverse_cdf(p);
    x.clamp(a.min(b), b.max(a))
}

/// Cartesian CoM in the link frame from the spherical parametrization whose
/// polar axis is the link translation direction. A degenerate axis falls
/// back to the link z-axis.
pub fn com_spherical_to_cartesian(
    radius: f64,
    polar: f64,
    azimuth: f64,
    link_translation_axis: &Vector3<f64>,
) -> Vector3<f64> {
    let frame = crate::dynamics::com_frame_from_axis(link_translation_axis);
    frame * spherical_unit(radius, polar, azimuth)
}

/// Inverse of [`com_spherical_to_cartesian`]: spherical coordinates of a
/// link-frame CoM about the translation-aligned polar axis.
pub fn com_cartesian_to_spherical(
    com_link: &Vector3<f64>,
    link_translation_axis: &Vector3<f64>,
) -> (f64, f64, f64) {
    let frame = crate::dynamics::com_frame_from_axis(link_translation_axis);
    let v = frame.transpose() * com_link;
    cartesian_to_spherical_coords(&v)
}

/// Plain spherical-to-Cartesian map in the CoM frame itself.
pub(crate) fn spherical_unit(radius: f64, polar: f64, azimuth: f64) -> Vector3<f64> {
    let (sp, cp) = polar.sin_cos();
    let (sa, ca) = azimuth.sin_cos();
    Vector3::new(radius * sp * ca, radius * sp * sa, radius * cp)
}

pub(crate) fn cartesian_to_spherical_coords(v: &Vector3<f64>) -> (f64, f64, f64) {
    let radius = v.norm();
    if radius < 1e-300 {
        return (0.0, 0.0, 0.0);
    }
    let polar = (v.z / radius).clamp(-1.0, 1.0).acos();
    let mut azimuth = v.y.atan2(v.x);
    if azimuth < 0.0 {
        azimuth += 2.0 * std::f64::consts::PI;
    }
    (radius, polar, azimuth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_log_pdf() {
        let u = DistributionSpec::Uniform { a: 0.0, b: 2.0 };
        assert_relative_eq!(u.log_pdf(1.0), -(2.0f64.ln()), epsilon = 1e-15);
        assert_eq!(u.log_pdf(2.5), f64::NEG_INFINITY);
    }

    #[test]
    fn lognormal_support() {
        let l = DistributionSpec::Lognormal {
            mu: 0.0,
            sigma: 1.0,
            a: None,
            b: None,
        };
        assert_eq!(l.log_pdf(0.0), f64::NEG_INFINITY);
        assert_eq!(l.log_pdf(-1.0), f64::NEG_INFINITY);
        assert!(l.log_pdf(1.0).is_finite());
    }

    #[test]
    fn half_normal_normalization() {
        let t = DistributionSpec::TruncNormal {
            mu: 0.0,
            sigma: 1.0,
            a: 0.0,
            b: f64::INFINITY,
        };
        let expect = 2.0f64.ln() + (-0.5 * 0.25 - 0.5 * LN_2PI);
        assert_relative_eq!(t.log_pdf(0.5), expect, epsilon = 1e-12);
    }

    #[test]
    fn trunc_normal_draws_stay_in_bounds() {
        let t = DistributionSpec::TruncNormal {
            mu: 0.0,
            sigma: 1.0,
            a: 1.0,
            b: 2.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let x = t.sample(&mut rng);
            assert!((1.0..=2.0).contains(&x), "{x} outside [1, 2]");
        }
    }

    #[test]
    fn narrow_uniform_draws() {
        let eps = 1e-9;
        let u = DistributionSpec::Uniform { a: 3.0, b: 3.0 + eps };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let x = u.sample(&mut rng);
            assert!((3.0..=3.0 + eps).contains(&x));
        }
    }

    #[test]
    fn normal_sample_moments() {
        let n = DistributionSpec::Normal {
            mu: 0.0,
            sigma: 1.0,
            a: None,
            b: None,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws: Vec<f64> = (0..100_000).map(|_| n.sample(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var =
            draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (draws.len() - 1) as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn lognormal_moment_matching() {
        let spec = DistributionSpec::lognormal_from_moments(3.0, 1.5, None).unwrap();
        assert_relative_eq!(spec.mean(), 3.0, epsilon = 1e-12);
        assert_relative_eq!(spec.stddev(), 1.5, epsilon = 1e-12);
        // Zero-mean fallback uses unit coefficient of variation.
        let spec = DistributionSpec::lognormal_from_moments(0.0, 2.0, None).unwrap();
        assert_relative_eq!(spec.mean(), 2.0, epsilon = 1e-12);
        assert_relative_eq!(spec.stddev(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn densities_integrate_to_one() {
        let specs = vec![
            DistributionSpec::Uniform { a: -1.0, b: 3.0 },
            DistributionSpec::Uniform { a: 0.0, b: 0.5 },
            DistributionSpec::Uniform { a: 2.0, b: 9.0 },
            DistributionSpec::Normal { mu: 0.5, sigma: 1.2, a: None, b: None },
            DistributionSpec::Normal { mu: 0.0, sigma: 0.3628, a: Some(-2.0), b: Some(2.0) },
            DistributionSpec::Normal { mu: -3.0, sigma: 0.4, a: None, b: None },
            DistributionSpec::TruncNormal { mu: 25.99, sigma: 26.62, a: 0.0, b: 1050.0 },
            DistributionSpec::TruncNormal { mu: 0.0, sigma: 1.0, a: 1.0, b: 2.0 },
            DistributionSpec::TruncNormal { mu: 5.0, sigma: 0.1, a: 4.9, b: 5.05 },
            DistributionSpec::Lognormal { mu: 0.0, sigma: 0.8, a: None, b: None },
            DistributionSpec::Lognormal { mu: 1.0, sigma: 0.5, a: Some(0.0), b: Some(50.0) },
            DistributionSpec::Lognormal { mu: -1.0, sigma: 1.0, a: Some(0.1), b: Some(10.0) },
        ];
        for spec in specs {
            let (lo, hi) = spec.support();
            let (lo, hi) = match spec {
                DistributionSpec::Normal { mu, sigma, .. } => {
                    (lo.max(mu - 12.0 * sigma), hi.min(mu + 12.0 * sigma))
                }
                DistributionSpec::TruncNormal { .. } => (lo, hi),
                DistributionSpec::Lognormal { mu, sigma, .. } => {
                    (lo.max((mu - 14.0 * sigma).exp()), hi.min((mu + 14.0 * sigma).exp()))
                }
                _ => (lo, hi),
            };
            let n = 200_001;
            let h = (hi - lo) / (n - 1) as f64;
            // Simpson's rule over a fine grid.
            let mut acc = 0.0;
            for i in 0..n {
                let x = lo + h * i as f64;
                let w = if i == 0 || i == n - 1 {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                acc += w * spec.log_pdf(x).exp();
            }
            let integral = acc * h / 3.0;
            assert!(
                (integral - 1.0).abs() < 1e-6,
                "{spec:?} integrates to {integral}"
            );
        }
    }

    #[test]
    fn spherical_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let axis = Vector3::new(0.2, 0.9, -0.1);
        for _ in 0..500 {
            let v = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let (r, p, a) = com_cartesian_to_spherical(&v, &axis);
            let back = com_spherical_to_cartesian(r, p, a, &axis);
            assert_relative_eq!(back, v, epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn spherical_cone_axis() {
        let axis = Vector3::new(0.0, 2.0, 0.0);
        let v = com_spherical_to_cartesian(0.7, 0.0, 1.3, &axis);
        assert_relative_eq!(v, Vector3::new(0.0, 0.7, 0.0), epsilon = 1e-12);
        let v = com_spherical_to_cartesian(0.7, std::f64::consts::FRAC_PI_2, 0.0, &axis);
        assert_relative_eq!(v.dot(&Vector3::y()), 0.0, epsilon = 1e-12);
        assert_relative_eq!(v.norm(), 0.7, epsilon = 1e-12);
    }
}
