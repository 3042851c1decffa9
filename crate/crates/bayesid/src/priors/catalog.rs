//! Prior catalogs: one distribution spec per sampled coordinate, plus the
//! joint constraint factors enabled for the catalog.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::feasibility::SoftConstraintKind;
use super::{cartesian_to_spherical_coords, spherical_unit, DistributionSpec, PriorError};
use crate::dynamics::{LinkInertialParams, RobotDescription};

/// Diffuse bounds shared by all catalogs: diagonal tensor components in
/// (0, 50] kg m^2, off-diagonals in [-2, 2] kg m^2, CoM radius capped by
/// sqrt(3) (the [-1, 1] per-component box) and the link geometry bound.
pub const DIFFUSE_IDIAG_MAX: f64 = 50.0;
pub const DIFFUSE_IOFF_BOUND: f64 = 2.0;
pub const DIFFUSE_COM_RADIUS_MAX: f64 = 1.7320508075688772;

/// Default prior for the shared measurement-noise coefficient.
pub fn default_noise_prior() -> DistributionSpec {
    DistributionSpec::TruncNormal {
        mu: 0.05,
        sigma: 0.05,
        a: 1e-4,
        b: 1.0,
    }
}

/// Catalog flavor, ordered by information content.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorType {
    Diffuse,
    InformedDiffuse,
    Empirical,
    Cad,
}

impl PriorType {
    pub fn label(&self) -> &'static str {
        match self {
            PriorType::Diffuse => "diffuse",
            PriorType::InformedDiffuse => "informed_diffuse",
            PriorType::Empirical => "empirical",
            PriorType::Cad => "cad",
        }
    }
}

/// Distribution specs for the eleven sampled coordinates of one link. CoM
/// coordinates are parameterized spherically (radius, polar, azimuth) about
/// the link's translation-aligned axis for every catalog type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkPriorSpecs {
    pub mass: DistributionSpec,
    pub com_radius: DistributionSpec,
    pub com_polar: DistributionSpec,
    pub com_azimuth: DistributionSpec,
    pub ixx: DistributionSpec,
    pub ixy: DistributionSpec,
    pub ixz: DistributionSpec,
    pub iyy: DistributionSpec,
    pub iyz: DistributionSpec,
    pub izz: DistributionSpec,
    pub rotor: DistributionSpec,
}

impl LinkPriorSpecs {
    pub fn specs(&self) -> [&DistributionSpec; 11] {
        [
            &self.mass,
            &self.com_radius,
            &self.com_polar,
            &self.com_azimuth,
            &self.ixx,
            &self.ixy,
            &self.ixz,
            &self.iyy,
            &self.iyz,
            &self.izz,
            &self.rotor,
        ]
    }
}

/// Sampled-coordinate view of one link's mechanical parameters.
pub(crate) fn link_coords(params: &LinkInertialParams) -> [f64; 11] {
    let (radius, polar, azimuth) =
        cartesian_to_spherical_coords(&nalgebra::Vector3::from(params.com));
    [
        params.mass,
        radius,
        polar,
        azimuth,
        params.inertia[0],
        params.inertia[1],
        params.inertia[2],
        params.inertia[3],
        params.inertia[4],
        params.inertia[5],
        params.rotor_inertia,
    ]
}

pub(crate) fn link_from_coords(c: &[f64; 11]) -> LinkInertialParams {
    let com = spherical_unit(c[1], c[2], c[3]);
    LinkInertialParams {
        mass: c[0],
        com: [com.x, com.y, com.z],
        inertia: [c[4], c[5], c[6], c[7], c[8], c[9]],
        rotor_inertia: c[10],
    }
}

/// Per-parameter prior specs for a whole robot plus the enabled joint
/// constraint factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorCatalog {
    pub schema_version: u32,
    pub prior_type: PriorType,
    pub links: Vec<LinkPriorSpecs>,
    pub noise: DistributionSpec,
    /// When set, the CoM prior is the pushforward of a uniform Cartesian
    /// density and both sampling and log-density carry the spherical
    /// volume element `r^2 sin(polar)`. Catalogs with natively spherical
    /// specs leave this unset.
    pub com_jacobian: bool,
    pub soft_factors: Vec<SoftConstraintKind>,
}

impl PriorCatalog {
    pub fn n_links(&self) -> usize {
        self.links.len()
    }

    pub fn validate(&self) -> Result<(), PriorError> {
        if self.links.is_empty() {
            return Err(PriorError::Config("catalog has no links".into()));
        }
        for (k, link) in self.links.iter().enumerate() {
            for spec in link.specs() {
                spec.validate().map_err(|e| {
                    PriorError::Config(format!("link {} spec invalid: {e}", k + 1))
                })?;
            }
            if self.com_jacobian {
                let radius_ok = matches!(link.com_radius, DistributionSpec::Uniform { .. });
                let polar_ok = matches!(link.com_polar, DistributionSpec::Uniform { .. });
                if !radius_ok || !polar_ok {
                    return Err(PriorError::Config(format!(
                        "link {}: com_jacobian requires Uniform radius and polar specs",
                        k + 1
                    )));
                }
            }
        }
        self.noise.validate()?;
        Ok(())
    }

    /// Draw one full set of link parameters. Feasibility is not enforced
    /// here; callers reject or weight as needed.
    pub fn sample_params(&self, rng: &mut impl Rng) -> Vec<LinkInertialParams> {
        self.links
            .iter()
            .map(|link| {
                let mut c = [0.0; 11];
                for (i, spec) in link.specs().iter().enumerate() {
                    c[i] = spec.sample(rng);
                }
                if self.com_jacobian {
                    let (r, p) = sample_ball_coords(&link.com_radius, &link.com_polar, rng);
                    c[1] = r;
                    c[2] = p;
                }
                link_from_coords(&c)
            })
            .collect()
    }

    pub fn sample_noise(&self, rng: &mut impl Rng) -> f64 {
        self.noise.sample(rng)
    }

    /// Joint log prior density over the sampled coordinates of all links:
    /// the sum of per-parameter log densities plus, for Cartesian-uniform
    /// catalogs, the spherical volume element. Soft constraint factors are
    /// evaluated separately because they need the robot description.
    pub fn joint_log_prior(&self, params: &[LinkInertialParams]) -> f64 {
        let mut lp = 0.0;
        for (link, p) in self.links.iter().zip(params) {
            let c = link_coords(p);
            for (i, spec) in link.specs().iter().enumerate() {
                lp += spec.log_pdf(c[i]);
                if !lp.is_finite() {
                    return f64::NEG_INFINITY;
                }
            }
            if self.com_jacobian {
                let (radius, polar) = (c[1], c[2]);
                if radius <= 0.0 || polar <= 0.0 || polar >= std::f64::consts::PI {
                    return f64::NEG_INFINITY;
                }
                lp += 2.0 * radius.ln() + polar.sin().ln();
            }
        }
        lp
    }
}

/// Radius and polar draws under the spherical volume element, restricted
/// to the boxes of the underlying uniform specs.
fn sample_ball_coords(
    radius_spec: &DistributionSpec,
    polar_spec: &DistributionSpec,
    rng: &mut impl Rng,
) -> (f64, f64) {
    let (ra, rb) = radius_spec.support();
    let u: f64 = rng.random();
    let radius = (ra.powi(3) + u * (rb.powi(3) - ra.powi(3))).cbrt();
    let (pa, pb) = polar_spec.support();
    let (ca, cb) = (pa.cos(), pb.cos());
    let v: f64 = rng.random();
    let polar = (ca + v * (cb - ca)).clamp(-1.0, 1.0).acos();
    (radius, polar.clamp(pa, pb))
}

/// Per-axis empirical summary row. `rotor_*` entries override the default
/// rotor prior (mean and spread equal to the nominal value) when present;
/// tabulated sources occasionally pin a different spread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalAxisRow {
    pub mass_mu: f64,
    pub mass_sigma: f64,
    pub com_mu: f64,
    pub com_sigma: f64,
    pub idiag_mu: f64,
    pub idiag_sigma: f64,
    pub ioff_mu: f64,
    pub ioff_sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotor_mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotor_sigma: Option<f64>,
}

/// Empirical prior table: one row per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalTable {
    pub schema_version: u32,
    pub axes: Vec<EmpiricalAxisRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// CAD data of one donor robot used to build an empirical table.
#[derive(Debug, Clone, PartialEq)]
pub struct DonorAxis {
    pub mass: f64,
    pub com_length: f64,
    pub idiag: [f64; 3],
    pub ioff: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct DonorRobot {
    pub name: String,
    pub datasheet_mass: f64,
    pub axes: Vec<DonorAxis>,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

fn floor_sigma(mu: f64, sigma: f64, what: &str, axis: usize, warnings: &mut Vec<String>) -> f64 {
    if sigma > 0.0 {
        return sigma;
    }
    let floored = if mu.abs() > 0.0 { 0.01 * mu.abs() } else { 1e-6 };
    warnings.push(format!(
        "axis {}: degenerate spread for {what}, floored at {floored:e}",
        axis + 1
    ));
    floored
}

/// Build an empirical table from donor CAD data. Masses are scaled by the
/// ratio of the target datasheet mass to the mean donor datasheet mass
/// before the statistics; tensor statistics pool the three components per
/// axis. The rotor columns are left unset so the catalog builder falls
/// back to the robot's nominal values.
pub fn empirical_prior_from_cad(
    donors: &[DonorRobot],
    target_total_mass: f64,
) -> Result<EmpiricalTable, PriorError> {
    if donors.len() < 2 {
        return Err(PriorError::Config(format!(
            "empirical prior needs at least 2 donor robots, got {}",
            donors.len()
        )));
    }
    let n_axes = donors[0].axes.len();
    for d in donors {
        if d.axes.len() != n_axes {
            return Err(PriorError::Config(format!(
                "donor '{}' has {} axes, expected {}",
                d.name,
                d.axes.len(),
                n_axes
            )));
        }
    }
    let mean_datasheet = donors.iter().map(|d| d.datasheet_mass).sum::<f64>() / donors.len() as f64;
    if !(mean_datasheet > 0.0) {
        return Err(PriorError::Config("donor datasheet masses must be positive".into()));
    }
    let scale = target_total_mass / mean_datasheet;

    let mut warnings = Vec::new();
    let mut axes = Vec::with_capacity(n_axes);
    for k in 0..n_axes {
        let masses: Vec<f64> = donors.iter().map(|d| d.axes[k].mass * scale).collect();
        let coms: Vec<f64> = donors.iter().map(|d| d.axes[k].com_length).collect();
        let idiag: Vec<f64> = donors.iter().flat_map(|d| d.axes[k].idiag).collect();
        let ioff: Vec<f64> = donors.iter().flat_map(|d| d.axes[k].ioff).collect();
        let (mass_mu, mass_sigma) = mean_sd(&masses);
        let (com_mu, com_sigma) = mean_sd(&coms);
        let (idiag_mu, idiag_sigma) = mean_sd(&idiag);
        let (ioff_mu, ioff_sigma) = mean_sd(&ioff);
        axes.push(EmpiricalAxisRow {
            mass_mu,
            mass_sigma: floor_sigma(mass_mu, mass_sigma, "mass", k, &mut warnings),
            com_mu,
            com_sigma: floor_sigma(com_mu, com_sigma, "com length", k, &mut warnings),
            idiag_mu,
            idiag_sigma: floor_sigma(idiag_mu, idiag_sigma, "diagonal tensor", k, &mut warnings),
            ioff_mu,
            ioff_sigma: floor_sigma(ioff_mu, ioff_sigma, "off-diagonal tensor", k, &mut warnings),
            rotor_mu: None,
            rotor_sigma: None,
        });
    }
    Ok(EmpiricalTable {
        schema_version: 1,
        axes,
        warnings,
    })
}

/// Inputs consumed by [`build_prior`]; the empirical and CAD catalogs need
/// data beyond the robot description.
pub enum PriorInputs<'a> {
    None,
    Empirical(&'a EmpiricalTable),
    Cad {
        params: &'a [LinkInertialParams],
        /// Relative spread; 0 collapses every spec to a point mass.
        spread: f64,
    },
}

fn diffuse_radius_bound(robot: &RobotDescription, k: usize) -> f64 {
    DIFFUSE_COM_RADIUS_MAX.min(robot.links[k].com_bound)
}

fn diffuse_link_specs(robot: &RobotDescription, k: usize) -> LinkPriorSpecs {
    use DistributionSpec::Uniform;
    let j = robot.links[k].nominal_rotor_inertia;
    LinkPriorSpecs {
        mass: Uniform { a: 0.0, b: robot.total_mass },
        com_radius: Uniform { a: 0.0, b: diffuse_radius_bound(robot, k) },
        com_polar: Uniform { a: 0.0, b: std::f64::consts::PI },
        com_azimuth: Uniform { a: 0.0, b: 2.0 * std::f64::consts::PI },
        ixx: Uniform { a: 0.0, b: DIFFUSE_IDIAG_MAX },
        ixy: Uniform { a: -DIFFUSE_IOFF_BOUND, b: DIFFUSE_IOFF_BOUND },
        ixz: Uniform { a: -DIFFUSE_IOFF_BOUND, b: DIFFUSE_IOFF_BOUND },
        iyy: Uniform { a: 0.0, b: DIFFUSE_IDIAG_MAX },
        iyz: Uniform { a: -DIFFUSE_IOFF_BOUND, b: DIFFUSE_IOFF_BOUND },
        izz: Uniform { a: 0.0, b: DIFFUSE_IDIAG_MAX },
        rotor: Uniform { a: j, b: 2.0 * j },
    }
}

fn empirical_link_specs(
    robot: &RobotDescription,
    k: usize,
    row: &EmpiricalAxisRow,
) -> Result<LinkPriorSpecs, PriorError> {
    let j = robot.links[k].nominal_rotor_inertia;
    let idiag = DistributionSpec::lognormal_from_moments(
        row.idiag_mu,
        row.idiag_sigma,
        Some((0.0, DIFFUSE_IDIAG_MAX)),
    )?;
    let ioff = DistributionSpec::Normal {
        mu: row.ioff_mu,
        sigma: row.ioff_sigma,
        a: Some(-DIFFUSE_IOFF_BOUND),
        b: Some(DIFFUSE_IOFF_BOUND),
    };
    Ok(LinkPriorSpecs {
        mass: DistributionSpec::TruncNormal {
            mu: row.mass_mu,
            sigma: row.mass_sigma,
            a: 0.0,
            b: robot.total_mass,
        },
        com_radius: DistributionSpec::TruncNormal {
            mu: row.com_mu,
            sigma: row.com_sigma,
            a: 0.0,
            b: diffuse_radius_bound(robot, k),
        },
        com_polar: DistributionSpec::Uniform {
            a: 0.0,
            b: std::f64::consts::FRAC_PI_2,
        },
        com_azimuth: DistributionSpec::Uniform {
            a: 0.0,
            b: 2.0 * std::f64::consts::PI,
        },
        ixx: idiag.clone(),
        ixy: ioff.clone(),
        ixz: ioff.clone(),
        iyy: idiag.clone(),
        iyz: ioff.clone(),
        izz: idiag,
        rotor: DistributionSpec::TruncNormal {
            mu: row.rotor_mu.unwrap_or(j),
            sigma: row.rotor_sigma.unwrap_or(j),
            a: j,
            b: 2.0 * j,
        },
    })
}

fn cad_spec(value: f64, spread: f64, sigma_floor: f64, bounds: (f64, f64)) -> DistributionSpec {
    if spread == 0.0 {
        return DistributionSpec::Point { value };
    }
    let mut sigma = spread * value.abs();
    if sigma == 0.0 {
        sigma = sigma_floor;
    }
    DistributionSpec::Normal {
        mu: value,
        sigma,
        a: Some(bounds.0),
        b: Some(bounds.1),
    }
}

fn cad_link_specs(
    robot: &RobotDescription,
    k: usize,
    cad: &LinkInertialParams,
    spread: f64,
) -> LinkPriorSpecs {
    let j_nom = robot.links[k].nominal_rotor_inertia;
    let max_tensor = cad
        .inertia
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1e-3);
    let floor = 1e-3 * max_tensor;
    let coords = link_coords(cad);
    LinkPriorSpecs {
        mass: cad_spec(coords[0], spread, floor, (0.0, robot.total_mass)),
        com_radius: cad_spec(coords[1], spread, floor, (0.0, diffuse_radius_bound(robot, k))),
        com_polar: cad_spec(coords[2], spread, floor, (0.0, std::f64::consts::PI)),
        com_azimuth: cad_spec(coords[3], spread, floor, (0.0, 2.0 * std::f64::consts::PI)),
        ixx: cad_spec(coords[4], spread, floor, (0.0, DIFFUSE_IDIAG_MAX)),
        ixy: cad_spec(coords[5], spread, floor, (-DIFFUSE_IOFF_BOUND, DIFFUSE_IOFF_BOUND)),
        ixz: cad_spec(coords[6], spread, floor, (-DIFFUSE_IOFF_BOUND, DIFFUSE_IOFF_BOUND)),
        iyy: cad_spec(coords[7], spread, floor, (0.0, DIFFUSE_IDIAG_MAX)),
        iyz: cad_spec(coords[8], spread, floor, (-DIFFUSE_IOFF_BOUND, DIFFUSE_IOFF_BOUND)),
        izz: cad_spec(coords[9], spread, floor, (0.0, DIFFUSE_IDIAG_MAX)),
        rotor: cad_spec(coords[10], spread, floor, (j_nom, 2.0 * j_nom)),
    }
}

/// Construct a prior catalog of the requested type for `robot`.
pub fn build_prior(
    prior_type: PriorType,
    robot: &RobotDescription,
    inputs: PriorInputs<'_>,
) -> Result<PriorCatalog, PriorError> {
    robot
        .validate()
        .map_err(|e| PriorError::Config(e.to_string()))?;
    let n = robot.n_joints();
    let links: Vec<LinkPriorSpecs> = match (prior_type, &inputs) {
        (PriorType::Diffuse | PriorType::InformedDiffuse, PriorInputs::None) => {
            (0..n).map(|k| diffuse_link_specs(robot, k)).collect()
        }
        (PriorType::Empirical, PriorInputs::Empirical(table)) => {
            if table.axes.len() != n {
                return Err(PriorError::Config(format!(
                    "empirical table has {} axes, robot has {n}",
                    table.axes.len()
                )));
            }
            (0..n)
                .map(|k| empirical_link_specs(robot, k, &table.axes[k]))
                .collect::<Result<_, _>>()?
        }
        (PriorType::Cad, PriorInputs::Cad { params, spread }) => {
            if params.len() != n {
                return Err(PriorError::Config(format!(
                    "CAD parameter list has {} links, robot has {n}",
                    params.len()
                )));
            }
            if *spread < 0.0 {
                return Err(PriorError::Config("CAD spread must be >= 0".into()));
            }
            (0..n)
                .map(|k| cad_link_specs(robot, k, &params[k], *spread))
                .collect()
        }
        (PriorType::Empirical, _) => {
            return Err(PriorError::Config(
                "empirical prior requires an empirical table".into(),
            ))
        }
        (PriorType::Cad, _) => {
            return Err(PriorError::Config(
                "CAD prior requires per-link CAD parameters".into(),
            ))
        }
        _ => {
            return Err(PriorError::Config(
                "diffuse priors take no extra inputs".into(),
            ))
        }
    };
    let soft_factors = match prior_type {
        PriorType::InformedDiffuse => vec![SoftConstraintKind::TotalMass, SoftConstraintKind::ComAlignment],
        _ => Vec::new(),
    };
    let catalog = PriorCatalog {
        schema_version: 1,
        prior_type,
        links,
        noise: default_noise_prior(),
        com_jacobian: matches!(prior_type, PriorType::Diffuse | PriorType::InformedDiffuse),
        soft_factors,
    };
    catalog.validate()?;
    Ok(catalog)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{bundled_empirical_table, bundled_robot};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diffuse_rotor_bounds_double_nominal() {
        let robot = bundled_robot();
        let cat = build_prior(PriorType::Diffuse, &robot, PriorInputs::None).unwrap();
        match cat.links[5].rotor {
            DistributionSpec::Uniform { a, b } => {
                assert_relative_eq!(a, 6.362, epsilon = 1e-12);
                assert_relative_eq!(b, 12.724, epsilon = 1e-12);
            }
            ref other => panic!("expected Uniform, got {other:?}"),
        }
    }

    #[test]
    fn empirical_body6_mass_spec() {
        let robot = bundled_robot();
        let table = bundled_empirical_table();
        let cat = build_prior(PriorType::Empirical, &robot, PriorInputs::Empirical(&table)).unwrap();
        match cat.links[5].mass {
            DistributionSpec::TruncNormal { mu, sigma, a, b } => {
                assert_relative_eq!(mu, 25.99, epsilon = 1e-12);
                assert_relative_eq!(sigma, 26.62, epsilon = 1e-12);
                assert_relative_eq!(a, 0.0, epsilon = 1e-12);
                assert_relative_eq!(b, 1050.0, epsilon = 1e-12);
            }
            ref other => panic!("expected TruncNormal, got {other:?}"),
        }
        match cat.links[2].ixy {
            DistributionSpec::Normal { mu, sigma, .. } => {
                assert_relative_eq!(mu, 0.0, epsilon = 1e-12);
                assert_relative_eq!(sigma, 0.3628, epsilon = 1e-12);
            }
            ref other => panic!("expected Normal, got {other:?}"),
        }
    }

    #[test]
    fn empirical_polar_capped_at_quarter_turn() {
        let robot = bundled_robot();
        let table = bundled_empirical_table();
        let cat = build_prior(PriorType::Empirical, &robot, PriorInputs::Empirical(&table)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let params = cat.sample_params(&mut rng);
            for (k, p) in params.iter().enumerate() {
                let axis = robot.com_axis(k);
                // Draws are in the CoM frame, whose z-axis is the cone axis.
                let cosang = p.com[2] / nalgebra::Vector3::from(p.com).norm();
                assert!(
                    cosang >= -1e-12,
                    "link {k} CoM at {:?} exceeds 90 degrees to {axis:?}",
                    p.com
                );
            }
        }
    }

    #[test]
    fn donor_statistics() {
        let axis = |mass: f64| DonorAxis {
            mass,
            com_length: 0.5,
            idiag: [1.0, 2.0, 3.0],
            ioff: [0.0, 0.1, -0.1],
        };
        let donors = vec![
            DonorRobot {
                name: "a".into(),
                datasheet_mass: 1.0,
                axes: vec![axis(1.0)],
            },
            DonorRobot {
                name: "b".into(),
                datasheet_mass: 1.0,
                axes: vec![axis(3.0)],
            },
        ];
        let table = empirical_prior_from_cad(&donors, 1.0).unwrap();
        assert_relative_eq!(table.axes[0].mass_mu, 2.0, epsilon = 1e-12);
        assert_relative_eq!(table.axes[0].mass_sigma, 2f64.sqrt(), epsilon = 1e-12);
        // Identical CoM lengths across donors trip the degenerate floor.
        assert_relative_eq!(table.axes[0].com_sigma, 0.005, epsilon = 1e-12);
        assert!(!table.warnings.is_empty());
    }

    #[test]
    fn donor_mass_scaling() {
        let donors: Vec<DonorRobot> = [900.0, 1038.0]
            .iter()
            .map(|&m| DonorRobot {
                name: format!("{m}"),
                datasheet_mass: m,
                axes: vec![DonorAxis {
                    mass: 100.0,
                    com_length: 0.3,
                    idiag: [1.0, 1.1, 1.2],
                    ioff: [0.0, 0.0, 0.1],
                }],
            })
            .collect();
        let table = empirical_prior_from_cad(&donors, 1050.0).unwrap();
        let scale = 1050.0 / 969.0;
        assert_relative_eq!(table.axes[0].mass_mu, 100.0 * scale, epsilon = 1e-9);
        assert!((scale - 1.0836).abs() < 1e-4);
    }

    #[test]
    fn donor_axis_mismatch_is_config_error() {
        let mk = |n: usize| DonorRobot {
            name: format!("{n}"),
            datasheet_mass: 500.0,
            axes: (0..n)
                .map(|_| DonorAxis {
                    mass: 1.0,
                    com_length: 0.1,
                    idiag: [1.0; 3],
                    ioff: [0.0; 3],
                })
                .collect(),
        };
        let err = empirical_prior_from_cad(&[mk(6), mk(5)], 1000.0).unwrap_err();
        assert!(matches!(err, PriorError::Config(_)));
    }

    #[test]
    fn missing_inputs_are_config_errors() {
        let robot = bundled_robot();
        assert!(matches!(
            build_prior(PriorType::Empirical, &robot, PriorInputs::None),
            Err(PriorError::Config(_))
        ));
        assert!(matches!(
            build_prior(PriorType::Cad, &robot, PriorInputs::None),
            Err(PriorError::Config(_))
        ));
    }

    #[test]
    fn point_catalog_samples_are_exact() {
        let robot = bundled_robot();
        let cad = crate::data::bundled_cad_params();
        let cat = build_prior(
            PriorType::Cad,
            &robot,
            PriorInputs::Cad {
                params: &cad,
                spread: 0.0,
            },
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let draw = cat.sample_params(&mut rng);
        for (d, c) in draw.iter().zip(cad.iter()) {
            assert_relative_eq!(d.mass, c.mass, epsilon = 1e-12);
            assert_relative_eq!(d.rotor_inertia, c.rotor_inertia, epsilon = 1e-12);
            for i in 0..3 {
                assert_relative_eq!(d.com[i], c.com[i], epsilon = 1e-10);
            }
        }
    }
}
