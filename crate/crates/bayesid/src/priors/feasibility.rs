//! Joint feasibility and soft constraint factors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{apparent_inertia, LinkInertialParams, Pose, RobotDescription};

/// Seed for the default feasibility check poses; fixed so feasibility is a
/// deterministic function of the parameters.
const CHECK_POSE_SEED: u64 = 0xfea51b1e;

/// Number of poses at which predicted-inertia positivity is checked by
/// default. Finite-pose positivity is an approximation of workspace-wide
/// positivity.
pub const DEFAULT_CHECK_POSES: usize = 20;

/// The default seeded pose set used for predicted-inertia positivity.
pub fn default_check_poses(robot: &RobotDescription) -> Vec<Pose> {
    let mut rng = ChaCha8Rng::seed_from_u64(CHECK_POSE_SEED);
    crate::dynamics::sample_poses(robot.n_joints(), DEFAULT_CHECK_POSES, &mut rng)
}

/// Indicator factor over the joint feasible set: zero when every link's
/// parameters are physically consistent, the CoM respects its geometry
/// bound, and the predicted inertia is positive at every check pose;
/// negative infinity otherwise. Infeasible is a value, not an error.
pub fn feasibility_log_factor(
    params: &[LinkInertialParams],
    robot: &RobotDescription,
    check_poses: &[Pose],
) -> f64 {
    if params.len() != robot.n_joints() {
        return f64::NEG_INFINITY;
    }
    for (k, p) in params.iter().enumerate() {
        if !p.is_physically_feasible(robot.links[k].com_bound) {
            return f64::NEG_INFINITY;
        }
    }
    for pose in check_poses {
        match apparent_inertia(robot, params, pose) {
            Ok(x) => {
                if x.iter().any(|&v| v <= 0.0) {
                    return f64::NEG_INFINITY;
                }
            }
            Err(_) => return f64::NEG_INFINITY,
        }
    }
    0.0
}

/// Soft (probabilistic) joint constraints layered on the diffuse prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SoftConstraintKind {
    /// Sum of identified link masses stays close to the datasheet total.
    TotalMass,
    /// CoM alignment with the translation vector; realized structurally by
    /// the polar-angle parametrization, so the factor itself is flat.
    ComAlignment,
}

/// Log factor of one soft constraint. The total-mass factor is a Normal
/// log-density on the mass-sum deviation with a spread of 10% of the
/// datasheet total.
pub fn soft_constraint_log_factor(
    params: &[LinkInertialParams],
    robot: &RobotDescription,
    kind: SoftConstraintKind,
) -> f64 {
    match kind {
        SoftConstraintKind::TotalMass => {
            let sum: f64 = params.iter().map(|p| p.mass).sum();
            let sigma = 0.1 * robot.total_mass;
            let z = (sum - robot.total_mass) / sigma;
            -0.5 * z * z - sigma.ln() - 0.5 * super::LN_2PI
        }
        SoftConstraintKind::ComAlignment => 0.0,
    }
}
