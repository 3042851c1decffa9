//! Rigid-body inertia model of a serial manipulator.
//!
//! The model is deliberately restricted to what an axis-wise inertia
//! measurement can see: the mass matrix `M(q)`, its diagonal (the
//! pose-dependent apparent inertia `X`), the regressor `Y(q)` that makes
//! `X` linear in the standard link parameters, and the numeric extraction
//! of independent base parameters from that regressor.

use nalgebra::{DMatrix, DVector, Matrix3, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

mod base_params;
mod crba;

pub use base_params::{extract_base_params, BaseParamMap};
pub use crba::{apparent_inertia, mass_matrix, regressor};

/// Number of mechanical parameters per link: mass, three CoM coordinates,
/// six inertia-tensor components and the reflected rotor inertia.
pub const PARAMS_PER_LINK: usize = 11;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("parameter list has {got} entries, robot has {expected} joints")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("pose has {got} joint values, robot has {expected}")]
    PoseMismatch { expected: usize, got: usize },
    #[error("non-finite joint value at index {0}")]
    NonFinitePose(usize),
    #[error("base-parameter count unstable across pose samples: {0} vs {1}")]
    RankInstability(usize, usize),
    #[error("parameter index {0} out of range for dimension {1}")]
    IndexOutOfRange(usize, usize),
    #[error("robot description invalid: {0}")]
    InvalidRobot(String),
}

/// The eleven mechanical parameters of one body.
///
/// `com` holds the centre-of-mass coordinates in the link's CoM frame,
/// whose z-axis points along the link translation vector (see
/// [`RobotDescription::com_frame_rotation`]). `inertia` holds the six
/// independent components (xx, xy, xz, yy, yz, zz) of the tensor about
/// the centre of mass, expressed in link-frame axes. `rotor_inertia` is
/// the motor-side inertia reflected to the joint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkInertialParams {
    pub mass: f64,
    pub com: [f64; 3],
    pub inertia: [f64; 6],
    pub rotor_inertia: f64,
}

impl LinkInertialParams {
    pub fn zero() -> Self {
        Self {
            mass: 0.0,
            com: [0.0; 3],
            inertia: [0.0; 6],
            rotor_inertia: 0.0,
        }
    }

    /// Full symmetric 3x3 tensor about the CoM.
    pub fn inertia_matrix(&self) -> Matrix3<f64> {
        let [xx, xy, xz, yy, yz, zz] = self.inertia;
        Matrix3::new(xx, xy, xz, xy, yy, yz, xz, yz, zz)
    }

    /// Positivity, triangle-inequality and positive-definiteness checks on
    /// the tensor, plus mass/rotor positivity and the CoM geometry bound.
    /// The pose-dependent positivity of the predicted inertia is a separate
    /// check that needs the full robot (see the priors module).
    pub fn is_physically_feasible(&self, com_bound: f64) -> bool {
        if !(self.mass > 0.0 && self.rotor_inertia > 0.0) {
            return false;
        }
        let [xx, _, _, yy, _, zz] = self.inertia;
        if !(xx > 0.0 && yy > 0.0 && zz > 0.0) {
            return false;
        }
        if xx + yy < zz || yy + zz < xx || zz + xx < yy {
            return false;
        }
        let eig = self.inertia_matrix().symmetric_eigenvalues();
        if eig.iter().any(|&l| l <= 0.0) {
            return false;
        }
        let r = Vector3::from(self.com);
        if !r.norm().is_finite() || r.norm() > com_bound {
            return false;
        }
        true
    }
}

/// One revolute joint: a fixed transform from the parent link frame to the
/// joint origin followed by a rotation about `axis`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDescription {
    /// Rotation axis, unit vector in the joint/link frame.
    pub axis: [f64; 3],
    /// Joint origin in the parent link frame (m).
    pub translation: [f64; 3],
    /// Fixed orientation as roll-pitch-yaw about the parent's x, y, z axes.
    pub rotation_rpy: [f64; 3],
}

/// Per-link geometry data used by the priors and the CoM parametrization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    /// Upper bound on the CoM distance from the joint origin (m).
    pub com_bound: f64,
    /// Datasheet rotor inertia reflected to the joint (kg m^2).
    pub nominal_rotor_inertia: f64,
    /// Optional override for the CoM cone axis in the link frame. Defaults
    /// to the next joint's translation direction, or the link z-axis for
    /// the last link.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub com_axis: Option<[f64; 3]>,
}

/// Kinematic chain plus the metadata the priors need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotDescription {
    pub schema_version: u32,
    pub joints: Vec<JointDescription>,
    pub links: Vec<LinkGeometry>,
    pub total_mass: f64,
}

impl RobotDescription {
    pub fn n_joints(&self) -> usize {
        self.joints.len()
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if self.joints.is_empty() {
            return Err(DynamicsError::InvalidRobot("no joints".into()));
        }
        if self.joints.len() != self.links.len() {
            return Err(DynamicsError::InvalidRobot(format!(
                "{} joints but {} links",
                self.joints.len(),
                self.links.len()
            )));
        }
        if !(self.total_mass > 0.0) {
            return Err(DynamicsError::InvalidRobot("total_mass must be > 0".into()));
        }
        for (k, j) in self.joints.iter().enumerate() {
            let a = Vector3::from(j.axis);
            if a.norm() < 1e-12 || !a.norm().is_finite() {
                return Err(DynamicsError::InvalidRobot(format!(
                    "joint {} axis is degenerate",
                    k + 1
                )));
            }
            if j.translation.iter().chain(j.rotation_rpy.iter()).any(|v| !v.is_finite()) {
                return Err(DynamicsError::InvalidRobot(format!(
                    "joint {} transform has non-finite entries",
                    k + 1
                )));
            }
        }
        for (k, l) in self.links.iter().enumerate() {
            if !(l.com_bound > 0.0) {
                return Err(DynamicsError::InvalidRobot(format!(
                    "link {} com_bound must be > 0",
                    k + 1
                )));
            }
            if !(l.nominal_rotor_inertia > 0.0) {
                return Err(DynamicsError::InvalidRobot(format!(
                    "link {} nominal_rotor_inertia must be > 0",
                    k + 1
                )));
            }
        }
        Ok(())
    }

    /// Unit rotation axis of joint `k` in its link frame.
    pub fn joint_axis(&self, k: usize) -> Unit<Vector3<f64>> {
        Unit::new_normalize(Vector3::from(self.joints[k].axis))
    }

    /// Cone axis for link `k`'s CoM parametrization, in the link frame.
    ///
    /// Defaults to the direction of the next joint's translation; the last
    /// link (or a zero-length translation) falls back to the link z-axis.
    pub fn com_axis(&self, k: usize) -> Vector3<f64> {
        if let Some(a) = self.links[k].com_axis {
            let v = Vector3::from(a);
            if v.norm() > 1e-12 {
                return v.normalize();
            }
        }
        if k + 1 < self.joints.len() {
            let t = Vector3::from(self.joints[k + 1].translation);
            if t.norm() > 1e-12 {
                return t.normalize();
            }
        }
        Vector3::z()
    }

    /// Rotation taking CoM-frame coordinates to link-frame coordinates for
    /// link `k`. The CoM frame has its z-axis along [`Self::com_axis`].
    pub fn com_frame_rotation(&self, k: usize) -> Matrix3<f64> {
        com_frame_from_axis(&self.com_axis(k))
    }
}

/// Joint positions (rad), one entry per joint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub q: Vec<f64>,
}

impl Pose {
    pub fn new(q: Vec<f64>) -> Self {
        Self { q }
    }

    pub fn validate(&self, robot: &RobotDescription) -> Result<(), DynamicsError> {
        if self.q.len() != robot.n_joints() {
            return Err(DynamicsError::PoseMismatch {
                expected: robot.n_joints(),
                got: self.q.len(),
            });
        }
        if let Some(i) = self.q.iter().position(|v| !v.is_finite()) {
            return Err(DynamicsError::NonFinitePose(i));
        }
        Ok(())
    }
}

/// Standard (regressor-linear) parameters of one link: mass, first moment
/// `h = m r` and the tensor about the link-frame origin, all in link axes.
#[derive(Debug, Clone)]
pub(crate) struct StandardParams {
    pub m: f64,
    pub h: Vector3<f64>,
    pub i_origin: Matrix3<f64>,
    pub rotor: f64,
}

impl StandardParams {
    pub fn zero() -> Self {
        Self {
            m: 0.0,
            h: Vector3::zeros(),
            i_origin: Matrix3::zeros(),
            rotor: 0.0,
        }
    }

    /// Place a one at the given parameter slot (0 = m, 1..4 = h, 4..10 =
    /// tensor components xx, xy, xz, yy, yz, zz, 10 = rotor).
    pub fn unit(slot: usize) -> Self {
        let mut p = Self::zero();
        match slot {
            0 => p.m = 1.0,
            1..=3 => p.h[slot - 1] = 1.0,
            4..=9 => {
                let (i, j) = TENSOR_SLOTS[slot - 4];
                p.i_origin[(i, j)] = 1.0;
                p.i_origin[(j, i)] = 1.0;
            }
            10 => p.rotor = 1.0,
            _ => unreachable!("slot {slot} out of range"),
        }
        p
    }
}

pub(crate) const TENSOR_SLOTS: [(usize, usize); 6] =
    [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

/// Convert mechanical parameters to the standard parameters the regressor
/// is linear in. Rotates the CoM into link axes and applies the
/// parallel-axis shift so the tensor is about the link-frame origin.
pub(crate) fn to_standard(
    params: &LinkInertialParams,
    com_rotation: &Matrix3<f64>,
) -> StandardParams {
    let r_link = com_rotation * Vector3::from(params.com);
    let m = params.mass;
    let i_c = params.inertia_matrix();
    let shift = m * (r_link.norm_squared() * Matrix3::identity() - r_link * r_link.transpose());
    StandardParams {
        m,
        h: m * r_link,
        i_origin: i_c + shift,
        rotor: params.rotor_inertia,
    }
}

/// Flatten mechanical parameters of all links into the stacked standard
/// parameter vector the regressor multiplies.
pub(crate) fn flatten_standard(
    params: &[LinkInertialParams],
    com_rotations: &[Matrix3<f64>],
) -> DVector<f64> {
    let n = params.len();
    let mut v = DVector::zeros(n * PARAMS_PER_LINK);
    for (k, p) in params.iter().enumerate() {
        let sp = to_standard(p, &com_rotations[k]);
        let base = k * PARAMS_PER_LINK;
        v[base] = sp.m;
        for i in 0..3 {
            v[base + 1 + i] = sp.h[i];
        }
        for (s, &(i, j)) in TENSOR_SLOTS.iter().enumerate() {
            v[base + 4 + s] = sp.i_origin[(i, j)];
        }
        v[base + 10] = sp.rotor;
    }
    v
}

/// Rotation matrix from roll-pitch-yaw about the fixed x, y, z axes.
pub fn rpy_to_rotation(rpy: &[f64; 3]) -> Matrix3<f64> {
    (Rotation3::from_axis_angle(&Vector3::z_axis(), rpy[2])
        * Rotation3::from_axis_angle(&Vector3::y_axis(), rpy[1])
        * Rotation3::from_axis_angle(&Vector3::x_axis(), rpy[0]))
    .into_inner()
}

/// Orthonormal frame with its z-axis along `axis`; columns are the frame
/// axes in the input coordinates. Falls back to the identity for a
/// degenerate axis.
pub fn com_frame_from_axis(axis: &Vector3<f64>) -> Matrix3<f64> {
    let n = axis.norm();
    if n < 1e-12 || !n.is_finite() {
        return Matrix3::identity();
    }
    let z = axis / n;
    // Seed with the basis vector least aligned with z for stability.
    let mut seed = 0;
    for i in 1..3 {
        if z[i].abs() < z[seed].abs() {
            seed = i;
        }
    }
    let mut e = Vector3::zeros();
    e[seed] = 1.0;
    let x = (e - z * z.dot(&e)).normalize();
    let y = z.cross(&x);
    Matrix3::from_columns(&[x, y, z])
}

/// Draw `n` poses uniformly over [-pi, pi] per joint. Used for base
/// parameter extraction and feasibility check poses.
pub(crate) fn sample_poses(n_joints: usize, n: usize, rng: &mut impl rand::Rng) -> Vec<Pose> {
    use rand::Rng as _;
    (0..n)
        .map(|_| {
            Pose::new(
                (0..n_joints)
                    .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
                    .collect(),
            )
        })
        .collect()
}

pub(crate) fn check_inputs(
    robot: &RobotDescription,
    params: &[LinkInertialParams],
    pose: &Pose,
) -> Result<(), DynamicsError> {
    if params.len() != robot.n_joints() {
        return Err(DynamicsError::DimensionMismatch {
            expected: robot.n_joints(),
            got: params.len(),
        });
    }
    pose.validate(robot)
}
