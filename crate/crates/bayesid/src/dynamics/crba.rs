//! Composite-rigid-body evaluation of the mass matrix and its diagonal.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::{
    check_inputs, to_standard, DynamicsError, LinkInertialParams, Pose, RobotDescription,
    StandardParams, PARAMS_PER_LINK,
};

/// Spatial inertia of a subtree, referenced at a link-frame origin.
#[derive(Debug, Clone)]
struct Composite {
    m: f64,
    h: Vector3<f64>,
    i: Matrix3<f64>,
}

impl Composite {
    fn from_standard(sp: &StandardParams) -> Self {
        Self {
            m: sp.m,
            h: sp.h,
            i: sp.i_origin,
        }
    }

    /// Express this inertia in the parent frame: rotate by `rot` and move
    /// the reference point so that the old origin sits at `t`.
    fn to_parent(&self, rot: &Matrix3<f64>, t: &Vector3<f64>) -> Self {
        let h_rot = rot * self.h;
        let i_rot = rot * self.i * rot.transpose();
        let shift = self.m * (t.norm_squared() * Matrix3::identity() - t * t.transpose())
            + 2.0 * h_rot.dot(t) * Matrix3::identity()
            - (h_rot * t.transpose() + t * h_rot.transpose());
        Self {
            m: self.m,
            h: h_rot + self.m * t,
            i: i_rot + shift,
        }
    }

    fn add(&mut self, other: &Self) {
        self.m += other.m;
        self.h += other.h;
        self.i += other.i;
    }
}

/// Per-pose kinematics: parent-to-link rotation and joint origin per link.
struct FrameChain {
    rotations: Vec<Matrix3<f64>>,
    translations: Vec<Vector3<f64>>,
    axes: Vec<Vector3<f64>>,
}

fn frames(robot: &RobotDescription, pose: &Pose) -> FrameChain {
    let n = robot.n_joints();
    let mut rotations = Vec::with_capacity(n);
    let mut translations = Vec::with_capacity(n);
    let mut axes = Vec::with_capacity(n);
    for k in 0..n {
        let j = &robot.joints[k];
        let axis = robot.joint_axis(k);
        let fixed = super::rpy_to_rotation(&j.rotation_rpy);
        let spin = nalgebra::Rotation3::from_axis_angle(&axis, pose.q[k]).into_inner();
        rotations.push(fixed * spin);
        translations.push(Vector3::from(j.translation));
        axes.push(axis.into_inner());
    }
    FrameChain {
        rotations,
        translations,
        axes,
    }
}

/// Composite subtree inertias, one per link, each in its own link frame.
fn composite_inertias(chain: &FrameChain, standard: &[StandardParams]) -> Vec<Composite> {
    let n = standard.len();
    let mut comp: Vec<Composite> = standard.iter().map(Composite::from_standard).collect();
    for k in (1..n).rev() {
        let lifted = comp[k].to_parent(&chain.rotations[k], &chain.translations[k]);
        comp[k - 1].add(&lifted);
    }
    comp
}

fn diag_from_composites(chain: &FrameChain, comp: &[Composite], rotors: &[f64]) -> DVector<f64> {
    let n = comp.len();
    DVector::from_fn(n, |k, _| {
        let a = &chain.axes[k];
        (a.transpose() * comp[k].i * a)[(0, 0)] + rotors[k]
    })
}

fn standard_all(robot: &RobotDescription, params: &[LinkInertialParams]) -> Vec<StandardParams> {
    (0..params.len())
        .map(|k| to_standard(&params[k], &robot.com_frame_rotation(k)))
        .collect()
}

/// Joint-space mass matrix `M(q)` with reflected rotor inertias on the
/// diagonal. Symmetric by construction.
pub fn mass_matrix(
    robot: &RobotDescription,
    params: &[LinkInertialParams],
    pose: &Pose,
) -> Result<DMatrix<f64>, DynamicsError> {
    check_inputs(robot, params, pose)?;
    let standard = standard_all(robot, params);
    let rotors: Vec<f64> = standard.iter().map(|s| s.rotor).collect();
    Ok(mass_matrix_standard(robot, pose, &standard, &rotors))
}

pub(crate) fn mass_matrix_standard(
    robot: &RobotDescription,
    pose: &Pose,
    standard: &[StandardParams],
    rotors: &[f64],
) -> DMatrix<f64> {
    let n = standard.len();
    let chain = frames(robot, pose);
    let comp = composite_inertias(&chain, standard);
    let mut m = DMatrix::zeros(n, n);
    for k in 0..n {
        let a = &chain.axes[k];
        // Spatial force produced by unit acceleration of joint k, at link k.
        let mut f_ang = comp[k].i * a;
        let mut f_lin = a.cross(&comp[k].h);
        m[(k, k)] = a.dot(&f_ang) + rotors[k];
        let mut j = k;
        while j > 0 {
            let rotated = chain.rotations[j] * f_lin;
            f_ang = chain.rotations[j] * f_ang + chain.translations[j].cross(&rotated);
            f_lin = rotated;
            j -= 1;
            let v = chain.axes[j].dot(&f_ang);
            m[(k, j)] = v;
            m[(j, k)] = v;
        }
    }
    m
}

/// Per-axis apparent inertia `X(q)`: the mass-matrix diagonal including the
/// reflected rotor inertia. Cheaper than the full matrix because only the
/// composite pass is needed.
pub fn apparent_inertia(
    robot: &RobotDescription,
    params: &[LinkInertialParams],
    pose: &Pose,
) -> Result<DVector<f64>, DynamicsError> {
    check_inputs(robot, params, pose)?;
    let standard = standard_all(robot, params);
    let rotors: Vec<f64> = standard.iter().map(|s| s.rotor).collect();
    Ok(apparent_inertia_standard(robot, pose, &standard, &rotors))
}

pub(crate) fn apparent_inertia_standard(
    robot: &RobotDescription,
    pose: &Pose,
    standard: &[StandardParams],
    rotors: &[f64],
) -> DVector<f64> {
    let chain = frames(robot, pose);
    let comp = composite_inertias(&chain, standard);
    diag_from_composites(&chain, &comp, rotors)
}

/// Full regressor `Y(q)`: `n` rows by `11 n` columns, built by evaluating
/// the apparent inertia at unit standard-parameter vectors. Satisfies
/// `Y(q) * vec(params) = apparent_inertia(params, q)` exactly up to
/// floating-point rounding.
pub fn regressor(robot: &RobotDescription, pose: &Pose) -> Result<DMatrix<f64>, DynamicsError> {
    pose.validate(robot)?;
    let n = robot.n_joints();
    let chain = frames(robot, pose);
    let mut y = DMatrix::zeros(n, n * PARAMS_PER_LINK);
    let mut standard = vec![StandardParams::zero(); n];
    for link in 0..n {
        for slot in 0..PARAMS_PER_LINK {
            let col = link * PARAMS_PER_LINK + slot;
            if slot == 10 {
                // Rotor inertia enters only its own axis.
                y[(link, col)] = 1.0;
                continue;
            }
            standard[link] = StandardParams::unit(slot);
            let comp = composite_inertias(&chain, &standard);
            for row in 0..n {
                let a = &chain.axes[row];
                y[(row, col)] = (a.transpose() * comp[row].i * a)[(0, 0)];
            }
            standard[link] = StandardParams::zero();
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{JointDescription, LinkGeometry};
    use approx::assert_relative_eq;

    fn one_dof() -> RobotDescription {
        RobotDescription {
            schema_version: 1,
            joints: vec![JointDescription {
                axis: [0.0, 0.0, 1.0],
                translation: [0.0, 0.0, 0.0],
                rotation_rpy: [0.0, 0.0, 0.0],
            }],
            links: vec![LinkGeometry {
                com_bound: 1.0,
                nominal_rotor_inertia: 0.1,
                com_axis: None,
            }],
            total_mass: 10.0,
        }
    }

    #[test]
    fn point_mass_pendulum() {
        let robot = one_dof();
        let params = vec![LinkInertialParams {
            mass: 2.0,
            com: [0.5, 0.0, 0.0],
            inertia: [0.0; 6],
            rotor_inertia: 0.1,
        }];
        let m = mass_matrix(&robot, &params, &Pose::new(vec![0.7])).unwrap();
        assert_relative_eq!(m[(0, 0)], 0.6, epsilon = 1e-14);
        let x = apparent_inertia(&robot, &params, &Pose::new(vec![-1.2])).unwrap();
        assert_relative_eq!(x[0], 0.6, epsilon = 1e-14);
    }

    #[test]
    fn pure_rotor_inertia_gives_diagonal() {
        let robot = crate::data::bundled_robot();
        let params: Vec<LinkInertialParams> = robot
            .links
            .iter()
            .map(|l| LinkInertialParams {
                rotor_inertia: l.nominal_rotor_inertia,
                ..LinkInertialParams::zero()
            })
            .collect();
        let pose = Pose::new(vec![0.3, -0.8, 1.1, 0.2, -0.5, 2.0]);
        let m = mass_matrix(&robot, &params, &pose).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let expect = if i == j {
                    robot.links[i].nominal_rotor_inertia
                } else {
                    0.0
                };
                assert_relative_eq!(m[(i, j)], expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let robot = one_dof();
        let err = mass_matrix(&robot, &[], &Pose::new(vec![0.0])).unwrap_err();
        assert!(matches!(err, DynamicsError::DimensionMismatch { .. }));
        let params = vec![LinkInertialParams::zero()];
        let err = mass_matrix(&robot, &params, &Pose::new(vec![0.0, 1.0])).unwrap_err();
        assert!(matches!(err, DynamicsError::PoseMismatch { .. }));
    }

    #[test]
    fn regressor_zero_params_zero_inertia() {
        let robot = crate::data::bundled_robot();
        let pose = Pose::new(vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]);
        let y = regressor(&robot, &pose).unwrap();
        let theta = DVector::zeros(66);
        assert_eq!((y * theta).norm(), 0.0);
    }
}
