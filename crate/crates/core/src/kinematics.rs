//! Forward kinematics of a six-joint serial arm described by standard
//! Denavit–Hartenberg parameters.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Index, IndexMut};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats;
use crate::geom::{self, Mat3, Point3};

pub const DOF: usize = 6;

const DEFAULT_ROBOT: &str = include_str!("../data/ur5e.json");

/// One row of a standard DH table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DhRow {
    pub a: f64,
    pub alpha: f64,
    pub d: f64,
    pub theta_offset: f64,
}

impl DhRow {
    /// Distance between consecutive frame origins, which does not depend on the joint angle.
    pub fn link_length(&self) -> f64 {
        self.a.hypot(self.d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasePose {
    pub translation: Point3,
    pub rpy: Point3,
}

impl Default for BasePose {
    fn default() -> Self {
        Self {
            translation: [0.0; 3],
            rpy: [0.0; 3],
        }
    }
}

/// A configuration: six joint angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointVector(pub [f64; DOF]);

impl JointVector {
    pub const ZERO: JointVector = JointVector([0.0; DOF]);

    pub fn new(q: [f64; DOF]) -> Self {
        Self(q)
    }

    pub fn as_array(&self) -> &[f64; DOF] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn distance(&self, other: &JointVector) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.distance(&JointVector::ZERO)
    }

    /// `self + t (other - self)`.
    pub fn lerp(&self, other: &JointVector, t: f64) -> JointVector {
        let mut out = [0.0; DOF];
        for (k, v) in out.iter_mut().enumerate() {
            *v = self.0[k] + t * (other.0[k] - self.0[k]);
        }
        JointVector(out)
    }

    /// Moves from `self` toward `target` by at most `max_step` (joint-space L2).
    pub fn steer(&self, target: &JointVector, max_step: f64) -> JointVector {
        let d = self.distance(target);
        if d <= max_step {
            *target
        } else {
            self.lerp(target, max_step / d)
        }
    }
}

impl Index<usize> for JointVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for JointVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl fmt::Display for JointVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v:.4}")?;
        }
        write!(f, ")")
    }
}

/// Frame origins of the chain: the base followed by the origin of every joint frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSet {
    pub positions: [Point3; DOF + 1],
}

/// A link capsule: segment endpoints and radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capsule {
    pub a: Point3,
    pub b: Point3,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KinematicModel {
    pub name: String,
    pub dh: [DhRow; DOF],
    pub joint_limits: [(f64, f64); DOF],
    pub link_radii: [f64; DOF],
    #[serde(default)]
    pub base_pose: BasePose,
}

impl KinematicModel {
    /// The bundled UR5e-like model.
    pub fn ur5e() -> Self {
        formats::parse_robot(DEFAULT_ROBOT, None).expect("bundled robot file is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        formats::load_robot(path)
    }

    pub fn validate(&self) -> Result<()> {
        for row in &self.dh {
            if ![row.a, row.alpha, row.d, row.theta_offset]
                .iter()
                .all(|v| v.is_finite())
            {
                return Err(Error::invalid("DH row contains a non-finite value"));
            }
        }
        for (k, (lo, hi)) in self.joint_limits.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(format!(
                    "joint {k} limits must satisfy lo < hi"
                )));
            }
        }
        if !self.link_radii.iter().all(|r| r.is_finite() && *r > 0.0) {
            return Err(Error::invalid("link radii must be positive"));
        }
        let b = &self.base_pose;
        if !b
            .translation
            .iter()
            .chain(b.rpy.iter())
            .all(|v| v.is_finite())
        {
            return Err(Error::invalid("base pose must be finite"));
        }
        Ok(())
    }

    pub fn link_lengths(&self) -> [f64; DOF] {
        self.dh.map(|row| row.link_length())
    }

    /// Radius of a sphere around the base origin containing every frame origin.
    pub fn reach(&self) -> f64 {
        self.link_lengths().iter().sum()
    }

    pub fn within_limits(&self, q: &JointVector) -> bool {
        q.0.iter()
            .zip(self.joint_limits.iter())
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    pub fn clamp(&self, q: &JointVector) -> JointVector {
        let mut out = *q;
        for (v, (lo, hi)) in out.0.iter_mut().zip(self.joint_limits.iter()) {
            *v = v.clamp(*lo, *hi);
        }
        out
    }

    /// Uniform sample from the joint-limit box.
    pub fn sample_uniform<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> JointVector {
        JointVector(std::array::from_fn(|i| {
            let (lo, hi) = self.joint_limits[i];
            rng.random_range(lo..=hi)
        }))
    }

    /// Product of the joint ranges.
    pub fn config_volume(&self) -> f64 {
        self.joint_limits.iter().map(|(lo, hi)| hi - lo).product()
    }

    /// Largest absolute joint limit, used to normalize angles. Equals π for the default limits.
    pub fn angle_scale(&self) -> f64 {
        self.joint_limits
            .iter()
            .map(|(lo, hi)| lo.abs().max(hi.abs()))
            .fold(0.0, f64::max)
            .max(PI)
    }
}

impl Default for KinematicModel {
    fn default() -> Self {
        Self::ur5e()
    }
}

fn check_finite(q: &JointVector) -> Result<()> {
    if q.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "configuration is not finite: {q:?}"
        )))
    }
}

/// Composes the DH transforms and returns every frame origin.
pub fn forward_kinematics(model: &KinematicModel, q: &JointVector) -> Result<FrameSet> {
    check_finite(q)?;
    let mut rot: Mat3 = geom::rpy_to_mat(model.base_pose.rpy);
    let mut pos: Point3 = model.base_pose.translation;
    let mut positions = [[0.0; 3]; DOF + 1];
    positions[0] = pos;
    for (k, row) in model.dh.iter().enumerate() {
        let (st, ct) = (q.0[k] + row.theta_offset).sin_cos();
        let (sa, ca) = row.alpha.sin_cos();
        let local_rot = [
            [ct, -st * ca, st * sa],
            [st, ct * ca, -ct * sa],
            [0.0, sa, ca],
        ];
        let local_pos = [row.a * ct, row.a * st, row.d];
        pos = geom::add(pos, geom::mat_vec(&rot, local_pos));
        rot = geom::mat_mul(&rot, &local_rot);
        positions[k + 1] = pos;
    }
    Ok(FrameSet { positions })
}

/// Cartesian position of every joint node (frame origins 1..=6).
pub fn joint_positions(model: &KinematicModel, q: &JointVector) -> Result<[Point3; DOF]> {
    let frames = forward_kinematics(model, q)?;
    let mut out = [[0.0; 3]; DOF];
    out.copy_from_slice(&frames.positions[1..]);
    Ok(out)
}

pub fn link_segments(model: &KinematicModel, q: &JointVector) -> Result<[Capsule; DOF]> {
    let frames = forward_kinematics(model, q)?;
    Ok(capsules_from_frames(model, &frames))
}

pub(crate) fn capsules_from_frames(model: &KinematicModel, frames: &FrameSet) -> [Capsule; DOF] {
    std::array::from_fn(|k| Capsule {
        a: frames.positions[k],
        b: frames.positions[k + 1],
        radius: model.link_radii[k],
    })
}
