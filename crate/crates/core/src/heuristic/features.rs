use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Point3};
use crate::kinematics::{JointVector, DOF};

/// Per-node feature width with Cartesian joint positions.
pub const FULL_WIDTH: usize = 13;
/// Per-node feature width from joint angles alone.
pub const RELAXED_WIDTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    /// `[x_t, x_goal, |x_goal - x_t|, ‖x_goal - x_t‖, q_t, q_goal, |q_t - q_goal|]`
    Full,
    /// `[q_t, q_goal, |q_t - q_goal|]`, no forward kinematics needed.
    RelaxedFk,
}

impl FeatureMode {
    pub fn width(self) -> usize {
        match self {
            FeatureMode::Full => FULL_WIDTH,
            FeatureMode::RelaxedFk => RELAXED_WIDTH,
        }
    }

    pub fn needs_kinematics(self) -> bool {
        self == FeatureMode::Full
    }
}

/// Row-major `DOF × width` node features.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeFeatureMatrix {
    mode: FeatureMode,
    values: Vec<f64>,
}

impl NodeFeatureMatrix {
    pub fn mode(&self) -> FeatureMode {
        self.mode
    }

    pub fn width(&self) -> usize {
        self.mode.width()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.values[i * w..(i + 1) * w]
    }

    /// All node rows concatenated in joint order.
    pub fn flat(&self) -> &[f64] {
        &self.values
    }
}

/// Normalization applied to raw features: angles are divided by `angle_scale`,
/// positions are shifted by `center` and divided by `position_scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureScales {
    pub angle_scale: f64,
    pub center: Point3,
    pub position_scale: f64,
}

/// Builds node features. `positions` holds the joint positions of `(q_t, q_goal)` and is
/// required in [`FeatureMode::Full`].
pub fn node_features(
    mode: FeatureMode,
    q_t: &JointVector,
    q_goal: &JointVector,
    positions: Option<(&[Point3; DOF], &[Point3; DOF])>,
    scales: &FeatureScales,
) -> Result<NodeFeatureMatrix> {
    if !q_t.is_finite() || !q_goal.is_finite() {
        return Err(Error::invalid("node features need finite joint angles"));
    }
    let w = mode.width();
    let mut values = Vec::with_capacity(DOF * w);
    let norm = |p: Point3| geom::scale(geom::sub(p, scales.center), 1.0 / scales.position_scale);
    for i in 0..DOF {
        let qt = q_t[i] / scales.angle_scale;
        let qg = q_goal[i] / scales.angle_scale;
        if mode == FeatureMode::Full {
            let Some((xt, xg)) = positions else {
                return Err(Error::invalid("full feature mode needs joint positions"));
            };
            let (xt, xg) = (norm(xt[i]), norm(xg[i]));
            if !xt.iter().chain(xg.iter()).all(|v| v.is_finite()) {
                return Err(Error::invalid("joint positions must be finite"));
            }
            let diff = geom::sub(xg, xt);
            values.extend_from_slice(&xt);
            values.extend_from_slice(&xg);
            values.extend(diff.iter().map(|d| d.abs()));
            values.push(geom::norm(diff));
        }
        values.extend_from_slice(&[qt, qg, (qt - qg).abs()]);
    }
    Ok(NodeFeatureMatrix { mode, values })
}
