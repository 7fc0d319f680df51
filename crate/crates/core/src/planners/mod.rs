//! Sampling-based planners over the joint space and the learned bidirectional planner.

mod neural;
mod rrt;
mod rrt_star;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::error::{Error, Result};
use crate::kinematics::{JointVector, KinematicModel};
use crate::world::{config_in_collision, path_valid, MotionCheckParams, Workspace};

pub use neural::{lazy_path_contraction, neural_plan, neural_replan};
pub use rrt::{birrt_plan, rrt_plan};
pub use rrt_star::{
    default_gamma, informed_rrt_star_plan, near_radius, rrt_star_plan, InformedSampler,
    RrtStarTrace,
};
pub use tree::Tree;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerParams {
    /// Iteration cap for the classical planners.
    pub max_iterations: usize,
    /// Steering step in radians.
    pub step_size: f64,
    pub goal_bias: f64,
    /// Wall-clock cap in seconds; `None` runs until `max_iterations`.
    pub time_budget: Option<f64>,
    /// Loop bound of one bidirectional neural sampling pass.
    pub neural_steps: usize,
    pub replanning_attempts: usize,
    /// Near-radius constant for RRT*; `None` derives it from the joint ranges.
    pub gamma: Option<f64>,
    pub motion: MotionCheckParams,
    pub seed: u64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            step_size: 0.3,
            goal_bias: 0.05,
            time_budget: None,
            neural_steps: 50,
            replanning_attempts: 5,
            gamma: None,
            motion: MotionCheckParams::default(),
            seed: 0,
        }
    }
}

impl PlannerParams {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::invalid("step_size must be positive"));
        }
        if !(0.0..=1.0).contains(&self.goal_bias) {
            return Err(Error::invalid("goal_bias must lie in [0, 1]"));
        }
        if let Some(t) = self.time_budget {
            if !(t >= 0.0) {
                return Err(Error::invalid("time_budget must be nonnegative"));
            }
        }
        if let Some(g) = self.gamma {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::invalid("gamma must be positive"));
            }
        }
        MotionCheckParams::new(self.motion.step).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    /// Waypoints from start to goal; empty on failure.
    pub path: Vec<JointVector>,
    pub success: bool,
    /// Seconds.
    pub wall_time: f64,
    /// Path cost in radians, infinite on failure.
    pub cost: f64,
    pub iterations: usize,
}

impl PlanResult {
    pub(crate) fn found(path: Vec<JointVector>, iterations: usize, started: Instant) -> Self {
        let cost = path_cost(&path).unwrap_or(f64::INFINITY);
        Self {
            path,
            success: true,
            wall_time: started.elapsed().as_secs_f64(),
            cost,
            iterations,
        }
    }

    pub(crate) fn failed(iterations: usize, started: Instant) -> Self {
        Self {
            path: Vec::new(),
            success: false,
            wall_time: started.elapsed().as_secs_f64(),
            cost: f64::INFINITY,
            iterations,
        }
    }
}

/// Sum of joint-space distances between consecutive waypoints.
pub fn path_cost(path: &[JointVector]) -> Result<f64> {
    if path.is_empty() {
        return Err(Error::invalid("path cost of an empty path"));
    }
    Ok(path.windows(2).map(|w| w[0].distance(&w[1])).sum())
}

/// Planner identifiers as used on the command line and in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerKind {
    Rrt,
    Birrt,
    RrtStar,
    InformedRrtStar,
    Neural,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 5] = [
        PlannerKind::Rrt,
        PlannerKind::Birrt,
        PlannerKind::RrtStar,
        PlannerKind::InformedRrtStar,
        PlannerKind::Neural,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PlannerKind::Rrt => "rrt",
            PlannerKind::Birrt => "birrt",
            PlannerKind::RrtStar => "rrt_star",
            PlannerKind::InformedRrtStar => "informed_rrt_star",
            PlannerKind::Neural => "neural",
        }
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlannerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PlannerKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown planner {s:?}")))
    }
}

pub(crate) fn check_query(
    ws: &Workspace,
    model: &KinematicModel,
    start: &JointVector,
    goal: &JointVector,
    params: &PlannerParams,
) -> Result<()> {
    params.validate()?;
    for (name, q) in [("start", start), ("goal", goal)] {
        if !q.is_finite() || !model.within_limits(q) {
            return Err(Error::InvalidQuery(format!(
                "{name} {q} is outside the joint limits"
            )));
        }
        if config_in_collision(ws, model, q) {
            return Err(Error::InvalidQuery(format!("{name} {q} is in collision")));
        }
    }
    Ok(())
}

/// Every path a planner returns must also pass the motion check at half the step.
/// Candidates failing it are not returned.
pub(crate) fn certified(
    ws: &Workspace,
    model: &KinematicModel,
    path: &[JointVector],
    params: &PlannerParams,
) -> bool {
    path_valid(ws, model, path, &params.motion.half())
}

/// Stops a planner on either the iteration cap or the wall-clock budget.
pub(crate) struct Budget {
    started: Instant,
    max_iterations: usize,
    time_budget: Option<f64>,
}

impl Budget {
    pub(crate) fn new(params: &PlannerParams) -> Self {
        Self {
            started: Instant::now(),
            max_iterations: params.max_iterations,
            time_budget: params.time_budget,
        }
    }

    pub(crate) fn started(&self) -> Instant {
        self.started
    }

    pub(crate) fn exhausted(&self, iteration: usize) -> bool {
        iteration >= self.max_iterations
            || self
                .time_budget
                .is_some_and(|t| self.started.elapsed().as_secs_f64() >= t)
    }
}
