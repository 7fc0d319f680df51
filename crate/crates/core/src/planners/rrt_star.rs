use rand::Rng;
use rand_distr::StandardNormal;

use super::tree::Tree;
use super::{certified, check_query, Budget, PlanResult, PlannerParams};
use crate::error::Result;
use crate::kinematics::{JointVector, KinematicModel, DOF};
use crate::rng;
use crate::world::{config_in_collision, motion_valid, Workspace};

/// Expected neighbor count inside the near ball when the tree has `CALIBRATION_N` vertices.
const CALIBRATION_NEIGHBORS: f64 = 15.0;
const CALIBRATION_N: f64 = 2000.0;

/// Volume of the unit ball in six dimensions, π³/6.
const UNIT_BALL_VOLUME: f64 =
    std::f64::consts::PI * std::f64::consts::PI * std::f64::consts::PI / 6.0;

/// Near-radius constant such that a uniformly filled joint box holds on average
/// fifteen vertices within the near radius at two thousand vertices.
pub fn default_gamma(model: &KinematicModel) -> f64 {
    let d = DOF as f64;
    let ball = CALIBRATION_NEIGHBORS * model.config_volume() / (CALIBRATION_N * UNIT_BALL_VOLUME);
    let r = ball.powf(1.0 / d);
    r / ((CALIBRATION_N.ln() / CALIBRATION_N).powf(1.0 / d))
}

/// `γ (ln n / n)^(1/6)` for a tree of `n` vertices.
pub fn near_radius(gamma: f64, n: usize) -> f64 {
    let n = n.max(2) as f64;
    gamma * (n.ln() / n).powf(1.0 / DOF as f64)
}

/// Uniform samples from the prolate hyperspheroid of configurations whose summed
/// distance to `start` and `goal` is at most `c_best`.
#[derive(Debug, Clone)]
pub struct InformedSampler {
    start: JointVector,
    goal: JointVector,
    center: [f64; DOF],
    /// Unit vector from start to goal; the rotation is the Householder reflection
    /// taking the first axis onto it.
    axis: [f64; DOF],
    c_min: f64,
}

impl InformedSampler {
    pub fn new(start: &JointVector, goal: &JointVector) -> Self {
        let c_min = start.distance(goal);
        let center = std::array::from_fn(|i| 0.5 * (start[i] + goal[i]));
        let axis = if c_min > 0.0 {
            std::array::from_fn(|i| (goal[i] - start[i]) / c_min)
        } else {
            std::array::from_fn(|i| if i == 0 { 1.0 } else { 0.0 })
        };
        Self {
            start: *start,
            goal: *goal,
            center,
            axis,
            c_min,
        }
    }

    pub fn c_min(&self) -> f64 {
        self.c_min
    }

    pub fn in_informed_set(&self, q: &JointVector, c_best: f64) -> bool {
        q.distance(&self.start) + q.distance(&self.goal) <= c_best + 1e-9
    }

    /// One draw from the informed set; `None` if the draw leaves the joint limits or
    /// the set by round-off.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        c_best: f64,
        model: &KinematicModel,
        rng: &mut R,
    ) -> Option<JointVector> {
        let mut x: [f64; DOF] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return None;
        }
        let radius = rng.random::<f64>().powf(1.0 / DOF as f64) / norm;
        x.iter_mut().for_each(|v| *v *= radius);
        let r1 = 0.5 * c_best;
        let r2 = 0.5 * (c_best * c_best - self.c_min * self.c_min).max(0.0).sqrt();
        x[0] *= r1;
        x[1..].iter_mut().for_each(|v| *v *= r2);
        // Householder reflection H = I − 2uuᵀ with u ∝ e₁ − axis maps e₁ to axis.
        let mut u = self.axis.map(|a| -a);
        u[0] += 1.0;
        let un = u.iter().map(|v| v * v).sum::<f64>();
        let y: [f64; DOF] = if un < 1e-24 {
            x
        } else {
            let dot = u.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
            std::array::from_fn(|i| x[i] - 2.0 * dot / un * u[i])
        };
        let q = JointVector(std::array::from_fn(|i| y[i] + self.center[i]));
        (model.within_limits(&q) && self.in_informed_set(&q, c_best)).then_some(q)
    }
}

/// Best-cost history and informed samples recorded by a run, for inspection.
#[derive(Debug, Clone, Default)]
pub struct RrtStarTrace {
    /// `(iteration, best cost)` whenever the best cost improves.
    pub improvements: Vec<(usize, f64)>,
    /// Informed samples paired with the best cost in force when each was drawn.
    pub informed_samples: Vec<(JointVector, f64)>,
}

fn choose_parent(
    tree: &Tree,
    q: &JointVector,
    near: &[usize],
    fallback: Option<usize>,
    ws: &Workspace,
    model: &KinematicModel,
    params: &PlannerParams,
) -> Option<usize> {
    let mut candidates: Vec<(f64, usize)> = near
        .iter()
        .map(|&i| (tree.cost(i) + tree.vertex(i).distance(q), i))
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    for (_, i) in candidates {
        if Some(i) == fallback || motion_valid(ws, model, tree.vertex(i), q, &params.motion) {
            return Some(i);
        }
    }
    fallback
}

fn run(
    ws: &Workspace,
    model: &KinematicModel,
    start: &JointVector,
    goal: &JointVector,
    params: &PlannerParams,
    informed: bool,
    mut trace: Option<&mut RrtStarTrace>,
) -> Result<PlanResult> {
    check_query(ws, model, start, goal, params)?;
    let budget = Budget::new(params);
    let mut rng = rng::seeded(params.seed);
    let gamma = params.gamma.unwrap_or_else(|| default_gamma(model));
    let sampler = InformedSampler::new(start, goal);
    let mut tree = Tree::new(*start);
    let mut goal_vertex: Option<usize> = None;
    let mut best = f64::INFINITY;
    // Best tree path that also passed certification; `best` may be lower.
    let mut best_path: Option<Vec<JointVector>> = None;
    let mut it = 0;
    while !budget.exhausted(it) {
        it += 1;
        let target = if informed && goal_vertex.is_some() {
            match sampler.sample(best, model, &mut rng) {
                Some(q) => {
                    if let Some(t) = trace.as_deref_mut() {
                        t.informed_samples.push((q, best));
                    }
                    q
                }
                None => continue,
            }
        } else if goal_vertex.is_none() && rng.random::<f64>() < params.goal_bias {
            *goal
        } else {
            model.sample_uniform(&mut rng)
        };
        let nearest = tree.nearest(&target);
        let from = *tree.vertex(nearest);
        let new = from.steer(&target, params.step_size);
        if new == from || config_in_collision(ws, model, &new) {
            continue;
        }
        if !motion_valid(ws, model, &from, &new, &params.motion) {
            continue;
        }
        let radius = near_radius(gamma, tree.len() + 1).max(params.step_size);
        let near = tree.near(&new, radius);
        let parent = choose_parent(&tree, &new, &near, Some(nearest), ws, model, params)
            .expect("nearest vertex is a valid parent");
        let id = tree.add(new, parent);
        for &i in &near {
            if i == parent || Some(i) == tree.parent(id) {
                continue;
            }
            let through = tree.cost(id) + new.distance(tree.vertex(i));
            if through + 1e-12 < tree.cost(i)
                && tree.parent(i).is_some()
                && motion_valid(ws, model, &new, tree.vertex(i), &params.motion)
            {
                tree.rewire(i, id);
            }
        }
        if goal_vertex.is_none() && new.distance(goal) <= radius {
            if new == *goal {
                goal_vertex = Some(id);
            } else {
                let near_goal = tree.near(goal, radius);
                if let Some(p) = choose_parent(&tree, goal, &near_goal, None, ws, model, params) {
                    goal_vertex = Some(tree.add(*goal, p));
                }
            }
        }
        if let Some(g) = goal_vertex {
            let c = tree.cost(g);
            if c < best {
                best = c;
                let path = tree.path_to(g);
                if certified(ws, model, &path, params) {
                    best_path = Some(path);
                    if let Some(t) = trace.as_deref_mut() {
                        t.improvements.push((it, c));
                    }
                }
            }
        }
    }
    match best_path {
        Some(path) => Ok(PlanResult::found(path, it, budget.started())),
        None => Ok(PlanResult::failed(it, budget.started())),
    }
}

/// Asymptotically optimal RRT with choose-parent and rewiring. Anytime: returns the
/// best path found when the budget runs out.
pub fn rrt_star_plan(
    ws: &Workspace,
    model: &KinematicModel,
    start: &JointVector,
    goal: &JointVector,
    params: &PlannerParams,
) -> Result<PlanResult> {
    run(ws, model, start, goal, params, false, None)
}

/// RRT* that, once a solution exists, samples only the informed set of the current best cost.
/// Pass `trace` to record cost improvements and informed samples.
pub fn informed_rrt_star_plan(
    ws: &Workspace,
    model: &KinematicModel,
    start: &JointVector,
    goal: &JointVector,
    params: &PlannerParams,
    trace: Option<&mut RrtStarTrace>,
) -> Result<PlanResult> {
    run(ws, model, start, goal, params, true, trace)
}
