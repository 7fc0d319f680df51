use super::{certified, check_query, PlanResult, PlannerParams};
use crate::error::Result;
use crate::heuristic::Heuristic;
use crate::kinematics::{JointVector, KinematicModel};
use crate::rng::{self, Rng as PlannerRng};
use crate::tensor::DropoutMode;
use crate::world::{config_in_collision, motion_valid, Workspace};
use web_time::Instant;

/// Greedy shortcutting: from each kept waypoint jump to the farthest later waypoint
/// reachable by a valid straight motion. Edges that cannot be shortcut are kept as is.
pub fn lazy_path_contraction(
    path: &[JointVector],
    ws: &Workspace,
    model: &KinematicModel,
    params: &PlannerParams,
) -> Vec<JointVector> {
    if path.len() <= 2 {
        return path.to_vec();
    }
    let mut out = vec![path[0]];
    let mut i = 0;
    while i + 1 < path.len() {
        let mut next = i + 1;
        for j in (i + 2..path.len()).rev() {
            if motion_valid(ws, model, &path[i], &path[j], &params.motion) {
                next = j;
                break;
            }
        }
        out.push(path[next]);
        i = next;
    }
    out
}

/// One bidirectional sampling pass between `from` and `to`. Samples in collision are
/// dropped; edges between consecutive samples of one side are not checked here.
fn bidirectional_pass(
    from: &JointVector,
    to: &JointVector,
    ws: &Workspace,
    model: &KinematicModel,
    heuristic: &Heuristic,
    params: &PlannerParams,
    rng: &mut PlannerRng,
    calls: &mut usize,
) -> Result<Option<Vec<JointVector>>> {
    let mut a = vec![*from];
    let mut b = vec![*to];
    let mut a_is_start = true;
    for _ in 0..params.neural_steps {
        let qa = *a.last().expect("nonempty");
        let qb = *b.last().expect("nonempty");
        *calls += 1;
        let q_new = heuristic.propose(&qa, &qb, ws, model, DropoutMode::Sample, rng)?;
        if !config_in_collision(ws, model, &q_new) {
            a.push(q_new);
            if motion_valid(ws, model, &q_new, &qb, &params.motion) {
                b.reverse();
                a.extend(b);
                if !a_is_start {
                    a.reverse();
                }
                return Ok(Some(a));
            }
        }
        std::mem::swap(&mut a, &mut b);
        a_is_start = !a_is_start;
    }
    Ok(None)
}

fn repair(
    path: &[JointVector],
    ws: &Workspace,
    model: &KinematicModel,
    heuristic: &Heuristic,
    params: &PlannerParams,
    rng: &mut PlannerRng,
    calls: &mut usize,
) -> Result<Option<Vec<JointVector>>> {
    let mut current = path.to_vec();
    for _ in 0..params.replanning_attempts {
        let mut next = vec![current[0]];
        for w in current.windows(2) {
            if motion_valid(ws, model, &w[0], &w[1], &params.motion.half()) {
                next.push(w[1]);
                continue;
            }
            match bidirectional_pass(&w[0], &w[1], ws, model, heuristic, params, rng, calls)? {
                Some(segment) => next.extend_from_slice(&segment[1..]),
                None => next.push(w[1]),
            }
        }
        current = lazy_path_contraction(&next, ws, model, params);
        if certified(ws, model, &current, params) {
            return Ok(Some(current));
        }
    }
    Ok(None)
}

/// Repairs each invalid edge of `path` with fresh bidirectional sampling passes, for up
/// to `replanning_attempts` rounds. A valid path is returned unchanged; `None` means the
/// repair failed.
pub fn neural_replan(
    path: &[JointVector],
    ws: &Workspace,
    model: &KinematicModel,
    heuristic: &Heuristic,
    params: &PlannerParams,
) -> Result<Option<Vec<JointVector>>> {
    if path.is_empty() {
        return Ok(None);
    }
    if certified(ws, model, path, params) {
        return Ok(Some(path.to_vec()));
    }
    if config_in_collision(ws, model, &path[0])
        || config_in_collision(ws, model, &path[path.len() - 1])
    {
        return Ok(None);
    }
    let mut rng = rng::seeded(rng::derive_named(params.seed, "replan"));
    let mut calls = 0;
    repair(path, ws, model, heuristic, params, &mut rng, &mut calls)
}

/// Bidirectional planning with the learned heuristic: alternate growing a start-side
/// and a goal-side waypoint list toward each other's frontier, then contract the path,
/// check it in full and repair colliding edges.
pub fn neural_plan(
    ws: &Workspace,
    model: &KinematicModel,
    start: &JointVector,
    goal: &JointVector,
    heuristic: &Heuristic,
    params: &PlannerParams,
) -> Result<PlanResult> {
    check_query(ws, model, start, goal, params)?;
    let started = Instant::now();
    let mut rng = rng::seeded(params.seed);
    let mut calls = 0;
    let Some(raw) = bidirectional_pass(
        start, goal, ws, model, heuristic, params, &mut rng, &mut calls,
    )?
    else {
        return Ok(PlanResult::failed(calls, started));
    };
    let path = lazy_path_contraction(&raw, ws, model, params);
    if certified(ws, model, &path, params) {
        return Ok(PlanResult::found(path, calls, started));
    }
    match repair(&path, ws, model, heuristic, params, &mut rng, &mut calls)? {
        Some(p) => Ok(PlanResult::found(p, calls, started)),
        None => Ok(PlanResult::failed(calls, started)),
    }
}
