use rand::Rng;

use super::tree::Tree;
use super::{certified, check_query, Budget, PlanResult, PlannerParams};
use crate::error::Result;
use crate::kinematics::{JointVector, KinematicModel};
use crate::rng;
use crate::world::{config_in_collision, motion_valid, Workspace};

/// Steers from the nearest tree vertex toward `target`; returns the new vertex on success.
fn extend(
    tree: &mut Tree,
    target: &JointVector,
    ws: &Workspace,
    model: &KinematicModel,
    params: &PlannerParams,
) -> Option<usize> {
    let near = tree.nearest(target);
    let from = *tree.vertex(near);
    let new = from.steer(target, params.step_size);
    if new == from || config_in_collision(ws, model, &new) {
        return None;
    }
    if !motion_valid(ws, model, &from, &new, &params.motion) {
        return None;
    }
    Some(tree.add(new, near))
}

/// Goal-biased RRT.
pub fn rrt_plan(
    ws: &Workspace,
    model: &KinematicModel,
    start: &JointVector,
    goal: &JointVector,
    params: &PlannerParams,
) -> Result<PlanResult> {
    check_query(ws, model, start, goal, params)?;
    let budget = Budget::new(params);
    let mut rng = rng::seeded(params.seed);
    let mut tree = Tree::new(*start);
    let mut it = 0;
    while !budget.exhausted(it) {
        it += 1;
        let target = if rng.random::<f64>() < params.goal_bias {
            *goal
        } else {
            model.sample_uniform(&mut rng)
        };
        let Some(new) = extend(&mut tree, &target, ws, model, params) else {
            continue;
        };
        let q = *tree.vertex(new);
        if q.distance(goal) <= params.step_size && motion_valid(ws, model, &q, goal, &params.motion)
        {
            let mut path = tree.path_to(new);
            if q != *goal {
                path.push(*goal);
            }
            if !certified(ws, model, &path, params) {
                continue;
            }
            return Ok(PlanResult::found(path, it, budget.started()));
        }
    }
    Ok(PlanResult::failed(it, budget.started()))
}

enum Connect {
    Reached(usize),
    Stopped,
}

/// Repeatedly extends `tree` toward `target` until it is reached or blocked.
fn connect(
    tree: &mut Tree,
    target: &JointVector,
    ws: &Workspace,
    model: &KinematicModel,
    params: &PlannerParams,
) -> Connect {
    loop {
        let Some(new) = extend(tree, target, ws, model, params) else {
            return Connect::Stopped;
        };
        if tree.vertex(new) == target {
            return Connect::Reached(new);
        }
    }
}

/// Bidirectional RRT in the connect style: one tree extends toward a random
/// sample, the other greedily connects to the new vertex, then the trees swap.
pub fn birrt_plan(
    ws: &Workspace,
    model: &KinematicModel,
    start: &JointVector,
    goal: &JointVector,
    params: &PlannerParams,
) -> Result<PlanResult> {
    check_query(ws, model, start, goal, params)?;
    let budget = Budget::new(params);
    let mut rng = rng::seeded(params.seed);
    let mut a = Tree::new(*start);
    let mut b = Tree::new(*goal);
    // `a` holds the start tree when `forward` is true.
    let mut forward = true;
    let mut it = 0;
    while !budget.exhausted(it) {
        it += 1;
        let target = model.sample_uniform(&mut rng);
        if let Some(new) = extend(&mut a, &target, ws, model, params) {
            let q = *a.vertex(new);
            if let Connect::Reached(meet) = connect(&mut b, &q, ws, model, params) {
                let mut path = a.path_to(new);
                let mut rest = b.path_to(meet);
                rest.pop();
                rest.reverse();
                path.extend(rest);
                if !forward {
                    path.reverse();
                }
                if certified(ws, model, &path, params) {
                    return Ok(PlanResult::found(path, it, budget.started()));
                }
            }
        }
        std::mem::swap(&mut a, &mut b);
        forward = !forward;
    }
    Ok(PlanResult::failed(it, budget.started()))
}
