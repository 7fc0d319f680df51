#![allow(dead_code)]

pub mod fd;
pub mod oracle;

use armplan_core::kinematics::{JointVector, KinematicModel};
use armplan_core::planners::PlanResult;
use armplan_core::world::{
    config_in_collision, motion_valid, BoxObstacle, MotionCheckParams, Profile, Workspace,
};
use rand::Rng;

/// Three boxes around the arm, leaving most of the workspace free.
pub fn simple_world() -> Workspace {
    Workspace::with_obstacles(
        Profile::Simple,
        vec![
            BoxObstacle::new([0.55, 0.25, 0.35], [0.2, 0.2, 0.25]).unwrap(),
            BoxObstacle::new([-0.45, 0.45, 0.5], [0.15, 0.25, 0.2]).unwrap(),
            BoxObstacle::new([0.1, -0.6, 0.2], [0.25, 0.15, 0.3]).unwrap(),
        ],
    )
    .unwrap()
}

/// A square ring of thin boxes in the `y = 0` plane around the shoulder. With the base
/// joint at zero the upper arm lies in that plane and always crosses the ring, so no
/// motion can move the base joint from negative to positive.
pub fn ring_world() -> Workspace {
    let (cx, cz) = (0.0, 0.1625);
    let (inner, outer, t) = (0.25, 0.5, 0.05);
    let bar = (outer - inner) / 2.0;
    let mid = (outer + inner) / 2.0;
    let boxes = vec![
        BoxObstacle::new([cx, 0.0, cz + mid], [2.0 * outer, 2.0 * t, 2.0 * bar]).unwrap(),
        BoxObstacle::new([cx, 0.0, cz - mid], [2.0 * outer, 2.0 * t, 2.0 * bar]).unwrap(),
        BoxObstacle::new([cx + mid, 0.0, cz], [2.0 * bar, 2.0 * t, 2.0 * outer]).unwrap(),
        BoxObstacle::new([cx - mid, 0.0, cz], [2.0 * bar, 2.0 * t, 2.0 * outer]).unwrap(),
    ];
    Workspace::with_obstacles(Profile::Simple, boxes).unwrap()
}

pub fn free_config<R: Rng>(ws: &Workspace, model: &KinematicModel, rng: &mut R) -> JointVector {
    loop {
        let q = model.sample_uniform(rng);
        if !config_in_collision(ws, model, &q) {
            return q;
        }
    }
}

/// Start/goal pair, both free, at joint-space distance within `[lo, hi]`.
pub fn free_query<R: Rng>(
    ws: &Workspace,
    model: &KinematicModel,
    rng: &mut R,
    lo: f64,
    hi: f64,
) -> (JointVector, JointVector) {
    loop {
        let a = free_config(ws, model, rng);
        let b = free_config(ws, model, rng);
        let d = a.distance(&b);
        if d >= lo && d <= hi {
            return (a, b);
        }
    }
}

/// Checks the result contract; successful paths are re-swept at half the checking step.
pub fn assert_contract(
    r: &PlanResult,
    ws: &Workspace,
    model: &KinematicModel,
    start: &JointVector,
    goal: &JointVector,
) {
    if !r.success {
        assert!(r.path.is_empty());
        assert!(r.cost.is_infinite());
        return;
    }
    assert!(r.path.len() >= 2 || start == goal);
    assert!(r.path[0].distance(start) <= 1e-9);
    assert!(r.path[r.path.len() - 1].distance(goal) <= 1e-9);
    let fine = MotionCheckParams::default().half();
    for w in r.path.windows(2) {
        assert!(
            motion_valid(ws, model, &w[0], &w[1], &fine),
            "invalid edge {} -> {}",
            w[0],
            w[1]
        );
    }
    let cost: f64 = r.path.windows(2).map(|w| w[0].distance(&w[1])).sum();
    assert!((cost - r.cost).abs() < 1e-9);
}

/// Free start/goal in [`ring_world`] differing only in the base joint, at ∓1.2 rad.
pub fn ring_query(model: &KinematicModel) -> (JointVector, JointVector) {
    let ws = ring_world();
    let mut rng = armplan_core::rng::seeded(0);
    loop {
        let mut s = model.sample_uniform(&mut rng);
        s[0] = -1.2;
        let mut g = s;
        g[0] = 1.2;
        if !config_in_collision(&ws, model, &s) && !config_in_collision(&ws, model, &g) {
            return (s, g);
        }
    }
}
