use armplan_core::dataset::{generate_world, sample_query, QueryKind};
use armplan_core::formats::{self, WORKSPACE_FORMAT};
use armplan_core::heuristic::Heuristic;
use armplan_core::kinematics::{forward_kinematics, JointVector, KinematicModel};
use armplan_core::planners::{
    birrt_plan, informed_rrt_star_plan, neural_plan, rrt_plan, rrt_star_plan, PlannerKind,
    PlannerParams,
};
use armplan_core::rng::{self, derive_named};
use armplan_core::world::{Profile, Workspace};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct PlanOutput {
    pub planner: String,
    pub success: bool,
    pub cost: Option<f64>,
    pub iterations: usize,
    pub wall_time: f64,
    pub start: JointVector,
    pub goal: JointVector,
    pub path: Vec<JointVector>,
    /// Frame origins for every waypoint, for drawing.
    pub frames: Vec<Vec<[f64; 3]>>,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

pub fn random_world(profile: &str, seed: u64) -> Result<String, String> {
    let profile: Profile = profile.parse().map_err(err)?;
    let mut ws = generate_world(profile, &KinematicModel::ur5e(), &mut rng::seeded(seed));
    ws.id = format!("{profile}-{seed}");
    formats::to_string(WORKSPACE_FORMAT, &ws).map_err(err)
}

fn frames(model: &KinematicModel, q: &JointVector) -> Result<Vec<[f64; 3]>, String> {
    Ok(forward_kinematics(model, q)
        .map_err(err)?
        .positions
        .to_vec())
}

pub fn arm_frames(q: &str) -> Result<String, String> {
    let q: JointVector = serde_json::from_str(q).map_err(err)?;
    serde_json::to_string(&frames(&KinematicModel::ur5e(), &q)?).map_err(err)
}

pub fn plan_query(world: &str, planner: &str, seed: u64, weights: &str) -> Result<String, String> {
    let model = KinematicModel::ur5e();
    let ws: Workspace = formats::from_str(WORKSPACE_FORMAT, world, None).map_err(err)?;
    ws.validate().map_err(err)?;
    let kind: PlannerKind = planner.parse().map_err(err)?;
    let params = PlannerParams::default().with_seed(seed);
    let mut r = rng::seeded(derive_named(seed, "query"));
    let q = sample_query(&ws, &model, &mut r, QueryKind::Blocked, &params).map_err(err)?;
    let result = match kind {
        PlannerKind::Rrt => rrt_plan(&ws, &model, &q.start, &q.goal, &params),
        PlannerKind::Birrt => birrt_plan(&ws, &model, &q.start, &q.goal, &params),
        PlannerKind::RrtStar => rrt_star_plan(&ws, &model, &q.start, &q.goal, &params),
        PlannerKind::InformedRrtStar => {
            informed_rrt_star_plan(&ws, &model, &q.start, &q.goal, &params, None)
        }
        PlannerKind::Neural => {
            if weights.trim().is_empty() {
                return Err("the neural planner needs a weight file".into());
            }
            let h = Heuristic::from_document(weights, None).map_err(err)?;
            neural_plan(&ws, &model, &q.start, &q.goal, &h, &params)
        }
    }
    .map_err(err)?;
    let frames = result
        .path
        .iter()
        .map(|p| frames(&model, p))
        .collect::<Result<Vec<_>, _>>()?;
    let out = PlanOutput {
        planner: kind.to_string(),
        success: result.success,
        cost: result.success.then_some(result.cost),
        iterations: result.iterations,
        wall_time: result.wall_time,
        start: q.start,
        goal: q.goal,
        path: result.path,
        frames,
    };
    serde_json::to_string(&out).map_err(err)
}
