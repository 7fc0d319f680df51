//! Workspace generation, oracle path collection and supervised training pairs.
//!
//! On-disk layout below a data root:
//!
//! ```text
//! worlds/<suite>/<world-id>.json          workspace documents
//! paths/<suite>/<world-id>/<k>.json       oracle path documents
//! pairs/<suite>.json                      training pairs of a suite
//! ```

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::map_indices;
use crate::formats::{self, PathRecord};
use crate::kinematics::{JointVector, KinematicModel};
use crate::planners::{rrt_star_plan, PlannerKind, PlannerParams};
use crate::rng::{self, derive_seed};
use crate::world::{
    config_in_collision, motion_valid, path_valid, BoxObstacle, Profile, Workspace,
};

pub const PAIRS_FORMAT: &str = "armplan.pairs";
pub const QUERIES_FORMAT: &str = "armplan.queries";

/// Free-configuration rejection limit.
pub const MAX_REJECTIONS: usize = 10_000;
/// Random configurations probed when generating a world.
pub const PROBE_CONFIGS: usize = 100;
/// Probes that must be free for a generated world to be kept.
pub const MIN_FREE_PROBES: usize = 5;
/// Oracle attempts per window when checking the success-rate floor.
pub const ORACLE_WINDOW: usize = 100;

/// Oracle planner settings used for data collection.
pub fn oracle_params() -> PlannerParams {
    PlannerParams::default().with_iterations(5000)
}

fn polar_center<R: Rng + ?Sized>(rng: &mut R, r: (f64, f64), z: (f64, f64)) -> [f64; 3] {
    let radius = rng.random_range(r.0..r.1);
    let angle = rng.random_range(-PI..PI);
    [
        radius * angle.cos(),
        radius * angle.sin(),
        rng.random_range(z.0..z.1),
    ]
}

fn simple_obstacles<R: Rng + ?Sized>(rng: &mut R) -> Vec<BoxObstacle> {
    let n = rng.random_range(3..=5);
    (0..n)
        .map(|_| {
            let dims = std::array::from_fn(|_| rng.random_range(0.1..=0.3));
            let center = polar_center(rng, (0.35, 0.9), (0.05, 0.9));
            BoxObstacle::new(center, dims).expect("positive dims")
        })
        .collect()
}

fn complex_obstacles<R: Rng + ?Sized>(rng: &mut R) -> Vec<BoxObstacle> {
    // A table in front of the arm, its near edge clear of the base.
    let heading = rng.random_range(-PI..PI);
    let top = rng.random_range(0.0..0.1);
    let (near, far) = (0.3, 1.1);
    let mid = 0.5 * (near + far);
    let table_dims = if heading.cos().abs() > heading.sin().abs() {
        [far - near, 1.6, 0.06]
    } else {
        [1.6, far - near, 0.06]
    };
    let (cx, cy) = if heading.cos().abs() > heading.sin().abs() {
        (mid * heading.cos().signum(), 0.0)
    } else {
        (0.0, mid * heading.sin().signum())
    };
    let mut out = vec![BoxObstacle::new([cx, cy, top - 0.03], table_dims).expect("positive dims")];
    let n = rng.random_range(6..=9);
    for _ in 0..n {
        let b = if rng.random_bool(0.5) {
            let h = rng.random_range(0.4..0.8);
            let mut c = polar_center(rng, (0.35, 0.9), (0.0, 1.0));
            c[2] = top + 0.5 * h;
            BoxObstacle::new(
                c,
                [
                    rng.random_range(0.08..0.12),
                    rng.random_range(0.08..0.12),
                    h,
                ],
            )
        } else {
            let c = polar_center(rng, (0.4, 0.8), (0.3, 0.7));
            BoxObstacle::new(
                c,
                [
                    rng.random_range(0.3..0.5),
                    rng.random_range(0.2..0.4),
                    rng.random_range(0.03..0.05),
                ],
            )
        };
        out.push(b.expect("positive dims"));
    }
    out
}

/// Random world of the given profile. Candidate worlds are redrawn until at least
/// [`MIN_FREE_PROBES`] of [`PROBE_CONFIGS`] random configurations are collision-free.
pub fn generate_world<R: Rng + ?Sized>(
    profile: Profile,
    model: &KinematicModel,
    rng: &mut R,
) -> Workspace {
    loop {
        let obstacles = match profile {
            Profile::Simple => simple_obstacles(rng),
            Profile::Complex => complex_obstacles(rng),
        };
        let ws =
            Workspace::with_obstacles(profile, obstacles).expect("generated world within capacity");
        let free = (0..PROBE_CONFIGS)
            .filter(|_| !config_in_collision(&ws, model, &model.sample_uniform(rng)))
            .count();
        if free >= MIN_FREE_PROBES {
            return ws;
        }
    }
}

/// A named, seeded set of worlds of one profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldSuite {
    pub name: String,
    pub profile: Profile,
    pub seed: u64,
    pub worlds: Vec<Workspace>,
}

impl WorldSuite {
    /// `count` worlds; world `k` is drawn from `derive_seed(seed, k)` and named `<name>-<k>`.
    pub fn generate(
        name: &str,
        profile: Profile,
        count: usize,
        seed: u64,
        model: &KinematicModel,
    ) -> Self {
        let worlds = map_indices(0..count, |k| {
            let mut r = rng::seeded(derive_seed(seed, k as u64));
            let mut ws = generate_world(profile, model, &mut r);
            ws.id = format!("{name}-{k:02}");
            ws
        });
        Self {
            name: name.to_string(),
            profile,
            seed,
            worlds,
        }
    }

    pub fn world(&self, id: &str) -> Option<&Workspace> {
        self.worlds.iter().find(|w| w.id == id)
    }
}

/// Uniform free configuration by rejection.
pub fn sample_free_config<R: Rng + ?Sized>(
    ws: &Workspace,
    model: &KinematicModel,
    rng: &mut R,
) -> Result<JointVector> {
    for _ in 0..MAX_REJECTIONS {
        let q = model.sample_uniform(rng);
        if !config_in_collision(ws, model, &q) {
            return Ok(q);
        }
    }
    Err(Error::ResourceExhausted(format!(
        "no free configuration in world {:?} after {MAX_REJECTIONS} draws",
        ws.id
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub start: JointVector,
    pub goal: JointVector,
}

/// Which start/goal pairs a query sampler accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryKind {
    /// Any two free configurations.
    Any,
    /// Free configurations whose straight joint-space motion is invalid.
    Blocked,
}

/// Free start and goal accepted by `kind`.
pub fn sample_query<R: Rng + ?Sized>(
    ws: &Workspace,
    model: &KinematicModel,
    rng: &mut R,
    kind: QueryKind,
    params: &PlannerParams,
) -> Result<Query> {
    for _ in 0..MAX_REJECTIONS {
        let start = sample_free_config(ws, model, rng)?;
        let goal = sample_free_config(ws, model, rng)?;
        if kind == QueryKind::Any || !motion_valid(ws, model, &start, &goal, &params.motion) {
            return Ok(Query { start, goal });
        }
    }
    Err(Error::ResourceExhausted(format!(
        "no blocked start/goal pair in world {:?}",
        ws.id
    )))
}

/// Runs the oracle on queries of `kind` until `n` paths are found. Attempt `k` draws its query from
/// `derive_seed(seed, k)` and seeds the oracle with `derive_seed(seed ^ ORACLE_SALT, k)`,
/// so the result does not depend on how attempts are scheduled. Paths that fail a
/// sweep at half the checking step are discarded like failed attempts.
pub fn collect_paths(
    ws: &Workspace,
    model: &KinematicModel,
    n: usize,
    kind: QueryKind,
    oracle: &PlannerParams,
    seed: u64,
) -> Result<Vec<PathRecord>> {
    if n == 0 {
        return Err(Error::invalid("path count must be at least 1"));
    }
    let fine = oracle.motion.half();
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0usize;
    let mut window_successes = 0usize;
    while out.len() < n {
        let batch = (n - out.len()).clamp(8, ORACLE_WINDOW);
        let results = map_indices(
            attempts..attempts + batch,
            |k| -> Result<Option<PathRecord>> {
                let mut r = rng::seeded(derive_seed(seed, k as u64));
                let q = sample_query(ws, model, &mut r, kind, oracle)?;
                let plan_seed = derive_seed(seed ^ ORACLE_SALT, k as u64);
                let res = rrt_star_plan(
                    ws,
                    model,
                    &q.start,
                    &q.goal,
                    &oracle.clone().with_seed(plan_seed),
                )?;
                if !res.success || !path_valid(ws, model, &res.path, &fine) {
                    return Ok(None);
                }
                Ok(Some(PathRecord {
                    robot: model.name.clone(),
                    workspace: ws.id.clone(),
                    planner: PlannerKind::RrtStar.to_string(),
                    seed: plan_seed,
                    cost: res.cost,
                    waypoints: res.path,
                }))
            },
        );
        for r in results {
            attempts += 1;
            if let Some(p) = r? {
                window_successes += 1;
                if out.len() < n {
                    out.push(p);
                }
            }
            if attempts.is_multiple_of(ORACLE_WINDOW) {
                if window_successes * 100 < ORACLE_WINDOW {
                    return Err(Error::ResourceExhausted(format!(
                        "oracle solved {window_successes} of the last {ORACLE_WINDOW} queries in world {:?}",
                        ws.id
                    )));
                }
                window_successes = 0;
            }
        }
    }
    Ok(out)
}

const ORACLE_SALT: u64 = 0x6f72_6163_6c65;

/// One supervised example: from `q_t` toward `q_goal`, the oracle moved to `target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingPair {
    pub workspace: String,
    pub q_t: JointVector,
    pub q_goal: JointVector,
    pub target: JointVector,
}

/// Every consecutive waypoint pair of every path, with the path's last waypoint as goal.
pub fn make_training_pairs(paths: &[PathRecord]) -> Vec<TrainingPair> {
    let mut out = Vec::new();
    for p in paths {
        let Some(goal) = p.waypoints.last() else {
            continue;
        };
        for w in p.waypoints.windows(2) {
            out.push(TrainingPair {
                workspace: p.workspace.clone(),
                q_t: w[0],
                q_goal: *goal,
                target: w[1],
            });
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct PairsDoc {
    suite: String,
    pairs: Vec<TrainingPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySet {
    pub suite: String,
    pub queries: Vec<(String, Query)>,
}

/// File layout of a data root.
#[derive(Debug, Clone)]
pub struct DataRoot {
    root: PathBuf,
}

impl DataRoot {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn suite_dir(&self, suite: &str) -> PathBuf {
        self.root.join("worlds").join(suite)
    }

    pub fn world_file(&self, suite: &str, world: &str) -> PathBuf {
        self.suite_dir(suite).join(format!("{world}.json"))
    }

    pub fn paths_dir(&self, suite: &str, world: &str) -> PathBuf {
        self.root.join("paths").join(suite).join(world)
    }

    pub fn path_file(&self, suite: &str, world: &str, k: usize) -> PathBuf {
        self.paths_dir(suite, world).join(format!("{k:04}.json"))
    }

    pub fn pairs_file(&self, suite: &str) -> PathBuf {
        self.root.join("pairs").join(format!("{suite}.json"))
    }

    pub fn save_suite(&self, suite: &WorldSuite) -> Result<()> {
        for ws in &suite.worlds {
            formats::save_workspace(&self.world_file(&suite.name, &ws.id), ws)?;
        }
        Ok(())
    }

    /// Loads every world of a suite, ordered by id.
    pub fn load_suite(&self, suite: &str) -> Result<Vec<Workspace>> {
        let mut files = list_json(&self.suite_dir(suite))?;
        files.sort();
        let worlds = files
            .iter()
            .map(|f| formats::load_workspace(f))
            .collect::<Result<Vec<_>>>()?;
        if worlds.is_empty() {
            return Err(Error::invalid(format!(
                "suite {suite:?} has no worlds under {:?}",
                self.root
            )));
        }
        Ok(worlds)
    }

    pub fn save_paths(&self, suite: &str, paths: &[PathRecord]) -> Result<()> {
        let mut counters = std::collections::BTreeMap::<&str, usize>::new();
        for p in paths {
            let k = counters.entry(&p.workspace).or_default();
            formats::save_path(&self.path_file(suite, &p.workspace, *k), p)?;
            *k += 1;
        }
        Ok(())
    }

    /// Loads the paths of one world and re-validates each against it.
    pub fn load_paths(
        &self,
        suite: &str,
        ws: &Workspace,
        model: &KinematicModel,
        params: &PlannerParams,
    ) -> Result<Vec<PathRecord>> {
        let mut files = list_json(&self.paths_dir(suite, &ws.id))?;
        files.sort();
        files
            .iter()
            .map(|f| {
                let p = formats::load_path(f)?;
                if p.workspace != ws.id || !path_valid(ws, model, &p.waypoints, &params.motion) {
                    return Err(Error::Format {
                        path: Some(f.clone()),
                        detail: format!("path is not valid in world {:?}", ws.id),
                    });
                }
                Ok(p)
            })
            .collect()
    }

    pub fn save_pairs(&self, suite: &str, pairs: &[TrainingPair]) -> Result<()> {
        formats::save(
            &self.pairs_file(suite),
            PAIRS_FORMAT,
            &PairsDoc {
                suite: suite.to_string(),
                pairs: pairs.to_vec(),
            },
        )
    }

    pub fn load_pairs(&self, suite: &str) -> Result<Vec<TrainingPair>> {
        let doc: PairsDoc = formats::load(&self.pairs_file(suite), PAIRS_FORMAT)?;
        Ok(doc.pairs)
    }
}

pub fn pairs_to_string(suite: &str, pairs: &[TrainingPair]) -> Result<String> {
    formats::to_string(
        PAIRS_FORMAT,
        &PairsDoc {
            suite: suite.to_string(),
            pairs: pairs.to_vec(),
        },
    )
}

pub fn pairs_from_str(text: &str) -> Result<Vec<TrainingPair>> {
    formats::from_str::<PairsDoc>(PAIRS_FORMAT, text, None).map(|d| d.pairs)
}

fn list_json(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for e in entries {
        let e = e.map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let p = e.path();
        if p.extension().is_some_and(|x| x == "json") {
            out.push(p);
        }
    }
    Ok(out)
}
