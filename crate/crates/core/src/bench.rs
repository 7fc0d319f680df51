//! Multi-planner benchmark: query suites, budget resolution, result tables and
//! reproducible bundles.
//!
//! Results are split into a deterministic part (success, cost, iterations; written
//! to `metrics.csv` and `queries.csv`) and wall-clock timing (`timing.csv`). The
//! classical planners' budget follows the neural planner's mean planning time,
//! converted once into an iteration budget from a calibration run; the resolved
//! budgets are stored in the bundle so a re-run repeats the same work exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::dataset::{sample_query, Query, QueryKind};
use crate::error::{Error, Result};
use crate::exec::map_indices;
use crate::formats;
use crate::heuristic::Heuristic;
use crate::kinematics::KinematicModel;
use crate::planners::{
    birrt_plan, informed_rrt_star_plan, neural_plan, rrt_plan, rrt_star_plan, PlanResult,
    PlannerKind, PlannerParams,
};
use crate::rng::{self, derive_seed};
use crate::world::{Profile, Workspace};
use serde::{Deserialize, Serialize};

pub const BUNDLE_FORMAT: &str = "armplan.bench_bundle";
pub const METRICS_SCHEMA: &str = "armplan.bench.metrics/1";
pub const QUERIES_SCHEMA: &str = "armplan.bench.queries/1";
pub const TIMING_SCHEMA: &str = "armplan.bench.timing/1";

/// How the classical planners' iteration budget is chosen per suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum BudgetRule {
    /// The same iteration cap for every classical planner.
    Fixed { iterations: usize },
    /// Run the neural planner first; give each classical planner as many iterations as
    /// fit in the neural mean planning time, measured from `calibration_iterations`
    /// iterations per query and capped at `max_iterations`.
    MatchNeuralTime {
        calibration_iterations: usize,
        max_iterations: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSpec {
    pub planners: Vec<PlannerKind>,
    pub queries_per_world: usize,
    /// `blocked` keeps only queries whose straight motion collides.
    pub query_kind: QueryKind,
    pub seed: u64,
    pub budget: BudgetRule,
    /// Base planner parameters; `max_iterations` and `seed` are set per query.
    pub params: PlannerParams,
    /// Bi-RRT iterations used to confirm each benchmark query is solvable.
    pub solvable_iterations: usize,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            planners: vec![
                PlannerKind::Neural,
                PlannerKind::Birrt,
                PlannerKind::InformedRrtStar,
            ],
            queries_per_world: 20,
            query_kind: QueryKind::Blocked,
            seed: 0,
            budget: BudgetRule::MatchNeuralTime {
                calibration_iterations: 200,
                max_iterations: 20_000,
            },
            params: PlannerParams::default(),
            solvable_iterations: 5000,
        }
    }
}

impl BenchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.planners.is_empty() {
            return Err(Error::invalid("a benchmark needs at least one planner"));
        }
        if self.queries_per_world == 0 {
            return Err(Error::invalid("queries_per_world must be at least 1"));
        }
        if let BudgetRule::MatchNeuralTime { .. } = self.budget {
            if !self.planners.contains(&PlannerKind::Neural) {
                return Err(Error::invalid(
                    "the match-neural-time budget needs the neural planner",
                ));
            }
        }
        self.params.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteQuery {
    pub world: String,
    #[serde(flatten)]
    pub query: Query,
}

/// Worlds and fixed queries of one benchmark suite, e.g. `simple-seen`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSuite {
    pub name: String,
    pub profile: Profile,
    pub worlds: Vec<Workspace>,
    pub queries: Vec<SuiteQuery>,
}

impl BenchSuite {
    /// Builds `spec.queries_per_world` queries of `spec.query_kind` per world, each solved by Bi-RRT within
    /// `spec.solvable_iterations`. World `w` draws from `derive_seed(seed, w)`.
    pub fn generate(
        name: &str,
        worlds: Vec<Workspace>,
        model: &KinematicModel,
        spec: &BenchSpec,
        seed: u64,
    ) -> Result<Self> {
        let profile = worlds
            .first()
            .map(|w| w.profile)
            .ok_or_else(|| Error::invalid("a suite needs at least one world"))?;
        if worlds.iter().any(|w| w.profile != profile) {
            return Err(Error::invalid("all worlds of a suite must share a profile"));
        }
        let per_world = map_indices(0..worlds.len(), |w| -> Result<Vec<SuiteQuery>> {
            let ws = &worlds[w];
            let mut r = rng::seeded(derive_seed(seed, w as u64));
            let mut out = Vec::with_capacity(spec.queries_per_world);
            let mut attempts = 0;
            while out.len() < spec.queries_per_world {
                attempts += 1;
                if attempts > 100 * spec.queries_per_world {
                    return Err(Error::ResourceExhausted(format!(
                        "could not find {} solvable queries in world {:?}",
                        spec.queries_per_world, ws.id
                    )));
                }
                let q = sample_query(ws, model, &mut r, spec.query_kind, &spec.params)?;
                let check = spec
                    .params
                    .clone()
                    .with_iterations(spec.solvable_iterations)
                    .with_seed(derive_seed(seed ^ 0x5eed, attempts as u64));
                if birrt_plan(ws, model, &q.start, &q.goal, &check)?.success {
                    out.push(SuiteQuery {
                        world: ws.id.clone(),
                        query: q,
                    });
                }
            }
            Ok(out)
        });
        let mut queries = Vec::new();
        for q in per_world {
            queries.extend(q?);
        }
        Ok(Self {
            name: name.to_string(),
            profile,
            worlds,
            queries,
        })
    }

    fn world(&self, id: &str) -> Result<&Workspace> {
        self.worlds
            .iter()
            .find(|w| w.id == id)
            .ok_or_else(|| Error::invalid(format!("suite {:?} has no world {id:?}", self.name)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetEntry {
    pub suite: String,
    pub planner: PlannerKind,
    pub iterations: usize,
    /// Neural mean planning time the budget was matched to, when applicable.
    pub matched_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryOutcome {
    pub suite: String,
    pub world: String,
    pub query: usize,
    pub planner: PlannerKind,
    pub seed: u64,
    pub success: bool,
    pub cost: f64,
    pub iterations: usize,
    pub wall_time: f64,
}

/// One table row: a planner on a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub planner: PlannerKind,
    pub suite: String,
    pub queries: usize,
    pub successes: usize,
    pub success_pct: f64,
    /// Mean path cost over successful queries only.
    pub mean_cost: Option<f64>,
    pub mean_iterations: f64,
    pub budget_iterations: Option<usize>,
    /// Mean wall-clock planning time over all queries, seconds.
    pub mean_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub outcomes: Vec<QueryOutcome>,
    pub budgets: Vec<BudgetEntry>,
}

/// Everything needed to repeat a benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchBundle {
    pub spec: BenchSpec,
    pub robot: KinematicModel,
    pub suites: Vec<BenchSuite>,
    /// Resolved budgets; empty before the first run.
    pub budgets: Vec<BudgetEntry>,
}

fn run_one(
    planner: PlannerKind,
    ws: &Workspace,
    model: &KinematicModel,
    q: &Query,
    heuristic: Option<&Heuristic>,
    params: &PlannerParams,
) -> Result<PlanResult> {
    match planner {
        PlannerKind::Rrt => rrt_plan(ws, model, &q.start, &q.goal, params),
        PlannerKind::Birrt => birrt_plan(ws, model, &q.start, &q.goal, params),
        PlannerKind::RrtStar => rrt_star_plan(ws, model, &q.start, &q.goal, params),
        PlannerKind::InformedRrtStar => {
            informed_rrt_star_plan(ws, model, &q.start, &q.goal, params, None)
        }
        PlannerKind::Neural => {
            let h = heuristic
                .ok_or_else(|| Error::MissingWeights("the neural planner needs weights".into()))?;
            neural_plan(ws, model, &q.start, &q.goal, h, params)
        }
    }
}

/// Seed of query `index` (global over suites in order), shared by all planners.
pub fn query_seed(master: u64, index: usize) -> u64 {
    derive_seed(master, index as u64)
}

impl BenchBundle {
    pub fn new(spec: BenchSpec, robot: KinematicModel, suites: Vec<BenchSuite>) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            spec,
            robot,
            suites,
            budgets: Vec::new(),
        })
    }

    fn budget_for(&self, suite: &str, planner: PlannerKind) -> Option<usize> {
        self.budgets
            .iter()
            .find(|b| b.suite == suite && b.planner == planner)
            .map(|b| b.iterations)
    }

    fn run_planner(
        &self,
        suite_index: usize,
        planner: PlannerKind,
        heuristic: Option<&Heuristic>,
        iterations: usize,
    ) -> Result<Vec<QueryOutcome>> {
        let suite = &self.suites[suite_index];
        let offset: usize = self.suites[..suite_index]
            .iter()
            .map(|s| s.queries.len())
            .sum();
        let results = map_indices(0..suite.queries.len(), |i| -> Result<QueryOutcome> {
            let sq = &suite.queries[i];
            let ws = suite.world(&sq.world)?;
            let seed = query_seed(self.spec.seed, offset + i);
            let params = self
                .spec
                .params
                .clone()
                .with_seed(seed)
                .with_iterations(iterations);
            let r = run_one(planner, ws, &self.robot, &sq.query, heuristic, &params)?;
            Ok(QueryOutcome {
                suite: suite.name.clone(),
                world: sq.world.clone(),
                query: i,
                planner,
                seed,
                success: r.success,
                cost: r.cost,
                iterations: r.iterations,
                wall_time: r.wall_time,
            })
        });
        results.into_iter().collect()
    }

    /// Runs every planner on every suite. Budgets already stored in the bundle are
    /// reused; missing ones are resolved with the spec's rule and stored.
    pub fn run(&mut self, heuristics: &BTreeMap<Profile, Heuristic>) -> Result<BenchReport> {
        self.spec.validate()?;
        let mut outcomes = Vec::new();
        for s in 0..self.suites.len() {
            let suite_name = self.suites[s].name.clone();
            let heuristic = heuristics.get(&self.suites[s].profile);
            let mut ordered = self.spec.planners.clone();
            ordered.sort_by_key(|p| *p != PlannerKind::Neural);
            let mut neural_mean = None;
            for planner in ordered {
                let iterations = if planner == PlannerKind::Neural {
                    self.spec.params.max_iterations
                } else if let Some(b) = self.budget_for(&suite_name, planner) {
                    b
                } else {
                    let entry = match &self.spec.budget {
                        BudgetRule::Fixed { iterations } => BudgetEntry {
                            suite: suite_name.clone(),
                            planner,
                            iterations: *iterations,
                            matched_time: None,
                        },
                        BudgetRule::MatchNeuralTime {
                            calibration_iterations,
                            max_iterations,
                        } => {
                            let target: f64 = neural_mean.ok_or_else(|| {
                                Error::invalid("neural planner results are needed before budgets")
                            })?;
                            let calib =
                                self.run_planner(s, planner, heuristic, *calibration_iterations)?;
                            let time: f64 = calib.iter().map(|o| o.wall_time).sum();
                            let iters: usize = calib.iter().map(|o| o.iterations).sum();
                            let per_iteration = time / iters.max(1) as f64;
                            let budget = if per_iteration > 0.0 {
                                (target / per_iteration).ceil() as usize
                            } else {
                                *max_iterations
                            };
                            BudgetEntry {
                                suite: suite_name.clone(),
                                planner,
                                iterations: budget.clamp(1, *max_iterations),
                                matched_time: Some(target),
                            }
                        }
                    };
                    let it = entry.iterations;
                    self.budgets.push(entry);
                    it
                };
                let res = self.run_planner(s, planner, heuristic, iterations)?;
                if planner == PlannerKind::Neural {
                    neural_mean = Some(
                        res.iter().map(|o| o.wall_time).sum::<f64>() / res.len().max(1) as f64,
                    );
                }
                outcomes.extend(res);
            }
        }
        let rows = self.rows(&outcomes);
        Ok(BenchReport {
            rows,
            outcomes,
            budgets: self.budgets.clone(),
        })
    }

    fn rows(&self, outcomes: &[QueryOutcome]) -> Vec<BenchRow> {
        let mut rows = Vec::new();
        for planner in &self.spec.planners {
            for suite in &self.suites {
                let mine: Vec<&QueryOutcome> = outcomes
                    .iter()
                    .filter(|o| o.planner == *planner && o.suite == suite.name)
                    .collect();
                let n = mine.len();
                let ok: Vec<&&QueryOutcome> = mine.iter().filter(|o| o.success).collect();
                rows.push(BenchRow {
                    planner: *planner,
                    suite: suite.name.clone(),
                    queries: n,
                    successes: ok.len(),
                    success_pct: 100.0 * ok.len() as f64 / n.max(1) as f64,
                    mean_cost: (!ok.is_empty())
                        .then(|| ok.iter().map(|o| o.cost).sum::<f64>() / ok.len() as f64),
                    mean_iterations: mine.iter().map(|o| o.iterations as f64).sum::<f64>()
                        / n.max(1) as f64,
                    budget_iterations: (*planner != PlannerKind::Neural)
                        .then(|| self.budget_for(&suite.name, *planner))
                        .flatten(),
                    mean_time: mine.iter().map(|o| o.wall_time).sum::<f64>() / n.max(1) as f64,
                });
            }
        }
        rows
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        formats::save(path, BUNDLE_FORMAT, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        formats::load(path, BUNDLE_FORMAT)
    }
}

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Format {
        path: None,
        detail: format!("csv: {e}"),
    }
}

fn csv_text(schema: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(csv_err)?).map_err(csv_err)?;
    Ok(format!("# schema: {schema}\n{body}"))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl BenchReport {
    /// Per planner and suite: success, mean cost over successes, iterations, budget.
    pub fn metrics_csv(&self) -> Result<String> {
        csv_text(
            METRICS_SCHEMA,
            &[
                "planner",
                "suite",
                "queries",
                "successes",
                "success_pct",
                "mean_cost",
                "mean_iterations",
                "budget_iterations",
            ],
            self.rows
                .iter()
                .map(|r| {
                    vec![
                        r.planner.to_string(),
                        r.suite.clone(),
                        r.queries.to_string(),
                        r.successes.to_string(),
                        r.success_pct.to_string(),
                        opt(r.mean_cost),
                        r.mean_iterations.to_string(),
                        opt(r.budget_iterations),
                    ]
                })
                .collect(),
        )
    }

    /// One line per query and planner.
    pub fn queries_csv(&self) -> Result<String> {
        csv_text(
            QUERIES_SCHEMA,
            &[
                "suite",
                "world",
                "query",
                "planner",
                "seed",
                "success",
                "cost",
                "iterations",
            ],
            self.outcomes
                .iter()
                .map(|o| {
                    vec![
                        o.suite.clone(),
                        o.world.clone(),
                        o.query.to_string(),
                        o.planner.to_string(),
                        o.seed.to_string(),
                        o.success.to_string(),
                        if o.success {
                            o.cost.to_string()
                        } else {
                            String::new()
                        },
                        o.iterations.to_string(),
                    ]
                })
                .collect(),
        )
    }

    /// Wall-clock means and medians; differs between runs.
    pub fn timing_csv(&self) -> Result<String> {
        csv_text(
            TIMING_SCHEMA,
            &["planner", "suite", "mean_time_s", "median_time_s"],
            self.rows
                .iter()
                .map(|r| {
                    let mut t: Vec<f64> = self
                        .outcomes
                        .iter()
                        .filter(|o| o.planner == r.planner && o.suite == r.suite)
                        .map(|o| o.wall_time)
                        .collect();
                    t.sort_by(f64::total_cmp);
                    let median = if t.is_empty() { 0.0 } else { t[t.len() / 2] };
                    vec![
                        r.planner.to_string(),
                        r.suite.clone(),
                        r.mean_time.to_string(),
                        median.to_string(),
                    ]
                })
                .collect(),
        )
    }

    /// Human-readable table with the published reference points as a footer.
    pub fn render(&self, spec: &BenchSpec) -> String {
        render_table(&self.rows, spec)
    }
}

/// Reference figures published for the original method on its own hardware and
/// collision-checking stack. They are context only and not expected to match.
pub const REFERENCE_FOOTER: &str = "\
Published reference points (different hardware, collision stack and training run; not expected to match):
  neural, simple seen:  T = 0.5 s, success 94%
  neural, complex seen: success 81%
  informed RRT*, simple seen: C = 5.37
  Bi-RRT, simple seen:        C = 8.81";

pub fn render_table(rows: &[BenchRow], spec: &BenchSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<18} {:<16} {:>9} {:>10} {:>9} {:>10} {:>8}",
        "planner", "suite", "T (s)", "C (rad)", "success", "iters", "budget"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<18} {:<16} {:>9.4} {:>10} {:>8.1}% {:>10.1} {:>8}",
            r.planner.as_str(),
            r.suite,
            r.mean_time,
            r.mean_cost
                .map(|c| format!("{c:.2}"))
                .unwrap_or_else(|| "-".into()),
            r.success_pct,
            r.mean_iterations,
            r.budget_iterations
                .map(|b| b.to_string())
                .unwrap_or_else(|| "-".into()),
        );
    }
    let _ =
        writeln!(
        out,
        "\nneural budget: {} steps per pass, {} replanning rounds; seed {}; {} queries per world",
        spec.params.neural_steps, spec.params.replanning_attempts, spec.seed, spec.queries_per_world
    );
    let rule = match &spec.budget {
        BudgetRule::Fixed { iterations } => format!("fixed {iterations} iterations"),
        BudgetRule::MatchNeuralTime { .. } => {
            "iterations matched to the neural mean planning time".into()
        }
    };
    let _ = writeln!(out, "classical budget: {rule}\n");
    out.push_str(REFERENCE_FOOTER);
    out.push('\n');
    out
}

/// Reads rows back from `metrics.csv` and `timing.csv` texts.
pub fn rows_from_csv(metrics: &str, timing: &str) -> Result<Vec<BenchRow>> {
    let reader = |text: &str, schema: &str| -> Result<csv::Reader<std::io::Cursor<Vec<u8>>>> {
        let first = text.lines().next().unwrap_or_default();
        if first != format!("# schema: {schema}") {
            return Err(Error::Format {
                path: None,
                detail: format!("expected schema {schema}, found {first:?}"),
            });
        }
        Ok(csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(std::io::Cursor::new(text.as_bytes().to_vec())))
    };
    let parse_f = |s: &str| s.parse::<f64>().map_err(csv_err);
    let parse_u = |s: &str| s.parse::<usize>().map_err(csv_err);
    let mut times = BTreeMap::new();
    for rec in reader(timing, TIMING_SCHEMA)?.records() {
        let rec = rec.map_err(csv_err)?;
        times.insert((rec[0].to_string(), rec[1].to_string()), parse_f(&rec[2])?);
    }
    let mut rows = Vec::new();
    for rec in reader(metrics, METRICS_SCHEMA)?.records() {
        let rec = rec.map_err(csv_err)?;
        let planner: PlannerKind = rec[0].parse()?;
        let suite = rec[1].to_string();
        rows.push(BenchRow {
            planner,
            mean_time: times
                .get(&(rec[0].to_string(), suite.clone()))
                .copied()
                .unwrap_or(f64::NAN),
            suite,
            queries: parse_u(&rec[2])?,
            successes: parse_u(&rec[3])?,
            success_pct: parse_f(&rec[4])?,
            mean_cost: if rec[5].is_empty() {
                None
            } else {
                Some(parse_f(&rec[5])?)
            },
            mean_iterations: parse_f(&rec[6])?,
            budget_iterations: if rec[7].is_empty() {
                None
            } else {
                Some(parse_u(&rec[7])?)
            },
        });
    }
    Ok(rows)
}

/// Writes `metrics.csv`, `queries.csv`, `timing.csv` and `report.md` into `dir`.
pub fn write_outputs(dir: &Path, report: &BenchReport, spec: &BenchSpec) -> Result<()> {
    formats::write_atomic(&dir.join("metrics.csv"), &report.metrics_csv()?)?;
    formats::write_atomic(&dir.join("queries.csv"), &report.queries_csv()?)?;
    formats::write_atomic(&dir.join("timing.csv"), &report.timing_csv()?)?;
    formats::write_atomic(
        &dir.join("report.md"),
        &format!("# Benchmark\n\n```text\n{}```\n", report.render(spec)),
    )
}
