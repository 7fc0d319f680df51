use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use armplan_core::bench::{self, BenchBundle, BenchSuite};
use armplan_core::dataset::{
    collect_paths, make_training_pairs, sample_query, DataRoot, QueryKind, WorldSuite,
};
use armplan_core::formats::{self, PathRecord};
use armplan_core::heuristic::{FeatureMode, Heuristic, HeuristicConfig};
use armplan_core::kinematics::{JointVector, KinematicModel, DOF};
use armplan_core::planners::{
    birrt_plan, informed_rrt_star_plan, neural_plan, rrt_plan, rrt_star_plan, PlannerKind,
};
use armplan_core::rng::{self, derive_named, derive_seed};
use armplan_core::training::Trainer;
use armplan_core::world::Profile;
use armplan_core::Error;

use crate::config::CliConfig;
use crate::{BenchArgs, Cli, CollectArgs, Command, GenWorldsArgs, PlanArgs, ReportArgs, TrainArgs};

/// The planner ran but found no path.
#[derive(Debug)]
pub struct NoPath;

impl fmt::Display for NoPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("no path found")
    }
}

impl std::error::Error for NoPath {}

pub fn run(cli: &Cli) -> Result<()> {
    let config = CliConfig::load(cli.config.as_deref())?;
    let model = match &cli.robot {
        Some(p) => {
            KinematicModel::load(p).with_context(|| format!("loading robot {}", p.display()))?
        }
        None => KinematicModel::ur5e(),
    };
    let root = DataRoot::new(&cli.data_root);
    match &cli.command {
        Command::GenWorlds(a) => gen_worlds(cli, &root, &model, a),
        Command::Collect(a) => collect(cli, &config, &root, &model, a),
        Command::Train(a) => train(cli, &config, &root, &model, a),
        Command::Plan(a) => plan(cli, &config, &model, a),
        Command::Bench(a) => run_bench(cli, &config, &root, &model, a),
        Command::Report(a) => report(a),
    }
}

fn gen_worlds(cli: &Cli, root: &DataRoot, model: &KinematicModel, a: &GenWorldsArgs) -> Result<()> {
    if a.count == 0 {
        bail!(Error::InvalidArgument("--count must be at least 1".into()));
    }
    let suite = WorldSuite::generate(&a.suite, a.profile, a.count, cli.seed, model);
    root.save_suite(&suite)?;
    println!(
        "wrote {} {} worlds to {}",
        suite.worlds.len(),
        a.profile,
        root.suite_dir(&a.suite).display()
    );
    Ok(())
}

fn collect(
    cli: &Cli,
    config: &CliConfig,
    root: &DataRoot,
    model: &KinematicModel,
    a: &CollectArgs,
) -> Result<()> {
    let worlds = root
        .load_suite(&a.suite)
        .with_context(|| format!("loading suite {:?}", a.suite))?;
    if let Some(id) = &a.world {
        if !worlds.iter().any(|w| &w.id == id) {
            bail!(Error::InvalidArgument(format!(
                "suite {:?} has no world {id:?}",
                a.suite
            )));
        }
    }
    let oracle = config.oracle();
    for (k, ws) in worlds.iter().enumerate() {
        if a.world.as_ref().is_some_and(|id| id != &ws.id) {
            continue;
        }
        let paths = collect_paths(
            ws,
            model,
            a.paths,
            QueryKind::Blocked,
            &oracle,
            derive_seed(cli.seed, k as u64),
        )
        .with_context(|| format!("collecting in world {}", ws.id))?;
        root.save_paths(&a.suite, &paths)?;
        eprintln!("{}: {} paths", ws.id, paths.len());
    }
    let mut pairs = Vec::new();
    for ws in &worlds {
        if root.paths_dir(&a.suite, &ws.id).is_dir() {
            pairs.extend(make_training_pairs(
                &root.load_paths(&a.suite, ws, model, &oracle)?,
            ));
        }
    }
    root.save_pairs(&a.suite, &pairs)?;
    println!(
        "wrote {} training pairs to {}",
        pairs.len(),
        root.pairs_file(&a.suite).display()
    );
    Ok(())
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

fn train(
    cli: &Cli,
    config: &CliConfig,
    root: &DataRoot,
    model: &KinematicModel,
    a: &TrainArgs,
) -> Result<()> {
    let worlds = root.load_suite(&a.suite)?;
    let pairs = root
        .load_pairs(&a.suite)
        .with_context(|| format!("loading pairs of suite {:?}", a.suite))?;
    let checkpoint = sidecar(&a.out, ".ckpt");
    let mut trainer = if a.resume {
        Trainer::resume(&checkpoint, &pairs, &worlds, model, a.epochs)
            .with_context(|| format!("resuming from {}", checkpoint.display()))?
    } else {
        let profile = worlds
            .first()
            .map(|w| w.profile)
            .ok_or_else(|| Error::InvalidArgument(format!("suite {:?} is empty", a.suite)))?;
        let mut tc = config.train.clone();
        tc.seed = cli.seed;
        if let Some(e) = a.epochs {
            tc.epochs = e;
        }
        if a.relaxed {
            tc.feature_mode = FeatureMode::RelaxedFk;
        }
        let hc = HeuristicConfig::for_profile(profile, tc.feature_mode);
        Trainer::new(&pairs, &worlds, model, tc, hc)?
    };
    let every = a.checkpoint_every.max(1);
    while !trainer.is_done() {
        let (train_loss, val_loss) = trainer.run_epoch()?;
        eprintln!(
            "epoch {:>4}  train {train_loss:.6}  validation {val_loss:.6}",
            trainer.epoch()
        );
        if trainer.epoch() % every == 0 {
            trainer.save_checkpoint(&checkpoint)?;
        }
    }
    trainer.save_checkpoint(&checkpoint)?;
    trainer.best_heuristic()?.save(&a.out)?;
    let report = trainer.report();
    formats::write_atomic(
        &sidecar(&a.out, ".report.json"),
        &serde_json::to_string_pretty(report)?,
    )?;
    println!(
        "best epoch {} (validation {:.6}); weights written to {}",
        report.best_epoch + 1,
        report
            .validation_loss
            .get(report.best_epoch)
            .copied()
            .unwrap_or(f64::NAN),
        a.out.display()
    );
    Ok(())
}

fn parse_joints(text: &str) -> Result<JointVector> {
    let values: Vec<f64> = text
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Error::InvalidArgument(format!("bad joint value in {text:?}: {e}")))?;
    let q: [f64; DOF] = values.try_into().map_err(|_| {
        Error::InvalidArgument(format!(
            "expected {DOF} comma-separated angles, got {text:?}"
        ))
    })?;
    Ok(JointVector(q))
}

fn plan(cli: &Cli, config: &CliConfig, model: &KinematicModel, a: &PlanArgs) -> Result<()> {
    let ws = formats::load_workspace(&a.world)?;
    let params = config.planner().with_seed(cli.seed);
    let heuristic = match (&a.weights, a.planner) {
        (Some(p), _) => {
            Some(Heuristic::load(p).with_context(|| format!("loading weights {}", p.display()))?)
        }
        (None, PlannerKind::Neural) => bail!(Error::MissingWeights(
            "the neural planner needs --weights".into()
        )),
        (None, _) => None,
    };
    let (start, goal) = match (&a.start, &a.goal) {
        (Some(s), Some(g)) => (parse_joints(s)?, parse_joints(g)?),
        (None, None) => {
            let mut r = rng::seeded(derive_named(cli.seed, "query"));
            let q = sample_query(&ws, model, &mut r, QueryKind::Blocked, &params)?;
            (q.start, q.goal)
        }
        _ => bail!(Error::InvalidArgument(
            "give both --start and --goal or neither".into()
        )),
    };
    let result = match a.planner {
        PlannerKind::Rrt => rrt_plan(&ws, model, &start, &goal, &params)?,
        PlannerKind::Birrt => birrt_plan(&ws, model, &start, &goal, &params)?,
        PlannerKind::RrtStar => rrt_star_plan(&ws, model, &start, &goal, &params)?,
        PlannerKind::InformedRrtStar => {
            informed_rrt_star_plan(&ws, model, &start, &goal, &params, None)?
        }
        PlannerKind::Neural => {
            let h = heuristic.as_ref().expect("checked above");
            neural_plan(&ws, model, &start, &goal, h, &params)?
        }
    };
    println!("planner    {}", a.planner);
    println!("start      {start}");
    println!("goal       {goal}");
    println!("success    {}", result.success);
    println!("iterations {}", result.iterations);
    println!("time_s     {:.6}", result.wall_time);
    if !result.success {
        return Err(NoPath.into());
    }
    println!("cost       {:.6}", result.cost);
    println!("waypoints  {}", result.path.len());
    if let Some(out) = &a.out {
        let record = PathRecord {
            robot: model.name.clone(),
            workspace: ws.id.clone(),
            planner: a.planner.to_string(),
            seed: cli.seed,
            cost: result.cost,
            waypoints: result.path,
        };
        formats::save_path(out, &record)?;
        println!("path       {}", out.display());
    }
    Ok(())
}

fn profile_of(h: &Heuristic) -> Result<Profile> {
    [Profile::Simple, Profile::Complex]
        .into_iter()
        .find(|p| p.capacity() == h.config().obstacle_slots)
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "weights expect {} obstacle slots, which matches no profile",
                h.config().obstacle_slots
            ))
            .into()
        })
}

fn weights_file(dir: &Path, profile: Profile) -> PathBuf {
    dir.join("weights").join(format!("{profile}.json"))
}

fn run_bench(
    cli: &Cli,
    config: &CliConfig,
    root: &DataRoot,
    model: &KinematicModel,
    a: &BenchArgs,
) -> Result<()> {
    let mut heuristics = BTreeMap::new();
    let mut bundle = if let Some(path) = &a.bundle {
        let bundle = BenchBundle::load(path)
            .with_context(|| format!("loading bundle {}", path.display()))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let profiles: std::collections::BTreeSet<Profile> =
            bundle.suites.iter().map(|s| s.profile).collect();
        if bundle.spec.planners.contains(&PlannerKind::Neural) {
            for p in profiles {
                let file = weights_file(dir, p);
                heuristics.insert(
                    p,
                    Heuristic::load(&file)
                        .with_context(|| format!("loading {}", file.display()))?,
                );
            }
        }
        bundle
    } else {
        if a.suites.is_empty() {
            bail!(Error::InvalidArgument(
                "give at least one --suite or a --bundle".into()
            ));
        }
        for w in &a.weights {
            let h =
                Heuristic::load(w).with_context(|| format!("loading weights {}", w.display()))?;
            heuristics.insert(profile_of(&h)?, h);
        }
        let mut spec = config.bench.clone();
        spec.seed = cli.seed;
        if let Some(p) = &a.planners {
            spec.planners = p.clone();
        }
        if let Some(q) = a.queries {
            spec.queries_per_world = q;
        }
        spec.validate()?;
        let mut suites = Vec::new();
        for name in &a.suites {
            let worlds = root
                .load_suite(name)
                .with_context(|| format!("loading suite {name:?}"))?;
            let suite =
                BenchSuite::generate(name, worlds, model, &spec, derive_named(cli.seed, name))?;
            if spec.planners.contains(&PlannerKind::Neural)
                && !heuristics.contains_key(&suite.profile)
            {
                bail!(Error::MissingWeights(format!(
                    "no --weights for the {} profile",
                    suite.profile
                )));
            }
            suites.push(suite);
        }
        BenchBundle::new(spec, model.clone(), suites)?
    };
    let report = bundle.run(&heuristics)?;
    std::fs::create_dir_all(&a.out).map_err(|source| Error::Io {
        path: a.out.clone(),
        source,
    })?;
    for (p, h) in &heuristics {
        h.save(&weights_file(&a.out, *p))?;
    }
    bundle.save(&a.out.join("bundle.json"))?;
    bench::write_outputs(&a.out, &report, &bundle.spec)?;
    print!("{}", report.render(&bundle.spec));
    Ok(())
}

fn report(a: &ReportArgs) -> Result<()> {
    let bundle = BenchBundle::load(&a.dir.join("bundle.json"))?;
    let metrics = formats::read_text(&a.dir.join("metrics.csv"))?;
    let timing = formats::read_text(&a.dir.join("timing.csv"))?;
    let rows = bench::rows_from_csv(&metrics, &timing)?;
    print!("{}", bench::render_table(&rows, &bundle.spec));
    Ok(())
}
