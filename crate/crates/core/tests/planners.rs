mod common;

use armplan_core::heuristic::{FeatureMode, Heuristic, HeuristicConfig};
use armplan_core::kinematics::{JointVector, KinematicModel};
use armplan_core::planners::{
    birrt_plan, informed_rrt_star_plan, lazy_path_contraction, neural_plan, neural_replan,
    path_cost, rrt_plan, rrt_star_plan, PlanResult, PlannerKind, PlannerParams, RrtStarTrace,
};
use armplan_core::rng::seeded;
use armplan_core::world::{config_in_collision, path_valid, Profile, Workspace};
use common::*;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn same_except_time(a: &PlanResult, b: &PlanResult) -> bool {
    a.path == b.path
        && a.success == b.success
        && a.iterations == b.iterations
        && a.cost.to_bits() == b.cost.to_bits()
}

#[test]
fn path_cost_examples() {
    assert!(path_cost(&[]).is_err());
    assert_eq!(path_cost(&[JointVector([0.3; 6])]).unwrap(), 0.0);
    let p = [
        JointVector::ZERO,
        JointVector([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        JointVector([1.0, 1.0, 0.0, 0.0, 0.0, 0.0]),
    ];
    assert_eq!(path_cost(&p).unwrap(), 2.0);
    let mut r = p.to_vec();
    r.reverse();
    assert_eq!(path_cost(&r).unwrap(), 2.0);
}

#[test]
fn planner_names_round_trip() {
    for k in PlannerKind::ALL {
        assert_eq!(k.as_str().parse::<PlannerKind>().unwrap(), k);
    }
    assert!("prm".parse::<PlannerKind>().is_err());
}

#[test]
fn invalid_queries_are_rejected() {
    let model = KinematicModel::ur5e();
    let ws = simple_world();
    let mut rng = seeded(1);
    let bad = loop {
        let q = model.sample_uniform(&mut rng);
        if config_in_collision(&ws, &model, &q) {
            break q;
        }
    };
    let ok = free_config(&ws, &model, &mut rng);
    let p = PlannerParams::default();
    assert!(rrt_plan(&ws, &model, &bad, &ok, &p).is_err());
    assert!(birrt_plan(&ws, &model, &ok, &bad, &p).is_err());
    assert!(rrt_star_plan(&ws, &model, &bad, &ok, &p).is_err());
    let outside = JointVector([4.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    assert!(informed_rrt_star_plan(&ws, &model, &ok, &outside, &p, None).is_err());
    let bad_params = PlannerParams {
        step_size: 0.0,
        ..PlannerParams::default()
    };
    assert!(rrt_plan(&ws, &model, &ok, &ok, &bad_params).is_err());
}

#[test]
fn rrt_nearby_query_in_empty_workspace() {
    let model = KinematicModel::ur5e();
    let ws = Workspace::empty(Profile::Simple);
    let mut rng = seeded(2);
    let mut successes = 0;
    for t in 0..20 {
        let (s, g) = free_query(&ws, &model, &mut rng, 0.8, 1.2);
        let r = rrt_plan(
            &ws,
            &model,
            &s,
            &g,
            &PlannerParams::default().with_seed(t).with_iterations(200),
        )
        .unwrap();
        assert_contract(&r, &ws, &model, &s, &g);
        successes += usize::from(r.success);
    }
    assert!(successes >= 19, "{successes} of 20");
}

#[test]
fn ring_world_is_infeasible_across_the_base_joint() {
    let model = KinematicModel::ur5e();
    let ws = ring_world();
    let mut rng = seeded(3);
    for _ in 0..200 {
        let mut q = model.sample_uniform(&mut rng);
        q[0] = 0.0;
        assert!(config_in_collision(&ws, &model, &q));
    }
    let (s, g) = ring_query(&model);
    let p = PlannerParams::default().with_iterations(400);
    for r in [
        rrt_plan(&ws, &model, &s, &g, &p).unwrap(),
        birrt_plan(&ws, &model, &s, &g, &p).unwrap(),
        rrt_star_plan(&ws, &model, &s, &g, &p).unwrap(),
    ] {
        assert!(!r.success);
        assert_eq!(r.iterations, 400);
        assert_contract(&r, &ws, &model, &s, &g);
    }
}

#[test]
fn time_budget_stops_classical_planners() {
    let model = KinematicModel::ur5e();
    let ws = ring_world();
    let (s, g) = ring_query(&model);
    let p = PlannerParams {
        max_iterations: usize::MAX,
        time_budget: Some(0.05),
        ..PlannerParams::default()
    };
    for r in [
        rrt_plan(&ws, &model, &s, &g, &p).unwrap(),
        birrt_plan(&ws, &model, &s, &g, &p).unwrap(),
        informed_rrt_star_plan(&ws, &model, &s, &g, &p, None).unwrap(),
    ] {
        assert!(!r.success);
        assert!(r.wall_time >= 0.05 && r.wall_time < 0.3, "{}", r.wall_time);
    }
}

#[test]
fn birrt_needs_fewer_iterations_than_rrt() {
    let model = KinematicModel::ur5e();
    let ws = Workspace::empty(Profile::Simple);
    let mut rng = seeded(4);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for t in 0..50 {
        let (s, g) = free_query(&ws, &model, &mut rng, 2.0, 4.0);
        let p = PlannerParams::default().with_seed(t).with_iterations(3000);
        let rb = birrt_plan(&ws, &model, &s, &g, &p).unwrap();
        let rr = rrt_plan(&ws, &model, &s, &g, &p).unwrap();
        assert!(rb.success);
        assert_contract(&rb, &ws, &model, &s, &g);
        assert_contract(&rr, &ws, &model, &s, &g);
        a.push(rb.iterations as f64);
        b.push(rr.iterations as f64);
    }
    assert!(
        median(a.clone()) < median(b.clone()),
        "{} vs {}",
        median(a),
        median(b)
    );
}

#[test]
fn birrt_is_symmetric_under_swapping_the_query() {
    let model = KinematicModel::ur5e();
    let ws = simple_world();
    let mut rng = seeded(5);
    let mut agree = 0;
    for t in 0..30 {
        let (s, g) = free_query(&ws, &model, &mut rng, 2.0, 5.0);
        let p = PlannerParams::default().with_seed(t).with_iterations(1500);
        let f = birrt_plan(&ws, &model, &s, &g, &p).unwrap();
        let r = birrt_plan(&ws, &model, &g, &s, &p).unwrap();
        assert_contract(&f, &ws, &model, &s, &g);
        assert_contract(&r, &ws, &model, &g, &s);
        agree += usize::from(f.success == r.success);
    }
    assert!(agree >= 27, "{agree} of 30");
}

#[test]
fn rrt_star_converges_to_the_straight_line() {
    let model = KinematicModel::ur5e();
    let ws = Workspace::empty(Profile::Simple);
    let s = JointVector([-1.0, -1.2, 0.8, 0.3, 0.5, -0.4]);
    let g = JointVector([0.6, -0.4, 1.5, -0.5, 1.3, 0.4]);
    let optimum = s.distance(&g);
    let r = rrt_star_plan(
        &ws,
        &model,
        &s,
        &g,
        &PlannerParams::default().with_iterations(20_000),
    )
    .unwrap();
    assert_contract(&r, &ws, &model, &s, &g);
    assert!(
        r.cost <= 1.1 * optimum,
        "cost {} vs optimum {optimum}",
        r.cost
    );
}

#[test]
fn rrt_star_cost_is_anytime() {
    let model = KinematicModel::ur5e();
    let ws = simple_world();
    let mut rng = seeded(6);
    let queries: Vec<_> = (0..9)
        .map(|_| free_query(&ws, &model, &mut rng, 2.5, 4.0))
        .collect();
    let mut medians = Vec::new();
    for budget in [500, 1000, 2000] {
        let mut costs = Vec::new();
        for (i, (s, g)) in queries.iter().enumerate() {
            let p = PlannerParams::default()
                .with_seed(i as u64)
                .with_iterations(budget);
            let r = rrt_star_plan(&ws, &model, s, g, &p).unwrap();
            assert_contract(&r, &ws, &model, s, g);
            costs.push(r.cost);
        }
        medians.push(median(costs));
    }
    assert!(
        medians[0] >= medians[1] && medians[1] >= medians[2],
        "{medians:?}"
    );
}

#[test]
fn informed_samples_stay_in_the_informed_set() {
    let model = KinematicModel::ur5e();
    let ws = simple_world();
    let mut rng = seeded(7);
    let (s, g) = free_query(&ws, &model, &mut rng, 2.0, 3.0);
    let mut trace = RrtStarTrace::default();
    let r = informed_rrt_star_plan(
        &ws,
        &model,
        &s,
        &g,
        &PlannerParams::default().with_iterations(1500),
        Some(&mut trace),
    )
    .unwrap();
    assert!(r.success);
    assert_contract(&r, &ws, &model, &s, &g);
    assert!(!trace.informed_samples.is_empty());
    for (q, c_best) in &trace.informed_samples {
        assert!(q.distance(&s) + q.distance(&g) <= c_best + 1e-9);
        assert!(model.within_limits(q));
    }
    assert!(trace.improvements.windows(2).all(|w| w[1].1 < w[0].1));
}

#[test]
fn informed_rrt_star_matches_or_beats_rrt_star() {
    let model = KinematicModel::ur5e();
    let ws = simple_world();
    let mut rng = seeded(8);
    let mut wins = 0;
    for t in 0..50 {
        let (s, g) = free_query(&ws, &model, &mut rng, 2.0, 4.0);
        let p = PlannerParams::default().with_seed(t).with_iterations(800);
        let a = informed_rrt_star_plan(&ws, &model, &s, &g, &p, None).unwrap();
        let b = rrt_star_plan(&ws, &model, &s, &g, &p).unwrap();
        assert_contract(&a, &ws, &model, &s, &g);
        wins += usize::from(a.cost <= b.cost);
    }
    assert!(wins >= 30, "{wins} of 50");
}

#[test]
fn planners_are_seed_deterministic() {
    let model = KinematicModel::ur5e();
    let ws = simple_world();
    let mut rng = seeded(9);
    let (s, g) = free_query(&ws, &model, &mut rng, 2.0, 4.0);
    let p = PlannerParams::default().with_seed(42).with_iterations(600);
    let h = Heuristic::new(HeuristicConfig::toy(FeatureMode::Full, 6), 3).unwrap();
    let runs = |_: ()| {
        vec![
            rrt_plan(&ws, &model, &s, &g, &p).unwrap(),
            birrt_plan(&ws, &model, &s, &g, &p).unwrap(),
            rrt_star_plan(&ws, &model, &s, &g, &p).unwrap(),
            informed_rrt_star_plan(&ws, &model, &s, &g, &p, None).unwrap(),
            neural_plan(&ws, &model, &s, &g, &h, &p).unwrap(),
        ]
    };
    for (a, b) in runs(()).iter().zip(runs(()).iter()) {
        assert!(same_except_time(a, b));
    }
}

#[test]
fn neural_plan_connects_adjacent_query_immediately() {
    let model = KinematicModel::ur5e();
    let ws = Workspace::empty(Profile::Simple);
    let h = Heuristic::new(
        HeuristicConfig::for_profile(Profile::Simple, FeatureMode::Full),
        1,
    )
    .unwrap();
    let s = JointVector([0.1, -1.0, 1.0, 0.0, 0.5, 0.0]);
    let g = JointVector([0.2, -1.0, 1.0, 0.0, 0.5, 0.0]);
    let r = neural_plan(&ws, &model, &s, &g, &h, &PlannerParams::default()).unwrap();
    assert!(r.success);
    assert_eq!(r.iterations, 1);
    assert_eq!(r.path, vec![s, g]);
}

#[test]
fn neural_plan_results_honor_the_contract() {
    let model = KinematicModel::ur5e();
    let ws = simple_world();
    let h = Heuristic::new(
        HeuristicConfig::for_profile(Profile::Simple, FeatureMode::Full),
        2,
    )
    .unwrap();
    let mut rng = seeded(10);
    for t in 0..10 {
        let (s, g) = free_query(&ws, &model, &mut rng, 1.0, 4.0);
        let r = neural_plan(
            &ws,
            &model,
            &s,
            &g,
            &h,
            &PlannerParams::default().with_seed(t),
        )
        .unwrap();
        assert_contract(&r, &ws, &model, &s, &g);
    }
}

#[test]
fn contraction_examples() {
    let model = KinematicModel::ur5e();
    let empty = Workspace::empty(Profile::Simple);
    let p = PlannerParams::default();
    let a = JointVector::ZERO;
    let b = JointVector([0.5; 6]);
    let c = JointVector([1.0; 6]);
    assert_eq!(
        lazy_path_contraction(&[a, b, c], &empty, &model, &p),
        vec![a, c]
    );
    assert_eq!(
        lazy_path_contraction(&[a, c], &empty, &model, &p),
        vec![a, c]
    );
    let once = lazy_path_contraction(&[a, b, c, b, a, c], &empty, &model, &p);
    assert_eq!(lazy_path_contraction(&once, &empty, &model, &p), once);

    let ws = simple_world();
    let mut rng = seeded(11);
    for t in 0..10 {
        let (s, g) = free_query(&ws, &model, &mut rng, 2.0, 4.0);
        let r = rrt_plan(&ws, &model, &s, &g, &PlannerParams::default().with_seed(t)).unwrap();
        if !r.success {
            continue;
        }
        let c = lazy_path_contraction(&r.path, &ws, &model, &p);
        assert!(path_cost(&c).unwrap() <= r.cost + 1e-12);
        assert!(path_valid(&ws, &model, &c, &p.motion));
        assert_eq!((c[0], c[c.len() - 1]), (s, g));
    }
}

#[test]
fn replanning_keeps_valid_paths_and_never_returns_invalid_ones() {
    let model = KinematicModel::ur5e();
    let ws = simple_world();
    let h = Heuristic::new(
        HeuristicConfig::for_profile(Profile::Simple, FeatureMode::Full),
        5,
    )
    .unwrap();
    let p = PlannerParams::default();
    let mut rng = seeded(12);
    let (s, g) = free_query(&ws, &model, &mut rng, 2.0, 4.0);
    let r = birrt_plan(&ws, &model, &s, &g, &p).unwrap();
    assert!(r.success);
    assert_eq!(
        neural_replan(&r.path, &ws, &model, &h, &p).unwrap(),
        Some(r.path.clone())
    );
    for t in 0..10 {
        let (s, g) = free_query(&ws, &model, &mut rng, 2.0, 5.0);
        let p = p.clone().with_seed(t);
        if let Some(fixed) = neural_replan(&[s, g], &ws, &model, &h, &p).unwrap() {
            assert!(path_valid(&ws, &model, &fixed, &p.motion));
            assert_eq!((fixed[0], fixed[fixed.len() - 1]), (s, g));
        }
    }
}
