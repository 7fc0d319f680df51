mod common;

use armplan_core::kinematics::{
    forward_kinematics, link_segments, JointVector, KinematicModel, DOF,
};
use armplan_core::rng;
use common::oracle;
use proptest::prelude::*;

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[test]
fn fk_matches_homogeneous_transform_oracle() {
    let model = KinematicModel::ur5e();
    let mut r = rng::seeded(11);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let q = model.sample_uniform(&mut r);
        let ours = forward_kinematics(&model, &q).unwrap();
        let theirs = oracle::fk_frames(&model, &q);
        for (a, b) in ours.positions.iter().zip(&theirs) {
            worst = worst.max(dist(*a, *b));
        }
    }
    assert!(worst < 1e-9, "max deviation {worst:e}");
}

#[test]
fn fk_matches_oracle_with_moved_base() {
    let mut model = KinematicModel::ur5e();
    model.base_pose.translation = [0.2, -0.1, 0.05];
    model.base_pose.rpy = [0.3, -0.2, 1.1];
    let mut r = rng::seeded(12);
    for _ in 0..20 {
        let q = model.sample_uniform(&mut r);
        let ours = forward_kinematics(&model, &q).unwrap();
        for (a, b) in ours.positions.iter().zip(oracle::fk_frames(&model, &q)) {
            assert!(dist(*a, b) < 1e-9);
        }
    }
}

#[test]
fn zero_configuration_known_positions() {
    // Standard DH UR5e at q = 0: the arm points along -x at shoulder height.
    let model = KinematicModel::ur5e();
    let f = forward_kinematics(&model, &JointVector::ZERO).unwrap();
    let d1 = model.dh[0].d;
    assert!(dist(f.positions[1], [0.0, 0.0, d1]) < 1e-12);
    let a2 = model.dh[1].a;
    assert!(dist(f.positions[2], [a2, 0.0, d1]) < 1e-12);
}

#[test]
fn link_lengths_do_not_depend_on_configuration() {
    let model = KinematicModel::ur5e();
    let expected = model.link_lengths();
    let mut r = rng::seeded(13);
    for _ in 0..1000 {
        let q = model.sample_uniform(&mut r);
        let caps = link_segments(&model, &q).unwrap();
        for k in 0..DOF {
            assert!((dist(caps[k].a, caps[k].b) - expected[k]).abs() < 1e-12);
            assert_eq!(caps[k].radius, model.link_radii[k]);
        }
    }
}

#[test]
fn non_finite_configuration_is_rejected() {
    let model = KinematicModel::ur5e();
    let mut q = JointVector::ZERO;
    q.0[3] = f64::NAN;
    assert!(forward_kinematics(&model, &q).is_err());
}

proptest! {
    #[test]
    fn frames_stay_within_reach(q in prop::array::uniform6(-std::f64::consts::PI..std::f64::consts::PI)) {
        let model = KinematicModel::ur5e();
        let f = forward_kinematics(&model, &JointVector(q)).unwrap();
        for p in f.positions {
            prop_assert!(dist(p, [0.0; 3]) <= model.reach() + 1e-12);
        }
    }

    #[test]
    fn base_joint_rotates_about_z(q in prop::array::uniform6(-3.0f64..3.0), dq in -1.0f64..1.0) {
        let model = KinematicModel::ur5e();
        let mut q2 = q;
        q2[0] += dq;
        let a = forward_kinematics(&model, &JointVector(q)).unwrap();
        let b = forward_kinematics(&model, &JointVector(q2)).unwrap();
        let (s, c) = dq.sin_cos();
        for (p, r) in a.positions.iter().zip(&b.positions) {
            let rotated = [c * p[0] - s * p[1], s * p[0] + c * p[1], p[2]];
            prop_assert!(dist(rotated, *r) < 1e-12);
        }
    }
}
