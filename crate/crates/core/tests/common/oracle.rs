//! Independent reference implementations used only by tests.

use armplan_core::kinematics::{JointVector, KinematicModel, DOF};
use armplan_core::world::Workspace;
use nalgebra::{Matrix4, Rotation3, Vector3};

/// Frame origins from explicit 4x4 homogeneous DH transforms.
pub fn fk_frames(model: &KinematicModel, q: &JointVector) -> Vec<[f64; 3]> {
    let b = &model.base_pose;
    let rot = Rotation3::from_euler_angles(b.rpy[0], b.rpy[1], b.rpy[2]);
    let mut t = rot.to_homogeneous();
    t[(0, 3)] = b.translation[0];
    t[(1, 3)] = b.translation[1];
    t[(2, 3)] = b.translation[2];
    let mut out = vec![[t[(0, 3)], t[(1, 3)], t[(2, 3)]]];
    for k in 0..DOF {
        let row = &model.dh[k];
        let theta = q.0[k] + row.theta_offset;
        let rz = Rotation3::from_axis_angle(&Vector3::z_axis(), theta).to_homogeneous();
        let tz = Matrix4::new_translation(&Vector3::new(0.0, 0.0, row.d));
        let tx = Matrix4::new_translation(&Vector3::new(row.a, 0.0, 0.0));
        let rx = Rotation3::from_axis_angle(&Vector3::x_axis(), row.alpha).to_homogeneous();
        t = t * rz * tz * tx * rx;
        out.push([t[(0, 3)], t[(1, 3)], t[(2, 3)]]);
    }
    out
}

fn point_box_distance(p: [f64; 3], min: [f64; 3], max: [f64; 3]) -> f64 {
    let mut s = 0.0;
    for k in 0..3 {
        let e = (min[k] - p[k]).max(p[k] - max[k]).max(0.0);
        s += e * e;
    }
    s.sqrt()
}

/// Brute-force segment/box distance from points spaced at most `spacing` apart.
/// Overestimates the true distance by at most `spacing / 2`.
pub fn sampled_segment_box_distance(
    a: [f64; 3],
    b: [f64; 3],
    min: [f64; 3],
    max: [f64; 3],
    spacing: f64,
) -> f64 {
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2) + (b[2] - a[2]).powi(2)).sqrt();
    let n = ((len / spacing).ceil() as usize).max(1);
    (0..=n)
        .map(|i| {
            let t = i as f64 / n as f64;
            let p = [
                a[0] + t * (b[0] - a[0]),
                a[1] + t * (b[1] - a[1]),
                a[2] + t * (b[2] - a[2]),
            ];
            point_box_distance(p, min, max)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Signed margin of the configuration against obstacles and bounds, from dense
/// sampling of every link axis (1 mm spacing): negative means in collision.
/// Also returns the smallest obstacle surface clearance magnitude for banding.
pub fn sampled_margin(ws: &Workspace, model: &KinematicModel, q: &JointVector) -> f64 {
    let frames = fk_frames(model, q);
    let mut margin = f64::INFINITY;
    for k in 0..DOF {
        let (a, b, r) = (frames[k], frames[k + 1], model.link_radii[k]);
        for o in &ws.obstacles {
            let min = [0, 1, 2].map(|i| o.center[i] - o.dims[i] / 2.0);
            let max = [0, 1, 2].map(|i| o.center[i] + o.dims[i] / 2.0);
            margin = margin.min(sampled_segment_box_distance(a, b, min, max, 1e-3) - r);
        }
        for i in 0..3 {
            for p in [a, b] {
                margin = margin.min(p[i] - r - ws.bounds.min[i]);
                margin = margin.min(ws.bounds.max[i] - (p[i] + r));
            }
        }
    }
    margin
}
