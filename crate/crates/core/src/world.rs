//! Box-obstacle workspaces and collision queries against the arm's link capsules.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Point3};
use crate::kinematics::{self, Capsule, JointVector, KinematicModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn new(min: Point3, max: Point3) -> Self {
        Self { min, max }
    }

    pub fn cube(half_extent: f64) -> Self {
        Self {
            min: [-half_extent; 3],
            max: [half_extent; 3],
        }
    }

    pub fn center(&self) -> Point3 {
        geom::scale(geom::add(self.min, self.max), 0.5)
    }

    pub fn half_extent(&self) -> Point3 {
        geom::scale(geom::sub(self.max, self.min), 0.5)
    }

    pub fn contains_point(&self, p: Point3) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }

    pub fn intersects(&self, other: &Aabb) -> bool {
        (0..3).all(|k| self.min[k] <= other.max[k] && other.min[k] <= self.max[k])
    }

    /// Euclidean distance from a point to the solid box (0 inside).
    pub fn point_distance(&self, p: Point3) -> f64 {
        let mut s = 0.0;
        for k in 0..3 {
            let e = (self.min[k] - p[k]).max(p[k] - self.max[k]).max(0.0);
            s += e * e;
        }
        s.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxObstacle {
    pub center: Point3,
    /// Full extents (L, W, H) along x, y, z.
    pub dims: Point3,
}

impl BoxObstacle {
    pub fn new(center: Point3, dims: Point3) -> Result<Self> {
        if !dims.iter().all(|d| d.is_finite() && *d > 0.0) || !center.iter().all(|c| c.is_finite())
        {
            return Err(Error::invalid(format!(
                "box needs finite center and positive dims, got {center:?} / {dims:?}"
            )));
        }
        Ok(Self { center, dims })
    }

    pub fn aabb(&self) -> Aabb {
        let h = geom::scale(self.dims, 0.5);
        Aabb::new(geom::sub(self.center, h), geom::add(self.center, h))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Simple,
    Complex,
}

impl Profile {
    /// Number of obstacle slots in the flat obstacle descriptor.
    pub fn capacity(self) -> usize {
        match self {
            Profile::Simple => 6,
            Profile::Complex => 10,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Profile::Simple => "simple",
            Profile::Complex => "complex",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple" => Ok(Profile::Simple),
            "complex" => Ok(Profile::Complex),
            other => Err(Error::invalid(format!("unknown profile {other:?}"))),
        }
    }
}

/// Default world bounds: a cube that contains the default arm's whole reach.
pub const DEFAULT_HALF_EXTENT: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub id: String,
    pub profile: Profile,
    pub capacity: usize,
    pub bounds: Aabb,
    pub obstacles: Vec<BoxObstacle>,
}

impl Workspace {
    pub fn empty(profile: Profile) -> Self {
        Self {
            id: "empty".into(),
            profile,
            capacity: profile.capacity(),
            bounds: Aabb::cube(DEFAULT_HALF_EXTENT),
            obstacles: Vec::new(),
        }
    }

    pub fn with_obstacles(profile: Profile, obstacles: Vec<BoxObstacle>) -> Result<Self> {
        let ws = Self {
            obstacles,
            ..Self::empty(profile)
        };
        ws.validate()?;
        Ok(ws)
    }

    pub fn validate(&self) -> Result<()> {
        if self.obstacles.len() > self.capacity {
            return Err(Error::invalid(format!(
                "{} obstacles exceed capacity {}",
                self.obstacles.len(),
                self.capacity
            )));
        }
        if !(0..3).all(|k| self.bounds.min[k] < self.bounds.max[k]) {
            return Err(Error::invalid("bounds must have positive extent"));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            BoxObstacle::new(o.center, o.dims)?;
            if !o.aabb().intersects(&self.bounds) {
                return Err(Error::invalid(format!(
                    "obstacle {i} lies outside the bounds"
                )));
            }
        }
        Ok(())
    }

    pub fn push(&mut self, obstacle: BoxObstacle) -> Result<()> {
        if self.obstacles.len() >= self.capacity {
            return Err(Error::invalid("workspace is at capacity"));
        }
        self.obstacles.push(obstacle);
        Ok(())
    }

    /// Scalar used to normalize Cartesian positions: the largest half-extent of the bounds.
    pub fn position_scale(&self) -> f64 {
        let h = self.bounds.half_extent();
        h[0].max(h[1]).max(h[2])
    }
}

/// Exact distance between a segment and a solid axis-aligned box (0 when they touch).
///
/// The squared distance along the segment is a convex piecewise quadratic in
/// the segment parameter, with breakpoints where a coordinate crosses a box
/// face plane; each piece is minimized in closed form.
pub fn segment_box_distance(seg: (Point3, Point3), obstacle: &BoxObstacle) -> f64 {
    segment_aabb_distance(seg.0, seg.1, &obstacle.aabb())
}

pub(crate) fn segment_aabb_distance(p: Point3, q: Point3, b: &Aabb) -> f64 {
    let d = geom::sub(q, p);
    let mut breaks = [0.0f64; 8];
    let mut n = 0;
    breaks[n] = 0.0;
    n += 1;
    for k in 0..3 {
        if d[k] != 0.0 {
            for plane in [b.min[k], b.max[k]] {
                let t = (plane - p[k]) / d[k];
                if t > 0.0 && t < 1.0 {
                    breaks[n] = t;
                    n += 1;
                }
            }
        }
    }
    breaks[n] = 1.0;
    n += 1;
    let breaks = &mut breaks[..n];
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));

    let sq_at = |t: f64| -> f64 {
        let mut s = 0.0;
        for k in 0..3 {
            let x = p[k] + t * d[k];
            let e = (b.min[k] - x).max(x - b.max[k]).max(0.0);
            s += e * e;
        }
        s
    };

    let mut best = sq_at(0.0).min(sq_at(1.0));
    for w in breaks.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        if t1 <= t0 {
            continue;
        }
        // On this piece each axis is either inside its slab or beyond one fixed face.
        let tm = 0.5 * (t0 + t1);
        let (mut qa, mut qb) = (0.0, 0.0);
        for k in 0..3 {
            let x = p[k] + tm * d[k];
            let face = if x < b.min[k] {
                b.min[k]
            } else if x > b.max[k] {
                b.max[k]
            } else {
                continue;
            };
            // (p + t d - face)^2 = d^2 t^2 + 2 d (p - face) t + ...
            qa += d[k] * d[k];
            qb += 2.0 * d[k] * (p[k] - face);
        }
        let t = if qa > 0.0 {
            (-qb / (2.0 * qa)).clamp(t0, t1)
        } else {
            t0
        };
        best = best.min(sq_at(t));
    }
    best.sqrt()
}

fn capsule_outside_bounds(c: &Capsule, bounds: &Aabb) -> bool {
    (0..3).any(|k| {
        let lo = c.a[k].min(c.b[k]) - c.radius;
        let hi = c.a[k].max(c.b[k]) + c.radius;
        lo < bounds.min[k] || hi > bounds.max[k]
    })
}

fn capsule_hits_box(c: &Capsule, obstacle: &Aabb) -> bool {
    // Cheap reject on the capsule's bounding box first.
    for k in 0..3 {
        let lo = c.a[k].min(c.b[k]) - c.radius;
        let hi = c.a[k].max(c.b[k]) + c.radius;
        if hi < obstacle.min[k] || lo > obstacle.max[k] {
            return false;
        }
    }
    segment_aabb_distance(c.a, c.b, obstacle) < c.radius
}

pub(crate) fn capsules_collide(ws: &Workspace, caps: &[Capsule]) -> bool {
    caps.iter().any(|c| {
        capsule_outside_bounds(c, &ws.bounds)
            || ws.obstacles.iter().any(|o| capsule_hits_box(c, &o.aabb()))
    })
}

/// True when any link capsule penetrates an obstacle or leaves the world bounds.
///
/// A non-finite configuration is reported as colliding.
pub fn config_in_collision(ws: &Workspace, model: &KinematicModel, q: &JointVector) -> bool {
    match kinematics::link_segments(model, q) {
        Ok(caps) => capsules_collide(ws, &caps),
        Err(_) => true,
    }
}

/// Smallest signed clearance between the link surfaces and any obstacle
/// (negative when penetrating). Bounds are ignored. `f64::INFINITY` without obstacles.
pub fn config_clearance(ws: &Workspace, model: &KinematicModel, q: &JointVector) -> Result<f64> {
    let caps = kinematics::link_segments(model, q)?;
    let mut best = f64::INFINITY;
    for c in &caps {
        for o in &ws.obstacles {
            best = best.min(segment_aabb_distance(c.a, c.b, &o.aabb()) - c.radius);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionCheckParams {
    /// Maximum joint-space L2 spacing between checked interpolation samples (radians).
    pub step: f64,
}

impl Default for MotionCheckParams {
    fn default() -> Self {
        Self { step: 0.05 }
    }
}

impl MotionCheckParams {
    pub fn new(step: f64) -> Result<Self> {
        if step.is_finite() && step > 0.0 {
            Ok(Self { step })
        } else {
            Err(Error::invalid(format!(
                "motion check step must be positive, got {step}"
            )))
        }
    }

    pub fn half(&self) -> Self {
        Self {
            step: self.step * 0.5,
        }
    }
}

/// Checks the straight joint-space segment between `a` and `b` at spacing at most `params.step`,
/// endpoints included.
///
/// The endpoints are put in a canonical order before interpolating so the
/// result is exactly symmetric in its arguments.
pub fn motion_valid(
    ws: &Workspace,
    model: &KinematicModel,
    a: &JointVector,
    b: &JointVector,
    params: &MotionCheckParams,
) -> bool {
    if !a.is_finite() || !b.is_finite() {
        return false;
    }
    let (from, to) = if a.0.partial_cmp(&b.0) == Some(Ordering::Greater) {
        (b, a)
    } else {
        (a, b)
    };
    if config_in_collision(ws, model, from) || config_in_collision(ws, model, to) {
        return false;
    }
    let dist = from.distance(to);
    let n = (dist / params.step).ceil() as usize;
    if n <= 1 {
        return true;
    }
    // Visit interior samples coarse-to-fine so collisions are usually found early.
    let mut stride = (n / 2).next_power_of_two().max(1);
    let mut visited = vec![false; n + 1];
    visited[0] = true;
    visited[n] = true;
    loop {
        let mut i = stride;
        while i < n {
            if !visited[i] {
                visited[i] = true;
                let q = from.lerp(to, i as f64 / n as f64);
                if config_in_collision(ws, model, &q) {
                    return false;
                }
            }
            i += stride;
        }
        if stride == 1 {
            break;
        }
        stride /= 2;
    }
    true
}

/// Every consecutive pair of `path` is a valid motion.
pub fn path_valid(
    ws: &Workspace,
    model: &KinematicModel,
    path: &[JointVector],
    params: &MotionCheckParams,
) -> bool {
    match path {
        [] => false,
        [q] => !config_in_collision(ws, model, q),
        _ => path
            .windows(2)
            .all(|w| motion_valid(ws, model, &w[0], &w[1], params)),
    }
}

/// Flat obstacle descriptor: `(center, dims)` per obstacle in stored order, each
/// divided componentwise by the bounds half-extent (centers relative to the bounds
/// center), zero padded to `capacity * 6` entries.
pub fn obstacle_vector(ws: &Workspace) -> Vec<f64> {
    let mut out = vec![0.0; ws.capacity * 6];
    let c = ws.bounds.center();
    let h = ws.bounds.half_extent();
    for (slot, o) in out.chunks_exact_mut(6).zip(ws.obstacles.iter()) {
        for k in 0..3 {
            slot[k] = (o.center[k] - c[k]) / h[k];
            slot[3 + k] = o.dims[k] / h[k];
        }
    }
    out
}
