//! Motion planning for six-joint serial arms: forward kinematics, box-world
//! collision checking, classical sampling-based planners, and a learned
//! graph-network sampling heuristic driving a bidirectional neural planner.

pub mod bench;
pub mod dataset;
pub mod error;
mod exec;
pub mod formats;
pub mod geom;
pub mod heuristic;
pub mod kinematics;
pub mod planners;
pub mod rng;
pub mod tensor;
pub mod training;
pub mod world;

pub use error::{Error, Result};
pub use kinematics::{JointVector, KinematicModel};
pub use world::{BoxObstacle, MotionCheckParams, Profile, Workspace};
