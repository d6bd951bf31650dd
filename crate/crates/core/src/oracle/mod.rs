//! Ground truth for the detectors.
//!
//! [`enumerate`] computes exact posteriors of tiny worlds by summing over
//! every circumstance; it is the reference every detector is checked against.
//! [`scene`] paints seeded rectangle scenes with known boundaries, and
//! [`score`] measures a boundary probability map against them.

pub mod enumerate;
pub mod scene;
pub mod score;

pub use enumerate::{
    enumerate_joint, enumerate_posterior, Circumstance, JointProbability, Structure, TinyModelSpec,
};
pub use scene::{apply_noise, generate_scene, paint_scene, Rect, Scene, SceneSpec};
pub use score::{score_boundary_map, BoundaryScore};
