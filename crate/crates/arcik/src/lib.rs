//! Inverse kinematics for n-segment constant-curvature continuum manipulators.
//!
//! The manipulator is modeled as a G1 piecewise circular-arc spline whose
//! segment endpoints ("path points") are the optimization variables. A
//! regularized gradient-descent loop drives the path points under three
//! costs: an artificial-potential obstacle field, per-segment length
//! deviation, and end-effector orientation mismatch. The crate also ships
//! a warm-started path-tracking mode, a segment-count scaling benchmark,
//! and the `arcik` CLI front end.
//!
//! Typical embedding:
//!
//! ```
//! use arcik::{solver::{solve, Scenario}, cost::{CostWeights, LengthSpec}};
//! use arcik::geometry::{Aabb, Vec3};
//! use arcik::field::FieldParams;
//!
//! let scenario = Scenario {
//!     start: Vec3::new(0.0, 0.0, 0.0),
//!     base_orientation: Vec3::new(0.0, 0.0, -1.0),
//!     target: Vec3::new(-10.0, 40.0, -260.0),
//!     target_orientation: Some(Vec3::new(0.0, 0.2169, -0.9762).normalized()),
//!     n_segments: 5,
//!     length_spec: LengthSpec::new(45.0, 70.0),
//!     obstacles: vec![],
//!     field_params: FieldParams::new(20.0, 1.0),
//!     workspace_bounds: Aabb::new(Vec3::new(-400.0, -400.0, -400.0), Vec3::new(400.0, 400.0, 100.0)),
//!     weights: CostWeights::default(),
//!     seed: 7,
//!     max_iterations: 500,
//! };
//! let (spline, status) = solve(&scenario).unwrap();
//! assert_eq!(spline.end_point(), scenario.target);
//! # let _ = status;
//! ```

pub mod cost;
pub mod field;
pub mod geometry;
pub mod optimize;
pub mod scenario;
pub mod solver;
pub mod spline;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Segment endpoints coincide; the arc is undefined.
    #[error("degenerate segment: endpoints coincide")]
    DegenerateSegment,
    /// Control point does not lie on the chord bisector plane.
    #[error("control point off the chord bisector plane")]
    ControlPointOffPlane,
    /// The G1 continuation would need a bend of half a turn or more; the
    /// tangent ray never meets the chord bisector plane at a finite point.
    #[error("segment {segment}: tangent continuation requires a bend of half a turn or more")]
    Semicircular { segment: usize },
    /// Stepped configuration collapsed consecutive path points even after
    /// all step halvings.
    #[error("step produced coincident path points after all halvings")]
    StepDegenerate,
    #[error("potential grid would have {nodes} nodes, over the cap of {cap}")]
    GridTooLarge { nodes: u64, cap: u64 },
    #[error("target at distance {distance:.3} mm exceeds maximum reach {max_reach:.3} mm")]
    UnreachableTarget { distance: f64, max_reach: f64 },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid grid file: {0}")]
    BadGridFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
