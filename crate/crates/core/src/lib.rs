//! Planar multi-object push-grasp planning for parallel-jaw grippers.
//!
//! The crate is organized bottom-up:
//!
//! - [`geometry`]: convex polygons, clipping, distances.
//! - [`grasping`]: gripper model, the internal region between the jaws,
//!   single-object antipodal diameters and the multi-object diameter.
//! - [`filters`]: the diameter and intersection-area admissibility tests.
//! - [`sim`]: a frictionless quasi-static squeeze simulator used as the
//!   grasp-success oracle.
//! - [`planner`]: candidate generation, ranking, filter-then-simulate search.
//! - [`picking`]: object grouping and the repeated plan-and-execute loop.

pub mod config;
pub mod filters;
pub mod geometry;
pub mod grasping;
pub mod picking;
pub mod planner;
pub mod scene;
pub mod sim;

pub use geometry::{ConvexPolygon, GeometryError, Point2, Pose2, Vec2};
pub use grasping::{Grasp, Gripper};
pub use scene::{ObjectGroup, Scene, SceneObject};
