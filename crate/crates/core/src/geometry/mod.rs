//! Planar convex-polygon primitives shared by every other module.

mod polygon;
mod vector;

pub use polygon::{convex_hull, distance, intersect_convex, intersection_area, overlaps, ConvexPolygon, MIN_AREA};
pub use vector::{normalize_angle, Point2, Pose2, Vec2};

/// Coincidence tolerance in meters.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("polygon is not convex")]
    NotConvex,
    #[error("degenerate polygon: fewer than three distinct, non-collinear vertices")]
    Degenerate,
    #[error("non-finite vertex coordinate")]
    NonFinite,
}
