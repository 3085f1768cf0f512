//! Geometric primitives: points, cubes, domains and scalar fields.

mod cube;
mod domain;
mod field;
mod point;

pub use cube::{exp2i, DyadicCube, GeneralCube};
pub use domain::{
    BoundaryNode, BoundaryPiece, Domain, DomainDescriptor, GraphPerturbedDisk, Polygon, Window,
};
pub use field::ScalarField;
pub use point::{
    point_segment_dist, project_to_segment, segment_segment_dist, segments_intersect, Point, Rect,
};


