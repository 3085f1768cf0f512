//! Crate-wide error type.

use std::fmt;

use crate::geometry::DyadicCube;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Argument outside an operation's stated domain.
    Domain(String),
    /// Invalid or degenerate geometry (bad polygon, empty covering, ...).
    Geometry(String),
    /// Adaptive quadrature ran out of budget before reaching the tolerance.
    Quadrature {
        context: String,
        achieved: f64,
        error_bound: f64,
    },
    /// No interior Whitney cube qualifies as the reflection of `cube`.
    Reflection { cube: DyadicCube },
    /// Partition-of-unity denominator vanished at a covered sample point.
    PartitionGap { x: f64, y: f64 },
    /// A sampler produced no admissible cubes or probes.
    EmptyReport,
    /// The operation needs a capability the input lacks (e.g. a gradient).
    Capability(String),
    /// Integrand too rough at the evaluation point for a proper integral.
    Roughness(String),
    /// A non-finite sample poisoned a quadrature or mean.
    Poisoned(String),
    /// Invalid run configuration.
    Config(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Geometry(msg) => write!(f, "geometry error: {msg}"),
            Error::Quadrature {
                context,
                achieved,
                error_bound,
            } => write!(
                f,
                "quadrature failure in {context}: achieved {achieved} with error bound {error_bound}"
            ),
            Error::Reflection { cube } => write!(
                f,
                "reflection failure: no interior cube for exterior cube level {} at ({}, {})",
                cube.level, cube.ix, cube.iy
            ),
            Error::PartitionGap { x, y } => {
                write!(f, "partition gap: denominator vanished at ({x}, {y})")
            }
            Error::EmptyReport => write!(f, "no admissible cubes or probes were produced"),
            Error::Capability(msg) => write!(f, "capability error: {msg}"),
            Error::Roughness(msg) => write!(f, "roughness error: {msg}"),
            Error::Poisoned(msg) => write!(f, "poisoned value: {msg}"),
            Error::Config(msg) => write!(f, "config error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
