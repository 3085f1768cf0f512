//! Executable harmonic analysis on planar domains.
//!
//! This crate turns the classical objects behind T1-type theorems for
//! restricted Calderon-Zygmund operators on Campanato spaces into runnable
//! numerics:
//!
//! - [`moduli`]: moduli of continuity, Dini integrals, the smoothed modulus
//!   `w~(x) = w(x)/int_x^1 w(t)dt/t`, and the radial extremal function.
//! - [`geometry`]: dyadic cubes, bounded Lipschitz domains (balls, polygons,
//!   graph-perturbed disks) with signed distance, boundary quadrature and
//!   windows, and evaluable scalar fields.
//! - [`whitney`]: Whitney coverings of a domain and its exterior, reflected
//!   cubes, and smooth partitions of unity.
//! - [`extension`]: cube means and the Whitney extension operator for
//!   Campanato functions.
//! - [`seminorm`]: Campanato (mean-oscillation) and weighted-Bloch seminorm
//!   estimators with per-cube reports.
//! - [`czkernel`]: homogeneous Calderon-Zygmund kernels, principal-value
//!   evaluation of `T chi_D` by exact annulus cancellation, and the
//!   boundary-integral gradient formula.
//! - [`t1`]: the composed pipelines - the T1 condition check, Bloch decay
//!   profiles, the restricted operator, and the necessity demonstration.
//! - [`cli`]: a reproducible, file-driven command-line front end.

pub mod cli;
pub mod czkernel;
pub mod error;
pub mod extension;
pub mod geometry;
pub mod moduli;
pub mod quad;
pub mod quadtree;
pub mod seminorm;
pub mod t1;
pub mod whitney;

pub use error::{Error, Result};
