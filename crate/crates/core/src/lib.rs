//! Multicriteria toolkit for planning sustainable farming areas.
//!
//! The pipeline runs in five stages, each in its own module:
//!
//! * [`suitability`] rates land units against crop requirements with the
//!   maximum-limitation rule and derives FAO subclasses such as `S3rf`.
//! * [`rapcorn`] ordinates ordinal attribute scores with SMACOF
//!   multidimensional scaling and reads a 0–100 sustainability index off the
//!   axis running from a synthetic BAD reference to a synthetic GOOD one.
//! * [`ahp`] turns reciprocal pairwise judgments into weights and compiles a
//!   weight/score/class-value hierarchy into overlay coefficients.
//! * [`overlay`] evaluates the per-aspect weighted sums on class rasters and
//!   combines them into the composite planning surface.
//! * [`classify`] splits the composite into priority classes with exact
//!   Fisher–Jenks natural breaks and reports the goodness of variance fit.
//!
//! Raster data lives in [`geodata`], which also reads and writes ESRI ASCII
//! grids.

pub mod ahp;
pub mod classify;
mod error;
pub mod geodata;
pub mod overlay;
pub mod rapcorn;
pub mod suitability;

pub use error::{Error, Result};
pub use geodata::{CategoricalRaster, GridHeader, Legend, NumericRaster};
