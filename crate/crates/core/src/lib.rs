//! Rough Riemannian metrics on rectangular grid charts.
//!
//! A metric field assigns an SPD matrix to every grid node, with an optional
//! mask of singular nodes that all essential suprema skip. The crate provides
//! the extended distance between metric fields, the endomorphism action and
//! canonical transport, geodesics and midpoints, limits of Cauchy sequences,
//! mollification, the induced volume and length distance, discrete Laplacians
//! and heat flow, Poincaré constants, and a set of explicit example metrics.

pub mod chart;
pub mod constructions;
pub mod error;
pub mod field;
pub mod geometry;
pub mod linalg;
pub mod metric_space;
pub mod operators;
pub mod rmf;

pub use chart::GridChart;
pub use error::{Error, Result};
pub use field::{build_field, validate_rrm, EllField, MetricField, ScalarField};
pub use linalg::{Mat, SpdMatrix};
