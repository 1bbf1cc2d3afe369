//! Copula-based synthetic tabular data.
//!
//! Fits a Gaussian or Student-t copula plus empirical marginals to a table
//! of numeric and categorical columns, samples synthetic tables that
//! preserve both the marginal distributions and the dependence structure,
//! and scores synthetic-vs-real fidelity (correlation proximity,
//! Kolmogorov-Smirnov marginal tests, descriptive-statistic errors,
//! chi-squared independence on categorical cross-tabulations). A SMOTE
//! generator is included as a comparison baseline.
//!
//! The high-level entry points are [`pipeline::fit`] and
//! [`pipeline::generate`]; everything they compose is public as well.
//! All sampling is driven by explicit [`numerics::RandomSource`] streams,
//! so every output is a pure function of inputs and seed, independent of
//! thread count.

pub mod categorical;
pub mod copula;
pub mod csv_io;
pub mod error;
pub mod marginal;
pub mod numerics;
mod par;
pub mod pipeline;
pub mod quality;
pub mod smote;
pub mod table;

pub use error::{Error, Result};
pub use par::configure_threads;
