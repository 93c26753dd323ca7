//! Duplication–divergence random graphs and the tagged-degree
//! birth–catastrophe processes that describe them.
//!
//! Module map:
//! - [`model`]: parameterizations, thinning laws, generator rows, regime
//!   classification and the scalar root solvers behind the phase diagram.
//! - [`graph`]: the full graph simulator and degree censuses.
//! - [`tagged`]: continuous and discrete tagged-degree simulators, the
//!   quantile coupling and the time shift between them.
//! - [`forward`]: deterministic expected-degree solvers.
//! - [`stats`]: Monte Carlo experiments and their reports.

// `!(x > 0.0)` style guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod forward;
pub mod graph;
pub mod model;
pub mod rng;
pub mod special;
pub mod stats;
pub mod tagged;

pub use forward::DistributionVector;
pub use graph::{DDGraph, DegreeCensus};
pub use model::{
    classify, q_row, ModelError, ModelSpec, Process, QRow, Region, RegimeReport, RowVariant,
    ThinningFamily, Verdict,
};
pub use tagged::{PathSample, TaggedVariant};
