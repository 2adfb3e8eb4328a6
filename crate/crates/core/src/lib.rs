//! Heat kernels, adapted metrics and Gaussian upper bounds for continuous-time
//! random walks on finite weighted graphs.
//!
//! A [`graph::WeightedGraph`] carries a vertex measure `ν` and symmetric edge
//! weights `μ`; the walk jumps from `x` to `y` at rate `μ_xy / ν_x`. The
//! crate computes transition probabilities with certified truncation error,
//! builds adapted metrics, fits regularity constants of decay profiles and
//! evaluates Gaussian-type upper bounds against the computed kernels.
//!
//! ```
//! use heatbound::generators::two_vertex;
//! use heatbound::kernel::heat_kernel;
//!
//! let g = two_vertex(1.0, 1.0, 1.0).unwrap();
//! let k = heat_kernel(&g, 0, 1.0, 1e-12).unwrap();
//! let exact = (1.0 + (-2.0f64).exp()) / 2.0;
//! assert!((k.probs[0] - exact).abs() < 1e-12);
//! ```
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bounds;
pub mod error;
pub mod generators;
pub mod graph;
pub mod grid;
pub mod imp;
pub mod kernel;
pub mod metric;
pub mod regularity;
pub mod report;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/graphs.md")]
    struct Graphs;
    #[doc = include_str!("../../../book/src/kernels.md")]
    struct Kernels;
    #[doc = include_str!("../../../book/src/metric.md")]
    struct Metric;
    #[doc = include_str!("../../../book/src/regularity.md")]
    struct Regularity;
    #[doc = include_str!("../../../book/src/bounds.md")]
    struct Bounds;
    #[doc = include_str!("../../../book/src/maximum-principle.md")]
    struct MaximumPrinciple;
}
