//! Matchings in `k`-uniform hypergraphs near the minimum vertex-degree threshold.
//!
//! The crate bundles an exact kernel ([`KGraph`]) with the extremal and barrier
//! constructions, exact rational LPs for fractional matchings and covers,
//! exact and randomized matching algorithms, containment checks, the
//! fractional-matching pipeline, and an experiment harness.
//!
//! ```
//! use hypermatch::constructions::build_hknm;
//! use hypermatch::matching::exact_nu;
//!
//! let (h, _) = build_hknm(9, 3, 3)?;
//! assert_eq!(h.min_l_degree(1)?, 13);
//! assert_eq!(exact_nu(&h)?.0, 2);
//! # Ok::<(), hypermatch::Error>(())
//! ```

mod bits;
pub mod constructions;
pub mod containment;
mod error;
pub mod harness;
pub mod hypergraph;
pub mod lp;
pub mod matching;
pub mod numeric;
pub mod pipeline;

pub use error::{Error, Result};
pub use hypergraph::{KGraph, Matching, VertexMap};
pub use numeric::Rational;

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/hypergraphs.md")]
    pub mod hypergraphs {}
    #[doc = include_str!("../../../book/src/constructions.md")]
    pub mod constructions {}
    #[doc = include_str!("../../../book/src/fractional.md")]
    pub mod fractional {}
    #[doc = include_str!("../../../book/src/matching.md")]
    pub mod matching {}
    #[doc = include_str!("../../../book/src/containment.md")]
    pub mod containment {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    pub mod pipeline {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    pub mod experiments {}
}

/// Crate version recorded in experiment reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
