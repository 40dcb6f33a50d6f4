//! Exact small-sample confidence regions for multinomial proportions.
//!
//! The crate builds likelihood level-set regions and covering-collection
//! regions for the parameter of a multinomial distribution, together with
//! the classical binomial intervals they are compared against, and evaluates
//! every method by exact enumeration of the data space.
//!
//! Everything here is pure computation over `alloc` collections, so the crate
//! is `no_std`. The `parallel` feature pulls in `std` and spreads the grid
//! sweeps of [`levelset::region_grid`] and [`eval`] over a rayon pool; all
//! reductions stay in index order, so results do not depend on it.

#![no_std]
#![forbid(unsafe_code)]
// `!(a > b)` is used on purpose so NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

mod bounds;
mod error;
mod math;
mod par;

pub mod comparators;
pub mod covering;
pub mod eval;
pub mod levelset;
pub mod simplex;

pub use crate::error::{Error, Result};
pub use crate::simplex::{
    enumerate_simplex, log_pmf, simplex_grid, DiscreteSimplex, LogFactorialTable, OutcomeVector,
    ProbabilityVector, DEFAULT_ENUMERATION_CAP,
};
