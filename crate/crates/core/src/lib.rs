//! Global and sampled top-k hit-ratio curves for ranking evaluation.
//!
//! Given per-user global ranks of a single relevant item out of `N`
//! catalog items, this crate computes the global hit-ratio curve
//! `HR@K`, the sampled hit-ratio `SHR@k` obtained when the item is
//! ranked against `n - 1` sampled negatives (exactly, or by seeded
//! Monte Carlo), and mapping functions `f` that align the two scales
//! so that `SHR@k ~ HR@f(k)`.

pub mod analysis;
pub mod cli;
pub mod dist;
mod error;
pub mod mapping;
pub mod metrics;
pub mod profile;

pub use error::{Error, Result};
