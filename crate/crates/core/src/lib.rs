//! Change point detection and localization for sequences of random networks.
//!
//! [`nbs`] finds preliminary change points by binary segmentation over random
//! intervals, and [`refine`] sharpens them with thresholded spectral
//! projections. [`net_model`] simulates the data, [`harness`] runs seeded
//! experiments, and [`io`] reads and writes the file formats.

pub mod cusum;
pub mod error;
pub mod harness;
pub mod intervals;
pub mod io;
pub mod matrix;
pub mod nbs;
pub mod net_model;
pub mod refine;
pub mod svt;

pub use error::{Error, Result};

/// Crate version recorded in manifests and sweep summaries.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/cusum.md")]
    mod cusum {}
    #[doc = include_str!("../../../book/src/detection.md")]
    mod detection {}
    #[doc = include_str!("../../../book/src/refinement.md")]
    mod refinement {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
}
