//! Seeded Monte Carlo experiments over scenario grids.

pub mod seeds;
pub mod stats;
pub mod sweep;
pub mod trial;

pub use seeds::{Stream, TrialSeeds};
pub use sweep::{
    assemble, build_scenario, localization_curve, localization_from, phase_sweep, run_cell,
    run_sweep, summarize_cell, Axis, CellSpec, CellSummary, Family, LocalizationReport, Scaling,
    SweepGrid, SweepOutput,
};
pub use trial::{
    run_trial, NbsSettings, Pipeline, RefineSettings, SampleMode, TrialConfig, TrialReport,
};
