//! Grids of scenarios, Monte Carlo sweeps and their summaries.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::seeds::{Stream, TrialSeeds};
use super::stats::{linear_regression, mean, median, spearman, Regression, Spearman};
use super::trial::{run_trial, TrialConfig, TrialReport};
use crate::error::{Error, Result};
use crate::intervals::recommended_m;
use crate::net_model::{
    lecam_hard_instance, sbm_theta, scenario_parameters, PiecewiseScenario, SbmSpec, Segment, Side,
};

/// Scenario family of a sweep cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    /// Balanced `r`-block model alternating between assortative and
    /// disassortative connectivity at `k` equally spaced change points.
    /// Every entry jumps by `kappa0 * rho`.
    SbmSwap,
    /// The assortative block model for all times, no change points.
    SbmNull,
    /// Two-community hard instance; side drawn per trial when `side` is absent.
    HardInstance { side: Option<Side> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub family: Family,
    pub n: usize,
    pub horizon: usize,
    /// Spacing between consecutive change points (`Delta` of the hard instance).
    pub spacing: usize,
    pub k: usize,
    pub rho: f64,
    pub kappa0: f64,
    pub r: usize,
    /// Number of random intervals; `recommended_m(T, spacing)` when absent.
    pub m: Option<usize>,
    /// Multiplier applied to the threshold constant `c_tau`.
    #[serde(default = "one")]
    pub tau1_mult: f64,
    #[serde(default = "yes")]
    pub self_loops: bool,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", content = "values", rename_all = "snake_case")]
pub enum Axis {
    N(Vec<usize>),
    Horizon(Vec<usize>),
    Spacing(Vec<usize>),
    Rho(Vec<f64>),
    Kappa0(Vec<f64>),
    R(Vec<usize>),
    M(Vec<usize>),
    Tau1Mult(Vec<f64>),
}

impl Axis {
    fn len(&self) -> usize {
        match self {
            Axis::N(v) | Axis::Horizon(v) | Axis::Spacing(v) | Axis::R(v) | Axis::M(v) => v.len(),
            Axis::Rho(v) | Axis::Kappa0(v) | Axis::Tau1Mult(v) => v.len(),
        }
    }

    fn apply(&self, i: usize, cell: &mut CellSpec) {
        match self {
            Axis::N(v) => cell.n = v[i],
            Axis::Horizon(v) => cell.horizon = v[i],
            Axis::Spacing(v) => cell.spacing = v[i],
            Axis::Rho(v) => cell.rho = v[i],
            Axis::Kappa0(v) => cell.kappa0 = v[i],
            Axis::R(v) => cell.r = v[i],
            Axis::M(v) => cell.m = Some(v[i]),
            Axis::Tau1Mult(v) => cell.tau1_mult = v[i],
        }
    }
}

/// How spacing and horizon are derived per cell.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scaling {
    /// Use the cell's spacing and horizon as given.
    #[default]
    Fixed,
    /// `spacing = ceil(budget / (rho kappa0^2 n))` and `horizon = (k + 1) spacing`,
    /// holding `rho kappa0^2 n Delta` at `budget`.
    FixedBudget { budget: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub base: CellSpec,
    #[serde(default)]
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub scaling: Scaling,
    pub reps: usize,
    pub base_seed: u64,
    pub trial: TrialConfig,
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::ParameterOutOfRange(
                "a sweep needs at least one replication".into(),
            ));
        }
        if let Some(a) = self.axes.iter().find(|a| a.len() == 0) {
            return Err(Error::ParameterOutOfRange(format!(
                "axis {a:?} has no values"
            )));
        }
        Ok(())
    }

    /// Resolved cells in row-major order over the axes (first axis slowest).
    pub fn cells(&self) -> Result<Vec<CellSpec>> {
        self.validate()?;
        let dims: Vec<usize> = self.axes.iter().map(Axis::len).collect();
        let total: usize = dims.iter().product();
        let mut out = Vec::with_capacity(total);
        for flat in 0..total {
            let mut cell = self.base.clone();
            let mut rem = flat;
            for (axis, &d) in self.axes.iter().zip(&dims).rev() {
                axis.apply(rem % d, &mut cell);
                rem /= d;
            }
            self.resolve(&mut cell)?;
            out.push(cell);
        }
        Ok(out)
    }

    fn resolve(&self, cell: &mut CellSpec) -> Result<()> {
        if let Scaling::FixedBudget { budget } = self.scaling {
            let unit = cell.rho * cell.kappa0 * cell.kappa0 * cell.n as f64;
            if !(unit > 0.0) {
                return Err(Error::ParameterOutOfRange(
                    "fixed-budget scaling needs rho, kappa0 and n positive".into(),
                ));
            }
            cell.spacing = (budget / unit).ceil() as usize;
            cell.horizon = (cell.k + 1) * cell.spacing;
        }
        if cell.m.is_none() {
            cell.m = Some(recommended_m(
                cell.horizon,
                cell.spacing.clamp(1, cell.horizon),
            ));
        }
        Ok(())
    }
}

fn swap_q(r: usize, kappa0: f64, assortative: bool) -> Vec<Vec<f64>> {
    (0..r)
        .map(|a| {
            (0..r)
                .map(|b| {
                    if (a == b) == assortative {
                        1.0
                    } else {
                        1.0 - kappa0
                    }
                })
                .collect()
        })
        .collect()
}

fn sbm_segment(cell: &CellSpec, assortative: bool) -> Result<Segment> {
    let spec = SbmSpec {
        n: cell.n,
        r: cell.r,
        labels: SbmSpec::balanced_labels(cell.n, cell.r),
        q: swap_q(cell.r, cell.kappa0, assortative),
        rho: cell.rho,
        self_loops: cell.self_loops,
    };
    Ok(Segment {
        theta: sbm_theta(&spec)?,
        sbm: Some(spec),
    })
}

/// Scenario of one replication; the hard instance draws its signs and side from `rng`.
pub fn build_scenario<R: Rng + ?Sized>(cell: &CellSpec, rng: &mut R) -> Result<PiecewiseScenario> {
    match &cell.family {
        Family::SbmSwap => {
            let cps: Vec<usize> = (1..=cell.k).map(|j| j * cell.spacing).collect();
            let segments = (0..=cell.k)
                .map(|j| sbm_segment(cell, j % 2 == 0))
                .collect::<Result<Vec<_>>>()?;
            PiecewiseScenario::new(cell.horizon, cps, segments, cell.self_loops)
        }
        Family::SbmNull => PiecewiseScenario::new(
            cell.horizon,
            vec![],
            vec![sbm_segment(cell, true)?],
            cell.self_loops,
        ),
        Family::HardInstance { side } => {
            let side = side.unwrap_or_else(|| {
                if rng.gen::<bool>() {
                    Side::Early
                } else {
                    Side::Late
                }
            });
            let sc = lecam_hard_instance(
                cell.n,
                cell.rho,
                cell.kappa0,
                cell.spacing,
                cell.horizon,
                side,
                rng,
            )?;
            Ok(if cell.self_loops {
                sc
            } else {
                sc.without_self_loops()
            })
        }
    }
}

fn rank_of(cell: &CellSpec) -> Option<usize> {
    match cell.family {
        Family::SbmSwap | Family::SbmNull => Some(cell.r),
        Family::HardInstance { .. } => Some(2),
    }
}

/// Per-cell aggregate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell: usize,
    pub spec: CellSpec,
    /// Sparsity and normalized jump of the realized scenario.
    pub rho_eff: f64,
    pub kappa0_eff: f64,
    /// `sqrt(rho) kappa0`.
    pub snr: f64,
    /// `rho kappa0^2 n Delta`.
    pub signal_budget: f64,
    /// `kappa0^2 n^2 rho`.
    pub rate_coordinate: f64,
    pub reps: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub baseline_successes: usize,
    pub baseline_rate: f64,
    pub exact_count: usize,
    pub mean_k_hat: f64,
    pub median_error: Option<f64>,
    pub median_prelim_error: Option<f64>,
    /// Means over trials where both refined and preliminary errors are finite.
    pub mean_error_matched: Option<f64>,
    pub mean_prelim_error_matched: Option<f64>,
    pub refine_fallbacks: usize,
    pub refine_failures: usize,
}

fn cell_coordinates(cell: &CellSpec) -> Result<(f64, f64)> {
    let mut rng = TrialSeeds::new(0, 0, 0).rng(Stream::Scenario);
    let sc = match &cell.family {
        Family::SbmNull => return Ok((cell.rho, 0.0)),
        _ => build_scenario(cell, &mut rng)?,
    };
    let p = scenario_parameters(&sc)?;
    Ok((p.rho, p.kappa0.unwrap_or(0.0)))
}

pub fn summarize_cell(
    index: usize,
    cell: &CellSpec,
    trials: &[TrialReport],
) -> Result<CellSummary> {
    let (rho_eff, kappa0_eff) = cell_coordinates(cell)?;
    let reps = trials.len();
    let successes = trials.iter().filter(|t| t.success).count();
    let baseline_successes = trials.iter().filter(|t| t.baseline_success).count();
    let finite: Vec<f64> = trials
        .iter()
        .filter_map(|t| t.max_loc_error.map(|e| e as f64))
        .collect();
    let prelim: Vec<f64> = trials
        .iter()
        .filter_map(|t| t.prelim_loc_error.map(|e| e as f64))
        .collect();
    let (matched_ref, matched_pre): (Vec<f64>, Vec<f64>) = trials
        .iter()
        .filter_map(|t| match (t.max_loc_error, t.prelim_loc_error) {
            (Some(a), Some(b)) => Some((a as f64, b as f64)),
            _ => None,
        })
        .unzip();
    let n = cell.n as f64;
    Ok(CellSummary {
        cell: index,
        spec: cell.clone(),
        rho_eff,
        kappa0_eff,
        snr: rho_eff.sqrt() * kappa0_eff,
        signal_budget: rho_eff * kappa0_eff * kappa0_eff * n * cell.spacing as f64,
        rate_coordinate: kappa0_eff * kappa0_eff * n * n * rho_eff,
        reps,
        successes,
        success_rate: successes as f64 / reps.max(1) as f64,
        baseline_successes,
        baseline_rate: baseline_successes as f64 / reps.max(1) as f64,
        exact_count: finite.len(),
        mean_k_hat: trials.iter().map(|t| t.k_hat as f64).sum::<f64>() / reps.max(1) as f64,
        median_error: median(&finite),
        median_prelim_error: median(&prelim),
        mean_error_matched: mean(&matched_ref),
        mean_prelim_error_matched: mean(&matched_pre),
        refine_fallbacks: trials.iter().map(|t| t.refine_fallbacks).sum(),
        refine_failures: trials.iter().filter(|t| t.refine_failed).count(),
    })
}

/// Runs every replication of one cell; replications run in parallel and are
/// returned in replication order.
pub fn run_cell(grid: &SweepGrid, index: usize, cell: &CellSpec) -> Result<Vec<TrialReport>> {
    let mut trial = grid.trial.clone();
    trial.nbs.m = cell.m.expect("resolved cell");
    trial.nbs.c_tau *= cell.tau1_mult;
    (0..grid.reps as u64)
        .into_par_iter()
        .map(|rep| {
            let seeds = TrialSeeds::new(grid.base_seed, index as u64, rep);
            let scenario = build_scenario(cell, &mut seeds.rng(Stream::Scenario))?;
            run_trial(&scenario, seeds, &trial, rank_of(cell))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub grid: SweepGrid,
    pub cells: Vec<CellSummary>,
    pub trials: Vec<TrialReport>,
    /// Association between `snr` and `success_rate` across cells.
    pub trend: Spearman,
    pub version: String,
}

pub fn assemble(
    grid: &SweepGrid,
    cells: Vec<CellSummary>,
    trials: Vec<TrialReport>,
) -> SweepOutput {
    let x: Vec<f64> = cells.iter().map(|c| c.snr).collect();
    let y: Vec<f64> = cells.iter().map(|c| c.success_rate).collect();
    SweepOutput {
        grid: grid.clone(),
        trend: spearman(&x, &y),
        cells,
        trials,
        version: crate::VERSION.to_string(),
    }
}

pub fn run_sweep(grid: &SweepGrid) -> Result<SweepOutput> {
    let specs = grid.cells()?;
    let mut cells = Vec::with_capacity(specs.len());
    let mut trials = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        let reports = run_cell(grid, i, spec)?;
        cells.push(summarize_cell(i, spec, &reports)?);
        trials.extend(reports);
    }
    Ok(assemble(grid, cells, trials))
}

/// Success rates along the grid with the signal-to-noise coordinate exposed.
pub fn phase_sweep(grid: &SweepGrid) -> Result<SweepOutput> {
    run_sweep(grid)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub cell: usize,
    pub rate_coordinate: f64,
    pub median_error: f64,
    pub used: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub points: Vec<CurvePoint>,
    /// Cells left out of the fit, with the reason.
    pub dropped: Vec<(usize, String)>,
    /// Fit of `log(median error)` against `log(kappa0^2 n^2 rho)`.
    pub fit: Option<Regression>,
    pub mean_error_matched: Option<f64>,
    pub mean_prelim_error_matched: Option<f64>,
    pub sweep: SweepOutput,
}

/// A cell enters the fit with at least this fraction of finite errors.
pub const MIN_USABLE_FRACTION: f64 = 0.5;

pub fn localization_curve(grid: &SweepGrid) -> Result<LocalizationReport> {
    Ok(localization_from(run_sweep(grid)?))
}

/// Fits the localization curve of a finished sweep.
pub fn localization_from(sweep: SweepOutput) -> LocalizationReport {
    let mut points = Vec::new();
    let mut dropped = Vec::new();
    for c in &sweep.cells {
        match c.median_error {
            _ if (c.exact_count as f64) < MIN_USABLE_FRACTION * c.reps as f64 => dropped.push((
                c.cell,
                format!("only {} of {} trials usable", c.exact_count, c.reps),
            )),
            Some(m) if m > 0.0 => points.push(CurvePoint {
                cell: c.cell,
                rate_coordinate: c.rate_coordinate,
                median_error: m,
                used: c.exact_count,
            }),
            _ => dropped.push((c.cell, "median error at the floor 0".to_string())),
        }
    }
    let x: Vec<f64> = points.iter().map(|p| p.rate_coordinate.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.median_error.ln()).collect();
    let (mut refined, mut prelim) = (Vec::new(), Vec::new());
    for t in &sweep.trials {
        if let (Some(a), Some(b)) = (t.max_loc_error, t.prelim_loc_error) {
            refined.push(a as f64);
            prelim.push(b as f64);
        }
    }
    LocalizationReport {
        fit: linear_regression(&x, &y, 0.95),
        points,
        dropped,
        mean_error_matched: mean(&refined),
        mean_prelim_error_matched: mean(&prelim),
        sweep,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::trial::{NbsSettings, Pipeline};

    fn base() -> CellSpec {
        CellSpec {
            family: Family::SbmSwap,
            n: 10,
            horizon: 40,
            spacing: 20,
            k: 1,
            rho: 0.5,
            kappa0: 0.5,
            r: 2,
            m: None,
            tau1_mult: 1.0,
            self_loops: true,
        }
    }

    fn grid(axes: Vec<Axis>) -> SweepGrid {
        SweepGrid {
            base: base(),
            axes,
            scaling: Scaling::Fixed,
            reps: 2,
            base_seed: 1,
            trial: TrialConfig::new(Pipeline::Nbs, NbsSettings::with_m(1)),
        }
    }

    #[test]
    fn cartesian_order() {
        let g = grid(vec![Axis::N(vec![4, 6]), Axis::Rho(vec![0.1, 0.2, 0.3])]);
        let cells = g.cells().unwrap();
        assert_eq!(cells.len(), 6);
        assert_eq!((cells[0].n, cells[0].rho), (4, 0.1));
        assert_eq!((cells[1].n, cells[1].rho), (4, 0.2));
        assert_eq!((cells[3].n, cells[3].rho), (6, 0.1));
        assert_eq!(cells[0].m, Some(recommended_m(40, 20)));
    }

    #[test]
    fn empty_axis_rejected() {
        assert!(grid(vec![Axis::Kappa0(vec![])]).cells().is_err());
        let mut g = grid(vec![]);
        g.reps = 0;
        assert!(g.validate().is_err());
    }

    #[test]
    fn budget_scaling() {
        let mut g = grid(vec![Axis::Kappa0(vec![0.1, 0.2])]);
        g.scaling = Scaling::FixedBudget { budget: 10.0 };
        let cells = g.cells().unwrap();
        // 10 / (0.5 * 0.01 * 10) = 200
        assert_eq!(cells[0].spacing, 200);
        assert_eq!(cells[0].horizon, 400);
        assert_eq!(cells[1].spacing, 50);
    }

    #[test]
    fn swap_jump_size() {
        let sc = build_scenario(&base(), &mut rand::thread_rng()).unwrap();
        let p = scenario_parameters(&sc).unwrap();
        assert!((p.kappa0.unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(p.rho, 0.5);
        assert_eq!(sc.change_points(), &[20]);
    }
}
