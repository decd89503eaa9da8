//! A single seeded replication: simulate, detect, optionally refine, score.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::seeds::{Stream, TrialSeeds};
use crate::cusum::PrefixSums;
use crate::error::Result;
use crate::intervals::draw_intervals;
use crate::nbs::{default_tau1, nbs_detect_prefix, NbsConfig, DEFAULT_C_TAU, DEFAULT_DELTA};
use crate::net_model::{generate_sequence, scenario_parameters, split_sample, PiecewiseScenario};
use crate::refine::{
    default_refine_params_with, default_spectral_constant, local_refine_prefix, RefineConfig,
    DEFAULT_LOG_CONSTANT, DEFAULT_REFINE_DELTA,
};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    Nbs,
    NbsRefine,
}

/// How the two samples required by the detectors are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// Two independent draws from the scenario.
    Independent,
    /// One draw split by time parity; estimates are mapped back by `t -> 2t`.
    Split,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NbsSettings {
    pub m: usize,
    pub length_cap: Option<usize>,
    pub c_tau: f64,
    /// Overrides the data-driven threshold when set.
    pub tau1: Option<f64>,
    pub delta: f64,
}

impl Default for NbsSettings {
    /// `m` is a placeholder; sweeps resolve it per cell.
    fn default() -> Self {
        Self::with_m(1)
    }
}

impl NbsSettings {
    pub fn with_m(m: usize) -> Self {
        Self {
            m,
            length_cap: None,
            c_tau: DEFAULT_C_TAU,
            tau1: None,
            delta: DEFAULT_DELTA,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefineSettings {
    /// Constant `C` multiplying `sqrt(n rho)` in `tau2`.
    pub c: f64,
    /// Constant `C_eps` multiplying `log T` in `tau2`.
    pub c_eps: f64,
    pub delta: f64,
    /// Overrides the base clip level `tau3 = rho_hat` when set.
    pub tau3: Option<f64>,
}

impl Default for RefineSettings {
    fn default() -> Self {
        Self {
            c: default_spectral_constant(),
            c_eps: DEFAULT_LOG_CONSTANT,
            delta: DEFAULT_REFINE_DELTA,
            tau3: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub pipeline: Pipeline,
    #[serde(default = "independent")]
    pub sample_mode: SampleMode,
    #[serde(default)]
    pub nbs: NbsSettings,
    #[serde(default)]
    pub refine: RefineSettings,
    /// Success tolerance as a fraction of the minimal spacing.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn independent() -> SampleMode {
    SampleMode::Independent
}

fn default_tolerance() -> f64 {
    0.1
}

impl TrialConfig {
    pub fn new(pipeline: Pipeline, nbs: NbsSettings) -> Self {
        Self {
            pipeline,
            sample_mode: SampleMode::Independent,
            nbs,
            refine: RefineSettings::default(),
            tolerance: default_tolerance(),
        }
    }
}

/// Wall-clock seconds per stage; kept out of serialized reports.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageTimings {
    pub simulate: f64,
    pub detect: f64,
    pub refine: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub cell: u64,
    pub rep: u64,
    pub seed: u64,
    pub n: usize,
    pub horizon: usize,
    pub k: usize,
    pub delta: usize,
    pub rho: f64,
    pub kappa0: Option<f64>,
    pub r: Option<usize>,
    pub k_hat: usize,
    pub false_positives: usize,
    pub estimates: Vec<usize>,
    /// NBS output before refinement, when refinement ran.
    pub prelim_estimates: Option<Vec<usize>>,
    /// Matched maximum error; `None` stands for infinity (`k_hat != k`).
    pub max_loc_error: Option<usize>,
    pub prelim_loc_error: Option<usize>,
    /// `max_k min_j |eta_k - est_j|`, for diagnostics when `k_hat != k`.
    pub hausdorff: Option<usize>,
    pub tolerance: f64,
    pub success: bool,
    pub baseline_estimates: Vec<usize>,
    pub baseline_success: bool,
    pub tau1: f64,
    pub refine_fallbacks: usize,
    pub refine_failed: bool,
    pub scenario_hash: String,
    #[serde(skip)]
    pub timings: StageTimings,
}

/// SHA-256 of the scenario's JSON encoding.
pub fn scenario_hash(scenario: &PiecewiseScenario) -> String {
    let bytes = serde_json::to_vec(scenario).expect("scenario serializes");
    hex::encode(Sha256::digest(bytes))
}

/// Greedy nearest-neighbour matching, each truth used once.
///
/// Returns the maximal matched distance, or `None` when the counts differ.
pub fn matched_max_error(truth: &[usize], estimates: &[usize]) -> Option<usize> {
    if truth.len() != estimates.len() {
        return None;
    }
    let mut pairs: Vec<(usize, usize, usize)> = truth
        .iter()
        .enumerate()
        .flat_map(|(i, &t)| {
            estimates
                .iter()
                .enumerate()
                .map(move |(j, &e)| (t.abs_diff(e), i, j))
        })
        .collect();
    pairs.sort();
    let mut used_t = vec![false; truth.len()];
    let mut used_e = vec![false; estimates.len()];
    let mut worst = 0;
    for (d, i, j) in pairs {
        if !used_t[i] && !used_e[j] {
            used_t[i] = true;
            used_e[j] = true;
            worst = worst.max(d);
        }
    }
    Some(worst)
}

/// `max_k min_j |eta_k - est_j|`; zero without truths, `None` without estimates.
pub fn one_sided_hausdorff(truth: &[usize], estimates: &[usize]) -> Option<usize> {
    if truth.is_empty() {
        return Some(0);
    }
    if estimates.is_empty() {
        return None;
    }
    truth
        .iter()
        .map(|&t| estimates.iter().map(|&e| t.abs_diff(e)).min().unwrap())
        .max()
}

fn is_success(truth: &[usize], err: Option<usize>, eps: f64) -> bool {
    match err {
        Some(e) => truth.is_empty() || e as f64 <= eps,
        None => false,
    }
}

pub fn run_trial(
    scenario: &PiecewiseScenario,
    seeds: TrialSeeds,
    config: &TrialConfig,
    sbm_rank: Option<usize>,
) -> Result<TrialReport> {
    let mut timings = StageTimings::default();
    let clock = Instant::now();
    let params = if scenario.change_points().is_empty() {
        None
    } else {
        Some(scenario_parameters(scenario)?)
    };
    let horizon = scenario.horizon();
    let (seq_a, seq_b, scale) = match config.sample_mode {
        SampleMode::Independent => {
            let a = generate_sequence(scenario, &mut seeds.rng(Stream::SampleA));
            let b = generate_sequence(scenario, &mut seeds.rng(Stream::SampleB));
            (a, b, 1)
        }
        SampleMode::Split => {
            let full = generate_sequence(scenario, &mut seeds.rng(Stream::SampleA));
            let split = split_sample(&full)?;
            (split.first, split.second, 2)
        }
    };
    let (pa, pb) = (PrefixSums::new(&seq_a), PrefixSums::new(&seq_b));
    timings.simulate = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let used = seq_a.len();
    let rho_hat = seq_a.max_density().max(seq_b.max_density());
    let tau1 = config
        .nbs
        .tau1
        .unwrap_or_else(|| default_tau1(seq_a.n(), rho_hat, used, config.nbs.c_tau));
    // an all-empty sample gives rho_hat = 0; any positive threshold behaves the same
    let tau1 = if tau1 > 0.0 { tau1 } else { f64::MIN_POSITIVE };
    let intervals = draw_intervals(
        used,
        config.nbs.m,
        config.nbs.length_cap,
        &mut seeds.rng(Stream::Intervals),
    )?;
    let nbs_cfg = NbsConfig::new(tau1, config.nbs.delta, intervals)?;
    let detected = nbs_detect_prefix(&pa, &pb, 0, used, &nbs_cfg)?;
    let prelim = detected.estimates();
    timings.detect = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let mut refine_fallbacks = 0;
    let mut refine_failed = false;
    let final_half = match config.pipeline {
        Pipeline::Nbs => prelim.clone(),
        Pipeline::NbsRefine if prelim.is_empty() => prelim.clone(),
        Pipeline::NbsRefine => {
            let mut rcfg: RefineConfig = default_refine_params_with(
                seq_a.n(),
                rho_hat,
                used,
                config.refine.c,
                config.refine.c_eps,
            );
            rcfg.delta = config.refine.delta;
            if let Some(t3) = config.refine.tau3 {
                rcfg.tau3 = t3;
            }
            match local_refine_prefix(&pa, &pb, &prelim, &rcfg) {
                Ok(res) => {
                    refine_fallbacks = res.estimates.iter().filter(|r| r.fallback).count();
                    res.values()
                }
                Err(Error::EmptyInterval { .. }) => {
                    refine_failed = true;
                    prelim.clone()
                }
                Err(e) => return Err(e),
            }
        }
    };
    timings.refine = clock.elapsed().as_secs_f64();

    let estimates: Vec<usize> = final_half.iter().map(|&t| t * scale).collect();
    let prelim_full: Vec<usize> = prelim.iter().map(|&t| t * scale).collect();
    let truth = scenario.change_points();
    let delta = params.as_ref().map_or(horizon, |p| p.delta);
    let eps = config.tolerance * delta as f64;
    let max_loc_error = matched_max_error(truth, &estimates);
    let refined = config.pipeline == Pipeline::NbsRefine;

    let mut brng = seeds.rng(Stream::Baseline);
    let mut baseline: Vec<usize> = (0..truth.len())
        .map(|_| brng.gen_range(1..horizon.max(2)))
        .collect();
    baseline.sort_unstable();
    let baseline_success = is_success(truth, matched_max_error(truth, &baseline), eps);

    Ok(TrialReport {
        cell: seeds.cell,
        rep: seeds.rep,
        seed: seeds.trial_seed(),
        n: scenario.n(),
        horizon,
        k: truth.len(),
        delta,
        rho: params.as_ref().map_or_else(
            || {
                scenario
                    .segments()
                    .iter()
                    .map(|s| s.theta.sparsity())
                    .fold(0.0, f64::max)
            },
            |p| p.rho,
        ),
        kappa0: params.as_ref().and_then(|p| p.kappa0),
        r: sbm_rank,
        k_hat: estimates.len(),
        false_positives: estimates.len().saturating_sub(truth.len()),
        max_loc_error,
        prelim_loc_error: refined
            .then(|| matched_max_error(truth, &prelim_full))
            .flatten(),
        hausdorff: one_sided_hausdorff(truth, &estimates),
        prelim_estimates: refined.then_some(prelim_full),
        estimates,
        tolerance: eps,
        success: is_success(truth, max_loc_error, eps),
        baseline_estimates: baseline,
        baseline_success,
        tau1,
        refine_fallbacks,
        refine_failed,
        scenario_hash: scenario_hash(scenario),
        timings,
    })
}
