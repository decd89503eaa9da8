//! Local refinement of preliminary change point estimates.
//!
//! For each preliminary `nu_k` the window between neighbouring estimates is
//! trimmed, the CUSUM of sample B at `nu_k` is denoised by [`usvt`], and the
//! refined estimate maximizes the inner product of sample A's CUSUM path with
//! that denoised direction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cusum::{argmax_first, CusumTriple, PrefixSums, ScalarPrefix};
use crate::error::{Error, Result};
use crate::net_model::NetworkSequence;
use crate::svt::{usvt, UsvtParams};

pub const DEFAULT_REFINE_DELTA: f64 = 0.5;

/// Spectral-threshold constant `C`; the minimum `64 * 2^(1/(4 e^2))` times 1.01.
pub fn default_spectral_constant() -> f64 {
    64.0 * 2f64.powf(1.0 / (4.0 * std::f64::consts::E.powi(2))) * 1.01
}

/// Log-term constant `C_eps`; the minimum 12 times 1.01.
pub const DEFAULT_LOG_CONSTANT: f64 = 12.0 * 1.01;

const ROUNDING_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineConfig {
    pub delta: f64,
    pub tau2: f64,
    /// Base clip level; the clip at `nu_k` is `tau3 * delta_tilde_k`.
    pub tau3: f64,
}

impl RefineConfig {
    pub fn new(delta: f64, tau2: f64, tau3: f64) -> Result<Self> {
        let cfg = Self { delta, tau2, tau3 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidTrim(self.delta));
        }
        if !(self.tau2 >= 0.0) || !(self.tau3 >= 0.0) {
            return Err(Error::ParameterOutOfRange(format!(
                "tau2 = {} and tau3 = {} must be >= 0",
                self.tau2, self.tau3
            )));
        }
        Ok(())
    }
}

/// `tau2 = 0.75 (C sqrt(n rho) + C_eps log T)`.
pub fn spectral_threshold(n: usize, rho_hat: f64, horizon: usize, c: f64, c_eps: f64) -> f64 {
    0.75 * (c * (n as f64 * rho_hat).sqrt() + c_eps * (horizon as f64).ln())
}

pub fn default_refine_params_with(
    n: usize,
    rho_hat: f64,
    horizon: usize,
    c: f64,
    c_eps: f64,
) -> RefineConfig {
    RefineConfig {
        delta: DEFAULT_REFINE_DELTA,
        tau2: spectral_threshold(n, rho_hat, horizon, c, c_eps),
        tau3: rho_hat,
    }
}

pub fn default_refine_params(n: usize, rho_hat: f64, horizon: usize) -> RefineConfig {
    default_refine_params_with(
        n,
        rho_hat,
        horizon,
        default_spectral_constant(),
        DEFAULT_LOG_CONSTANT,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinedEstimate {
    pub prelim: usize,
    pub estimate: usize,
    pub s: usize,
    pub e: usize,
    pub delta_tilde: f64,
    /// Frobenius norm of the denoised direction.
    pub direction_norm: f64,
    /// Set when the denoised direction was zero and `prelim` was passed through.
    pub fallback: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineResult {
    pub horizon: usize,
    /// Sorted by refined estimate.
    pub estimates: Vec<RefinedEstimate>,
}

impl RefineResult {
    pub fn values(&self) -> Vec<usize> {
        self.estimates.iter().map(|r| r.estimate).collect()
    }

    pub fn any_fallback(&self) -> bool {
        self.estimates.iter().any(|r| r.fallback)
    }
}

/// Trimmed window around `prelim[k]` with interior rounding.
pub fn refine_window(prelim: &[usize], k: usize, horizon: usize, delta: f64) -> (usize, usize) {
    let prev = if k == 0 { 0 } else { prelim[k - 1] };
    let next = prelim.get(k + 1).copied().unwrap_or(horizon);
    let nu = prelim[k];
    let s = (prev as f64 + delta * (nu - prev) as f64 - ROUNDING_SLACK).ceil() as usize;
    let e = (next as f64 - delta * (next - nu) as f64 + ROUNDING_SLACK).floor() as usize;
    (s, e)
}

pub fn local_refine(
    seq_a: &NetworkSequence,
    seq_b: &NetworkSequence,
    prelim: &[usize],
    config: &RefineConfig,
) -> Result<RefineResult> {
    if seq_a.n() != seq_b.n() || seq_a.len() != seq_b.len() {
        return Err(Error::DimensionMismatch(format!(
            "samples of shape (T={}, n={}) and (T={}, n={})",
            seq_a.len(),
            seq_a.n(),
            seq_b.len(),
            seq_b.n()
        )));
    }
    local_refine_prefix(
        &PrefixSums::new(seq_a),
        &PrefixSums::new(seq_b),
        prelim,
        config,
    )
}

/// Same as [`local_refine`] over precomputed prefix sums.
pub fn local_refine_prefix(
    pa: &PrefixSums,
    pb: &PrefixSums,
    prelim: &[usize],
    config: &RefineConfig,
) -> Result<RefineResult> {
    config.validate()?;
    if pa.order() != pb.order() || pa.horizon() != pb.horizon() {
        return Err(Error::DimensionMismatch(
            "samples must share shape".to_string(),
        ));
    }
    let horizon = pa.horizon();
    if let Some(&bad) = prelim.iter().find(|&&v| v == 0 || v >= horizon) {
        return Err(Error::PrelimOutOfRange {
            horizon,
            detail: format!("estimate {bad} is outside 1..{}", horizon.saturating_sub(1)),
        });
    }
    if prelim.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::PrelimOutOfRange {
            horizon,
            detail: "estimates must be strictly increasing".to_string(),
        });
    }
    let mut estimates = (0..prelim.len())
        .into_par_iter()
        .map(|k| refine_one(pa, pb, prelim, k, config))
        .collect::<Result<Vec<_>>>()?;
    estimates.sort_by_key(|r| r.estimate);
    Ok(RefineResult { horizon, estimates })
}

fn refine_one(
    pa: &PrefixSums,
    pb: &PrefixSums,
    prelim: &[usize],
    k: usize,
    config: &RefineConfig,
) -> Result<RefinedEstimate> {
    let nu = prelim[k];
    let (s, e) = refine_window(prelim, k, pa.horizon(), config.delta);
    if !(s < nu && nu < e) {
        return Err(Error::EmptyInterval { estimate: nu, s, e });
    }
    let delta_tilde = (((e - nu) * (nu - s)) as f64 / (e - s) as f64).sqrt();
    let direction_b = pb.cusum(CusumTriple::new(s, nu, e, pb.horizon())?)?;
    let clip = config.tau3 * delta_tilde;
    let direction = if clip > 0.0 {
        usvt(&direction_b, UsvtParams::new(config.tau2, clip)?)?
    } else {
        crate::matrix::SymMatrix::zeros(pa.order())
    };
    let direction_norm = direction.frobenius();
    let fallback = direction_norm == 0.0;
    let estimate = if fallback {
        nu
    } else {
        let profile = projected_profile(pa, &direction, s, e);
        let (i, _) = argmax_first(&profile).expect("window holds nu");
        s + 1 + i
    };
    Ok(RefinedEstimate {
        prelim: nu,
        estimate,
        s,
        e,
        delta_tilde,
        direction_norm,
        fallback,
    })
}

/// `<A~(s,e)(t), W>` for `t` in `s+1..e-1`, as the scalar CUSUM of `y(i) = <A_i, W>`.
pub fn projected_profile(
    pa: &PrefixSums,
    weight: &crate::matrix::SymMatrix,
    s: usize,
    e: usize,
) -> Vec<f64> {
    let series = pa.project(weight, s, e);
    let prefix = ScalarPrefix::new(&series);
    let len = e - s;
    (1..len).map(|t| prefix.cusum(0, t, len)).collect()
}
