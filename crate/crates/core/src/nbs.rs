//! Network Binary Segmentation.
//!
//! Random intervals are clipped to the current search range, trimmed by a
//! fraction `delta` at both ends, and scanned for the time maximizing the
//! inner product of the CUSUM matrices of two independent samples. The best
//! interval wins; if its score exceeds `tau1` the maximizer is recorded and
//! the search recurses on both sides, reusing the full interval set.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::cusum::{argmax_first, PrefixSums};
use crate::error::{Error, Result};
use crate::intervals::IntervalSet;
use crate::net_model::NetworkSequence;

pub const DEFAULT_DELTA: f64 = 0.05;
pub const DEFAULT_C_TAU: f64 = 1.5;

// absorbs representation error in `delta * len` before rounding
const ROUNDING_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NbsConfig {
    pub tau1: f64,
    pub delta: f64,
    pub intervals: IntervalSet,
}

impl NbsConfig {
    pub fn new(tau1: f64, delta: f64, intervals: IntervalSet) -> Result<Self> {
        let cfg = Self {
            tau1,
            delta,
            intervals,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::InvalidTrim(self.delta));
        }
        if !(self.tau1 > 0.0) {
            return Err(Error::ParameterOutOfRange(format!(
                "threshold tau1 must be positive, got {}",
                self.tau1
            )));
        }
        Ok(())
    }
}

/// One accepted change point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub estimate: usize,
    /// Winning inner-product score `a_{m*}`.
    pub score: f64,
    /// Trimmed winning interval.
    pub s: usize,
    pub e: usize,
    /// Recursion depth, 0 for the first split.
    pub depth: usize,
    /// Index of the winning interval in the interval set.
    pub interval: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub horizon: usize,
    /// Sorted by estimate.
    pub detections: Vec<Detection>,
}

impl DetectionResult {
    pub fn estimates(&self) -> Vec<usize> {
        self.detections.iter().map(|d| d.estimate).collect()
    }

    pub fn len(&self) -> usize {
        self.detections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detections.is_empty()
    }
}

/// Trimmed interval `(ceil(s' + delta L), floor(e' - delta L))`, `L = e' - s'`.
pub fn trim(s: usize, e: usize, delta: f64) -> (usize, usize) {
    let len = (e - s) as f64;
    let lo = (s as f64 + delta * len - ROUNDING_SLACK).ceil() as usize;
    let hi = (e as f64 - delta * len + ROUNDING_SLACK).floor() as usize;
    (lo, hi)
}

/// `c_tau * rho_hat * n * log(T)^{3/2}`.
pub fn default_tau1(n: usize, rho_hat: f64, horizon: usize, c_tau: f64) -> f64 {
    c_tau * rho_hat * n as f64 * (horizon as f64).ln().powf(1.5)
}

pub fn nbs_detect(
    seq_a: &NetworkSequence,
    seq_b: &NetworkSequence,
    s: usize,
    e: usize,
    config: &NbsConfig,
) -> Result<DetectionResult> {
    if seq_a.n() != seq_b.n() || seq_a.len() != seq_b.len() {
        return Err(Error::DimensionMismatch(format!(
            "samples of shape (T={}, n={}) and (T={}, n={})",
            seq_a.len(),
            seq_a.n(),
            seq_b.len(),
            seq_b.n()
        )));
    }
    config.validate()?;
    nbs_detect_prefix(
        &PrefixSums::new(seq_a),
        &PrefixSums::new(seq_b),
        s,
        e,
        config,
    )
}

/// Same as [`nbs_detect`] over precomputed prefix sums.
pub fn nbs_detect_prefix(
    pa: &PrefixSums,
    pb: &PrefixSums,
    s: usize,
    e: usize,
    config: &NbsConfig,
) -> Result<DetectionResult> {
    config.validate()?;
    if pa.order() != pb.order() || pa.horizon() != pb.horizon() {
        return Err(Error::DimensionMismatch(
            "samples must share shape".to_string(),
        ));
    }
    let horizon = pa.horizon();
    if !(s < e && e <= horizon) {
        return Err(Error::IndexOrder {
            s,
            t: s,
            e,
            len: horizon,
        });
    }
    let mut cache: HashMap<(usize, usize), Option<(usize, f64)>> = HashMap::new();
    let mut detections = Vec::new();
    let mut stack = vec![(s, e, 0usize)];
    while let Some((s, e, depth)) = stack.pop() {
        let mut best: Option<(usize, f64, usize, usize, usize)> = None;
        let mut best_score = f64::NEG_INFINITY;
        for (m, &(alpha, beta)) in config.intervals.pairs.iter().enumerate() {
            let (lo, hi) = (s.max(alpha), e.min(beta));
            let mut score = -1.0;
            let mut cand = None;
            if lo < hi {
                let (sm, em) = trim(lo, hi, config.delta);
                if em >= sm + 2 {
                    let hit = *cache.entry((sm, em)).or_insert_with(|| {
                        let profile = pa.inner_profile(pb, sm, em).expect("validated window");
                        argmax_first(&profile).map(|(k, v)| (sm + 1 + k, v))
                    });
                    if let Some((b, v)) = hit {
                        score = v;
                        cand = Some((b, sm, em));
                    }
                }
            }
            if score > best_score {
                best_score = score;
                best = cand.map(|(b, sm, em)| (b, score, sm, em, m));
            }
        }
        if let Some((b, score, sm, em, m)) = best {
            if score > config.tau1 {
                detections.push(Detection {
                    estimate: b,
                    score,
                    s: sm,
                    e: em,
                    depth,
                    interval: m,
                });
                // pushed right first so the left side is explored first
                stack.push((b + 1, e, depth + 1));
                stack.push((s, b, depth + 1));
            }
        }
    }
    detections.sort_by_key(|d| d.estimate);
    Ok(DetectionResult {
        horizon,
        detections,
    })
}
