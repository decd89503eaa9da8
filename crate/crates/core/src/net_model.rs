//! Inhomogeneous Bernoulli networks: edge-probability matrices, stochastic
//! block models, piecewise-constant scenarios and their samplers.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{packed_index, packed_len, packed_pairs, SymMatrix};

const SYMMETRY_TOL: f64 = 1e-12;

/// Symmetric matrix of edge probabilities, every entry in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymMatrix", into = "SymMatrix")]
pub struct EdgeProbabilityMatrix(SymMatrix);

impl EdgeProbabilityMatrix {
    pub fn new(theta: SymMatrix) -> Result<Self> {
        let n = theta.n();
        for (p, (i, j)) in packed_pairs(n).enumerate() {
            let v = theta.packed()[p];
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::EntryOutOfRange {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
        Ok(Self(theta))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(SymMatrix::from_rows(rows, SYMMETRY_TOL)?)
    }

    pub fn constant(n: usize, p: f64) -> Result<Self> {
        Self::new(SymMatrix::constant(n, p))
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    /// `||Theta||_inf`, the largest edge probability.
    pub fn sparsity(&self) -> f64 {
        self.0.max_abs()
    }

    pub fn without_diagonal(&self) -> Self {
        let mut m = self.0.clone();
        m.zero_diagonal();
        Self(m)
    }
}

impl TryFrom<SymMatrix> for EdgeProbabilityMatrix {
    type Error = Error;
    fn try_from(m: SymMatrix) -> Result<Self> {
        Self::new(m)
    }
}

impl From<EdgeProbabilityMatrix> for SymMatrix {
    fn from(m: EdgeProbabilityMatrix) -> Self {
        m.0
    }
}

/// Symmetric 0/1 adjacency matrix, bit-packed over the upper triangle.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AdjacencyMatrix {
    n: usize,
    bits: Vec<u64>,
}

impl AdjacencyMatrix {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            bits: vec![0; packed_len(n).div_ceil(64)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.get_packed(packed_index(self.n, a, b))
    }

    #[inline]
    pub fn get_packed(&self, p: usize) -> bool {
        (self.bits[p / 64] >> (p % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.set_packed(packed_index(self.n, a, b), value);
    }

    #[inline]
    pub fn set_packed(&mut self, p: usize, value: bool) {
        let mask = 1u64 << (p % 64);
        if value {
            self.bits[p / 64] |= mask;
        } else {
            self.bits[p / 64] &= !mask;
        }
    }

    /// Number of edges counted over unordered pairs, self-loops included once.
    pub fn edge_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn has_self_loops(&self) -> bool {
        (0..self.n).any(|i| self.get(i, i))
    }

    /// Packed 0/1 values as floating point.
    pub fn write_packed(&self, out: &mut [f64]) {
        for (chunk, &word) in out.chunks_mut(64).zip(&self.bits) {
            for (b, slot) in chunk.iter_mut().enumerate() {
                *slot = ((word >> b) & 1) as f64;
            }
        }
    }

    pub fn to_sym(&self) -> SymMatrix {
        let mut out = vec![0.0; packed_len(self.n)];
        self.write_packed(&mut out);
        SymMatrix::from_packed(self.n, out).expect("packed length")
    }
}

/// An ordered list of `T` adjacency matrices on a common node set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkSequence {
    n: usize,
    self_loops: bool,
    snapshots: Vec<AdjacencyMatrix>,
}

impl NetworkSequence {
    pub fn new(n: usize, self_loops: bool, snapshots: Vec<AdjacencyMatrix>) -> Result<Self> {
        for (t, a) in snapshots.iter().enumerate() {
            if a.n() != n {
                return Err(Error::DimensionMismatch(format!(
                    "snapshot {} has {} nodes, expected {n}",
                    t + 1,
                    a.n()
                )));
            }
            if !self_loops && a.has_self_loops() {
                return Err(Error::DimensionMismatch(format!(
                    "snapshot {} has self-loops but the sequence forbids them",
                    t + 1
                )));
            }
        }
        Ok(Self {
            n,
            self_loops,
            snapshots,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn self_loops(&self) -> bool {
        self.self_loops
    }

    pub fn snapshots(&self) -> &[AdjacencyMatrix] {
        &self.snapshots
    }

    /// Snapshot at 1-based time `t`.
    pub fn at(&self, t: usize) -> &AdjacencyMatrix {
        &self.snapshots[t - 1]
    }

    /// Edge density of each snapshot: edges over the number of admissible pairs.
    ///
    /// Pairs are counted as entries of the full matrix, so this is the mean of
    /// `A(t)` over all `n^2` entries (or the `n(n-1)` off-diagonal ones when
    /// self-loops are excluded).
    pub fn densities(&self) -> Vec<f64> {
        let n = self.n as f64;
        let cells = if self.self_loops {
            n * n
        } else {
            n * (n - 1.0)
        };
        self.snapshots
            .iter()
            .map(|a| {
                if cells <= 0.0 {
                    return 0.0;
                }
                let diag = (0..self.n).filter(|&i| a.get(i, i)).count() as f64;
                let off = a.edge_count() as f64 - diag;
                (2.0 * off + diag) / cells
            })
            .collect()
    }

    /// Heuristic estimate of `rho`: the largest per-snapshot edge density.
    pub fn max_density(&self) -> f64 {
        self.densities().into_iter().fold(0.0, f64::max)
    }
}

/// How a segment's edge probabilities were specified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub theta: EdgeProbabilityMatrix,
    /// Present when the segment came from a block model; kept for serialization.
    pub sbm: Option<SbmSpec>,
}

/// Piecewise-constant edge-probability sequence with known change points.
///
/// Change points follow the "last index of a segment" convention: segment `k`
/// covers times `eta_{k-1}+1 ..= eta_k`, with sentinels `eta_0 = 0` and
/// `eta_{K+1} = T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseScenario {
    horizon: usize,
    change_points: Vec<usize>,
    segments: Vec<Segment>,
    self_loops: bool,
    /// Sign vector of a hard instance, when the scenario came from one.
    hard_instance_sign: Option<Vec<i8>>,
}

impl PiecewiseScenario {
    pub fn new(
        horizon: usize,
        change_points: Vec<usize>,
        segments: Vec<Segment>,
        self_loops: bool,
    ) -> Result<Self> {
        if segments.len() != change_points.len() + 1 {
            return Err(Error::ParameterOutOfRange(format!(
                "{} change points need {} segments, got {}",
                change_points.len(),
                change_points.len() + 1,
                segments.len()
            )));
        }
        if horizon == 0 {
            return Err(Error::ParameterOutOfRange(
                "horizon must be positive".into(),
            ));
        }
        let mut prev = 0;
        for &cp in &change_points {
            if cp <= prev || cp >= horizon {
                return Err(Error::ParameterOutOfRange(format!(
                    "change points must be strictly increasing inside (0, {horizon}), got {change_points:?}"
                )));
            }
            prev = cp;
        }
        let n = segments[0].theta.n();
        if let Some(bad) = segments.iter().position(|s| s.theta.n() != n) {
            return Err(Error::DimensionMismatch(format!(
                "segment {} has {} nodes, expected {n}",
                bad + 1,
                segments[bad].theta.n()
            )));
        }
        let segments = if self_loops {
            segments
        } else {
            segments
                .into_iter()
                .map(|s| Segment {
                    theta: s.theta.without_diagonal(),
                    sbm: s.sbm,
                })
                .collect()
        };
        Ok(Self {
            horizon,
            change_points,
            segments,
            self_loops,
            hard_instance_sign: None,
        })
    }

    /// Convenience constructor from bare matrices.
    pub fn from_thetas(
        horizon: usize,
        change_points: Vec<usize>,
        thetas: Vec<EdgeProbabilityMatrix>,
        self_loops: bool,
    ) -> Result<Self> {
        let segments = thetas
            .into_iter()
            .map(|theta| Segment { theta, sbm: None })
            .collect();
        Self::new(horizon, change_points, segments, self_loops)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n(&self) -> usize {
        self.segments[0].theta.n()
    }

    pub fn change_points(&self) -> &[usize] {
        &self.change_points
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn self_loops(&self) -> bool {
        self.self_loops
    }

    pub fn hard_instance_sign(&self) -> Option<&[i8]> {
        self.hard_instance_sign.as_deref()
    }

    /// Same scenario with every diagonal zeroed and self-loops disallowed.
    pub fn without_self_loops(&self) -> Self {
        let mut out = self.clone();
        out.self_loops = false;
        for seg in &mut out.segments {
            seg.theta = seg.theta.without_diagonal();
            if let Some(spec) = &mut seg.sbm {
                spec.self_loops = false;
            }
        }
        out
    }

    /// Segment boundaries including the sentinels `0` and `T`.
    pub fn boundaries(&self) -> Vec<usize> {
        let mut b = Vec::with_capacity(self.change_points.len() + 2);
        b.push(0);
        b.extend_from_slice(&self.change_points);
        b.push(self.horizon);
        b
    }

    /// Index of the segment containing 1-based time `t`.
    pub fn segment_index(&self, t: usize) -> usize {
        self.change_points.partition_point(|&cp| cp < t)
    }

    /// `Theta(t)` for 1-based `t`.
    pub fn theta_at(&self, t: usize) -> &EdgeProbabilityMatrix {
        &self.segments[self.segment_index(t)].theta
    }

    /// The full mean sequence `Theta(1), ..., Theta(T)`.
    pub fn theta_sequence(&self) -> Vec<SymMatrix> {
        (1..=self.horizon)
            .map(|t| self.theta_at(t).matrix().clone())
            .collect()
    }
}

/// Derived model quantities of a scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParameters {
    /// Minimal spacing between consecutive boundaries (sentinels included).
    pub delta: usize,
    /// Largest edge probability over all times.
    pub rho: f64,
    /// Frobenius norm of each jump `Theta(eta_k+1) - Theta(eta_k)`.
    pub kappas: Vec<f64>,
    /// `min_k kappa_k / (n rho)`; `None` without change points.
    pub kappa0: Option<f64>,
}

pub fn scenario_parameters(scenario: &PiecewiseScenario) -> Result<ScenarioParameters> {
    let b = scenario.boundaries();
    let delta = b.windows(2).map(|w| w[1] - w[0]).min().unwrap_or(0);
    let rho = scenario
        .segments
        .iter()
        .map(|s| s.theta.sparsity())
        .fold(0.0, f64::max);
    let mut kappas = Vec::with_capacity(scenario.change_points.len());
    for (k, pair) in scenario.segments.windows(2).enumerate() {
        let kappa = pair[1]
            .theta
            .matrix()
            .sub(pair[0].theta.matrix())
            .frobenius();
        if kappa == 0.0 {
            return Err(Error::DegenerateScenario(format!(
                "segments {} and {} are equal, so change point {} has no jump",
                k + 1,
                k + 2,
                scenario.change_points[k]
            )));
        }
        kappas.push(kappa);
    }
    let n = scenario.n() as f64;
    let kappa0 = kappas
        .iter()
        .copied()
        .reduce(f64::min)
        .map(|min| min / (n * rho));
    Ok(ScenarioParameters {
        delta,
        rho,
        kappas,
        kappa0,
    })
}

/// Sparse stochastic block model `rho Z Q Z^T`, with 1-based community labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbmSpec {
    pub n: usize,
    pub r: usize,
    pub labels: Vec<usize>,
    pub q: Vec<Vec<f64>>,
    pub rho: f64,
    pub self_loops: bool,
}

impl SbmSpec {
    /// `r` communities of (nearly) equal size, nodes assigned in contiguous blocks.
    pub fn balanced_labels(n: usize, r: usize) -> Vec<usize> {
        (0..n).map(|i| i * r / n + 1).collect()
    }
}

pub fn sbm_theta(spec: &SbmSpec) -> Result<EdgeProbabilityMatrix> {
    if spec.labels.len() != spec.n {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} nodes",
            spec.labels.len(),
            spec.n
        )));
    }
    if spec.q.len() != spec.r || spec.q.iter().any(|row| row.len() != spec.r) {
        return Err(Error::DimensionMismatch(format!(
            "connectivity matrix must be {0}x{0}",
            spec.r
        )));
    }
    for (node, &label) in spec.labels.iter().enumerate() {
        if label == 0 || label > spec.r {
            return Err(Error::LabelOutOfRange {
                node,
                label,
                communities: spec.r,
            });
        }
    }
    for a in 0..spec.r {
        for b in 0..spec.r {
            let v = spec.q[a][b];
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::EntryOutOfRange {
                    row: a,
                    col: b,
                    value: v,
                });
            }
            if (v - spec.q[b][a]).abs() > SYMMETRY_TOL {
                return Err(Error::Asymmetric {
                    row: a,
                    col: b,
                    gap: (v - spec.q[b][a]).abs(),
                });
            }
        }
    }
    if !(0.0..=1.0).contains(&spec.rho) {
        return Err(Error::ParameterOutOfRange(format!(
            "sparsity rho = {} must lie in [0, 1]",
            spec.rho
        )));
    }
    // the product is checked entrywise, never clamped
    let theta = SymMatrix::from_fn(spec.n, |i, j| {
        if i == j && !spec.self_loops {
            0.0
        } else {
            spec.rho * spec.q[spec.labels[i] - 1][spec.labels[j] - 1]
        }
    });
    EdgeProbabilityMatrix::new(theta)
}

/// Draws one adjacency matrix with independent `Bernoulli(Theta_ij)` edges.
///
/// The RNG is consumed once per upper-triangle entry in row-major order, the
/// diagonal skipped when `no_self_loops` is set.
pub fn sample_adjacency<R: Rng + ?Sized>(
    theta: &EdgeProbabilityMatrix,
    no_self_loops: bool,
    rng: &mut R,
) -> AdjacencyMatrix {
    let n = theta.n();
    let thresholds = bernoulli_thresholds(theta.matrix().packed());
    sample_with_thresholds(n, &thresholds, no_self_loops, rng)
}

/// Integer thresholds `ceil(p 2^53)`: for the 53-bit mantissa `k` of a
/// uniform draw `u = k 2^-53`, `u < p` holds exactly when `k < ceil(p 2^53)`.
fn bernoulli_thresholds(probs: &[f64]) -> Vec<u64> {
    const SCALE: f64 = (1u64 << 53) as f64;
    probs.iter().map(|&p| (p * SCALE).ceil() as u64).collect()
}

fn sample_with_thresholds<R: Rng + ?Sized>(
    n: usize,
    thresholds: &[u64],
    no_self_loops: bool,
    rng: &mut R,
) -> AdjacencyMatrix {
    let mut a = AdjacencyMatrix::empty(n);
    let mut p = 0;
    for i in 0..n {
        for j in i..n {
            if !(i == j && no_self_loops) {
                // same bits as `rng.gen::<f64>()`, compared without a branch
                let k = rng.next_u64() >> 11;
                a.bits[p / 64] |= u64::from(k < thresholds[p]) << (p % 64);
            }
            p += 1;
        }
    }
    a
}

/// Samples `A(1), ..., A(T)` from a scenario with a single RNG stream.
pub fn generate_sequence<R: Rng + ?Sized>(
    scenario: &PiecewiseScenario,
    rng: &mut R,
) -> NetworkSequence {
    let no_loops = !scenario.self_loops;
    let thresholds: Vec<Vec<u64>> = scenario
        .segments
        .iter()
        .map(|s| bernoulli_thresholds(s.theta.matrix().packed()))
        .collect();
    let n = scenario.n();
    let snapshots = (1..=scenario.horizon)
        .map(|t| sample_with_thresholds(n, &thresholds[scenario.segment_index(t)], no_loops, rng))
        .collect();
    NetworkSequence {
        n: scenario.n(),
        self_loops: scenario.self_loops,
        snapshots,
    }
}

/// Where the single change point of a hard instance sits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Change at `Delta`: the perturbed segment comes first.
    Early,
    /// Change at `T - Delta`: the perturbed segment comes last.
    Late,
}

/// Two-community hard instance with a uniformly drawn sign vector `v`.
pub fn lecam_hard_instance<R: Rng + ?Sized>(
    n: usize,
    rho: f64,
    kappa0: f64,
    delta: usize,
    horizon: usize,
    side: Side,
    rng: &mut R,
) -> Result<PiecewiseScenario> {
    let sign: Vec<i8> = (0..n)
        .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
        .collect();
    lecam_hard_instance_with_sign(rho, kappa0, delta, horizon, side, sign)
}

/// Hard instance for a given sign vector.
///
/// The baseline segment is the constant matrix `rho`; the perturbed segment is
/// `rho + kappa0 rho v v^T`, i.e. `rho (1 + kappa0)` inside the two
/// communities `sign(v)` and `rho (1 - kappa0)` across them.
pub fn lecam_hard_instance_with_sign(
    rho: f64,
    kappa0: f64,
    delta: usize,
    horizon: usize,
    side: Side,
    sign: Vec<i8>,
) -> Result<PiecewiseScenario> {
    let n = sign.len();
    if !(0.0..=0.5).contains(&rho) {
        return Err(Error::ParameterOutOfRange(format!(
            "hard instance needs 0 <= rho <= 1/2, got {rho}"
        )));
    }
    if !(0.0..=1.0).contains(&kappa0) {
        return Err(Error::ParameterOutOfRange(format!(
            "hard instance needs 0 <= kappa0 <= 1, got {kappa0}"
        )));
    }
    if delta == 0 || 3 * delta > horizon {
        return Err(Error::ParameterOutOfRange(format!(
            "hard instance needs 1 <= Delta <= T/3, got Delta={delta}, T={horizon}"
        )));
    }
    if n == 0 || sign.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::ParameterOutOfRange(
            "sign vector must be non-empty with entries +-1".into(),
        ));
    }
    let base = EdgeProbabilityMatrix::constant(n, rho)?;
    let perturbed = EdgeProbabilityMatrix::new(SymMatrix::from_fn(n, |i, j| {
        rho + kappa0 * rho * f64::from(sign[i] * sign[j])
    }))?;
    let (cp, thetas) = match side {
        Side::Early => (delta, vec![perturbed, base]),
        Side::Late => (horizon - delta, vec![base, perturbed]),
    };
    let mut scenario = PiecewiseScenario::from_thetas(horizon, vec![cp], thetas, true)?;
    scenario.hard_instance_sign = Some(sign);
    Ok(scenario)
}

/// Maps time indices of a split half back to the original axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndexMap {
    pub original_len: usize,
}

impl SplitIndexMap {
    /// Half-scale change point `t` corresponds to original time `2t`.
    pub fn to_original(&self, t: usize) -> usize {
        2 * t
    }

    /// Original time `t` of the snapshot at 1-based position `j` of half `h` (0 or 1).
    pub fn source_time(&self, half: usize, j: usize) -> usize {
        2 * j - 1 + half
    }
}

/// The two parity halves of a sequence.
#[derive(Clone, Debug)]
pub struct SplitSample {
    /// Odd original times `1, 3, 5, ...`.
    pub first: NetworkSequence,
    /// Even original times `2, 4, 6, ...`.
    pub second: NetworkSequence,
    pub map: SplitIndexMap,
}

/// Splits by time parity, dropping the final snapshot when `T` is odd.
pub fn split_sample(seq: &NetworkSequence) -> Result<SplitSample> {
    if seq.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: seq.len(),
        });
    }
    let half = seq.len() / 2;
    let pick = |offset: usize| NetworkSequence {
        n: seq.n,
        self_loops: seq.self_loops,
        snapshots: (0..half)
            .map(|j| seq.snapshots[2 * j + offset].clone())
            .collect(),
    };
    Ok(SplitSample {
        first: pick(0),
        second: pick(1),
        map: SplitIndexMap {
            original_len: seq.len(),
        },
    })
}
