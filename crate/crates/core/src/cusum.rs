//! Weighted CUSUM statistics for matrix and scalar sequences.
//!
//! For data `X_1, ..., X_T`, a triple `s < t < e` and the window `(s, e]`,
//!
//! ```text
//! X~(s,e)(t) = sqrt((e-t) / ((e-s)(t-s))) * sum_{i=s+1..t} X_i
//!            - sqrt((t-s) / ((e-s)(e-t))) * sum_{i=t+1..e} X_i
//! ```
//!
//! Matrix sequences are handled through [`PrefixSums`], which makes every
//! statistic O(n^2) after an O(T n^2) precompute. Times are 1-based and the
//! prefix row `0` is the empty sum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{multiplicities, packed_inner, packed_len, SymMatrix};
use crate::net_model::NetworkSequence;

/// Anything that can present itself as `T` symmetric `n x n` snapshots.
pub trait MatrixSequence {
    fn order(&self) -> usize;
    fn horizon(&self) -> usize;
    /// Overwrites `out` with the packed snapshot at 1-based time `t`.
    fn write_snapshot(&self, t: usize, out: &mut [f64]);
    /// Whether all entries are small integers, so plain summation is exact.
    fn integral(&self) -> bool {
        false
    }
}

impl MatrixSequence for NetworkSequence {
    fn order(&self) -> usize {
        self.n()
    }
    fn horizon(&self) -> usize {
        self.len()
    }
    fn write_snapshot(&self, t: usize, out: &mut [f64]) {
        self.at(t).write_packed(out);
    }
    fn integral(&self) -> bool {
        true
    }
}

impl MatrixSequence for [SymMatrix] {
    fn order(&self) -> usize {
        self.first().map_or(0, SymMatrix::n)
    }
    fn horizon(&self) -> usize {
        self.len()
    }
    fn write_snapshot(&self, t: usize, out: &mut [f64]) {
        out.copy_from_slice(self[t - 1].packed());
    }
}

impl MatrixSequence for Vec<SymMatrix> {
    fn order(&self) -> usize {
        self.as_slice().order()
    }
    fn horizon(&self) -> usize {
        self.len()
    }
    fn write_snapshot(&self, t: usize, out: &mut [f64]) {
        self.as_slice().write_snapshot(t, out)
    }
}

/// A validated `(s, t, e)` with `s < t < e <= len`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CusumTriple {
    pub s: usize,
    pub t: usize,
    pub e: usize,
}

impl CusumTriple {
    pub fn new(s: usize, t: usize, e: usize, len: usize) -> Result<Self> {
        if s < t && t < e && e <= len {
            Ok(Self { s, t, e })
        } else {
            Err(Error::IndexOrder { s, t, e, len })
        }
    }

    /// `(left, right)` weights of the prefix and suffix sums.
    #[inline]
    pub fn weights(&self) -> (f64, f64) {
        cusum_weights(self.s, self.t, self.e)
    }
}

#[inline]
pub(crate) fn cusum_weights(s: usize, t: usize, e: usize) -> (f64, f64) {
    let (ts, et, es) = ((t - s) as f64, (e - t) as f64, (e - s) as f64);
    ((et / (es * ts)).sqrt(), (ts / (es * et)).sqrt())
}

/// Compensated running sum (Neumaier).
#[derive(Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Cumulative sums `P[t] = X_1 + ... + X_t` of a matrix sequence in packed form.
#[derive(Clone, Debug)]
pub struct PrefixSums {
    n: usize,
    horizon: usize,
    stride: usize,
    data: Vec<f64>,
    mult: Vec<f64>,
}

impl PrefixSums {
    pub fn new<S: MatrixSequence + ?Sized>(seq: &S) -> Self {
        let n = seq.order();
        let horizon = seq.horizon();
        let stride = packed_len(n);
        let mut data = vec![0.0; (horizon + 1) * stride];
        let mut acc = vec![Neumaier::default(); stride];
        let mut snap = vec![0.0; stride];
        let exact = seq.integral();
        for t in 1..=horizon {
            seq.write_snapshot(t, &mut snap);
            let (done, rest) = data.split_at_mut(t * stride);
            let prev = &done[(t - 1) * stride..];
            let row = &mut rest[..stride];
            if exact {
                for p in 0..stride {
                    row[p] = prev[p] + snap[p];
                }
            } else {
                for p in 0..stride {
                    acc[p].add(snap[p]);
                    row[p] = acc[p].value();
                }
            }
        }
        Self {
            n,
            horizon,
            stride,
            data,
            mult: multiplicities(n),
        }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Multiplicities of packed entries (1 on the diagonal, 2 off it).
    pub fn multiplicities(&self) -> &[f64] {
        &self.mult
    }

    #[inline]
    pub(crate) fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.stride..(t + 1) * self.stride]
    }

    /// Packed `sum_{i=a+1..b} X_i`.
    pub fn window_sum(&self, a: usize, b: usize) -> Vec<f64> {
        self.row(b)
            .iter()
            .zip(self.row(a))
            .map(|(hi, lo)| hi - lo)
            .collect()
    }

    /// Writes the packed CUSUM matrix at `triple` into `out`.
    pub fn cusum_into(&self, triple: CusumTriple, out: &mut [f64]) {
        let CusumTriple { s, t, e } = triple;
        let (wl, wr) = triple.weights();
        let (ps, pt, pe) = (self.row(s), self.row(t), self.row(e));
        for p in 0..self.stride {
            let left = pt[p] - ps[p];
            let right = pe[p] - pt[p];
            out[p] = wl * left - wr * right;
        }
    }

    pub fn cusum(&self, triple: CusumTriple) -> Result<SymMatrix> {
        self.check(triple)?;
        let mut out = vec![0.0; self.stride];
        self.cusum_into(triple, &mut out);
        SymMatrix::from_packed(self.n, out)
    }

    fn check(&self, triple: CusumTriple) -> Result<()> {
        CusumTriple::new(triple.s, triple.t, triple.e, self.horizon).map(|_| ())
    }

    fn check_pair(&self, other: &PrefixSums) -> Result<()> {
        if self.n != other.n || self.horizon != other.horizon {
            return Err(Error::DimensionMismatch(format!(
                "sequences of shape (T={}, n={}) and (T={}, n={})",
                self.horizon, self.n, other.horizon, other.n
            )));
        }
        Ok(())
    }

    /// `<A~(s,e)(t), B~(s,e)(t)>` for two sequences of the same shape.
    pub fn inner_at(&self, other: &PrefixSums, triple: CusumTriple) -> Result<f64> {
        self.check_pair(other)?;
        self.check(triple)?;
        let mut a = vec![0.0; self.stride];
        let mut b = vec![0.0; self.stride];
        self.cusum_into(triple, &mut a);
        other.cusum_into(triple, &mut b);
        Ok(packed_inner(&self.mult, &a, &b))
    }

    /// Inner products `<A~(s,e)(t), B~(s,e)(t)>` for every `t` in `s+1..e-1`.
    ///
    /// Returns an empty vector when the window holds no admissible `t`.
    pub fn inner_profile(&self, other: &PrefixSums, s: usize, e: usize) -> Result<Vec<f64>> {
        self.check_pair(other)?;
        if e > self.horizon || s >= e {
            return Err(Error::IndexOrder {
                s,
                t: s,
                e,
                len: self.horizon,
            });
        }
        let (ps_a, pe_a) = (self.row(s), self.row(e));
        let (ps_b, pe_b) = (other.row(s), other.row(e));
        let total_a: Vec<f64> = pe_a.iter().zip(ps_a).map(|(x, y)| x - y).collect();
        let total_b: Vec<f64> = pe_b.iter().zip(ps_b).map(|(x, y)| x - y).collect();
        let mut out = Vec::with_capacity(e.saturating_sub(s + 1));
        for t in (s + 1)..e {
            let (wl, wr) = cusum_weights(s, t, e);
            out.push(profile_term(
                wl + wr,
                wr,
                [self.row(t), ps_a, &total_a],
                [other.row(t), ps_b, &total_b],
                &self.mult,
            ));
        }
        Ok(out)
    }

    /// Projection series `y(i) = <X_i, W>` for `i` in `a+1..=b`.
    ///
    /// Uses adjacent prefix differences, so it reads `X_i` without the
    /// original sequence.
    pub fn project(&self, weight: &SymMatrix, a: usize, b: usize) -> Vec<f64> {
        assert_eq!(weight.n(), self.n);
        let w = weight.packed();
        ((a + 1)..=b)
            .map(|i| {
                let (hi, lo) = (self.row(i), self.row(i - 1));
                let mut acc = 0.0;
                for p in 0..self.stride {
                    acc += self.mult[p] * w[p] * (hi[p] - lo[p]);
                }
                acc
            })
            .collect()
    }
}

/// `sum_p mult[p] a[p] b[p]` with `a = c (P_t - P_s) - wr S` on each side,
/// using `A~ = (wl + wr) L - wr S` for the left-window sum `L` and total `S`.
#[inline]
fn profile_term(c: f64, wr: f64, a: [&[f64]; 3], b: [&[f64]; 3], mult: &[f64]) -> f64 {
    let n = mult.len();
    let (pa, sa, ta) = (&a[0][..n], &a[1][..n], &a[2][..n]);
    let (pb, sb, tb) = (&b[0][..n], &b[1][..n], &b[2][..n]);
    let mut acc = [0.0f64; 4];
    let body = n / 4 * 4;
    let chunks = pa[..body]
        .chunks_exact(4)
        .zip(sa[..body].chunks_exact(4))
        .zip(ta[..body].chunks_exact(4))
        .zip(pb[..body].chunks_exact(4))
        .zip(sb[..body].chunks_exact(4))
        .zip(tb[..body].chunks_exact(4))
        .zip(mult[..body].chunks_exact(4));
    for ((((((pa, sa), ta), pb), sb), tb), m) in chunks {
        for l in 0..4 {
            let x = c * (pa[l] - sa[l]) - wr * ta[l];
            let y = c * (pb[l] - sb[l]) - wr * tb[l];
            acc[l] += m[l] * x * y;
        }
    }
    let mut tail = 0.0;
    for p in body..n {
        let x = c * (pa[p] - sa[p]) - wr * ta[p];
        let y = c * (pb[p] - sb[p]) - wr * tb[p];
        tail += mult[p] * x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Index of the first maximum; ties resolve to the smallest index.
pub fn argmax_first(values: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best
}

/// CUSUM matrix computed by direct compensated summation over the window.
pub fn matrix_cusum<S: MatrixSequence + ?Sized>(
    seq: &S,
    s: usize,
    t: usize,
    e: usize,
) -> Result<SymMatrix> {
    let triple = CusumTriple::new(s, t, e, seq.horizon())?;
    let stride = packed_len(seq.order());
    let mut left = vec![Neumaier::default(); stride];
    let mut right = vec![Neumaier::default(); stride];
    let mut snap = vec![0.0; stride];
    for i in (s + 1)..=e {
        seq.write_snapshot(i, &mut snap);
        let acc = if i <= t { &mut left } else { &mut right };
        for p in 0..stride {
            acc[p].add(snap[p]);
        }
    }
    let (wl, wr) = triple.weights();
    let data = left
        .iter()
        .zip(&right)
        .map(|(l, r)| wl * l.value() - wr * r.value())
        .collect();
    SymMatrix::from_packed(seq.order(), data)
}

/// `<A~(s,e)(t), B~(s,e)(t)>` for two network sequences.
pub fn cusum_inner_product<S: MatrixSequence + ?Sized>(
    seq_a: &S,
    seq_b: &S,
    s: usize,
    t: usize,
    e: usize,
) -> Result<f64> {
    if seq_a.order() != seq_b.order() || seq_a.horizon() != seq_b.horizon() {
        return Err(Error::DimensionMismatch(format!(
            "sequences of shape (T={}, n={}) and (T={}, n={})",
            seq_a.horizon(),
            seq_a.order(),
            seq_b.horizon(),
            seq_b.order()
        )));
    }
    let a = matrix_cusum(seq_a, s, t, e)?;
    let b = matrix_cusum(seq_b, s, t, e)?;
    Ok(a.inner(&b))
}

/// CUSUM of a real series; `series[0]` is time 1.
pub fn scalar_cusum(series: &[f64], s: usize, t: usize, e: usize) -> Result<f64> {
    let triple = CusumTriple::new(s, t, e, series.len())?;
    let mut left = Neumaier::default();
    let mut right = Neumaier::default();
    for (i, &x) in series.iter().enumerate().take(e).skip(s) {
        if i < t {
            left.add(x);
        } else {
            right.add(x);
        }
    }
    let (wl, wr) = triple.weights();
    Ok(wl * left.value() - wr * right.value())
}

/// Cumulative sums of a scalar series, for O(1) CUSUM evaluation.
#[derive(Clone, Debug)]
pub struct ScalarPrefix {
    prefix: Vec<f64>,
}

impl ScalarPrefix {
    pub fn new(series: &[f64]) -> Self {
        let mut acc = Neumaier::default();
        let mut prefix = Vec::with_capacity(series.len() + 1);
        prefix.push(0.0);
        for &x in series {
            acc.add(x);
            prefix.push(acc.value());
        }
        Self { prefix }
    }

    pub fn len(&self) -> usize {
        self.prefix.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cusum(&self, s: usize, t: usize, e: usize) -> f64 {
        let (wl, wr) = cusum_weights(s, t, e);
        wl * (self.prefix[t] - self.prefix[s]) - wr * (self.prefix[e] - self.prefix[t])
    }
}

/// Closed-form `||Theta~(s,e)(t)||_F^2` when `(s, e)` holds a single change at
/// `eta` of Frobenius size `kappa`.
pub fn one_cp_population_norm(s: usize, e: usize, eta: usize, kappa: f64, t: usize) -> Result<f64> {
    if !(s < eta && eta < e) {
        return Err(Error::IndexOrder {
            s,
            t: eta,
            e,
            len: e,
        });
    }
    CusumTriple::new(s, t, e, e)?;
    let (s, e, eta, t) = (s as f64, e as f64, eta as f64, t as f64);
    let k2 = kappa * kappa;
    Ok(if t <= eta {
        (t - s) / ((e - s) * (e - t)) * (e - eta).powi(2) * k2
    } else {
        (e - t) / ((e - s) * (t - s)) * (eta - s).powi(2) * k2
    })
}
