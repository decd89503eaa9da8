//! Random search intervals for binary segmentation.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default multiplier in [`recommended_m`].
pub const DEFAULT_M_CONSTANT: f64 = 4.0;

/// `M` random intervals `(alpha_m, beta_m)` with `0 <= alpha < beta <= T`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalSet {
    pub horizon: usize,
    pub pairs: Vec<(usize, usize)>,
    pub cap: Option<usize>,
}

impl IntervalSet {
    pub fn new(horizon: usize, pairs: Vec<(usize, usize)>, cap: Option<usize>) -> Result<Self> {
        for &(a, b) in &pairs {
            if a >= b || b > horizon {
                return Err(Error::ParameterOutOfRange(format!(
                    "interval ({a}, {b}) is not inside 0 <= alpha < beta <= {horizon}"
                )));
            }
            if let Some(c) = cap {
                if b - a > c {
                    return Err(Error::ParameterOutOfRange(format!(
                        "interval ({a}, {b}) is longer than the cap {c}"
                    )));
                }
            }
        }
        Ok(Self {
            horizon,
            pairs,
            cap,
        })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Two-column integer table, one interval per line, `#` comments allowed.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# horizon {}", self.horizon);
        if let Some(c) = self.cap {
            let _ = writeln!(out, "# cap {c}");
        }
        out.push_str("# alpha beta\n");
        for &(a, b) in &self.pairs {
            let _ = writeln!(out, "{a} {b}");
        }
        out
    }

    pub fn from_table(text: &str, source: &str) -> Result<Self> {
        let mut horizon = None;
        let mut cap = None;
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let at = |msg: String| Error::format(format!("{source}:{}", lineno + 1), msg);
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let mut words = comment.split_whitespace();
                match (words.next(), words.next()) {
                    (Some("horizon"), Some(v)) => {
                        horizon = Some(v.parse().map_err(|_| at(format!("bad horizon `{v}`")))?)
                    }
                    (Some("cap"), Some(v)) => {
                        cap = Some(v.parse().map_err(|_| at(format!("bad cap `{v}`")))?)
                    }
                    _ => {}
                }
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 2 {
                return Err(at(format!("expected two integers, got `{line}`")));
            }
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| at(format!("`{s}` is not a non-negative integer")))
            };
            pairs.push((parse(cols[0])?, parse(cols[1])?));
        }
        let horizon = horizon
            .or_else(|| pairs.iter().map(|p| p.1).max())
            .ok_or_else(|| Error::format(source, "no intervals and no `# horizon` line"))?;
        Self::new(horizon, pairs, cap).map_err(|e| Error::format(source, e.to_string()))
    }
}

/// Draws `m` intervals uniformly over ordered pairs `0 <= alpha < beta <= T`.
///
/// With a cap, each pair is redrawn until `beta - alpha <= cap`, which yields
/// the uniform law conditioned on the cap.
pub fn draw_intervals<R: Rng + ?Sized>(
    horizon: usize,
    m: usize,
    length_cap: Option<usize>,
    rng: &mut R,
) -> Result<IntervalSet> {
    if horizon < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: horizon,
        });
    }
    if m == 0 {
        return Err(Error::ParameterOutOfRange(
            "at least one interval is required".into(),
        ));
    }
    if let Some(c) = length_cap {
        if c < 1 {
            return Err(Error::InfeasibleCap(c));
        }
    }
    let pairs = (0..m)
        .map(|_| loop {
            let a = rng.gen_range(0..=horizon);
            let mut b = rng.gen_range(0..horizon);
            if b >= a {
                b += 1;
            }
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            if length_cap.is_none_or(|c| hi - lo <= c) {
                break (lo, hi);
            }
        })
        .collect();
    Ok(IntervalSet {
        horizon,
        pairs,
        cap: length_cap,
    })
}

/// `ceil(c (T / Delta)^2 log(T / Delta))`, at least 1.
pub fn recommended_m_with(horizon: usize, delta: usize, constant: f64) -> usize {
    assert!(delta >= 1 && delta <= horizon, "need 1 <= Delta <= T");
    let ratio = horizon as f64 / delta as f64;
    let m = (constant * ratio * ratio * ratio.ln()).ceil();
    (m as usize).max(1)
}

pub fn recommended_m(horizon: usize, delta: usize) -> usize {
    recommended_m_with(horizon, delta, DEFAULT_M_CONSTANT)
}

/// Whether every change point is flanked by some interval with
/// `alpha in [eta - 3 Delta/4, eta - Delta/2]` and `beta in [eta + Delta/2, eta + 3 Delta/4]`.
pub fn covers_all(pairs: &[(usize, usize)], change_points: &[usize], delta: usize) -> bool {
    let d = delta as f64;
    change_points.iter().all(|&eta| {
        let eta = eta as f64;
        pairs.iter().any(|&(a, b)| {
            let (a, b) = (a as f64, b as f64);
            a >= eta - 0.75 * d && a <= eta - 0.5 * d && b >= eta + 0.5 * d && b <= eta + 0.75 * d
        })
    })
}

/// Lower bound `1 - exp(log(T/Delta) - M Delta^2 / (16 T^2))` on the
/// flanking probability; negative values mean the bound is vacuous.
pub fn coverage_lower_bound(horizon: usize, delta: usize, m: usize) -> f64 {
    let (t, d) = (horizon as f64, delta as f64);
    1.0 - ((t / d).ln() - m as f64 * d * d / (16.0 * t * t)).exp()
}
