//! Summary statistics and tests used by the experiment runner.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, StudentsT};

/// Median of finite values; `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    })
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Ranks starting at 1, ties receiving the average of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spearman {
    pub rho: f64,
    /// One-sided p-value for a positive association (t approximation).
    pub p_increasing: f64,
    pub n: usize,
}

pub fn spearman(x: &[f64], y: &[f64]) -> Spearman {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    let rho = pearson(&average_ranks(x), &average_ranks(y));
    let p_increasing = if n < 3 {
        1.0
    } else if rho >= 1.0 {
        0.0
    } else {
        let df = (n - 2) as f64;
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
        1.0 - dist.cdf(t)
    };
    Spearman {
        rho,
        p_increasing,
        n,
    }
}

/// `P(X <= successes)` for `X ~ Binomial(trials, p)`.
pub fn binomial_lower_tail(successes: u64, trials: u64, p: f64) -> f64 {
    Binomial::new(p.clamp(0.0, 1.0), trials)
        .expect("valid binomial")
        .cdf(successes)
}

/// `P(X >= successes)` for `X ~ Binomial(trials, p)`.
pub fn binomial_upper_tail(successes: u64, trials: u64, p: f64) -> f64 {
    if successes == 0 {
        1.0
    } else {
        1.0 - binomial_lower_tail(successes - 1, trials, p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub points: usize,
}

/// Ordinary least squares of `y` on `x` with a two-sided t interval for the slope.
pub fn linear_regression(x: &[f64], y: &[f64], level: f64) -> Option<Regression> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let (mx, my) = (x.iter().sum::<f64>() / nf, y.iter().sum::<f64>() / nf);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let df = nf - 2.0;
    let slope_se = (rss / df / sxx).sqrt();
    let q = StudentsT::new(0.0, 1.0, df)
        .expect("df > 0")
        .inverse_cdf(0.5 + level / 2.0);
    Some(Regression {
        slope,
        intercept,
        slope_se,
        ci_low: slope - q * slope_se,
        ci_high: slope + q * slope_se,
        level,
        points: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn tied_ranks() {
        assert_eq!(
            average_ranks(&[10.0, 20.0, 10.0, 30.0]),
            vec![1.5, 3.0, 1.5, 4.0]
        );
    }

    #[test]
    fn spearman_reference() {
        // scipy.stats.spearmanr([1,2,3,4,5],[5,6,7,8,7]) -> 0.8207826816681233
        let s = spearman(&[1.0, 2.0, 3.0, 4.0, 5.0], &[5.0, 6.0, 7.0, 8.0, 7.0]);
        assert!((s.rho - 0.820_782_681_668_123_3).abs() < 1e-12);
        let perfect = spearman(&[1.0, 2.0, 3.0, 4.0], &[0.1, 0.2, 0.3, 0.9]);
        assert_eq!(perfect.rho, 1.0);
        assert_eq!(perfect.p_increasing, 0.0);
        let flat = spearman(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]);
        assert_eq!(flat.rho, 0.0);
    }

    #[test]
    fn binomial_tails() {
        // P(X <= 1), X ~ Bin(4, 1/2) = 5/16
        assert!((binomial_lower_tail(1, 4, 0.5) - 5.0 / 16.0).abs() < 1e-12);
        assert!((binomial_upper_tail(3, 4, 0.5) - 5.0 / 16.0).abs() < 1e-12);
        assert_eq!(binomial_upper_tail(0, 4, 0.3), 1.0);
    }

    #[test]
    fn regression_recovers_line() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let r = linear_regression(&x, &y, 0.95).unwrap();
        assert!((r.slope + 0.5).abs() < 1e-12);
        assert!((r.intercept - 2.0).abs() < 1e-12);
        assert!(r.slope_se < 1e-12);
        // with noise: x=[1,2,3,4], y=[1,3,2,5] -> slope 1.1, se sqrt(2.7/2/5)
        let r = linear_regression(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 5.0], 0.95).unwrap();
        assert!((r.slope - 1.1).abs() < 1e-12);
        let se = (2.7f64 / 2.0 / 5.0).sqrt();
        assert!((r.slope_se - se).abs() < 1e-12);
        // t_{0.975, 2} = 4.302652729696142
        assert!((r.ci_high - (1.1 + 4.302_652_729_696_142 * se)).abs() < 1e-6);
    }
}
