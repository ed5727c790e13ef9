use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{param_err, Result};

use super::ReplicateTable;

/// Sample summaries of a set of equally long vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub count: usize,
    pub means: Vec<f64>,
    /// Unbiased sample covariance.
    pub cov: Vec<Vec<f64>>,
    /// Standard errors of the means, `sqrt(var / R)`.
    pub se: Vec<f64>,
    /// Standard errors of the covariance entries, from the spread of the
    /// centered cross products.
    pub cov_se: Vec<Vec<f64>>,
}

impl ColumnStats {
    pub fn variance(&self, j: usize) -> f64 {
        self.cov[j][j]
    }

    pub fn correlation(&self, a: usize, b: usize) -> f64 {
        self.cov[a][b] / (self.cov[a][a] * self.cov[b][b]).sqrt()
    }
}

pub fn column_stats(rows: &[Vec<f64>]) -> Result<ColumnStats> {
    let count = rows.len();
    if count < 2 {
        return param_err(format!("statistics need at least two rows, got {count}"));
    }
    let d = rows[0].len();
    if rows.iter().any(|r| r.len() != d) {
        return param_err("rows have different lengths");
    }
    let rf = count as f64;
    let means: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / rf).collect();
    let mut cov = vec![vec![0.0; d]; d];
    let mut cov_se = vec![vec![0.0; d]; d];
    for a in 0..d {
        for b in a..d {
            let products: Vec<f64> = rows.iter().map(|r| (r[a] - means[a]) * (r[b] - means[b])).collect();
            let sum: f64 = products.iter().sum();
            let c = sum / (rf - 1.0);
            let pm = sum / rf;
            let spread = products.iter().map(|p| (p - pm) * (p - pm)).sum::<f64>() / (rf - 1.0);
            let se = (spread / rf).sqrt();
            cov[a][b] = c;
            cov[b][a] = c;
            cov_se[a][b] = se;
            cov_se[b][a] = se;
        }
    }
    let se = (0..d).map(|j| (cov[j][j] / rf).sqrt()).collect();
    Ok(ColumnStats {
        count,
        means,
        cov,
        se,
        cov_se,
    })
}

/// Summaries of the z-vectors and the raw `L^k` columns of a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalStats {
    pub z: ColumnStats,
    pub lengths: ColumnStats,
}

pub fn empirical_stats(table: &ReplicateTable) -> Result<EmpiricalStats> {
    let z: Vec<Vec<f64>> = table.rows.iter().map(|r| r.z.clone()).collect();
    let lengths: Vec<Vec<f64>> = table.rows.iter().map(|r| r.lengths.clone()).collect();
    Ok(EmpiricalStats {
        z: column_stats(&z)?,
        lengths: column_stats(&lengths)?,
    })
}

/// A test statistic with its p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * x * x).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn effective_size_p(d: f64, en: f64) -> f64 {
    kolmogorov_survival((en + 0.12 + 0.11 / en) * d)
}

/// One-sample Kolmogorov-Smirnov test against a continuous CDF, with the
/// asymptotic p-value.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<TestOutcome> {
    let m = samples.len();
    if m < 20 {
        return param_err(format!("KS test needs at least 20 samples, got {m}"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return param_err("KS samples contain NaN");
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mf = m as f64;
    let d = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (((i + 1) as f64 / mf) - f).max(f - i as f64 / mf)
        })
        .fold(0.0, f64::max);
    Ok(TestOutcome {
        statistic: d,
        p_value: effective_size_p(d, mf.sqrt()),
    })
}

/// Two-sample Kolmogorov-Smirnov test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestOutcome> {
    if a.len() < 20 || b.len() < 20 {
        return param_err("two-sample KS test needs at least 20 samples on each side");
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return param_err("KS samples contain NaN");
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (na, nb) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(TestOutcome {
        statistic: d,
        p_value: effective_size_p(d, (na * nb / (na + nb)).sqrt()),
    })
}

/// Pearson chi-square goodness of fit. Bins whose expected count is below 5
/// should be pooled by the caller; `fitted` parameters reduce the degrees of
/// freedom.
pub fn chi_square_gof(observed: &[u64], expected: &[f64], fitted: usize) -> Result<TestOutcome> {
    if observed.len() != expected.len() {
        return param_err("observed and expected bins differ in number");
    }
    if observed.len() < fitted + 2 {
        return param_err("too few bins for the chi-square test");
    }
    if expected.iter().any(|&e| !(e > 0.0)) {
        return param_err("expected counts must be positive");
    }
    let statistic: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    let df = (observed.len() - 1 - fitted) as f64;
    let dist = ChiSquared::new(df).expect("positive degrees of freedom");
    Ok(TestOutcome {
        statistic,
        p_value: 1.0 - dist.cdf(statistic),
    })
}
