use crate::error::{param_err, Result};
use crate::genealogy::{branch_spectrum_with, SampleGenealogy};

/// Cap applied to the heavy-tailed times: `sqrt(n) log log n`.
pub fn truncation_cap(n: usize) -> Result<f64> {
    if n < 16 {
        return param_err(format!("truncation needs n >= 16, got {n}"));
    }
    let nf = n as f64;
    Ok(nf.sqrt() * nf.ln().ln())
}

/// Interior branch lengths built from capped times, scaled by `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSpectrum {
    pub n: usize,
    pub cap: f64,
    /// `values[k - 1][i - 1] = n * L~^k_i` for `1 <= i <= n - k - 1`.
    pub values: Vec<Vec<f64>>,
}

impl TruncatedSpectrum {
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[k - 1][i - 1]
    }

    pub fn max_k(&self) -> usize {
        self.values.len()
    }
}

/// `(min(U_i, U_{i+k}, cap) - max_{i<j<i+k} U_j)^+` for the window
/// `U_i..U_{i+k}`, every time capped at `cap`.
pub fn capped_branch(window: &[f64], cap: f64) -> f64 {
    let k = window.len() - 1;
    let at = |j: usize| window[j].min(cap);
    let inner = (1..k).map(at).fold(0.0, f64::max);
    (at(0).min(at(k)) - inner).max(0.0)
}

/// `n L~^k_i = (min(U_i, U_{i+k}, cap) - max_{i<j<i+k} U_j)^+` with the
/// `n - 1` times `U_1..U_{n-1}` given in order.
pub fn truncated_branch_values(u: &[f64], k_max: usize) -> Result<TruncatedSpectrum> {
    let n = u.len() + 1;
    let cap = truncation_cap(n)?;
    if k_max < 1 || k_max > n - 2 {
        return param_err(format!("K must lie in 1..={}, got {k_max}", n - 2));
    }
    if let Some(bad) = u.iter().find(|x| !(**x >= 0.0)) {
        return param_err(format!("times must be non-negative, got {bad}"));
    }
    let values = (1..=k_max)
        .map(|k| (1..n - k).map(|i| capped_branch(&u[i - 1..=i - 1 + k], cap)).collect())
        .collect();
    Ok(TruncatedSpectrum { n, cap, values })
}

/// Leading terms of the mean and variance of `n L~^k_i`:
/// `(1/k, log n + 2 log log log n)`. The bounded remainders are unknown, so
/// the variance is only meaningful up to an additive constant.
pub fn critical_moments(n: usize, k: usize) -> Result<(f64, f64)> {
    if n < 16 || k < 1 {
        return param_err(format!("critical moments need n >= 16 and k >= 1, got n = {n}, k = {k}"));
    }
    let ln = (n as f64).ln();
    Ok((1.0 / k as f64, ln + 2.0 * ln.ln().ln()))
}

/// Mean of one interior supercritical branch, `1 / (r k (k - 1))`.
pub fn expected_supercritical_branch(k: usize, r: f64) -> Result<f64> {
    if k < 2 {
        return param_err(format!("k must be at least 2, got {k}"));
    }
    if !(r > 0.0) || !r.is_finite() {
        return param_err(format!("growth rate must be positive, got {r}"));
    }
    Ok(1.0 / (r * k as f64 * (k as f64 - 1.0)))
}

/// `sum_{i=1}^{n-k-1} L^k_i` for `k = 1..=k_max`, leaving out the two
/// boundary branches. Entry `k - 1` holds family size `k`.
pub fn supercritical_interior_totals(g: &SampleGenealogy, k_max: usize) -> Result<Vec<f64>> {
    let n = g.n();
    let s = branch_spectrum_with(g, k_max, true)?;
    let mut out = vec![0.0; k_max];
    for &(i, k, v) in s.per_branch.as_deref().unwrap_or(&[]) {
        if i >= 1 && i + k < n {
            out[k - 1] += v;
        }
    }
    Ok(out)
}
