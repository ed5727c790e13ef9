use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Result};
use crate::rng::StreamRng;

use super::BranchSpectrum;

/// Site frequency spectrum: `counts[k - 1]` mutations carried by exactly
/// `k` sampled individuals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SfsCounts {
    pub counts: Vec<u64>,
}

impl SfsCounts {
    pub fn count(&self, k: usize) -> u64 {
        self.counts.get(k - 1).copied().unwrap_or(0)
    }
}

/// Drops Poisson(`nu * L^k`) mutations on the branches supporting `k`
/// leaves, independently for each `k`. Undefined (NaN) lengths get no
/// mutations.
pub fn scatter_mutations(s: &BranchSpectrum, nu: f64, rng: &mut StreamRng) -> Result<SfsCounts> {
    if !(nu.is_finite() && nu >= 0.0) {
        return param_err(format!("mutation rate must be non-negative, got {nu}"));
    }
    let counts = s
        .totals
        .iter()
        .map(|&len| {
            let mean = nu * len;
            if !(mean.is_finite() && mean > 0.0) {
                return 0;
            }
            let dist = Poisson::new(mean).expect("positive finite mean");
            dist.sample(rng) as u64
        })
        .collect();
    Ok(SfsCounts { counts })
}
