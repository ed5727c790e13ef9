//! Replicated experiments, summary statistics, goodness-of-fit tests and a
//! forward birth-death simulator used as an independent oracle.

mod diagnostics;
mod forward;
mod stats;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{standardize_critical, standardize_supercritical};
use crate::error::{param_err, Error, Result};
use crate::genealogy::{branch_spectrum, sample_genealogy, scatter_mutations, Regime};
use crate::params::ModelParams;
use crate::rng::RandomStream;

pub use diagnostics::{condition_diagnostics, ConditionReport};
pub use forward::{forward_bd_genealogy, forward_population, ForwardPopulation, FORWARD_POPULATION_GUARD, REJECTION_BUDGET};
pub use stats::{
    chi_square_gof, column_stats, empirical_stats, kolmogorov_survival, ks_statistic, ks_two_sample, ColumnStats,
    EmpiricalStats, TestOutcome,
};

/// How the sampling horizon is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum HorizonRule {
    /// Use the horizon stored in the parameters.
    Explicit,
    /// `T = factor * n`, keeping `n / T` small for critical experiments.
    MultipleOfN { factor: f64 },
}

impl Default for HorizonRule {
    fn default() -> Self {
        Self::MultipleOfN { factor: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub params: ModelParams,
    pub regime: Regime,
    pub replicates: usize,
    #[serde(rename = "K")]
    pub k_max: usize,
    pub seed: u64,
    #[serde(default)]
    pub horizon_rule: HorizonRule,
    /// Worker threads; `None` uses the global rayon pool.
    #[serde(default)]
    pub parallelism: Option<usize>,
    /// Scatter mutations at rate `params.nu` on every replicate.
    #[serde(default)]
    pub mutations: bool,
}

impl ExperimentConfig {
    pub fn new(params: ModelParams, regime: Regime, replicates: usize, k_max: usize, seed: u64) -> Self {
        Self {
            params,
            regime,
            replicates,
            k_max,
            seed,
            horizon_rule: HorizonRule::Explicit,
            parallelism: None,
            mutations: false,
        }
    }

    /// Parameters with the horizon rule applied.
    pub fn resolved_params(&self) -> Result<ModelParams> {
        match self.horizon_rule {
            HorizonRule::Explicit => Ok(self.params),
            HorizonRule::MultipleOfN { factor } => self.params.with_horizon(factor * self.params.n() as f64),
        }
    }

    /// Whether the standardized statistic is the critical one (`z_1..z_K`)
    /// or the supercritical one (`z_2..z_K`).
    pub fn is_critical(&self) -> bool {
        match self.regime {
            Regime::Exact => self.params.is_critical(),
            Regime::CriticalIntermediate | Regime::CriticalLimit => true,
            Regime::SupercriticalLimit => false,
        }
    }

    /// Family sizes carried by the z-vector.
    pub fn z_indices(&self) -> std::ops::RangeInclusive<usize> {
        if self.is_critical() {
            1..=self.k_max
        } else {
            2..=self.k_max
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.params.n();
        if self.replicates < 1 {
            return param_err("at least one replicate is required");
        }
        if n < 2 {
            return param_err("experiments need n >= 2");
        }
        if self.k_max < 1 || self.k_max > n - 1 {
            return param_err(format!("K must lie in 1..={}, got {}", n - 1, self.k_max));
        }
        if !self.is_critical() && self.k_max < 2 {
            return param_err("supercritical experiments need K >= 2");
        }
        if let HorizonRule::MultipleOfN { factor } = self.horizon_rule {
            if !(factor > 0.0 && factor.is_finite()) {
                return param_err(format!("horizon factor must be positive, got {factor}"));
            }
        }
        if self.parallelism == Some(0) {
            return param_err("parallelism must be at least 1");
        }
        Ok(())
    }
}

/// One replicate's record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRow {
    pub replicate: u64,
    /// Population size at the sampling time, known only in the exact
    /// regime.
    #[serde(rename = "N_T")]
    pub population_size: Option<u64>,
    /// `L^1..L^K`; undefined entries are NaN and serialize as `null`.
    #[serde(with = "nan_as_null")]
    pub lengths: Vec<f64>,
    /// `M^1..M^K`, when mutations were scattered.
    pub mutations: Option<Vec<u64>>,
    #[serde(with = "nan_as_null")]
    pub z: Vec<f64>,
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let opt: Vec<Option<f64>> = v.iter().map(|x| (!x.is_nan()).then_some(*x)).collect();
        opt.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let opt = Vec::<Option<f64>>::deserialize(d)?;
        Ok(opt.into_iter().map(|x| x.unwrap_or(f64::NAN)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    pub config: ExperimentConfig,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateTable {
    pub rows: Vec<ReplicateRow>,
    pub meta: TableMeta,
}

impl ReplicateTable {
    pub fn k_max(&self) -> usize {
        self.meta.config.k_max
    }

    pub fn is_critical(&self) -> bool {
        self.meta.config.is_critical()
    }

    /// Column `j` of the z-vectors.
    pub fn z_column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.z[j]).collect()
    }

    pub fn length_column(&self, k: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.lengths[k - 1]).collect()
    }

    pub fn mutation_column(&self, k: usize) -> Option<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| r.mutations.as_ref().map(|m| m[k - 1] as f64))
            .collect()
    }
}

/// Runs one replicate on its own stream.
pub fn run_replicate(config: &ExperimentConfig, params: &ModelParams, index: u64) -> Result<ReplicateRow> {
    let mut rng = RandomStream::new(config.seed, index).rng();
    let g = sample_genealogy(params, config.regime, &mut rng)?;
    let spectrum = branch_spectrum(&g, config.k_max)?;
    let n = params.n();
    let z = if config.is_critical() {
        let scale = g
            .population_scale()
            .ok_or_else(|| Error::Parameter("critical standardization needs a population scale".into()))?;
        standardize_critical(&spectrum, scale, n, config.k_max)?
    } else {
        standardize_supercritical(&spectrum.totals, n, params.r(), config.k_max)?
    };
    let mutations = if config.mutations {
        Some(scatter_mutations(&spectrum, params.nu(), &mut rng)?.counts)
    } else {
        None
    };
    Ok(ReplicateRow {
        replicate: index,
        population_size: g.population_size,
        lengths: spectrum.totals,
        mutations,
        z,
    })
}

/// Runs `R` independent replicates, replicate `i` on stream `i`, and
/// returns them in index order. The table does not depend on the number of
/// worker threads.
///
/// If a replicate fails, the rows before it are returned inside
/// [`Error::Partial`].
pub fn run_replicates(config: &ExperimentConfig) -> Result<ReplicateTable> {
    config.validate()?;
    let params = config.resolved_params()?;
    let start = Instant::now();
    let work = || -> Vec<Result<ReplicateRow>> {
        (0..config.replicates as u64)
            .into_par_iter()
            .map(|i| run_replicate(config, &params, i))
            .collect()
    };
    let results = match config.parallelism {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Parameter(format!("cannot build thread pool: {e}")))?
            .install(work),
        None => work(),
    };

    let mut rows = Vec::with_capacity(results.len());
    for (i, result) in results.into_iter().enumerate() {
        match result {
            Ok(row) => rows.push(row),
            Err(e) => {
                return Err(Error::Partial {
                    completed: rows,
                    failed_at: i,
                    source: Box::new(e),
                })
            }
        }
    }
    let mut echo = config.clone();
    echo.params = params;
    echo.horizon_rule = HorizonRule::Explicit;
    Ok(ReplicateTable {
        rows,
        meta: TableMeta {
            config: echo,
            wall_time_secs: start.elapsed().as_secs_f64(),
        },
    })
}
