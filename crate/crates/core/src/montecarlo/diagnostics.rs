use std::fmt;

use serde::{Deserialize, Serialize};

use super::ExperimentConfig;
use crate::error::Result;

/// Bounds below which a configuration is treated as satisfying a limit
/// theorem's growth condition at desk scale.
const CRITICAL_RATIO_MAX: f64 = 0.1;
const SUPERCRITICAL_BOUND: f64 = 1e-2;

/// How closely a configuration matches the hypotheses of the limit
/// theorems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub n: usize,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub r: f64,
    /// `n / T`; should be small for the critical theorems.
    pub n_over_t: f64,
    /// `n e^{-rT}`; must vanish for the supercritical law of large numbers.
    pub n_exp_neg_rt: f64,
    /// `n^{3/2} log n e^{-rT}`; must vanish for the supercritical central
    /// limit theorem.
    pub clt_bound: f64,
    pub critical_suitable: bool,
    pub supercritical_lln: bool,
    pub supercritical_clt: bool,
}

pub fn condition_diagnostics(config: &ExperimentConfig) -> Result<ConditionReport> {
    let params = config.resolved_params()?;
    let n = params.n();
    let nf = n as f64;
    let horizon = params.horizon();
    let r = params.r();
    let decay = (-r * horizon).exp();
    let n_exp_neg_rt = nf * decay;
    let clt_bound = nf.powf(1.5) * nf.ln() * decay;
    let supercritical = !params.is_critical();
    Ok(ConditionReport {
        n,
        horizon,
        r,
        n_over_t: nf / horizon,
        n_exp_neg_rt,
        clt_bound,
        critical_suitable: params.is_critical() && nf / horizon <= CRITICAL_RATIO_MAX,
        supercritical_lln: supercritical && n_exp_neg_rt <= SUPERCRITICAL_BOUND,
        supercritical_clt: supercritical && clt_bound <= SUPERCRITICAL_BOUND,
    })
}

fn flag(on: bool) -> &'static str {
    if on {
        "yes"
    } else {
        "no"
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n = {}, T = {}, r = {}", self.n, self.horizon, self.r)?;
        writeln!(f, "n/T                      = {:.6e}", self.n_over_t)?;
        writeln!(f, "n exp(-rT)               = {:.6e}", self.n_exp_neg_rt)?;
        writeln!(f, "n^1.5 log(n) exp(-rT)    = {:.6e}", self.clt_bound)?;
        writeln!(f, "critical CLT conditions  : {}", flag(self.critical_suitable))?;
        writeln!(f, "supercritical LLN        : {}", flag(self.supercritical_lln))?;
        write!(f, "supercritical CLT        : {}", flag(self.supercritical_clt))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genealogy::Regime;
    use crate::params::ModelParams;

    #[test]
    fn critical_desk_run() {
        let p = ModelParams::critical(20_000.0, 2000).unwrap();
        let cfg = ExperimentConfig::new(p, Regime::Exact, 1, 3, 0);
        let d = condition_diagnostics(&cfg).unwrap();
        assert!((d.n_over_t - 0.1).abs() < 1e-15);
        assert!(d.critical_suitable);
        assert!(!d.supercritical_lln && !d.supercritical_clt);
    }

    #[test]
    fn supercritical_desk_run() {
        let p = ModelParams::new(2.0, 1.0, 25.0, 1000, 0.0).unwrap();
        let cfg = ExperimentConfig::new(p, Regime::Exact, 1, 3, 0);
        let d = condition_diagnostics(&cfg).unwrap();
        assert!((d.clt_bound / 3.0e-6 - 1.0).abs() < 0.1, "{}", d.clt_bound);
        assert!(d.supercritical_clt && d.supercritical_lln);
        assert!(!d.critical_suitable);
        assert!(d.to_string().contains("supercritical CLT        : yes"));
    }
}
