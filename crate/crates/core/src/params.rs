use serde::{Deserialize, Serialize};

use crate::error::{param_err, Result};

/// Below this value of `|r| * T` the process is treated as critical.
pub const CRITICAL_CROSSOVER: f64 = 1e-12;

/// Birth-death model and sampling parameters.
///
/// Fields are private so the invariants (`lambda > 0`, `0 <= mu <= lambda`,
/// `T > 0`, `n >= 1`, `nu >= 0`) hold for every value in circulation. The
/// growth rate is always derived from `lambda - mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    lambda: f64,
    mu: f64,
    horizon: f64,
    n: usize,
    nu: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawParams {
    lambda: f64,
    mu: f64,
    #[serde(rename = "T")]
    horizon: f64,
    n: usize,
    #[serde(default)]
    nu: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = crate::Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        ModelParams::new(raw.lambda, raw.mu, raw.horizon, raw.n, raw.nu)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            lambda: p.lambda,
            mu: p.mu,
            horizon: p.horizon,
            n: p.n,
            nu: p.nu,
        }
    }
}

impl ModelParams {
    pub fn new(lambda: f64, mu: f64, horizon: f64, n: usize, nu: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return param_err(format!("birth rate must be positive, got {lambda}"));
        }
        if !(mu.is_finite() && mu >= 0.0) {
            return param_err(format!("death rate must be non-negative, got {mu}"));
        }
        if mu > lambda {
            return param_err(format!(
                "subcritical processes are not supported (lambda = {lambda}, mu = {mu})"
            ));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return param_err(format!("time horizon must be positive, got {horizon}"));
        }
        if n < 1 {
            return param_err("sample size must be at least 1");
        }
        if !(nu.is_finite() && nu >= 0.0) {
            return param_err(format!("mutation rate must be non-negative, got {nu}"));
        }
        Ok(Self {
            lambda,
            mu,
            horizon,
            n,
            nu,
        })
    }

    /// Critical process with `lambda = mu = 1`.
    pub fn critical(horizon: f64, n: usize) -> Result<Self> {
        Self::new(1.0, 1.0, horizon, n, 0.0)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Net growth rate `lambda - mu`.
    pub fn r(&self) -> f64 {
        self.lambda - self.mu
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn is_critical(&self) -> bool {
        self.r().abs() * self.horizon < CRITICAL_CROSSOVER
    }

    pub fn with_n(self, n: usize) -> Result<Self> {
        Self::new(self.lambda, self.mu, self.horizon, n, self.nu)
    }

    pub fn with_horizon(self, horizon: f64) -> Result<Self> {
        Self::new(self.lambda, self.mu, horizon, self.n, self.nu)
    }

    pub fn with_nu(self, nu: f64) -> Result<Self> {
        Self::new(self.lambda, self.mu, self.horizon, self.n, nu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid() {
        assert!(ModelParams::new(0.0, 0.0, 1.0, 1, 0.0).is_err());
        assert!(ModelParams::new(1.0, -0.1, 1.0, 1, 0.0).is_err());
        assert!(ModelParams::new(1.0, 1.5, 1.0, 1, 0.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.0, 1, 0.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 1.0, 0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 1.0, 1, -1.0).is_err());
        assert!(ModelParams::new(f64::NAN, 1.0, 1.0, 1, 0.0).is_err());
    }

    #[test]
    fn growth_rate_is_derived() {
        let p = ModelParams::new(2.0, 0.5, 3.0, 4, 0.0).unwrap();
        assert_eq!(p.r(), 1.5);
        assert!(!p.is_critical());
        assert!(ModelParams::critical(10.0, 3).unwrap().is_critical());
    }

    #[test]
    fn json_validates() {
        let ok: ModelParams =
            serde_json::from_str(r#"{"lambda":1.0,"mu":1.0,"T":5.0,"n":3}"#).unwrap();
        assert_eq!(ok.horizon(), 5.0);
        let bad = serde_json::from_str::<ModelParams>(r#"{"lambda":1.0,"mu":2.0,"T":5.0,"n":3}"#);
        assert!(bad.is_err());
    }
}
