//! Densities, distribution functions and inverse-CDF samplers for the
//! quantities that drive the coalescent point process.
//!
//! Every sampler consumes exactly one open-interval uniform per variate and
//! maps it through a closed-form quantile function, so a replicate's draws
//! are a fixed function of its random stream. The `*_quantile` functions are
//! public so the inverse maps can be tested without randomness.

use crate::error::{param_err, Result};
use crate::params::ModelParams;
use crate::rng::StreamRng;

/// Lower clamp for `delta_T`; below this the tail probability underflows.
pub const DELTA_FLOOR: f64 = 1e-300;

/// `P(H >= T)`: probability that a coalescence height of the unsampled
/// population exceeds the horizon. The population at `T` is geometric with
/// this success probability.
pub fn survival_tail_delta(params: &ModelParams) -> f64 {
    let lambda = params.lambda();
    let t = params.horizon();
    let delta = if params.is_critical() {
        1.0 / (1.0 + lambda * t)
    } else {
        // r e^{-rT} / (lambda (1 - e^{-rT}) + r e^{-rT}) = r / (lambda (e^{rT} - 1) + r)
        let r = params.r();
        r / (lambda * (r * t).exp_m1() + r)
    };
    delta.clamp(DELTA_FLOOR, 1.0 - f64::EPSILON)
}

/// Density of a coalescence height for the whole (unsampled) population.
pub fn coalescence_pdf(params: &ModelParams, t: f64) -> f64 {
    thinned_pdf_unchecked(params, 1.0, t)
}

/// Density of a coalescence height after Bernoulli sampling with
/// probability `y`.
pub fn thinned_coalescence_pdf(params: &ModelParams, y: f64, t: f64) -> Result<f64> {
    check_fraction(y)?;
    Ok(thinned_pdf_unchecked(params, y, t))
}

fn check_fraction(y: f64) -> Result<()> {
    if !(y > 0.0 && y <= 1.0) {
        return param_err(format!("sampling probability must lie in (0, 1], got {y}"));
    }
    Ok(())
}

fn thinned_pdf_unchecked(params: &ModelParams, y: f64, t: f64) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    let a = y * params.lambda();
    if params.is_critical() {
        let d = 1.0 + a * t;
        return a / (d * d);
    }
    let r = params.r();
    let e = (-r * t).exp();
    let d = a + (r - a) * e;
    a * r * r * e / (d * d)
}

/// CDF of a thinned coalescence height: `a (1 - e^{-rt}) / (a + (r - a) e^{-rt})`
/// with `a = y lambda`, and `a t / (1 + a t)` in the critical case.
pub fn thinned_coalescence_cdf(params: &ModelParams, y: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let a = y * params.lambda();
    if params.is_critical() {
        return a * t / (1.0 + a * t);
    }
    let r = params.r();
    let e = (-r * t).exp();
    a * (-(-r * t).exp_m1()) / (a + (r - a) * e)
}

/// Quantile of a thinned coalescence height conditioned to be below the
/// horizon, i.e. the law of `H_{i,n,T}` given `Y_{n,T} = y`.
pub fn conditional_height_quantile(params: &ModelParams, y: f64, p: f64) -> f64 {
    let c = p * thinned_coalescence_cdf(params, y, params.horizon());
    thinned_height_from_cdf(params, y, c)
}

/// Inverts the thinned CDF at level `c` in `[0, 1)`.
fn thinned_height_from_cdf(params: &ModelParams, y: f64, c: f64) -> f64 {
    let a = y * params.lambda();
    let ratio = c / (a * (1.0 - c));
    if params.is_critical() {
        return ratio;
    }
    let r = params.r();
    (r * ratio).ln_1p() / r
}

/// Conditional density of `H_{i,n,T}` given `Y_{n,T} = y` on `(0, T)`.
pub fn conditional_height_pdf(params: &ModelParams, y: f64, t: f64) -> f64 {
    if t <= 0.0 || t >= params.horizon() {
        return 0.0;
    }
    thinned_pdf_unchecked(params, y, t) / thinned_coalescence_cdf(params, y, params.horizon())
}

/// Density of the mixing sampling probability `Y_{n,T}` on `(0, 1)`.
pub fn sampling_fraction_pdf(params: &ModelParams, y: f64) -> f64 {
    if !(y > 0.0 && y < 1.0) {
        return 0.0;
    }
    let delta = survival_tail_delta(params);
    let n = params.n() as f64;
    let d = y + delta - y * delta;
    // n delta y^{n-1} / d^{n+1}, assembled in log space for large n
    (n.ln() + delta.ln() + (n - 1.0) * y.ln() - (n + 1.0) * d.ln()).exp()
}

/// CDF of `Y_{n,T}`: `(y / (delta + (1 - delta) y))^n`.
pub fn sampling_fraction_cdf(params: &ModelParams, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if y >= 1.0 {
        return 1.0;
    }
    let delta = survival_tail_delta(params);
    let base = y / (delta + (1.0 - delta) * y);
    base.powi(params.n() as i32)
}

/// Quantile of `Y_{n,T}`.
pub fn sampling_fraction_quantile(params: &ModelParams, p: f64) -> f64 {
    let delta = survival_tail_delta(params);
    let (u, one_minus_u) = root_pair(p, params.n());
    delta * u / (one_minus_u + delta * u)
}

/// `(p^{1/n}, 1 - p^{1/n})` with the complement computed without cancellation.
fn root_pair(p: f64, n: usize) -> (f64, f64) {
    let l = p.ln() / n as f64;
    (l.exp(), -l.exp_m1())
}

/// CDF of the scaled fraction `Q_{n,T} = Y_{n,T} / delta_T`.
pub fn scaled_fraction_cdf(params: &ModelParams, q: f64) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    let delta = survival_tail_delta(params);
    if q >= 1.0 / delta {
        return 1.0;
    }
    (q / (1.0 + (1.0 - delta) * q)).powi(params.n() as i32)
}

/// Quantile of `Q_{n,T}`: `q = u / (1 - (1 - delta) u)` with `u = p^{1/n}`.
pub fn scaled_fraction_quantile(params: &ModelParams, p: f64) -> f64 {
    let delta = survival_tail_delta(params);
    let (u, one_minus_u) = root_pair(p, params.n());
    u / (one_minus_u + delta * u)
}

/// Draws `Q_{n,T}`, supported on `(0, 1 / delta_T)`.
pub fn sample_scaled_fraction(params: &ModelParams, rng: &mut StreamRng) -> f64 {
    scaled_fraction_quantile(params, rng.uniform_open())
}

/// CDF of `U_{i,n,T}` given `Q_{n,T} = q`: `((1 + q a) / q) u / (1 + a u)`
/// on `(0, q)`, where `a = delta_T T`.
pub fn pairwise_time_cdf(a: f64, q: f64, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= q {
        return 1.0;
    }
    (1.0 + q * a) / q * u / (1.0 + a * u)
}

/// Quantile of `U_{i,n,T}` given `Q_{n,T} = q`: `p q / (1 + q a (1 - p))`.
pub fn pairwise_time_quantile(a: f64, q: f64, p: f64) -> f64 {
    p * q / (1.0 + q * a * (1.0 - p))
}

/// Draws `U_{i,n,T}` given `Q_{n,T} = q`.
pub fn sample_pairwise_time_given_fraction(params: &ModelParams, q: f64, rng: &mut StreamRng) -> Result<f64> {
    if !(q > 0.0 && q.is_finite()) {
        return param_err(format!("scaled fraction must be positive, got {q}"));
    }
    let a = survival_tail_delta(params) * params.horizon();
    Ok(pairwise_time_quantile(a, q, rng.uniform_open()))
}

/// Continuation probability `(1 - delta_T)(1 - y)` of the geometric gap and
/// its complement, the latter computed without cancellation.
pub fn gap_continuation(params: &ModelParams, y: f64) -> (f64, f64) {
    let delta = survival_tail_delta(params);
    let stop = delta + y - delta * y;
    ((1.0 - delta) * (1.0 - y), stop)
}

/// Quantile of the geometric gap `X_{i,n,T}` on `{1, 2, ...}`.
pub fn gap_quantile(params: &ModelParams, y: f64, p: f64) -> u64 {
    let (_, stop) = gap_continuation(params, y);
    if stop >= 1.0 {
        return 1;
    }
    let extra = ((-p).ln_1p() / (-stop).ln_1p()).floor();
    if extra >= u64::MAX as f64 - 1.0 {
        u64::MAX
    } else {
        1 + extra as u64
    }
}

/// Draws the number of individuals examined to reach the next sampled one.
pub fn sample_gap(params: &ModelParams, y: f64, rng: &mut StreamRng) -> Result<u64> {
    check_fraction(y)?;
    Ok(gap_quantile(params, y, rng.uniform_open()))
}

/// Limit-regime primitives that do not depend on model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitPrimitive {
    /// Standard logistic, density `e^u / (1 + e^u)^2`.
    Logistic,
    /// Exponential with mean one.
    ExponentialUnit,
    /// Density `1 / (1 + u)^2` on `(0, inf)`.
    HeavyTail,
    /// `Q_n`, density `n q^{n-1} / (1 + q)^{n+1}` on `(0, inf)`.
    LimitFraction(usize),
}

impl LimitPrimitive {
    /// Inverse CDF at level `p`.
    pub fn quantile(self, p: f64) -> f64 {
        match self {
            Self::Logistic => (p / (1.0 - p)).ln(),
            Self::ExponentialUnit => -(-p).ln_1p(),
            Self::HeavyTail => p / (1.0 - p),
            Self::LimitFraction(n) => {
                let (u, one_minus_u) = root_pair(p, n);
                u / one_minus_u
            }
        }
    }

    pub fn cdf(self, x: f64) -> f64 {
        match self {
            Self::Logistic => 1.0 / (1.0 + (-x).exp()),
            Self::ExponentialUnit => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x).exp_m1()
                }
            }
            Self::HeavyTail => {
                if x <= 0.0 {
                    0.0
                } else {
                    x / (1.0 + x)
                }
            }
            Self::LimitFraction(n) => {
                if x <= 0.0 {
                    0.0
                } else {
                    (x / (1.0 + x)).powi(n as i32)
                }
            }
        }
    }

    pub fn sample(self, rng: &mut StreamRng) -> f64 {
        self.quantile(rng.uniform_open())
    }
}

/// Draws one limit-regime primitive.
pub fn sample_limit_primitive(kind: LimitPrimitive, rng: &mut StreamRng) -> f64 {
    kind.sample(rng)
}
