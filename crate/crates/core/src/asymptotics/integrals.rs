use std::f64::consts::PI;

use crate::error::{param_err, Result};
use crate::quadrature::{integrate_lower_triangle, integrate_upper_triangle};

use super::inverse_square_sum;

/// Absolute tolerance used for the double-integral oracles.
pub const QUADRATURE_TOL: f64 = 1e-9;

/// `h(m, n) = 1/m + 1/(m+1) + ... + 1/n`.
pub fn harmonic_sum(m: usize, n: usize) -> Result<f64> {
    if m < 1 || m > n {
        return param_err(format!("harmonic sum needs 1 <= m <= n, got m = {m}, n = {n}"));
    }
    Ok((m..=n).rev().map(|j| 1.0 / j as f64).sum())
}

fn h(m: usize, n: usize) -> f64 {
    if m > n {
        0.0
    } else {
        (m..=n).rev().map(|j| 1.0 / j as f64).sum()
    }
}

/// The four double integrals whose combinations give the limiting
/// covariance of the supercritical spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integral {
    /// Neighbouring windows sharing one endpoint.
    I1,
    /// Windows sharing one endpoint with the smaller nested in the larger.
    I2,
    /// The same window (`k = k'`); depends on `k` only.
    I3,
    /// Smaller window strictly inside the larger.
    I4,
}

impl Integral {
    pub const ALL: [Integral; 4] = [Integral::I1, Integral::I2, Integral::I3, Integral::I4];

    pub fn name(self) -> &'static str {
        match self {
            Self::I1 => "I1",
            Self::I2 => "I2",
            Self::I3 => "I3",
            Self::I4 => "I4",
        }
    }

    /// Whether `(k, k')` lies in this integral's domain.
    pub fn applies(self, k: usize, kp: usize) -> bool {
        if kp < 2 || kp > k {
            return false;
        }
        match self {
            Self::I1 => true,
            Self::I2 => k > kp,
            Self::I3 => k == kp,
            Self::I4 => k >= kp + 2,
        }
    }

    fn check(self, k: usize, kp: usize) -> Result<()> {
        if self.applies(k, kp) {
            Ok(())
        } else {
            param_err(format!("{} is not defined at (k, k') = ({k}, {kp})", self.name()))
        }
    }
}

/// Closed-form value of `I1..I4` at `(k, k')` with `2 <= k' <= k`.
pub fn integral_closed_form(which: Integral, k: usize, kp: usize) -> Result<f64> {
    which.check(k, kp)?;
    let kf = k as f64;
    let kpf = kp as f64;
    let value = match which {
        Integral::I1 => 1.0 / ((kf - 1.0) * (kpf - 1.0) * (kf + kpf - 1.0)),
        Integral::I2 if k == kp + 1 => {
            1.0 / (2.0 * (kf - 2.0)) + 1.0 / (2.0 * (kf - 1.0)) - PI * PI / 6.0 + inverse_square_sum(k - 2)
        }
        Integral::I2 => {
            let d = kf - kpf;
            (kf + kpf - 2.0) / ((kpf - 1.0) * (kf - 1.0) * d * (d + 1.0))
                - 2.0 * h(kp, k - 2) / ((d - 1.0) * d * (d + 1.0))
        }
        Integral::I3 => PI * PI / 3.0 - 2.0 / (kf - 1.0) - 2.0 * inverse_square_sum(k - 2),
        Integral::I4 if k == kp + 2 => {
            1.0 / (6.0 * (kf - 3.0)) - 5.0 / (6.0 * (kf - 2.0)) - 1.0 / (3.0 * (kf - 1.0)) + PI * PI / 6.0
                - inverse_square_sum(k - 2)
        }
        Integral::I4 => {
            let d = kf - kpf;
            1.0 / ((kpf - 1.0) * d * (d + 1.0)) + 6.0 * h(kp, k - 2) / ((d - 2.0) * (d - 1.0) * d * (d + 1.0))
                - 1.0 / (kpf * (d - 2.0) * (d - 1.0))
                - 2.0 / ((kf - 1.0) * (d - 1.0) * d * (d + 1.0))
        }
    };
    Ok(value)
}

/// Relative placements of two windows `{i..i+k}` and `{i'..i'+k'}` with
/// `k' <= k`, numbered as in the case analysis of the covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapCase {
    /// `i' = i - k'`: the smaller window ends where the larger starts.
    AdjacentLeft,
    /// `i - k' < i' < i`: crossing on the left.
    CrossingLeft,
    /// `i' = i`, `k' < k`: shared left endpoint.
    SharedLeft,
    /// `i' = i`, `k' = k`: identical windows.
    Identical,
    /// `i < i'` and `i' + k' < i + k`: strictly nested.
    Nested,
    /// `i < i'` and `i' + k' = i + k`: shared right endpoint.
    SharedRight,
    /// `i < i' < i + k < i' + k'`: crossing on the right.
    CrossingRight,
    /// `i' = i + k`: the larger window ends where the smaller starts.
    AdjacentRight,
}

/// Probability that both windows are "open" at the given levels: with
/// `v = F(y)` and `w = F(z)` for the logistic CDF `F`, the probability that
/// `U_i, U_{i+k} < y < U_{i+1..i+k-1}` and `U_{i'}, U_{i'+k'} < z < U_{i'+1..i'+k'-1}`.
///
/// These are the case formulas; the general event is evaluated
/// independently in the test suite.
pub fn overlap_probability(case: OverlapCase, k: usize, kp: usize, v: f64, w: f64) -> f64 {
    let kk = k as i32;
    let kpp = kp as i32;
    match case {
        OverlapCase::AdjacentLeft | OverlapCase::AdjacentRight => {
            let common = (1.0 - v).powi(kk - 1) * (1.0 - w).powi(kpp - 1);
            if v < w {
                v * v * w * common
            } else {
                v * w * w * common
            }
        }
        OverlapCase::CrossingLeft | OverlapCase::CrossingRight => 0.0,
        OverlapCase::SharedLeft | OverlapCase::SharedRight => {
            if v < w {
                v * v * (w - v) * (1.0 - v).powi(kk - kpp - 1) * (1.0 - w).powi(kpp - 1)
            } else {
                0.0
            }
        }
        OverlapCase::Identical => {
            if v < w {
                v * v * (1.0 - w).powi(kk - 1)
            } else {
                w * w * (1.0 - v).powi(kk - 1)
            }
        }
        OverlapCase::Nested => {
            if v < w {
                v * v * (w - v).powi(2) * (1.0 - v).powi(kk - kpp - 2) * (1.0 - w).powi(kpp - 1)
            } else {
                0.0
            }
        }
    }
}

/// Evaluates `I1..I4` by nested adaptive quadrature.
///
/// The integrals over `y, z in R` are mapped onto the unit square by
/// `v = F(y)`, `w = F(z)`, whose Jacobian is `1 / (v (1 - v) w (1 - w))`,
/// and the square is split along the diagonal where the integrands kink.
pub fn integral_quadrature(which: Integral, k: usize, kp: usize) -> Result<f64> {
    which.check(k, kp)?;
    let case = match which {
        Integral::I1 => OverlapCase::AdjacentLeft,
        Integral::I2 => OverlapCase::SharedLeft,
        Integral::I3 => OverlapCase::Identical,
        Integral::I4 => OverlapCase::Nested,
    };
    let integrand = |v: f64, w: f64| {
        let jac = v * (1.0 - v) * w * (1.0 - w);
        if jac == 0.0 {
            return 0.0;
        }
        overlap_probability(case, k, kp, v, w) / jac
    };
    let tol = QUADRATURE_TOL / 4.0;
    let below = integrate_lower_triangle(integrand, tol)?;
    let above = integrate_upper_triangle(integrand, tol)?;
    Ok(below.value + above.value)
}
