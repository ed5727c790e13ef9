//! Globally adaptive Gauss-Kronrod (7/15) quadrature.
//!
//! The bisection strategy follows QUADPACK's QAG: keep every subinterval
//! with its error estimate and split the worst one until the summed error
//! drops under the tolerance. Kronrod nodes never touch the interval ends,
//! so integrable endpoint singularities are fine.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the 7-point rule (nodes are XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and subdivision budget.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_intervals: 4000,
        }
    }
}

impl QuadOptions {
    pub fn abs(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol: 0.0,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadEstimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += wk * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Segment { a, b, value, error }
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadEstimate> {
    let (est, tol) = adaptive(f, a, b, opts);
    if est.error <= tol {
        Ok(est)
    } else {
        Err(Error::Quadrature {
            achieved: est.error,
            requested: tol,
        })
    }
}

/// Best estimate after refinement stops, with the tolerance it aimed for.
fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> (QuadEstimate, f64) {
    if a == b {
        return (QuadEstimate { value: 0.0, error: 0.0 }, opts.abs_tol);
    }
    let first = kronrod15(&mut f, a, b);
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    let mut tol;
    loop {
        tol = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= tol || heap.len() >= opts.max_intervals {
            break;
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval collapsed to floating-point resolution
            heap.push(Segment { error: 0.0, ..worst });
            total_err -= worst.error;
            continue;
        }
        let left = kronrod15(&mut f, worst.a, mid);
        let right = kronrod15(&mut f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed accumulated cancellation from the running updates.
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    (QuadEstimate { value, error }, tol)
}

/// Integrates `f` over `[a, inf)` through the map `t = a + x / (1 - x)`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, opts: QuadOptions) -> Result<QuadEstimate> {
    integrate(
        |x| {
            let one_minus = 1.0 - x;
            let t = a + x / one_minus;
            let v = f(t) / (one_minus * one_minus);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        opts,
    )
}

/// Integrates `f(v, w)` over the triangle `0 < v < w < 1`, inner over `v`.
///
/// Inner integrals aim an order of magnitude below the outer tolerance.
/// Near singular edges they may stall at the floating-point floor; that is
/// accepted as long as their error stays within the outer tolerance.
pub fn integrate_lower_triangle<F: Fn(f64, f64) -> f64>(f: F, abs_tol: f64) -> Result<QuadEstimate> {
    let inner_opts = QuadOptions {
        abs_tol: abs_tol * 0.1,
        rel_tol: 1e-13,
        ..QuadOptions::default()
    };
    let mut worst_inner = 0.0f64;
    let outer = integrate(
        |w| {
            let (est, _) = adaptive(|v| f(v, w), 0.0, w, inner_opts);
            worst_inner = worst_inner.max(est.error);
            est.value
        },
        0.0,
        1.0,
        QuadOptions::abs(abs_tol),
    )?;
    if worst_inner > abs_tol {
        return Err(Error::Quadrature {
            achieved: worst_inner,
            requested: abs_tol,
        });
    }
    Ok(QuadEstimate {
        value: outer.value,
        error: outer.error + worst_inner,
    })
}

/// Integrates `f(v, w)` over the triangle `0 < w < v < 1`.
pub fn integrate_upper_triangle<F: Fn(f64, f64) -> f64>(f: F, abs_tol: f64) -> Result<QuadEstimate> {
    integrate_lower_triangle(|w, v| f(v, w), abs_tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let est = integrate(|x| 3.0 * x * x, 0.0, 2.0, QuadOptions::default()).unwrap();
        assert!((est.value - 8.0).abs() < 1e-13);
    }

    #[test]
    fn log_endpoint_singularity() {
        // integral of -ln x over (0,1) is 1
        let est = integrate(|x| -x.ln(), 0.0, 1.0, QuadOptions::abs(1e-11)).unwrap();
        assert!((est.value - 1.0).abs() < 1e-10, "{}", est.value);
    }

    #[test]
    fn semi_infinite_cauchy_tail() {
        let est = integrate_to_infinity(|t| 1.0 / (1.0 + t).powi(2), 0.0, QuadOptions::default()).unwrap();
        assert!((est.value - 1.0).abs() < 1e-12);
        let est = integrate_to_infinity(|t| (-t).exp(), 0.0, QuadOptions::default()).unwrap();
        assert!((est.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn triangle_area_and_moment() {
        let est = integrate_lower_triangle(|_, _| 1.0, 1e-12).unwrap();
        assert!((est.value - 0.5).abs() < 1e-12);
        // integral of v over v < w is 1/6
        let est = integrate_lower_triangle(|v, _| v, 1e-12).unwrap();
        assert!((est.value - 1.0 / 6.0).abs() < 1e-12);
        let est = integrate_upper_triangle(|v, _| v, 1e-12).unwrap();
        assert!((est.value - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn reports_non_convergence() {
        let opts = QuadOptions {
            abs_tol: 1e-14,
            rel_tol: 0.0,
            max_intervals: 3,
        };
        let err = integrate(|x| (1.0 / x).sin(), 0.0, 1.0, opts).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
