use crate::distributions::{
    conditional_height_quantile, gap_quantile, pairwise_time_quantile, sampling_fraction_quantile,
    scaled_fraction_quantile, survival_tail_delta, thinned_coalescence_cdf, LimitPrimitive,
};
use crate::error::{param_err, Result};
use crate::params::ModelParams;
use crate::rng::StreamRng;

use super::{Coordinate, Regime, SampleGenealogy};

/// Exact genealogy of a uniform sample of size `n` at time `T`.
///
/// Draws the scaled sampling fraction, then `n - 1` conditionally i.i.d.
/// heights below `T`, then the `n + 1` geometric gaps whose sum gives the
/// population size. Critical parameters go through `Q -> U -> H = T U / Q`;
/// supercritical ones invert the thinned height CDF directly at
/// `y = delta_T Q`.
pub fn sample_genealogy_exact(params: &ModelParams, rng: &mut StreamRng) -> SampleGenealogy {
    let n = params.n();
    let t = params.horizon();
    let delta = survival_tail_delta(params);
    let mut times = Vec::with_capacity(n.saturating_sub(1));

    let (fraction, y) = if params.is_critical() {
        let q = scaled_fraction_quantile(params, rng.uniform_open());
        let a = delta * t;
        for _ in 1..n {
            let u = pairwise_time_quantile(a, q, rng.uniform_open());
            times.push(t * u / q);
        }
        (q, (delta * q).min(1.0))
    } else {
        let y = sampling_fraction_quantile(params, rng.uniform_open());
        for _ in 1..n {
            times.push(conditional_height_quantile(params, y, rng.uniform_open()));
        }
        (y / delta, y)
    };

    let population: u64 = (0..=n)
        .map(|_| gap_quantile(params, y, rng.uniform_open()))
        .fold(0u64, |acc, x| acc.saturating_add(x))
        - 1;

    SampleGenealogy {
        regime: Regime::Exact,
        coordinate: Coordinate::H,
        horizon: t,
        r: params.r(),
        times,
        population_size: Some(population),
        fraction,
    }
}

/// Genealogy from one of the large-`T` / large-`n` approximations.
pub fn sample_genealogy_limit(params: &ModelParams, regime: Regime, rng: &mut StreamRng) -> Result<SampleGenealogy> {
    let n = params.n();
    if n < 2 {
        return param_err("limit regimes need a sample of at least two");
    }
    let t = params.horizon();
    let nf = n as f64;
    let mut times = Vec::with_capacity(n - 1);
    let (coordinate, fraction) = match regime {
        Regime::Exact => return param_err("use sample_genealogy_exact for the exact regime"),
        Regime::CriticalIntermediate | Regime::CriticalLimit if !params.is_critical() => {
            return param_err(format!("regime {} needs lambda = mu", regime.name()));
        }
        Regime::SupercriticalLimit if params.is_critical() => {
            return param_err("supercritical-limit regime needs lambda > mu");
        }
        Regime::CriticalIntermediate => {
            let q = LimitPrimitive::LimitFraction(n).sample(rng);
            for _ in 1..n {
                let u = pairwise_time_quantile(1.0, q, rng.uniform_open());
                times.push(t * u / q);
            }
            (Coordinate::H, q)
        }
        Regime::CriticalLimit => {
            let w = LimitPrimitive::ExponentialUnit.sample(rng);
            for _ in 1..n {
                let u = LimitPrimitive::HeavyTail.sample(rng);
                times.push(t * w * u / nf);
            }
            (Coordinate::H, w)
        }
        Regime::SupercriticalLimit => {
            let r = params.r();
            let w = LimitPrimitive::ExponentialUnit.sample(rng);
            let shift = -w.ln() + nf.ln();
            for _ in 1..n {
                let u = LimitPrimitive::Logistic.sample(rng);
                times.push((shift + u) / r);
            }
            (Coordinate::G, w)
        }
    };
    Ok(SampleGenealogy {
        regime,
        coordinate,
        horizon: t,
        r: params.r(),
        times,
        population_size: None,
        fraction,
    })
}

/// Dispatches on the regime.
pub fn sample_genealogy(params: &ModelParams, regime: Regime, rng: &mut StreamRng) -> Result<SampleGenealogy> {
    match regime {
        Regime::Exact => Ok(sample_genealogy_exact(params, rng)),
        other => sample_genealogy_limit(params, other, rng),
    }
}

/// Coalescent point process of the whole population alive at `T`, with no
/// sampling: heights are drawn from the unthinned density until one reaches
/// `T`. Returns the heights of the individuals after the first; the
/// population size is `heights.len() + 1`.
pub fn sample_whole_population(params: &ModelParams, rng: &mut StreamRng) -> Vec<f64> {
    let t = params.horizon();
    let below = thinned_coalescence_cdf(params, 1.0, t);
    let mut heights = Vec::new();
    loop {
        let p = rng.uniform_open();
        if p >= below {
            return heights;
        }
        // p < F(T): invert F at p, i.e. the conditional quantile at p / F(T)
        heights.push(conditional_height_quantile(params, 1.0, p / below));
    }
}
