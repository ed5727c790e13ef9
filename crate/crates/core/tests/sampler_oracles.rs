//! Distributional checks of the genealogy samplers against analytic laws.

use cppsfs::distributions::{
    sampling_fraction_cdf, sampling_fraction_pdf, scaled_fraction_cdf, survival_tail_delta, thinned_coalescence_cdf,
    LimitPrimitive,
};
use cppsfs::genealogy::{
    branch_spectrum, sample_genealogy, sample_genealogy_exact, sample_genealogy_limit, sample_whole_population, Regime,
};
use cppsfs::montecarlo::{chi_square_gof, ks_statistic, ks_two_sample};
use cppsfs::quadrature::{integrate, QuadOptions};
use cppsfs::{ModelParams, RandomStream};

const ALPHA: f64 = 0.01;

fn draws<T>(seed: u64, count: u64, f: impl Fn(&mut cppsfs::rng::StreamRng) -> T) -> Vec<T> {
    (0..count).map(|i| f(&mut RandomStream::new(seed, i).rng())).collect()
}

#[test]
fn critical_pair_height_matches_mixture_density() {
    let p = ModelParams::critical(100.0, 2).unwrap();
    let t = p.horizon();
    let h: Vec<f64> = draws(1, 100_000, |rng| sample_genealogy_exact(&p, rng).times[0]);
    // H_1 has CDF  int_0^1 F_y(t) / F_y(T) f_Y(y) dy
    let mixture = |x: f64| {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= t {
            return 1.0;
        }
        integrate(
            |y| {
                let w = sampling_fraction_pdf(&p, y);
                if w == 0.0 {
                    0.0
                } else {
                    w * thinned_coalescence_cdf(&p, y, x) / thinned_coalescence_cdf(&p, y, t)
                }
            },
            0.0,
            1.0,
            QuadOptions::abs(1e-10),
        )
        .unwrap()
        .value
    };
    let ks = ks_statistic(&h, mixture).unwrap();
    assert!(ks.p_value >= ALPHA, "D = {}, p = {}", ks.statistic, ks.p_value);
}

#[test]
fn scaled_fraction_law() {
    for p in [
        ModelParams::critical(50.0, 5).unwrap(),
        ModelParams::new(2.0, 1.0, 6.0, 8, 0.0).unwrap(),
    ] {
        let q: Vec<f64> = draws(2, 20_000, |rng| sample_genealogy_exact(&p, rng).fraction);
        let ks = ks_statistic(&q, |x| scaled_fraction_cdf(&p, x)).unwrap();
        assert!(ks.p_value >= ALPHA, "D = {}, p = {}", ks.statistic, ks.p_value);
        let delta = survival_tail_delta(&p);
        let y: Vec<f64> = q.iter().map(|q| q * delta).collect();
        let ks = ks_statistic(&y, |x| sampling_fraction_cdf(&p, x)).unwrap();
        assert!(ks.p_value >= ALPHA);
    }
}

#[test]
fn supercritical_heights_given_fraction() {
    // with n = 2 the single height given Y = y has CDF F_y(t) / F_y(T);
    // transform each draw by its own conditional CDF and test for uniformity
    let p = ModelParams::new(1.5, 0.5, 5.0, 2, 0.0).unwrap();
    let delta = survival_tail_delta(&p);
    let u: Vec<f64> = draws(3, 20_000, |rng| {
        let g = sample_genealogy_exact(&p, rng);
        let y = g.fraction * delta;
        thinned_coalescence_cdf(&p, y, g.times[0]) / thinned_coalescence_cdf(&p, y, p.horizon())
    });
    let ks = ks_statistic(&u, |x| x.clamp(0.0, 1.0)).unwrap();
    assert!(ks.p_value >= ALPHA, "D = {}, p = {}", ks.statistic, ks.p_value);
}

#[test]
fn critical_limit_conditional_law() {
    let p = ModelParams::critical(1e4, 50).unwrap();
    let n = p.n() as f64;
    let mut scaled = Vec::new();
    for g in draws(4, 400, |rng| sample_genealogy_limit(&p, Regime::CriticalLimit, rng).unwrap()) {
        scaled.extend(g.times.iter().map(|h| h * n / (p.horizon() * g.fraction)));
    }
    scaled.truncate(10_000);
    let ks = ks_statistic(&scaled, |x| LimitPrimitive::HeavyTail.cdf(x)).unwrap();
    assert!(ks.p_value >= ALPHA, "D = {}, p = {}", ks.statistic, ks.p_value);
    let w: Vec<f64> = draws(5, 10_000, |rng| sample_genealogy_limit(&p, Regime::CriticalLimit, rng).unwrap().fraction);
    assert!(ks_statistic(&w, |x| LimitPrimitive::ExponentialUnit.cdf(x)).unwrap().p_value >= ALPHA);
}

#[test]
fn supercritical_limit_is_logistic_after_shift() {
    let p = ModelParams::new(3.0, 1.0, 1.0, 100, 0.0).unwrap();
    let (r, n) = (p.r(), p.n() as f64);
    let mut u = Vec::new();
    for g in draws(6, 200, |rng| sample_genealogy_limit(&p, Regime::SupercriticalLimit, rng).unwrap()) {
        u.extend(g.times.iter().map(|x| r * x - n.ln() + g.fraction.ln()));
    }
    u.truncate(10_000);
    let ks = ks_statistic(&u, |x| LimitPrimitive::Logistic.cdf(x)).unwrap();
    assert!(ks.p_value >= ALPHA, "D = {}, p = {}", ks.statistic, ks.p_value);
}

#[test]
fn intermediate_times_approach_heavy_tail() {
    // U_{1,n} = H Q / T; same streams for every n so the trend is not noise
    let distance = |n: usize| {
        let p = ModelParams::critical(1.0, n).unwrap();
        let u: Vec<f64> = draws(7, 20_000, |rng| {
            let g = sample_genealogy_limit(&p, Regime::CriticalIntermediate, rng).unwrap();
            g.times[0] * g.fraction / g.horizon
        });
        ks_statistic(&u, |x| LimitPrimitive::HeavyTail.cdf(x)).unwrap().statistic
    };
    let (d10, d100, d1000) = (distance(10), distance(100), distance(1000));
    assert!(d10 > d100 && d100 >= d1000 * 0.9, "{d10} {d100} {d1000}");
    assert!(d10 > d1000);
}

#[test]
fn whole_population_is_geometric() {
    let p = ModelParams::new(1.3, 1.0, 3.0, 1, 0.0).unwrap();
    let delta = survival_tail_delta(&p);
    let sizes: Vec<usize> = draws(8, 100_000, |rng| sample_whole_population(&p, rng).len() + 1);
    let m = sizes.len() as f64;
    // bins 1, 2, ..., pooled tail once expected counts drop below 5
    let mut expected = Vec::new();
    let mut observed = Vec::new();
    let mut tail = 1.0;
    let mut j = 1usize;
    loop {
        let pj = delta * (1.0 - delta).powi(j as i32 - 1);
        if m * (tail - pj) < 5.0 {
            expected.push(m * tail);
            observed.push(sizes.iter().filter(|&&s| s >= j).count() as u64);
            break;
        }
        expected.push(m * pj);
        observed.push(sizes.iter().filter(|&&s| s == j).count() as u64);
        tail -= pj;
        j += 1;
    }
    let chi = chi_square_gof(&observed, &expected, 0).unwrap();
    assert!(chi.p_value >= ALPHA, "chi2 = {}, p = {}", chi.statistic, chi.p_value);
}

#[test]
fn exact_sampler_population_at_least_sample_size() {
    let p = ModelParams::critical(30.0, 12).unwrap();
    for g in draws(9, 500, |rng| sample_genealogy_exact(&p, rng)) {
        assert!(g.population_size.unwrap() >= 12);
        assert!(g.times.iter().all(|&h| h > 0.0 && h < 30.0));
    }
}

#[test]
fn spectra_exchangeable_across_streams() {
    let p = ModelParams::critical(200.0, 20).unwrap();
    let totals = |first: u64| -> Vec<Vec<f64>> {
        (first..first + 5000)
            .map(|i| {
                let mut rng = RandomStream::new(10, i).rng();
                let g = sample_genealogy(&p, Regime::Exact, &mut rng).unwrap();
                branch_spectrum(&g, 3).unwrap().totals
            })
            .collect()
    };
    let (a, b) = (totals(0), totals(1_000_000));
    for k in 0..3 {
        let xa: Vec<f64> = a.iter().map(|t| t[k]).collect();
        let xb: Vec<f64> = b.iter().map(|t| t[k]).collect();
        let ks = ks_two_sample(&xa, &xb).unwrap();
        assert!(ks.p_value >= ALPHA / 3.0, "k = {}: p = {}", k + 1, ks.p_value);
    }
}

#[test]
fn fixed_seed_is_reproducible() {
    let p = ModelParams::new(2.0, 1.0, 10.0, 40, 0.0).unwrap();
    let a = sample_genealogy_exact(&p, &mut RandomStream::new(99, 4).rng());
    let b = sample_genealogy_exact(&p, &mut RandomStream::new(99, 4).rng());
    assert_eq!(a, b);
}
