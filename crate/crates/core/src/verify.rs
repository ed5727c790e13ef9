//! End-to-end acceptance checks. Each check runs at fixed seeds and
//! reports whether it met its tolerance together with the numbers behind
//! the verdict.

use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::asymptotics::{
    capped_branch, covariance_entry, covariance_entry_via_integrals, covariance_matrix, integral_closed_form,
    integral_quadrature, supercritical_interior_totals, truncation_cap, Integral,
};
use crate::distributions::LimitPrimitive;
use crate::error::Result;
use crate::genealogy::{
    branch_spectrum, build_tree, sample_genealogy, sample_genealogy_exact, spectrum_from_tree, Coordinate, Regime,
    SampleGenealogy,
};
use crate::montecarlo::{
    column_stats, empirical_stats, forward_bd_genealogy, ks_statistic, ks_two_sample, run_replicates, ExperimentConfig,
};
use crate::params::ModelParams;
use crate::rng::RandomStream;

/// Family-wise significance level of every distributional test.
pub const ALPHA: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub details: String,
    pub elapsed: Duration,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} [{}] ({:.1}s): {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.elapsed.as_secs_f64(),
            self.details
        )
    }
}

struct Check {
    passed: bool,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self {
            passed: true,
            notes: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, note: String) {
        self.passed &= ok;
        self.notes.push(if ok { note } else { format!("FAILED {note}") });
    }

    fn finish(self, id: &'static str, title: &'static str, start: Instant, budget: Duration) -> CriterionOutcome {
        let elapsed = start.elapsed();
        let mut notes = self.notes;
        let in_time = elapsed <= budget;
        if !in_time {
            notes.push(format!("FAILED runtime {:.1}s exceeds {:.0}s", elapsed.as_secs_f64(), budget.as_secs_f64()));
        }
        CriterionOutcome {
            id,
            title,
            passed: self.passed && in_time,
            details: notes.join("; "),
            elapsed,
        }
    }
}

fn minutes(m: u64) -> Duration {
    Duration::from_secs(60 * m)
}

fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// A1: every closed-form integral agrees with its quadrature oracle to
/// `1e-6` for `2 <= k' <= k <= 8`.
pub fn integrals_match_quadrature() -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut cases = Vec::new();
    for which in Integral::ALL {
        for k in 2..=8 {
            for kp in 2..=k {
                if which.applies(k, kp) {
                    cases.push((which, k, kp));
                }
            }
        }
    }
    let diffs = cases
        .par_iter()
        .map(|&(which, k, kp)| Ok((which, k, kp, (integral_quadrature(which, k, kp)? - integral_closed_form(which, k, kp)?).abs())))
        .collect::<Result<Vec<_>>>()?;
    let (worst_which, wk, wkp, worst) = diffs
        .iter()
        .copied()
        .fold((Integral::I1, 0, 0, 0.0), |acc, d| if d.3 > acc.3 { d } else { acc });
    let mut c = Check::new();
    c.require(
        worst <= 1e-6,
        format!(
            "{} cases, max |quadrature - closed form| = {worst:.2e} at {}({wk},{wkp})",
            cases.len(),
            worst_which.name()
        ),
    );
    Ok(c.finish("A1", "closed-form integrals", start, minutes(1)))
}

/// A2: the two covariance formulas agree to `1e-10`, and the Monte Carlo
/// covariance of interior sums over logistic draws matches `V` within three
/// standard errors.
pub fn covariance_cross_check() -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut c = Check::new();
    let mut worst: f64 = 0.0;
    for k in 2..=10 {
        for kp in 2..=k {
            worst = worst.max((covariance_entry(k, kp)? - covariance_entry_via_integrals(k, kp)?).abs());
        }
    }
    c.require(worst <= 1e-10, format!("formula agreement max diff {worst:.1e}"));

    let n = 2000;
    let replicates = 5000;
    let params = ModelParams::new(2.0, 1.0, 1.0, n, 0.0)?;
    let scale = 1.0 / (n as f64).sqrt();
    let rows = (0..replicates as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = RandomStream::new(0xA2, i).rng();
            let g = sample_genealogy(&params, Regime::SupercriticalLimit, &mut rng)?;
            let totals = supercritical_interior_totals(&g, 4)?;
            Ok(totals[1..].iter().map(|s| s * scale).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let stats = column_stats(&rows)?;
    for k in 2..=4 {
        for kp in 2..=k {
            let v = covariance_entry(k, kp)?;
            let (est, se) = (stats.cov[k - 2][kp - 2], stats.cov_se[k - 2][kp - 2]);
            c.require(
                (est - v).abs() <= 3.0 * se,
                format!("cov({k},{kp}) = {est:.4} vs V = {v:.4} (s.e. {se:.4})"),
            );
        }
    }
    Ok(c.finish("A2", "covariance cross-check", start, minutes(10)))
}

/// KS test of each column against `N(0, variance)`, Bonferroni-corrected.
fn normality_checks(c: &mut Check, columns: &[(usize, f64, Vec<f64>)]) -> Result<()> {
    let level = ALPHA / columns.len() as f64;
    for (k, variance, col) in columns {
        let sd = variance.sqrt();
        let ks = ks_statistic(col, |x| normal_cdf(x / sd))?;
        c.require(
            ks.p_value >= level,
            format!("z{k} KS D = {:.4}, p = {:.3} (threshold {level:.4})", ks.statistic, ks.p_value),
        );
    }
    Ok(())
}

/// A3: critical central limit theorem at `n = 2000`, `T = 2e4`.
pub fn critical_clt() -> Result<CriterionOutcome> {
    let start = Instant::now();
    let params = ModelParams::critical(2e4, 2000)?;
    let cfg = ExperimentConfig::new(params, Regime::Exact, 2000, 3, 0xA3);
    let table = run_replicates(&cfg)?;
    let stats = empirical_stats(&table)?.z;
    let mut c = Check::new();
    for j in 0..3 {
        let (m, v) = (stats.means[j], stats.variance(j));
        c.require(m.abs() <= 0.1, format!("z{} mean {m:.4}", j + 1));
        c.require((v - 1.0).abs() <= 0.15, format!("z{} variance {v:.4}", j + 1));
    }
    for a in 0..3 {
        for b in a + 1..3 {
            let r = stats.correlation(a, b);
            c.require(r.abs() <= 0.1, format!("corr(z{},z{}) {r:.4}", a + 1, b + 1));
        }
    }
    let cols: Vec<(usize, f64, Vec<f64>)> = (0..3).map(|j| (j + 1, 1.0, table.z_column(j))).collect();
    normality_checks(&mut c, &cols)?;
    Ok(c.finish("A3", "critical CLT", start, minutes(20)))
}

/// A4: supercritical law of large numbers, `(r/n) L^k -> 1/(k(k-1))`.
pub fn supercritical_lln() -> Result<CriterionOutcome> {
    let start = Instant::now();
    let n = 5000;
    let params = ModelParams::new(2.0, 1.0, 25.0, n, 0.0)?;
    let cfg = ExperimentConfig::new(params, Regime::Exact, 200, 4, 0xA4);
    let table = run_replicates(&cfg)?;
    let mut c = Check::new();
    for k in 2..=4 {
        let col = table.length_column(k);
        let mean = col.iter().sum::<f64>() / col.len() as f64 * params.r() / n as f64;
        let target = 1.0 / (k * (k - 1)) as f64;
        let rel = (mean - target).abs() / target;
        c.require(rel <= 0.02, format!("k={k}: mean (r/n)L^k = {mean:.5} vs {target:.5} ({:.2}%)", 100.0 * rel));
    }
    Ok(c.finish("A4", "supercritical LLN", start, minutes(15)))
}

/// A5: supercritical central limit theorem in the limit regime.
pub fn supercritical_clt() -> Result<CriterionOutcome> {
    let start = Instant::now();
    let params = ModelParams::new(2.0, 1.0, 1.0, 2000, 0.0)?;
    let cfg = ExperimentConfig::new(params, Regime::SupercriticalLimit, 3000, 4, 0xA5);
    let table = run_replicates(&cfg)?;
    let stats = empirical_stats(&table)?.z;
    let v = covariance_matrix(4)?;
    let mut c = Check::new();
    for k in 2..=4 {
        for kp in 2..=k {
            let (est, se) = (stats.cov[k - 2][kp - 2], stats.cov_se[k - 2][kp - 2]);
            let target = v.get(k, kp);
            c.require(
                (est - target).abs() <= 3.0 * se,
                format!("cov(z{k},z{kp}) = {est:.4} vs {target:.4} (s.e. {se:.4})"),
            );
        }
    }
    let cols: Vec<(usize, f64, Vec<f64>)> = (0..3).map(|j| (j + 2, v.get(j + 2, j + 2), table.z_column(j))).collect();
    normality_checks(&mut c, &cols)?;
    Ok(c.finish("A5", "supercritical CLT", start, minutes(15)))
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// A6: single-branch means, `E[L^2_i] = 1/2` for logistic times and
/// `E[n L~^k_i] = 1/k` for capped heavy-tailed times.
pub fn branch_means() -> Result<CriterionOutcome> {
    let start = Instant::now();
    let replicates = 100_000u64;
    let mut c = Check::new();

    let l2: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = RandomStream::new(0xA6, i).rng();
            let g: Vec<f64> = (0..3).map(|_| LimitPrimitive::Logistic.sample(&mut rng)).collect();
            (g[1] - g[0].max(g[2])).max(0.0)
        })
        .collect();
    let (m, se) = mean_and_se(&l2);
    c.require((m - 0.5).abs() <= 3.0 * se, format!("E[L^2_i] = {m:.4} (s.e. {se:.4}) vs 0.5"));

    let cap = truncation_cap(1_000_000)?;
    for k in 1..=3usize {
        let xs: Vec<f64> = (0..replicates)
            .into_par_iter()
            .map(|i| {
                let mut rng = RandomStream::new(0xA6 + k as u64, i).rng();
                let u: Vec<f64> = (0..=k).map(|_| LimitPrimitive::HeavyTail.sample(&mut rng)).collect();
                capped_branch(&u, cap)
            })
            .collect();
        let (m, se) = mean_and_se(&xs);
        let target = 1.0 / k as f64;
        c.require(
            (m - target).abs() <= 3.0 * se,
            format!("E[n L~^{k}_i] = {m:.4} (s.e. {se:.4}) vs {target:.4}"),
        );
    }
    Ok(c.finish("A6", "single-branch means", start, minutes(10)))
}

fn equal_spectra(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs()))
}

fn structural_mismatch(g: &SampleGenealogy) -> Result<Option<String>> {
    let k_max = g.n() - 1;
    let direct = branch_spectrum(g, k_max)?;
    let tree = spectrum_from_tree(&build_tree(g)?, k_max);
    if !equal_spectra(&direct.totals, &tree.totals) || (direct.stem - tree.stem).abs() > 1e-12 {
        return Ok(Some(format!("spectra differ for heights {:?}", g.times)));
    }
    Ok(None)
}

fn length_identity_error(g: &SampleGenealogy) -> Result<f64> {
    let s = branch_spectrum(g, g.n() - 1)?;
    let lhs: f64 = s.totals.iter().sum::<f64>() + s.stem;
    let rhs = g.horizon + g.times.iter().sum::<f64>();
    Ok((lhs - rhs).abs() / rhs.abs().max(1.0))
}

fn heights_genealogy(horizon: f64, times: Vec<f64>) -> SampleGenealogy {
    SampleGenealogy {
        regime: Regime::Exact,
        coordinate: Coordinate::H,
        horizon,
        r: 0.0,
        times,
        population_size: None,
        fraction: f64::NAN,
    }
}

/// All orderings of `items`, by Heap's algorithm.
pub fn permutations(items: &[f64]) -> Vec<Vec<f64>> {
    let mut a = items.to_vec();
    let mut out = vec![a.clone()];
    let n = a.len();
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// A7: the height formulas agree with explicit trees, and every simulated
/// genealogy satisfies `sum_k L^k + stem = T + sum_i H_i`.
pub fn structural_oracles() -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut c = Check::new();

    let mut rng = RandomStream::new(0xA7, 0).rng();
    let mut random_bad = None;
    for _ in 0..1000 {
        let n = 2 + (rng.uniform_open() * 9.0) as usize; // 2..=10
        let times: Vec<f64> = (1..n).map(|_| rng.uniform_open()).collect();
        if let Some(m) = structural_mismatch(&heights_genealogy(1.0, times))? {
            random_bad.get_or_insert(m);
        }
    }
    c.require(
        random_bad.is_none(),
        random_bad.unwrap_or_else(|| "1000 random instances agree with the tree".into()),
    );

    let perms = permutations(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6]);
    let mut perm_bad = None;
    for p in &perms {
        if let Some(m) = structural_mismatch(&heights_genealogy(1.0, p.clone()))? {
            perm_bad.get_or_insert(m);
        }
    }
    c.require(
        perm_bad.is_none(),
        perm_bad.unwrap_or_else(|| format!("all {} orderings of 6 heights agree", perms.len())),
    );

    let mut worst: f64 = 0.0;
    let mut count = 0;
    let settings = [
        (ModelParams::critical(100.0, 30)?, Regime::Exact),
        (ModelParams::new(2.0, 1.0, 8.0, 30, 0.0)?, Regime::Exact),
        (ModelParams::critical(100.0, 30)?, Regime::CriticalIntermediate),
        (ModelParams::critical(1e4, 30)?, Regime::CriticalLimit),
    ];
    for (s, (params, regime)) in settings.iter().enumerate() {
        for i in 0..500u64 {
            let mut rng = RandomStream::new(0xA7 + s as u64, i).rng();
            let g = sample_genealogy(params, *regime, &mut rng)?;
            if g.times.iter().any(|&h| h >= g.horizon) {
                continue; // the identity needs every height below T
            }
            worst = worst.max(length_identity_error(&g)?);
            count += 1;
        }
    }
    c.require(worst <= 1e-12, format!("length identity on {count} genealogies, max rel. error {worst:.1e}"));
    Ok(c.finish("A7", "structural oracles", start, minutes(10)))
}

/// A8: coalescence heights from the point-process sampler and from a
/// forward simulation of the birth-death process agree in law.
pub fn forward_oracle() -> Result<CriterionOutcome> {
    let start = Instant::now();
    let points = [(1.0, 0.0, 2.0, 2usize), (1.0, 1.0, 4.0, 3), (1.2, 1.0, 4.0, 3)];
    let level = ALPHA / points.len() as f64;
    let replicates = 10_000u64;
    let mut c = Check::new();
    for (j, &(lambda, mu, horizon, n)) in points.iter().enumerate() {
        let params = ModelParams::new(lambda, mu, horizon, n, 0.0)?;
        let cpp: Vec<f64> = (0..replicates)
            .into_par_iter()
            .map(|i| {
                let mut rng = RandomStream::new(0xA8 + j as u64, i).rng();
                sample_genealogy_exact(&params, &mut rng).times[0]
            })
            .collect();
        let forward = (0..replicates)
            .into_par_iter()
            .map(|i| {
                let mut rng = RandomStream::new(0xF8 + j as u64, i).rng();
                Ok(forward_bd_genealogy(&params, &mut rng)?.times[0])
            })
            .collect::<Result<Vec<f64>>>()?;
        let ks = ks_two_sample(&cpp, &forward)?;
        c.require(
            ks.p_value >= level,
            format!(
                "lambda={lambda}, mu={mu}, T={horizon}, n={n}: D = {:.4}, p = {:.3}",
                ks.statistic, ks.p_value
            ),
        );
    }
    Ok(c.finish("A8", "forward oracle", start, minutes(10)))
}

/// A9: mutation counts have mean `nu L^k`.
pub fn sfs_poisson_law() -> Result<CriterionOutcome> {
    let start = Instant::now();
    let k_max = 5;
    let params = ModelParams::new(1.0, 1.0, 500.0, 50, 2.0)?;
    let mut cfg = ExperimentConfig::new(params, Regime::Exact, 10_000, k_max, 0xA9);
    cfg.mutations = true;
    let table = run_replicates(&cfg)?;
    let mut c = Check::new();
    for k in 1..=k_max {
        let diffs: Vec<f64> = table
            .rows
            .iter()
            .map(|r| r.mutations.as_ref().expect("mutations requested")[k - 1] as f64 - 2.0 * r.lengths[k - 1])
            .collect();
        let (m, se) = mean_and_se(&diffs);
        c.require(m.abs() <= 3.0 * se, format!("k={k}: mean(M - 2L) = {m:.3} (s.e. {se:.3})"));
    }
    Ok(c.finish("A9", "SFS Poisson law", start, minutes(10)))
}

/// Every acceptance check in order.
pub fn run_all() -> Result<Vec<CriterionOutcome>> {
    let checks: [fn() -> Result<CriterionOutcome>; 9] = [
        integrals_match_quadrature,
        covariance_cross_check,
        critical_clt,
        supercritical_lln,
        supercritical_clt,
        branch_means,
        structural_oracles,
        forward_oracle,
        sfs_poisson_law,
    ];
    checks.iter().map(|f| f()).collect()
}
