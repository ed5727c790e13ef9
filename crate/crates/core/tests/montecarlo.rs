//! Replicate engine, summary statistics and the forward oracle.

use cppsfs::genealogy::{branch_spectrum, sample_genealogy, Regime};
use cppsfs::io::table_to_csv;
use cppsfs::montecarlo::{
    column_stats, condition_diagnostics, empirical_stats, forward_bd_genealogy, forward_population, ks_statistic,
    run_replicate, run_replicates, ExperimentConfig, HorizonRule,
};
use cppsfs::{ModelParams, RandomStream};
use nalgebra::DMatrix;
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

#[test]
fn sfs_means_track_branch_lengths() {
    let nu = 3.0;
    let p = ModelParams::new(1.0, 1.0, 300.0, 30, nu).unwrap();
    let mut config = ExperimentConfig::new(p, Regime::Exact, 3000, 4, 11);
    config.mutations = true;
    let table = run_replicates(&config).unwrap();
    for k in 1..=4 {
        let m = table.mutation_column(k).unwrap();
        let l = table.length_column(k);
        let diff: Vec<Vec<f64>> = m.iter().zip(&l).map(|(m, l)| vec![m - nu * l]).collect();
        let s = column_stats(&diff).unwrap();
        assert!(s.means[0].abs() <= 3.0 * s.se[0], "k = {k}: {} vs se {}", s.means[0], s.se[0]);
    }
}

#[test]
fn parallelism_does_not_change_results() {
    let p = ModelParams::critical(400.0, 40).unwrap();
    let mut config = ExperimentConfig::new(p, Regime::Exact, 300, 5, 99);
    config.mutations = true;
    let mut tables = Vec::new();
    for threads in [1, 3, 8] {
        config.parallelism = Some(threads);
        tables.push(table_to_csv(&run_replicates(&config).unwrap()).unwrap());
    }
    assert_eq!(tables[0], tables[1]);
    assert_eq!(tables[0], tables[2]);
}

#[test]
fn single_replicate_is_a_direct_sampler_call() {
    let p = ModelParams::new(2.0, 1.0, 12.0, 25, 0.0).unwrap();
    let config = ExperimentConfig::new(p, Regime::Exact, 1, 6, 5);
    let table = run_replicates(&config).unwrap();
    assert_eq!(table.rows.len(), 1);
    assert_eq!(table.rows[0], run_replicate(&config, &p, 0).unwrap());
    let g = sample_genealogy(&p, Regime::Exact, &mut RandomStream::new(5, 0).rng()).unwrap();
    let s = branch_spectrum(&g, 6).unwrap();
    assert_eq!(table.rows[0].lengths, s.totals);
    assert_eq!(table.rows[0].population_size, g.population_size);
}

#[test]
fn table_shape_follows_regime() {
    let p = ModelParams::critical(1.0, 30).unwrap();
    let mut config = ExperimentConfig::new(p, Regime::Exact, 20, 4, 1);
    config.horizon_rule = HorizonRule::MultipleOfN { factor: 10.0 };
    let table = run_replicates(&config).unwrap();
    assert_eq!(table.rows.len(), 20);
    assert!(table.rows.iter().all(|r| r.z.len() == 4 && r.lengths.len() == 4 && r.mutations.is_none()));
    assert_eq!(table.meta.config.params.horizon(), 300.0);

    let q = ModelParams::new(1.0, 0.0, 12.0, 30, 0.0).unwrap();
    let table = run_replicates(&ExperimentConfig::new(q, Regime::Exact, 20, 4, 1)).unwrap();
    assert!(table.rows.iter().all(|r| r.z.len() == 3));
}

#[test]
fn empirical_stats_hand_arithmetic() {
    let s = column_stats(&[vec![0.0, 5.0], vec![2.0, 5.0]]).unwrap();
    assert_eq!(s.means, vec![1.0, 5.0]);
    assert_eq!(s.variance(0), 2.0);
    assert_eq!(s.variance(1), 0.0);
    assert!(column_stats(&[vec![1.0]]).is_err());

    let p = ModelParams::critical(200.0, 20).unwrap();
    let table = run_replicates(&ExperimentConfig::new(p, Regime::Exact, 50, 3, 2)).unwrap();
    let e = empirical_stats(&table).unwrap();
    assert_eq!(e.z.count, 50);
    assert_eq!(e.lengths.means.len(), 3);
}

proptest! {
    #[test]
    fn empirical_covariance_is_psd(rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 4), 2..40)) {
        let s = column_stats(&rows).unwrap();
        let m = DMatrix::from_fn(4, 4, |i, j| s.cov[i][j]);
        prop_assert!(m == m.transpose());
        let scale = 1.0 + m.diagonal().max();
        let min = m.symmetric_eigenvalues().min();
        prop_assert!(min >= -1e-9 * scale, "min eigenvalue {min}");
    }
}

#[test]
fn ks_examples() {
    let m = 1000;
    let normal = Normal::standard();
    let grid: Vec<f64> = (1..=m).map(|i| normal.inverse_cdf((i as f64 - 0.5) / m as f64)).collect();
    let d = ks_statistic(&grid, |x| normal.cdf(x)).unwrap();
    assert!(d.statistic <= 0.5 / m as f64 * (1.0 + 1e-6));

    let uniform: Vec<f64> = (1..=m).map(|i| (i as f64 - 0.5) / m as f64).collect();
    assert!(ks_statistic(&uniform, |x| normal.cdf(x)).unwrap().p_value < 1e-6);
    assert!(ks_statistic(&uniform[..10], |x| normal.cdf(x)).is_err());
}

#[test]
fn forward_census_matches_whole_population_sample() {
    let p = ModelParams::new(1.0, 0.5, 4.0, 1, 0.0).unwrap();
    let mut checked = 0;
    for seed in 0..40u64 {
        let pop = forward_population(&p, &mut RandomStream::new(seed, 0).rng()).unwrap();
        let size = pop.size();
        if size < 2 {
            continue;
        }
        // The same stream replays the same population on the first attempt.
        let whole = p.with_n(size).unwrap();
        let g = forward_bd_genealogy(&whole, &mut RandomStream::new(seed, 0).rng()).unwrap();
        assert_eq!(g.n(), size);
        assert_eq!(g.population_size, Some(size as u64));
        assert_eq!(g.fraction, 1.0);
        checked += 1;
    }
    assert!(checked > 5);
}

#[test]
fn diagnostics_examples() {
    let c = ExperimentConfig::new(ModelParams::critical(2e4, 2000).unwrap(), Regime::Exact, 1, 2, 0);
    let d = condition_diagnostics(&c).unwrap();
    assert!((d.n_over_t - 0.1).abs() < 1e-15 && d.critical_suitable);
    assert!(!d.supercritical_lln && !d.supercritical_clt);

    let c = ExperimentConfig::new(ModelParams::new(2.0, 1.0, 25.0, 1000, 0.0).unwrap(), Regime::Exact, 1, 2, 0);
    let d = condition_diagnostics(&c).unwrap();
    assert!((d.clt_bound / 3.0e-6 - 1.0).abs() < 0.1, "{}", d.clt_bound);
    assert!(d.supercritical_lln && d.supercritical_clt && !d.critical_suitable);
}
