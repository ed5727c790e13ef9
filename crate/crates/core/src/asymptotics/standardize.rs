use crate::error::{param_err, Result};
use crate::genealogy::BranchSpectrum;

/// `z_k = sqrt(n / log n) (L^k / N - 1/k)` for `k = 1..=K`, where `N` is the
/// population size (or the scale standing in for it).
pub fn standardize_critical(spectrum: &BranchSpectrum, population: f64, n: usize, k_max: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return param_err(format!("n must be at least 2, got {n}"));
    }
    if k_max > spectrum.max_k() {
        return param_err(format!("K = {k_max} exceeds the spectrum's range {}", spectrum.max_k()));
    }
    if !(population > 0.0) {
        return param_err(format!("population must be positive, got {population}"));
    }
    let nf = n as f64;
    let scale = (nf / nf.ln()).sqrt();
    Ok((1..=k_max)
        .map(|k| scale * (spectrum.total(k) / population - 1.0 / k as f64))
        .collect())
}

/// `z_k = (r / sqrt n) (L^k - n / (r k (k - 1)))` for `k = 2..=K`.
///
/// `totals[k - 1]` holds `L^k`; entry 0 is ignored.
pub fn standardize_supercritical(totals: &[f64], n: usize, r: f64, k_max: usize) -> Result<Vec<f64>> {
    if k_max < 2 || k_max > totals.len() {
        return param_err(format!("K must lie in 2..={}, got {k_max}", totals.len()));
    }
    if !(r > 0.0) {
        return param_err(format!("growth rate must be positive, got {r}"));
    }
    let nf = n as f64;
    Ok((2..=k_max)
        .map(|k| {
            let kf = k as f64;
            r / nf.sqrt() * (totals[k - 1] - nf / (r * kf * (kf - 1.0)))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectrum(totals: Vec<f64>) -> BranchSpectrum {
        BranchSpectrum { totals, per_branch: None, stem: 0.0 }
    }

    #[test]
    fn critical_zero_and_unit() {
        let pop = 600.0;
        let s = spectrum(vec![pop, pop / 2.0, pop / 3.0]);
        let z = standardize_critical(&s, pop, 100, 3).unwrap();
        assert!(z.iter().all(|x| x.abs() < 1e-12));

        let n = 10_000usize;
        let nf = n as f64;
        let s = spectrum(vec![pop * (1.0 + (nf.ln() / nf).sqrt())]);
        let z = standardize_critical(&s, pop, n, 1).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn supercritical_zero_and_unit() {
        let n = 10_000usize;
        let nf = n as f64;
        let totals = vec![f64::NAN, nf / 2.0, nf / 6.0];
        let z = standardize_supercritical(&totals, n, 1.0, 3).unwrap();
        assert_eq!(z.len(), 2);
        assert!(z.iter().all(|x| x.abs() < 1e-12));
        let z = standardize_supercritical(&[0.0, nf / 2.0 + nf.sqrt()], n, 1.0, 2).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn range_errors() {
        assert!(standardize_critical(&spectrum(vec![1.0]), 10.0, 16, 2).is_err());
        assert!(standardize_supercritical(&[1.0, 1.0], 16, 1.0, 1).is_err());
        assert!(standardize_supercritical(&[1.0, 1.0], 16, 0.0, 2).is_err());
    }
}
