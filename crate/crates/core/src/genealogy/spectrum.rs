use serde::{Deserialize, Serialize};

use crate::error::{param_err, Result};

use super::{Coordinate, SampleGenealogy};

/// Branch lengths grouped by the number of sampled leaves they support.
///
/// `totals[k - 1]` holds `L^k` for `1 <= k <= max_k`. For genealogies in the
/// `G` coordinate the external length `L^1` and the stem are undefined and
/// stored as NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSpectrum {
    pub totals: Vec<f64>,
    /// Non-zero `(i, k, L^k_i)` entries, when requested.
    pub per_branch: Option<Vec<(usize, usize, f64)>>,
    /// Length of the lineage above the oldest coalescence, supporting all
    /// leaves.
    pub stem: f64,
}

impl BranchSpectrum {
    pub fn max_k(&self) -> usize {
        self.totals.len()
    }

    /// `L^k`, or zero when `k` exceeds the recorded range.
    pub fn total(&self, k: usize) -> f64 {
        assert!(k >= 1, "family sizes start at 1");
        self.totals.get(k - 1).copied().unwrap_or(0.0)
    }
}

/// Computes `L^1, ..., L^{max_k}` from the coalescence heights.
pub fn branch_spectrum(g: &SampleGenealogy, max_k: usize) -> Result<BranchSpectrum> {
    branch_spectrum_with(g, max_k, false)
}

/// As [`branch_spectrum`], optionally keeping the per-branch pieces.
///
/// With heights `H_1..H_{n-1}` and the maximum of an empty set taken as 0:
///
/// * `L^k_0 = (H_k - max_{1<=i<k} H_i)^+`
/// * `L^k_i = (min(H_i, H_{i+k}) - max_{i<j<i+k} H_j)^+` for `1 <= i <= n-k-1`
/// * `L^k_{n-k} = (H_{n-k} - max_{n-k<j<n} H_j)^+`
///
/// In the `G` coordinate the same formulas are applied to `-G`, which turns
/// maxima of heights into minima of forward times; only `k >= 2` is defined
/// there.
pub fn branch_spectrum_with(g: &SampleGenealogy, max_k: usize, per_branch: bool) -> Result<BranchSpectrum> {
    let n = g.n();
    if max_k > n.saturating_sub(1) {
        return param_err(format!("max_k = {max_k} exceeds n - 1 = {}", n - 1));
    }
    match g.coordinate {
        Coordinate::H => {
            let (totals, pieces) = spectrum_core(&g.times, max_k, 0.0, per_branch);
            let top = g.times.iter().copied().fold(0.0, f64::max);
            Ok(BranchSpectrum {
                totals,
                per_branch: pieces,
                stem: (g.horizon - top).max(0.0),
            })
        }
        Coordinate::G => {
            let neg: Vec<f64> = g.times.iter().map(|&x| -x).collect();
            let (mut totals, pieces) = spectrum_core(&neg, max_k, f64::NEG_INFINITY, per_branch);
            if let Some(first) = totals.first_mut() {
                *first = f64::NAN;
            }
            let pieces = pieces.map(|v| v.into_iter().filter(|&(_, k, _)| k >= 2).collect());
            Ok(BranchSpectrum {
                totals,
                per_branch: pieces,
                stem: f64::NAN,
            })
        }
    }
}

/// `h` holds `H_1..H_{n-1}` at indices `0..n-1`; `floor` is the maximum of
/// an empty set.
fn spectrum_core(h: &[f64], max_k: usize, floor: f64, keep: bool) -> (Vec<f64>, Option<Vec<(usize, usize, f64)>>) {
    let m = h.len(); // n - 1
    let mut totals = vec![0.0; max_k];
    let mut pieces = keep.then(Vec::new);
    let mut record = |i: usize, k: usize, v: f64, totals: &mut Vec<f64>| {
        if v > 0.0 {
            totals[k - 1] += v;
            if let Some(p) = pieces.as_mut() {
                p.push((i, k, v));
            }
        }
    };
    let height = |i: usize| h[i - 1];

    if max_k == 0 {
        return (totals, pieces);
    }

    // 0th branch: running max over H_1..H_{k-1}
    let mut run = floor;
    for k in 1..=max_k {
        record(0, k, height(k) - run, &mut totals);
        run = run.max(height(k));
    }

    // interior branches; once the window max reaches H_i every larger k
    // contributes nothing
    for i in 1..m {
        let hi = height(i);
        let mut run = floor;
        let kmax = max_k.min(m - i);
        for k in 1..=kmax {
            if run >= hi {
                break;
            }
            let v = hi.min(height(i + k)) - run;
            record(i, k, v, &mut totals);
            run = run.max(height(i + k));
        }
    }

    // (n-k)th branch: running max over H_{n-k+1}..H_{n-1}, from the right
    let mut run = floor;
    for k in 1..=max_k {
        let i = m + 1 - k; // n - k
        record(i, k, height(i) - run, &mut totals);
        run = run.max(height(i));
    }

    (totals, pieces)
}

#[cfg(test)]
mod tests {
    use super::super::{Regime, SampleGenealogy};
    use super::*;

    fn genealogy(horizon: f64, times: Vec<f64>) -> SampleGenealogy {
        SampleGenealogy {
            regime: Regime::Exact,
            coordinate: Coordinate::H,
            horizon,
            r: 0.0,
            times,
            population_size: None,
            fraction: 1.0,
        }
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn four_leaf_example() {
        let g = genealogy(1.0, vec![0.5, 0.9, 0.3]);
        let s = branch_spectrum(&g, 3).unwrap();
        assert!(close(s.total(1), 1.6) && close(s.total(2), 1.0) && close(s.total(3), 0.0));
        assert!(close(s.stem, 0.1));
    }

    #[test]
    fn three_leaf_example() {
        let g = genealogy(1.0, vec![0.2, 0.7]);
        let s = branch_spectrum(&g, 2).unwrap();
        assert!(close(s.total(1), 1.1) && close(s.total(2), 0.5) && close(s.stem, 0.3));
    }

    #[test]
    fn cherry() {
        let g = genealogy(1.0, vec![0.4]);
        let s = branch_spectrum(&g, 1).unwrap();
        assert!(close(s.total(1), 0.8) && close(s.stem, 0.6));
    }

    #[test]
    fn ties_give_only_external_length() {
        let g = genealogy(2.0, vec![0.7; 5]);
        let s = branch_spectrum(&g, 5).unwrap();
        assert!(close(s.total(1), 6.0 * 0.7));
        for k in 2..=5 {
            assert_eq!(s.total(k), 0.0);
        }
    }

    #[test]
    fn rejects_oversized_k() {
        let g = genealogy(1.0, vec![0.2, 0.7]);
        assert!(branch_spectrum(&g, 3).is_err());
        assert_eq!(branch_spectrum(&g, 0).unwrap().totals.len(), 0);
    }

    #[test]
    fn per_branch_matches_totals() {
        let g = genealogy(1.0, vec![0.5, 0.9, 0.3, 0.6, 0.1, 0.95, 0.2]);
        let s = branch_spectrum_with(&g, 7, true).unwrap();
        let pieces = s.per_branch.as_ref().unwrap();
        for k in 1..=7 {
            let sum: f64 = pieces.iter().filter(|p| p.1 == k).map(|p| p.2).sum();
            assert!(close(sum, s.total(k)));
        }
        assert!(pieces.iter().all(|p| p.2 > 0.0));
    }

    #[test]
    fn forward_coordinate_matches_reflected_heights() {
        let t = 10.0;
        let h = vec![3.0, 7.5, 1.0, 4.0, 2.5, 9.0, 0.5];
        let gh = genealogy(t, h.clone());
        let mut gg = genealogy(t, h.iter().map(|x| t - x).collect());
        gg.coordinate = Coordinate::G;
        let a = branch_spectrum(&gh, 6).unwrap();
        let b = branch_spectrum(&gg, 6).unwrap();
        assert!(b.total(1).is_nan() && b.stem.is_nan());
        for k in 2..=6 {
            assert!(close(a.total(k), b.total(k)), "k={k}");
        }
    }
}
