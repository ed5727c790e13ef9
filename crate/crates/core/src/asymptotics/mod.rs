//! Limiting moments and covariances of the branch-length spectrum, the
//! quadrature oracles that check them, and the standardizations used by
//! the central limit theorems.

mod covariance;
mod integrals;
mod standardize;
mod truncation;

pub use covariance::{covariance_entry, covariance_entry_via_integrals, covariance_matrix, CovarianceMatrix};
pub use integrals::{
    harmonic_sum, integral_closed_form, integral_quadrature, overlap_probability, Integral, OverlapCase,
    QUADRATURE_TOL,
};
pub use standardize::{standardize_critical, standardize_supercritical};
pub use truncation::{
    capped_branch, critical_moments, expected_supercritical_branch, supercritical_interior_totals, truncated_branch_values,
    truncation_cap, TruncatedSpectrum,
};

/// `sum_{j=1}^{m} 1/j^2`, zero for `m = 0`.
pub(crate) fn inverse_square_sum(m: usize) -> f64 {
    (1..=m).map(|j| 1.0 / (j as f64 * j as f64)).sum()
}
