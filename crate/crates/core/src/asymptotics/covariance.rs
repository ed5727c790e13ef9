use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};

use super::integrals::{harmonic_sum, integral_closed_form, Integral};
use super::inverse_square_sum;

fn check_pair(k: usize, kp: usize) -> Result<()> {
    if k < 2 || kp < 2 {
        return param_err(format!("covariance needs k, k' >= 2, got ({k}, {kp})"));
    }
    Ok(())
}

/// Limiting covariance `V_{k,k'}` of the standardized supercritical
/// spectrum, from its four-branch closed form. Symmetric in its arguments.
pub fn covariance_entry(k: usize, kp: usize) -> Result<f64> {
    check_pair(k, kp)?;
    let (k, kp) = if k >= kp { (k, kp) } else { (kp, k) };
    let kf = k as f64;
    let kpf = kp as f64;
    let s = inverse_square_sum(k - 2);
    let v = match k - kp {
        0 => {
            2.0 / ((kf - 1.0).powi(2) * (2.0 * kf - 1.0)) - (2.0 * kf + 1.0) / (kf * kf * (kf - 1.0).powi(2))
                - 2.0 / (kf - 1.0)
                + PI * PI / 3.0
                - 2.0 * s
        }
        1 => (2.0 * kf - 1.0) / (kf - 1.0).powi(2) - PI * PI / 3.0 + 2.0 * s,
        2 => -(2.0 * kf - 1.0).powi(2) / (2.0 * kf * (kf - 1.0) * (2.0 * kf - 3.0)) + PI * PI / 6.0 - s,
        _ => {
            let d = kf - kpf;
            2.0 / ((kf - 1.0) * (kpf - 1.0) * (kf + kpf - 1.0))
                - (kf + kpf + 1.0) / (kf * (kf - 1.0) * kpf * (kpf - 1.0))
                - 1.0 / (kpf * (d - 2.0))
                + 1.0 / ((kpf - 1.0) * d)
                + 2.0 / ((d - 2.0) * (d - 1.0) * d) * harmonic_sum(kp, k - 2)?
        }
    };
    Ok(v)
}

/// `V_{k,k'}` assembled from the closed forms of the double integrals
/// `I1..I4`; an independent route to [`covariance_entry`].
pub fn covariance_entry_via_integrals(k: usize, kp: usize) -> Result<f64> {
    check_pair(k, kp)?;
    let (k, kp) = if k >= kp { (k, kp) } else { (kp, k) };
    let kf = k as f64;
    let kpf = kp as f64;
    let base = -(kf + kpf + 1.0) / (kf * (kf - 1.0) * kpf * (kpf - 1.0));
    let i1 = integral_closed_form(Integral::I1, k, kp)?;
    let v = match k - kp {
        0 => base + 2.0 * i1 + integral_closed_form(Integral::I3, k, kp)?,
        1 => base + 2.0 * i1 + 2.0 * integral_closed_form(Integral::I2, k, kp)?,
        d => {
            base + 2.0 * i1
                + 2.0 * integral_closed_form(Integral::I2, k, kp)?
                + (d as f64 - 1.0) * integral_closed_form(Integral::I4, k, kp)?
        }
    };
    Ok(v)
}

/// The matrix `(V_{k,k'})` for `2 <= k, k' <= K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceMatrix {
    #[serde(rename = "K")]
    pub k_max: usize,
    /// Row-major, `entries[k - 2][k' - 2]`.
    pub entries: Vec<Vec<f64>>,
}

impl CovarianceMatrix {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, k: usize, kp: usize) -> f64 {
        self.entries[k - 2][kp - 2]
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |a, b| self.entries[a][b])
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.to_matrix()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_symmetric(&self) -> bool {
        let d = self.dim();
        (0..d).all(|a| (0..d).all(|b| self.entries[a][b] == self.entries[b][a]))
    }

    /// CSV with a header row and a leading column of family sizes.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["k".to_string()];
        header.extend((2..=self.k_max).map(|k| k.to_string()));
        w.write_record(&header)?;
        for (a, row) in self.entries.iter().enumerate() {
            let mut rec = vec![(a + 2).to_string()];
            rec.extend(row.iter().map(|x| x.to_string()));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers()?.clone();
        let k_max = header.len();
        let mut entries = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .skip(1)
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Format(format!("bad entry {s:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            entries.push(row);
        }
        if entries.len() + 1 != k_max || entries.iter().any(|r| r.len() + 1 != k_max) {
            return Err(Error::Format("covariance CSV is not square".into()));
        }
        Ok(Self { k_max, entries })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&CovarianceDoc { schema: 1, matrix: self.clone() })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CovarianceDoc = serde_json::from_str(text)?;
        if doc.schema != 1 {
            return Err(Error::Format(format!("unsupported covariance schema {}", doc.schema)));
        }
        Ok(doc.matrix)
    }
}

#[derive(Serialize, Deserialize)]
struct CovarianceDoc {
    schema: u32,
    #[serde(flatten)]
    matrix: CovarianceMatrix,
}

pub fn covariance_matrix(k_max: usize) -> Result<CovarianceMatrix> {
    if k_max < 2 {
        return param_err(format!("K must be at least 2, got {k_max}"));
    }
    let d = k_max - 1;
    let mut entries = vec![vec![0.0; d]; d];
    for k in 2..=k_max {
        for kp in 2..=k {
            let v = covariance_entry(k, kp)?;
            entries[k - 2][kp - 2] = v;
            entries[kp - 2][k - 2] = v;
        }
    }
    Ok(CovarianceMatrix { k_max, entries })
}
