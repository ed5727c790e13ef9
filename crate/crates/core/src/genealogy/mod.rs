//! Sample genealogies in coalescent-point-process form.
//!
//! A genealogy of `n` sampled leaves is the sequence of `n - 1` heights
//! between consecutive leaves in planar order; leaves `i < j` coalesce at
//! `max(H_{i+1}, ..., H_j)`.

mod mutations;
mod sampler;
mod spectrum;
mod tree;

use serde::{Deserialize, Serialize};

pub use mutations::{scatter_mutations, SfsCounts};
pub use sampler::{sample_genealogy, sample_genealogy_exact, sample_genealogy_limit, sample_whole_population};
pub use spectrum::{branch_spectrum, branch_spectrum_with, BranchSpectrum};
pub use tree::{build_tree, spectrum_from_tree, GenealogyTree, TreeNode};

/// How a genealogy was generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Exact finite-`T` construction, critical or supercritical.
    Exact,
    /// Critical, `T -> inf` with `n` fixed.
    CriticalIntermediate,
    /// Critical, `n, T -> inf`.
    CriticalLimit,
    /// Supercritical, `n, T -> inf`; heights are reported forward in time.
    SupercriticalLimit,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::CriticalIntermediate => "critical-intermediate",
            Self::CriticalLimit => "critical-limit",
            Self::SupercriticalLimit => "supercritical-limit",
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "critical-intermediate" => Ok(Self::CriticalIntermediate),
            "critical-limit" => Ok(Self::CriticalLimit),
            "supercritical-limit" => Ok(Self::SupercriticalLimit),
            other => Err(crate::Error::Parameter(format!("unknown regime '{other}'"))),
        }
    }
}

/// Whether `times` are heights back from the sampling time (`H`) or
/// times forward from the origin (`G = T - H`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coordinate {
    H,
    G,
}

/// One sampled genealogy.
///
/// `fraction` records the mixing variable used to generate it: `Q_{n,T}`
/// for the exact and intermediate regimes, `W` for both limit regimes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleGenealogy {
    pub regime: Regime,
    pub coordinate: Coordinate,
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Growth rate used for the supercritical limit's `G` values.
    pub r: f64,
    pub times: Vec<f64>,
    #[serde(rename = "N_T")]
    pub population_size: Option<u64>,
    pub fraction: f64,
}

impl SampleGenealogy {
    /// Number of sampled leaves.
    pub fn n(&self) -> usize {
        self.times.len() + 1
    }

    /// Heights in the `H` coordinate. `None` for the supercritical limit,
    /// whose forward times are not tied to a finite horizon.
    pub fn heights(&self) -> Option<&[f64]> {
        match self.coordinate {
            Coordinate::H => Some(&self.times),
            Coordinate::G => None,
        }
    }

    /// Population size used to normalize critical branch lengths.
    ///
    /// The exact regime returns the sampled `N_T`. The critical
    /// approximations have no population, so the scale they stand in for is
    /// returned: `T n / Q_n` for the intermediate regime and `T W` for the
    /// limit. The supercritical limit has none.
    pub fn population_scale(&self) -> Option<f64> {
        match self.regime {
            Regime::Exact => self.population_size.map(|x| x as f64),
            Regime::CriticalIntermediate => Some(self.horizon * self.n() as f64 / self.fraction),
            Regime::CriticalLimit => Some(self.horizon * self.fraction),
            Regime::SupercriticalLimit => None,
        }
    }

    pub fn to_json(&self) -> crate::Result<String> {
        Ok(serde_json::to_string(&GenealogyDoc { schema: 1, genealogy: self.clone() })?)
    }

    pub fn from_json(s: &str) -> crate::Result<Self> {
        let doc: GenealogyDoc = serde_json::from_str(s)?;
        if doc.schema != 1 {
            return Err(crate::Error::Format(format!("unsupported genealogy schema {}", doc.schema)));
        }
        Ok(doc.genealogy)
    }
}

#[derive(Serialize, Deserialize)]
struct GenealogyDoc {
    schema: u32,
    #[serde(flatten)]
    genealogy: SampleGenealogy,
}
