//! Genealogies of samples from critical and supercritical birth-death
//! processes, built with the coalescent point process.
//!
//! The crate is split along the lines of the computation:
//!
//! * [`distributions`] holds densities and inverse-CDF samplers for every
//!   random quantity the construction needs.
//! * [`genealogy`] samples coalescence heights, recovers the branch-length
//!   spectrum `L^k` and scatters mutations into a site frequency spectrum.
//! * [`asymptotics`] evaluates limiting means and covariances in closed form
//!   and checks them against numerical quadrature.
//! * [`montecarlo`] runs replicated experiments, computes summary statistics
//!   and hosts a forward birth-death simulator used as an oracle.
//! * [`verify`] bundles the end-to-end acceptance checks.

pub mod asymptotics;
pub mod distributions;
pub mod error;
pub mod genealogy;
pub mod io;
pub mod montecarlo;
pub mod params;
pub mod quadrature;
pub mod rng;
pub mod svg;
pub mod verify;

pub use error::{Error, Result};
pub use params::ModelParams;
pub use rng::RandomStream;
