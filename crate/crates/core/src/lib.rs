//! Pathwise stochastic portfolio theory on sampled market-weight paths.
//!
//! * [`pathkit`]: market-weight paths, dyadic partitions, CSV ingestion, synthetic paths.
//! * [`itocalc`]: quadratic variation, left-point integrals, Doléans exponential/logarithm.
//! * [`fgp`]: portfolios, value processes and the excess growth term.
//! * [`master`]: generators, generated portfolios and the master equation.
//! * [`martingale`]: Stroock–Varadhan and master martingales at the QV clock `τ_A`.
//! * [`cli`]: the `pathspt` command-line driver.

pub mod cli;
pub mod convergence;
pub mod error;
pub mod fgp;
pub mod itocalc;
pub mod martingale;
pub mod master;
pub mod pathkit;
pub mod plot;

pub use error::{Error, Result};
pub use fgp::{value_process, ConstantPortfolio, MarketPortfolio, Portfolio};
pub use itocalc::ProcessSeries;
pub use master::{GeneratedPortfolio, Generator, GeneratorKind};
pub use pathkit::{dyadic_partitions, simulate_path, PartitionSequence, PathGenSpec, PathModel, WeightPath};
