//! Performance evaluation of the PBFT consensus queue.
//!
//! Transaction packages arrive at a client as a Poisson stream and are
//! pushed through the three PBFT stages by `N = 3f + 1` nodes, each stage
//! completion exponential. The resulting process over (waiting packages,
//! verified nodes) is a level-independent quasi-birth-and-death process.
//! This crate builds its generator, decides stability, computes the
//! matrix-geometric stationary distribution, and evaluates four stationary
//! performance measures:
//!
//! * `E[K]` — mean number of packages waiting at the client,
//! * `E[M]` — mean number of nodes that have verified the in-progress
//!   package,
//! * `gamma` — block-pegged rate (throughput of the chain),
//! * `Upsilon` — reward rate of the major node, `gamma c / N`.
//!
//! Two independent verification engines back the analytic path: a
//! truncated-chain solver ([`oracle`]) that attacks the global balance
//! equations directly, and a discrete-event simulator ([`sim`]) with
//! batch-means confidence intervals. The [`sweep`] module and the
//! `pbft-qbd` binary evaluate parameter grids and emit CSV/JSON/SVG.
//!
//! ```
//! use pbft_qbd::{metrics, model::ModelParams};
//!
//! let params = ModelParams::new(1.0, 2.0, 1, 12.5).unwrap();
//! let m = metrics::evaluate_all(&params, 1e-12).unwrap();
//! assert!((m.gamma - 1.0).abs() < 1e-8); // every arrival is eventually pegged
//! ```

pub mod cli;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod plot;
pub mod sim;
pub mod solver;
pub mod sweep;

mod banded;
mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

pub use nalgebra;
