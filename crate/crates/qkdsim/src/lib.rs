//! Monte Carlo simulator of an entanglement-based quantum key distribution
//! link.
//!
//! The pipeline has three stages, each behind its own module:
//!
//! * [`bitgen`] - E91 bit generation: entangled-pair emission, state
//!   collapse (optionally through an intercept-resend eavesdropper),
//!   detection with loss and noise, sifting, and the CHSH S estimate.
//! * [`cascade`] - Cascade information reconciliation with parity-leakage
//!   accounting.
//! * [`parityhash`] - privacy amplification by block parities.
//!
//! [`pipeline`] chains the stages into per-trial link budgets and seeded,
//! reproducible ensembles; [`cli`] wraps that in a command-line tool that
//! emits CSV or JSON scatter data.

pub mod basis;
pub mod bitgen;
pub mod cascade;
pub mod cli;
pub mod config;
pub mod output;
pub mod params;
pub mod parityhash;
pub mod pipeline;
pub mod povm;
pub mod stream;

pub use basis::{BasisLabel, BasisSet, MeasurementBasis, Side};
pub use bitgen::{BitGenResult, PumpEventRecord, TSIRELSON_BOUND};
pub use cascade::CascadeResult;
pub use params::{DetectorParams, RunConfig, SourceParams};
pub use parityhash::SecretKeyResult;
pub use pipeline::{EnsembleSummary, LinkBudget};
pub use stream::RandomStream;
