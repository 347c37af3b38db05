//! Fair regression toolkit.
//!
//! Trains small regression networks under two adversarial
//! distribution-alignment schemes — a cross-entropy discriminator
//! (`CENet`) and a Wasserstein critic (`WassersteinNet`) — and audits the
//! accuracy disparity between two demographic groups with
//! information-theoretic lower and upper bounds on the group-wise errors.
//!
//! The crate is organized around five building blocks:
//!
//! - [`nn`] — a dense MLP engine with gradient reversal, losses, SGD and
//!   Adadelta, and critic weight clipping.
//! - [`metrics`] — group-conditional errors, the error gap, R², exact 1-D
//!   Wasserstein distance, and histogram total-variation estimates.
//! - [`bounds`] — evaluators for the joint-error lower bound, the error-gap
//!   upper bound, discrete entropy tools, and the feasible-region geometry.
//! - [`data`] — CSV ingestion, preprocessing, splitting, and a synthetic
//!   two-group generator.
//! - [`train`] — the three training loops, evaluation, and the λ-sweep
//!   harness with multi-seed averaging.
//!
//! The `fairreg` binary (see [`cli`]) wires these into reproducible
//! experiments driven by a JSON config. The mdBook under `book/` walks
//! through the concepts; its code snippets are compiled as doc-tests via
//! the [`guide`] module.

pub mod bounds;
pub mod cli;
pub mod data;
pub mod error;
pub mod guide;
pub mod linalg;
pub mod metrics;
pub mod nn;
pub mod train;

pub use error::{Error, Result};
pub use linalg::{RealMatrix, RealVector};
