//! Multi-matrix LDPC belief-propagation reconciliation.
//!
//! Alice discloses the syndromes of her key block under `u` parity-check
//! matrices at once; Bob runs sum-product decoding over all of them jointly
//! to bring his noisy copy in line with hers.

pub mod bench;
pub mod bits;
pub mod channel;
pub mod decoder;
pub mod error;
pub mod matrix;
pub mod session;

pub use bits::BitBlock;
pub use error::{Error, Result};
pub use matrix::{build_ensemble, code_rate, peg_construct, DegreeProfile, MatrixEnsemble, ParityCheckMatrix};
