//! Beamforming feedback compression for MU-MIMO Wi-Fi.
//!
//! The crate covers the full desk-scale pipeline:
//!
//! * [`tensor`]: complex matrices, a Jacobi SVD and a seeded RNG.
//! * [`channel`]: synthetic CSI datasets, preprocessing and the SBCSI1 format.
//! * [`feedback`]: the 802.11 compressed beamforming baseline (SVD, Givens
//!   angles, quantization, report size accounting).
//! * [`dnn`]: the split network that maps CSI to beamforming matrices through
//!   a bottleneck, with its loss, training loop and SBNN1 model format.
//! * [`bop`]: FLOP/airtime/latency accounting and the bottleneck search.
//! * [`phy`]: 16-QAM, zero-forcing precoding, BCC coding and BER simulation.
//! * [`harness`]: configuration and the gen/train/eval/bop/account/report stages.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bop;
pub mod channel;
pub mod dnn;
mod error;
pub mod feedback;
pub mod harness;
pub mod phy;
pub mod tensor;

pub use error::{Error, Result};

pub use channel::{CsiDataset, CsiTensor, NetworkConfig};
pub use feedback::{BeamMatrix, GivensFeedback, QuantConfig};
pub use tensor::{CMatrix, Rng};
