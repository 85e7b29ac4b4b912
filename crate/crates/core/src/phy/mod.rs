//! BER evaluation: 16-QAM, zero-forcing precoding, the rate-1/2 BCC and the
//! link simulator that ties them to a beamforming source.

pub mod bcc;
pub mod qam;
mod sim;
pub mod zf;

pub use bcc::{bcc_encode, viterbi_decode};
pub use qam::{qam16_demod, qam16_mod};
pub use sim::{max_interference, simulate_ber, BerReport, BmSource, Coding, Combining, PhyConfig, StaBer};
pub use zf::{zf_precoder, ZfPrecoder};
