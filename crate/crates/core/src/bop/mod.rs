//! Cost accounting for split feedback against the 802.11 report, and the
//! search for the smallest bottleneck meeting BER and delay bounds.

mod account;
mod cost;
mod search;

pub use account::{account_table, AccountRow};
pub use cost::{
    airtime_bits, cost_report, flops_80211, flops_head, flops_tail, latency, objective, CostReport, DevicePlatform,
    Latency,
};
pub use search::{solve_bop, write_candidates_csv, BopConfig, BopOutcome, CandidateRow};
