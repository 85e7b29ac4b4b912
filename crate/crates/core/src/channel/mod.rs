//! Synthetic MU-MIMO CSI generation, preprocessing, splitting and storage.

mod config;
mod dataset;
pub mod format;
mod gen;
mod preprocess;
mod split;

pub use config::{Bandwidth, NetworkConfig};
pub use dataset::{CsiDataset, CsiTensor, Provenance};
pub use gen::{gen_clustered, gen_rayleigh, Tap, TapProfile, SYNTHETIC_SAMPLE_PERIOD_US};
pub use preprocess::{align_by_sequence, median_smooth, normalize};
pub use split::{split, Partition, SplitSpec};
