//! Band-power Mapper graphs for multichannel electrophysiology.
//!
//! The pipeline turns a multichannel recording into a graph summary of its
//! spectral states and scores that graph as a clustering:
//!
//! ```text
//! recording ──► band-power windows ──► 2-D lens (PCA / t-SNE)
//!      ──► overlapping square cover ──► per-bin DBSCAN ──► Mapper graph
//!      ──► modularity (Q) + component clusters ──► evaluation metrics
//! ```
//!
//! Each stage is exposed on its own so hyperparameter sweeps and the
//! reference clustering baselines (k-means, GMM, hierarchical, plain DBSCAN)
//! can reuse intermediate products. All seeded stages are deterministic in
//! their seed regardless of thread count.

pub mod baselines;
pub mod community;
pub mod config;
pub mod cover;
pub mod error;
pub mod eval;
pub mod export;
pub mod lens;
pub mod mapper;
pub mod pipeline;
pub mod recording;
pub mod seed;
pub mod spectral;
pub mod sweep;

pub use cover::{BinAssignment, CoverConfig};
pub use error::{Error, Result};
pub use lens::Embedding2D;
pub use recording::{ChannelSeries, Recording, SynthSpec};
pub use spectral::{Band, BandName, BandPowerSequence, PsdEstimate};
