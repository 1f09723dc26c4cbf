//! Multi-carrier faster-than-Nyquist signaling for OTFS in the discrete matrix domain.
//!
//! The crate builds the ISI/ICI Gram matrix induced by compressing an RRC-shaped
//! OTFS grid in time (`alpha`) and frequency (`beta`), the resulting
//! delay-Doppler channel matrices, and the precoders that maximize capacity on
//! top of them: EVD precoding with water-filling for SISO, and a successive
//! interference cancellation (SIC) decomposition for MIMO. A symbol-level link
//! with an LMMSE equalizer and a Monte Carlo sweep driver sit on top.
//!
//! Vectors over a grid are flattened column-major (see [`index`]), and the SFFT
//! is the unitary matrix `F_N ⊗ F_M^H` (see [`linalg::sfft_matrix`]).

pub mod channel;
pub mod config;
pub mod error;
pub mod gram;
pub mod index;
pub mod linalg;
pub mod link;
pub mod montecarlo;
pub mod noise;
pub mod precode_mimo;
pub mod precode_siso;
pub mod pulse;
pub mod quadrature;
pub mod rng;
pub mod waterfill;

pub use channel::{DdChannel, DdPath, MimoChannel};
pub use config::SystemConfig;
pub use error::{Error, Result};
pub use gram::{build_gram, GramMatrix};
pub use index::IndexMap;
pub use linalg::{sfft_matrix, CMatrix, CVector};
pub use link::{BerEstimate, Constellation};
pub use montecarlo::{run_sweep, Metric, Scheme, SweepResult, SweepSpec};
pub use noise::NoiseModel;
pub use precode_mimo::{MimoPrecoderState, WfVariant};
pub use precode_siso::{PowerMode, SisoPrecoder};
pub use pulse::RrcPulse;
