//! Depth-video discomfort metrics and QP rate control.
//!
//! * [`frame_io`]: raw Y / PGM depth sequences and [0,1] normalization.
//! * [`discomfort`]: error maps, SO/TO/TI, content indexes, VDM and 3VQM.
//! * [`fidelity`]: MAD, MSE, PSNR and SSIM baselines.
//! * [`codec`]: intra-only 8x8 DCT toy codec and a precoded-sequence provider.
//! * [`rate_control`]: WRDO, SRDO and VDM-RDO policies and their summaries.
//! * [`report`]: the tables behind the command-line tool, in CSV and JSON.
//!
//! Metric and transform code is generic over [`Scalar`] (`f32` or `f64`);
//! the aliases below fix the scalar for the common case.

pub mod codec;
pub mod discomfort;
pub mod error;
pub mod fidelity;
pub mod frame;
pub mod frame_io;
pub mod plane;
pub mod rate_control;
pub mod report;
pub mod scalar;
pub mod synthetic;

pub use codec::{encode_sequence, qstep, CodecBackend, EncodedFrame, PrecodedProvider, QuantParam, RateReport};
pub use discomfort::{
    content_indexes, delta_z, score_sequence, so_to_mask, spatial_outliers, temporal_inconsistency, temporal_outliers,
    vdm_frame, vqm3_frame, Scorer,
};
pub use error::{Error, Result};
pub use fidelity::{mad, mse, normalized_psnr, psnr, ssim};
pub use frame::{DepthFrame, DepthSequence, SequenceMeta};
pub use frame_io::{normalize, read_pgm_sequence, read_raw_y, write_pgm, RawLayout};
pub use plane::Plane;
pub use rate_control::{
    calibrate, run_policy, select_threshold, summarize, CalibrationTable, Policy, RdoConfig, RdoSummary, RdoTrace,
    ThresholdRule,
};
pub use scalar::Scalar;

pub type Plane64 = plane::Plane<f64>;
pub type Plane32 = plane::Plane<f32>;
pub type ErrorMap64 = discomfort::ErrorMap<f64>;
pub type ErrorMap32 = discomfort::ErrorMap<f32>;
pub type DiscomfortIndexes64 = discomfort::DiscomfortIndexes<f64>;
pub type DiscomfortIndexes32 = discomfort::DiscomfortIndexes<f32>;
pub type ContentIndexes64 = discomfort::ContentIndexes<f64>;
pub type ContentIndexes32 = discomfort::ContentIndexes<f32>;
pub type VdmParams64 = discomfort::VdmParams<f64>;
pub type VdmParams32 = discomfort::VdmParams<f32>;
pub type SequenceScore64 = discomfort::SequenceScore<f64>;
pub type SequenceScore32 = discomfort::SequenceScore<f32>;
pub type FidelityScores64 = fidelity::FidelityScores<f64>;
pub type FidelityScores32 = fidelity::FidelityScores<f32>;
pub type ToyCodec64 = codec::ToyCodec<f64>;
pub type ToyCodec32 = codec::ToyCodec<f32>;
