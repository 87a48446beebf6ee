//! Frame-level Monte Carlo simulation of slotted random access with
//! successive interference cancellation.
//!
//! The crate models Multi-slot Coded ALOHA (MuSCA) with irregular degree
//! distributions alongside the replica-based baselines it generalizes
//! (slotted ALOHA, CRDSA, IRSA). The physical layer is abstracted into a
//! packet-error-rate model ([`per`]) keyed by code, SNR and the interference
//! configuration a user sees across its bursts.
//!
//! Layout:
//! - [`frame`]: degree distributions, code profiles, frame construction.
//! - [`per`]: PER tables, interpolation, erasure rule, parametric link model.
//! - [`decoder`]: the two-phase SIC decoder (locate, then data).
//! - [`montecarlo`]: seeded trial runner and throughput metrics.
//! - [`optimizer`]: grid search over degree distributions.
//! - [`scenario`]: the four-user, three-slot worked decoding example.

pub mod decoder;
pub mod frame;
pub mod montecarlo;
pub mod optimizer;
pub mod per;
pub mod scenario;

pub use decoder::{decode_frame, DecodePolicy, DecodeReport, Mode, Phase};
pub use frame::{
    build_frame, CodeId, CodeProfile, DegreeDistribution, Frame, FrameState, InterferenceConfig,
    Layer, ProfileSet, Rate, UserId, UserTransmission,
};
pub use montecarlo::{estimate, EstimateResult, TrialPlan};
pub use per::{PerLookup, PerTable};
