//! Geometric constellation shaping for the additive exponential noise (AEN)
//! channel.
//!
//! The AEN channel adds non-negative exponential noise to a non-negative
//! amplitude, `y = x + n`. This crate provides:
//!
//! - the three equiprobable constellation families compared throughout
//!   ([`gen_uniform`], [`gen_martinez`], [`gen_log`]) together with a
//!   binary-reflected Gray labeling ([`gray_labels`]);
//! - the channel model ([`channel`]): noise law, sampler, transition density,
//!   capacity and the capacity-achieving input;
//! - mutual information estimators for coded modulation (CM) and
//!   bit-interleaved coded modulation (BICM), by seeded, sharded Monte Carlo
//!   and by a deterministic Gauss–Legendre oracle ([`mi`]);
//! - SNR sweeps, SNR-at-rate search, dB gap to capacity and family
//!   comparisons ([`analysis`]);
//! - CSV/JSON serialization ([`io`]) and a reduced-scale self test
//!   ([`selftest`]).
//!
//! All signal sets have unit mean amplitude, so the linear SNR is the inverse
//! of the mean noise value.

pub mod analysis;
pub mod channel;
pub mod constellation;
mod error;
pub mod io;
pub mod labeling;
pub mod lse;
pub mod mi;
pub mod quadrature;
pub mod selftest;

pub use analysis::{
    best_in_family, build_constellation, capacity_snr_db, compare_families, gap_to_capacity_db,
    snr_at_target_mi, sweep, BestInFamily, Candidate, CapacityCurve, ConstellationCurve,
    CurveDescriptor, FamilyComparison, GapReport, MiCurve, SearchSettings, SweepResult, SweepRow,
};
pub use channel::{
    capacity, capacity_snr, db_to_linear, linear_to_db, noise_pdf, optimal_input, sample_noise,
    surrogate_pdf, transition_log_density, ChannelParams, InputDistribution,
};
pub use constellation::{
    alpha_breakpoints, gen_log, gen_martinez, gen_uniform, Constellation, Family, GOLDEN_LAMBDA,
    MAX_SYMBOLS,
};
pub use error::{Error, Result};
pub use labeling::{gray_labels, BitLabeling};
pub use lse::log_sum_exp;
pub use mi::{
    mi_bicm_mc, mi_bicm_quadrature, mi_cm_mc, mi_cm_quadrature, Estimator, Method, MiEstimate,
    Scheme, DEFAULT_NODES, DEFAULT_SAMPLES, SHARD_LEN,
};
