//! Procurement auctions built on regularized submodular maximization.
//!
//! A buyer with a monotone submodular valuation `f` purchases services from
//! sellers with private costs. The crate provides:
//!
//! * [`valuation`]: coverage, additive and adversarial valuation oracles plus a
//!   bounded multiplicative-noise wrapper.
//! * [`scoring`]: the greedy scoring rules (greedy-margin, greedy-rate,
//!   distorted, stochastic distorted, ROI, cost-scaled, noisy distorted) with
//!   closed-form inversion in the bid.
//! * [`selection`]: the round-based meta selection loop and its lazy
//!   priority-queue variant.
//! * [`sealed_bid`]: critical-bid payments, the VCG mechanism with an exact
//!   branch-and-bound optimizer, and IC / IR / NAS verification.
//! * [`online`]: online selection and posted-price mechanisms.
//! * [`descending`]: descending auctions with exact and cost-scaled demand
//!   oracles and pluggable price-decrement schedules.
//! * [`instances`]: SNAP edge-list ingestion and instance generation.
//! * [`harness`]: experiment, verification and benchmark drivers used by the
//!   `submod-auction` binary.

pub mod descending;
pub mod error;
pub mod exact;
pub mod harness;
pub mod instances;
pub mod mechanism;
pub mod online;
pub mod scoring;
pub mod sealed_bid;
pub mod selection;
pub mod valuation;

pub use error::{Error, Result};
pub use mechanism::{AuctionOutcome, Mechanism};
pub use scoring::{RandomSeed, RuleKind, ScoringRule};
pub use valuation::{SellerId, SellerSet, Valuation};

/// Absolute tolerance used for welfare ties and property checks.
pub const TOLERANCE: f64 = 1e-9;

/// SplitMix64 finalizer; a fixed, toolchain-independent 64-bit mix.
pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
