//! Resource allocation and aggregation primitives for cooperative federated
//! learning over a shared wireless spectrum.
//!
//! Devices are split into strong-reliance devices (SRs), which reach the edge
//! server over a cellular link, and less-reliance devices (LRs), which relay
//! their models to an associated SR over a D2D link that reuses one of the
//! cellular sub-channels. The crate provides:
//!
//! * [`netmodel`]: topology, association, SINR/rate evaluation and fading.
//! * [`sufficient`]: greedy channel allocation when sub-channels cover every SR.
//! * [`primal_dual`]: the multiplier-driven scheduler for the scarce regime.
//! * [`d2d`]: interference-aware pairing and power control for LR links.
//! * [`dispatch`]: the top-level allocator, baselines, the constraint
//!   validator and the exhaustive small-instance optimum.
//! * [`aggregate`]: local gradient steps and hierarchical weighted averaging.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is off.
#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod aggregate;
pub mod d2d;
pub mod dispatch;
mod error;
mod math;
pub mod netmodel;
pub mod primal_dual;
pub mod seed;
pub mod sufficient;

pub use error::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;
