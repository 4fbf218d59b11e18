//! Capacity and Bhattacharyya-parameter toolkit for binary-input discrete
//! memoryless channels.
//!
//! A [`Channel`] is a pair of conditional output laws `P` (input 0) and `Q`
//! (input 1) over a shared alphabet of `N` symbols. The crate computes the
//! true capacity `C(W) = max_α I(W; α)` for channels that need not be
//! symmetric, the Bhattacharyya parameter `Z(W)`, and the four capacity
//! bounds expressed in terms of `Z`:
//!
//! ```text
//! log2(2 / (1 + Z))  <=  ...  <=  sqrt(1 - Z^2)                 (Arikan)
//! 1 - Z  <=  C(W)  <=  1 - H_b((1 - sqrt(1 - Z^2)) / 2)          (generalized)
//! ```
//!
//! The [`harness`] module checks the generalized sandwich and the
//! supporting inequalities on randomly drawn channels, and [`polar`] applies
//! the two-channel polarization transforms so the bounds can be inspected on
//! synthesized channels.
//!
//! ```
//! use bichan::{bounds, capacity, Channel};
//!
//! let w = Channel::z_channel(0.5).unwrap();
//! let z = w.bhattacharyya();
//! let c = capacity::capacity(&w).capacity;
//! assert!(bounds::gen_lower(z).unwrap() <= c && c <= bounds::gen_upper(z).unwrap());
//! ```
//!
//! With the default `parallel` feature, batch work (Monte Carlo trials, grid
//! oracles, polarization subtrees) runs on rayon. Disabling it gives a purely
//! sequential build with identical results.

pub mod analysis;
pub mod bounds;
pub mod capacity;
pub mod channel;
pub mod curves;
mod error;
pub mod exec;
pub mod fmt;
pub mod harness;
pub mod info;
pub mod polar;

pub use analysis::{analyze, ChannelAnalysis};
pub use bounds::BoundSet;
pub use capacity::{CapacityMethod, CapacityResult};
pub use channel::{Channel, MixtureWeight, Prior, Violation};
pub use error::{Error, Result};
pub use exec::Exec;
pub use info::Unit;
