//! One-shot report for a single channel.

use serde::Serialize;

use crate::bounds::BoundSet;
use crate::capacity::{capacity, CapacityResult};
use crate::channel::{Channel, Prior};
use crate::info::{mutual_information, Unit};

/// Slack allowed between the solver's capacity and the generalized bounds.
pub const SANDWICH_TOLERANCE: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChannelAnalysis {
    pub n_outputs: usize,
    pub z: f64,
    /// `I(W; 1/2)` in bits.
    pub sym_capacity: f64,
    pub capacity: f64,
    pub alpha_star: f64,
    pub bounds: BoundSet,
    /// `C - gen_lower(Z)`.
    pub lower_margin: f64,
    /// `gen_upper(Z) - C`.
    pub upper_margin: f64,
    pub solver: CapacityResult,
}

impl ChannelAnalysis {
    /// Both margins are above `-SANDWICH_TOLERANCE`.
    pub fn sandwich_holds(&self) -> bool {
        self.lower_margin >= -SANDWICH_TOLERANCE && self.upper_margin >= -SANDWICH_TOLERANCE
    }
}

pub fn analyze(w: &Channel) -> ChannelAnalysis {
    let bounds = BoundSet::for_channel(w);
    let solver = capacity(w);
    ChannelAnalysis {
        n_outputs: w.n_outputs(),
        z: bounds.z,
        sym_capacity: mutual_information(w, Prior::UNIFORM, Unit::Bits),
        capacity: solver.capacity,
        alpha_star: solver.alpha_star,
        lower_margin: solver.capacity - bounds.gen_lower,
        upper_margin: bounds.gen_upper - solver.capacity,
        bounds,
        solver,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bec_lower_bound_is_tight() {
        let a = analyze(&Channel::bec(0.3).unwrap());
        assert!((a.z - 0.3).abs() < 1e-15);
        assert!((a.capacity - 0.7).abs() < 1e-12);
        assert!(a.lower_margin.abs() < 1e-12);
        assert!(a.sandwich_holds());
    }

    #[test]
    fn useless_channel() {
        let a = analyze(&Channel::useless(vec![0.25, 0.75]).unwrap());
        assert_eq!(a.capacity, 0.0);
        assert!((a.z - 1.0).abs() < 1e-15);
        for v in [a.bounds.arikan_lower, a.bounds.arikan_upper, a.bounds.gen_lower, a.bounds.gen_upper] {
            assert!(v.abs() < 1e-7);
        }
    }

    #[test]
    fn z_channel_margins_positive() {
        let a = analyze(&Channel::z_channel(0.5).unwrap());
        assert!((a.capacity - 0.321928).abs() < 5e-7);
        assert!(a.alpha_star > 0.5 + 1e-3);
        assert!(a.lower_margin > 0.0 && a.upper_margin > 0.0);
    }
}
