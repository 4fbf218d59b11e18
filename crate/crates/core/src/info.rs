//! Elementary information quantities.
//!
//! Everything is computed in nats and converted at the boundary. The
//! convention `0 log 0 = 0` applies throughout.

use serde::{Deserialize, Serialize};

use crate::channel::{Channel, Prior};
use crate::error::{Error, Result};

/// Slack allowed on `[0,1]` arguments before they count as a caller bug.
pub const DOMAIN_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Nats,
    #[default]
    Bits,
}

impl Unit {
    /// Converts a value in nats to this unit.
    #[inline]
    pub fn from_nats(self, x: f64) -> f64 {
        match self {
            Unit::Nats => x,
            Unit::Bits => x / std::f64::consts::LN_2,
        }
    }
}

/// Accepts `x` in `[0,1]` up to [`DOMAIN_TOLERANCE`] and clamps it.
pub(crate) fn unit_interval(function: &'static str, x: f64) -> Result<f64> {
    if (-DOMAIN_TOLERANCE..=1.0 + DOMAIN_TOLERANCE).contains(&x) {
        Ok(x.clamp(0.0, 1.0))
    } else {
        Err(Error::Domain {
            function,
            value: x,
            domain: "[0,1]",
        })
    }
}

/// `-x ln x`, zero at `x = 0`.
#[inline]
pub(crate) fn xlnx_neg(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.ln()
    } else {
        0.0
    }
}

/// Binary entropy in nats, unchecked.
#[inline]
pub(crate) fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.ln() - (1.0 - p) * (-p).ln_1p()
}

/// `sqrt(4 p (1 - p))`, unchecked.
#[inline]
pub(crate) fn zb(p: f64) -> f64 {
    2.0 * (p * (1.0 - p)).max(0.0).sqrt()
}

/// `H_b(p) = -p log p - (1 - p) log(1 - p)`.
pub fn binary_entropy(p: f64, unit: Unit) -> Result<f64> {
    let p = unit_interval("binary_entropy", p)?;
    Ok(unit.from_nats(h2(p)))
}

/// `Z_b(p) = sqrt(4 p (1 - p))`.
pub fn binary_bhattacharyya(p: f64) -> Result<f64> {
    let p = unit_interval("binary_bhattacharyya", p)?;
    Ok(zb(p))
}

/// `I(W; α)` in nats for an already-validated prior.
///
/// Evaluates `H_b(α) - Σ r_n H_b(α p_n / r_n)`, writing each summand as
/// `-a ln(a/r) - b ln(b/r)` with `a = α p_n`, `b = (1-α) q_n`, `r = a + b`,
/// so the complementary argument is never formed by subtraction.
pub(crate) fn mi_nats(w: &Channel, alpha: f64) -> f64 {
    let beta = 1.0 - alpha;
    let mut cond = 0.0;
    for (&p, &q) in w.p().iter().zip(w.q()) {
        let a = alpha * p;
        let b = beta * q;
        let r = a + b;
        if r > 0.0 {
            cond += xlnx_neg(a / r) * r + xlnx_neg(b / r) * r;
        }
    }
    (h2(alpha) - cond).max(0.0)
}

/// Mutual information between the input and output of `w` when
/// `Pr(X = 0) = prior.alpha()`.
pub fn mutual_information(w: &Channel, prior: Prior, unit: Unit) -> f64 {
    unit.from_nats(mi_nats(w, prior.alpha()))
}

/// Bhattacharyya parameter `Z(W) = Σ sqrt(p_n q_n)`.
pub fn bhattacharyya(w: &Channel) -> f64 {
    let z: f64 = w
        .p()
        .iter()
        .zip(w.q())
        .map(|(&p, &q)| {
            // sqrt of an exact square is exact; fall back when p q underflows.
            let pq = p * q;
            if pq >= f64::MIN_POSITIVE {
                pq.sqrt()
            } else {
                p.sqrt() * q.sqrt()
            }
        })
        .sum();
    z.min(1.0)
}
