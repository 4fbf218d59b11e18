//! Capacity bounds in terms of the Bhattacharyya parameter, and the scalar
//! inequalities they rest on.
//!
//! All bound functions take `z` as a plain scalar so the same code serves
//! channel analysis and curve emission. Results are in bits unless noted.
//!
//! | bound         | expression                          |
//! |---------------|-------------------------------------|
//! | Arikan lower  | `log2(2 / (1 + z))`                 |
//! | Arikan upper  | `sqrt(1 - z^2)`                     |
//! | general lower | `1 - z`                             |
//! | general upper | `1 - H_b((1 - sqrt(1 - z^2)) / 2)`  |

use serde::Serialize;

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::info::{h2, unit_interval, zb, DOMAIN_TOLERANCE};

use std::f64::consts::LN_2;

/// `sqrt(1 - z^2)` without forming `z^2` near 1.
#[inline]
fn cosine(z: f64) -> f64 {
    ((1.0 - z) * (1.0 + z)).max(0.0).sqrt()
}

/// `(1 - sqrt(1 - x^2)) / 2`, the `p ∈ [0, 1/2]` with `Z_b(p) = x`.
///
/// Written as `x^2 / (2 (1 + sqrt(1 - x^2)))` to avoid cancellation for
/// small `x`.
#[inline]
pub(crate) fn inverse_zb(x: f64) -> f64 {
    x * x / (2.0 * (1.0 + cosine(x)))
}

pub fn arikan_lower(z: f64) -> Result<f64> {
    let z = unit_interval("arikan_lower", z)?;
    Ok((2.0 / (1.0 + z)).log2())
}

pub fn arikan_upper(z: f64) -> Result<f64> {
    let z = unit_interval("arikan_upper", z)?;
    Ok(cosine(z))
}

/// Lower bound `1 - z`, valid for the true capacity of any binary-input
/// channel.
pub fn gen_lower(z: f64) -> Result<f64> {
    let z = unit_interval("gen_lower", z)?;
    Ok(1.0 - z)
}

/// Upper bound `1 - H_b((1 - sqrt(1 - z^2)) / 2)` on the true capacity.
pub fn gen_upper(z: f64) -> Result<f64> {
    let z = unit_interval("gen_upper", z)?;
    Ok(1.0 - h2(inverse_zb(z)) / LN_2)
}

/// The convex bijection `F(x) = H_b((1 - sqrt(1 - x^2)) / 2)`, in bits.
///
/// `F(Z_b(p)) = H_b(p)` for every `p ∈ [0,1]`.
pub fn entropy_from_bhattacharyya(x: f64) -> Result<f64> {
    let x = unit_interval("entropy_from_bhattacharyya", x)?;
    Ok(h2(inverse_zb(x)) / LN_2)
}

/// Margin `Z_b(p) - H_b(p)` (bits) of the inequality `H_b(p) <= Z_b(p)`.
pub fn check_entropy_bhattacharyya_inequality(p: f64) -> Result<f64> {
    let p = unit_interval("check_entropy_bhattacharyya_inequality", p)?;
    Ok(zb(p) - h2(p) / LN_2)
}

/// Margin `2 sqrt(xy) - (x + y) H_b(x / (x + y))` (bits) of the weighted
/// form, for `x, y > 0` with `xy <= 1`.
pub fn check_weighted_entropy_inequality(x: f64, y: f64) -> Result<f64> {
    for v in [x, y] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Domain {
                function: "check_weighted_entropy_inequality",
                value: v,
                domain: "(0, inf)",
            });
        }
    }
    if x * y > 1.0 + DOMAIN_TOLERANCE {
        return Err(Error::Domain {
            function: "check_weighted_entropy_inequality",
            value: x * y,
            domain: "xy <= 1",
        });
    }
    let s = x + y;
    Ok(2.0 * (x * y).sqrt() - s * h2(x / s) / LN_2)
}

/// `g(t) = (1 - t) ln(1 - t) - t ln t` (nats), defined on the open unit
/// interval. Nonnegative and concave on `(0, 1/2]`; `g(1 - t) = -g(t)`.
pub fn proof_g(t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain {
            function: "proof_g",
            value: t,
            domain: "(0,1)",
        });
    }
    Ok((1.0 - t) * (-t).ln_1p() - t * t.ln())
}

/// `f(α; β) = H_b(α) - H_b((1 - sqrt(1 - 4α(1-α)β)) / 2)` in bits.
///
/// Symmetric about `α = 1/2` and nondecreasing in `α` on `[0, 1/2]`, so
/// it peaks at the uniform prior for every `β`.
pub fn proof_f(alpha: f64, beta: f64) -> Result<f64> {
    let alpha = unit_interval("proof_f", alpha)?;
    let beta = unit_interval("proof_f", beta)?;
    // sqrt(4α(1-α)β) = Z_b(α) sqrt(β), reusing the stable inverse.
    let x = zb(alpha) * beta.sqrt();
    Ok((h2(alpha) - h2(inverse_zb(x))) / LN_2)
}

/// `h(t) = ln((1 + t) / (1 - t)) - 2t / (1 + t^2)` (nats) on `[0, 1)`.
pub fn proof_h(t: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::Domain {
            function: "proof_h",
            value: t,
            domain: "[0,1)",
        });
    }
    if t < 1e-2 {
        // h(t) = 8/3 t^3 - 8/5 t^5 + 16/7 t^7 - 16/9 t^9 + O(t^11)
        let t2 = t * t;
        return Ok(t * t2 * (8.0 / 3.0 + t2 * (-8.0 / 5.0 + t2 * (16.0 / 7.0 - t2 * 16.0 / 9.0))));
    }
    Ok(2.0 * t.atanh() - 2.0 * t / (1.0 + t * t))
}

/// Intermediate lower bound `H_b(α) - Z_b(α) z` on `I(W; α)`, in bits.
///
/// Holds for every prior; at `α = 1/2` it reduces to `1 - z`.
pub fn prior_lower_bound(alpha: f64, z: f64) -> Result<f64> {
    let alpha = unit_interval("prior_lower_bound", alpha)?;
    let z = unit_interval("prior_lower_bound", z)?;
    Ok(h2(alpha) / LN_2 - zb(alpha) * z)
}

/// The four bounds evaluated at one `z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundSet {
    pub z: f64,
    pub arikan_lower: f64,
    pub arikan_upper: f64,
    pub gen_lower: f64,
    pub gen_upper: f64,
}

/// Slack for the ordering checks in [`BoundSet::check`].
pub const ORDER_TOLERANCE: f64 = 1e-12;

impl BoundSet {
    pub fn for_channel(w: &Channel) -> Self {
        evaluate_bound_set(w.bhattacharyya()).expect("Z(W) lies in [0,1]")
    }

    /// Verifies `arikan_lower <= gen_lower <= gen_upper <= arikan_upper`
    /// and that all values lie in `[0,1]`.
    pub fn check(&self) -> std::result::Result<(), String> {
        let t = ORDER_TOLERANCE;
        let in_range = [self.arikan_lower, self.arikan_upper, self.gen_lower, self.gen_upper]
            .iter()
            .all(|v| (-t..=1.0 + t).contains(v));
        if !in_range {
            return Err(format!("bound outside [0,1] at z = {}: {self:?}", self.z));
        }
        if self.arikan_lower > self.gen_lower + t {
            return Err(format!("arikan_lower > gen_lower at z = {}", self.z));
        }
        if self.gen_upper > self.arikan_upper + t {
            return Err(format!("gen_upper > arikan_upper at z = {}", self.z));
        }
        if self.gen_lower > self.gen_upper + t {
            return Err(format!("gen_lower > gen_upper at z = {}", self.z));
        }
        Ok(())
    }
}

/// Evaluates all four bounds at `z` and checks their ordering.
pub fn evaluate_bound_set(z: f64) -> Result<BoundSet> {
    let set = BoundSet {
        z: unit_interval("evaluate_bound_set", z)?,
        arikan_lower: arikan_lower(z)?,
        arikan_upper: arikan_upper(z)?,
        gen_lower: gen_lower(z)?,
        gen_upper: gen_upper(z)?,
    };
    // A failure here is a numerical bug, not bad input.
    if let Err(msg) = set.check() {
        panic!("bound ordering broken: {msg}");
    }
    Ok(set)
}
