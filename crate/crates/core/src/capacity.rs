//! Capacity `C(W) = max_α I(W; α)` of arbitrary binary-input channels.
//!
//! Two independent solvers are provided so each can check the other:
//! golden-section search over `α` (valid because `I(W; α)` is concave in
//! `α`) and the Blahut–Arimoto alternating maximization. A brute-force grid
//! maximizer serves as ground truth in tests.

use serde::Serialize;

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::info::mi_nats;

use std::f64::consts::LN_2;

pub const DEFAULT_TOL_ALPHA: f64 = 1e-12;
pub const DEFAULT_TOL_BITS: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 10_000;
pub const DEFAULT_GRID_STEP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityMethod {
    GoldenSection,
    BlahutArimoto,
    GridOracle,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityResult {
    /// Capacity estimate in bits; always an attained value of `I(W; α)`.
    pub capacity: f64,
    pub alpha_star: f64,
    pub method: CapacityMethod,
    pub iterations: usize,
    /// Final uncertainty in `α`: bracket width or grid step. Zero when the
    /// maximizer is known exactly.
    pub bracket_width: f64,
    /// Whether the stopping criterion was met before the iteration cap.
    pub converged: bool,
    /// Blahut–Arimoto only: last upper-minus-lower capacity gap in bits.
    pub gap_bits: Option<f64>,
}

impl CapacityResult {
    fn useless(method: CapacityMethod) -> Self {
        CapacityResult {
            capacity: 0.0,
            alpha_star: 0.5,
            method,
            iterations: 0,
            bracket_width: 0.0,
            converged: true,
            gap_bits: (method == CapacityMethod::BlahutArimoto).then_some(0.0),
        }
    }
}

/// Golden-section capacity with the default tolerance.
pub fn capacity(w: &Channel) -> CapacityResult {
    capacity_golden(w, DEFAULT_TOL_ALPHA).expect("default tolerance is valid")
}

/// Maximizes `I(W; α)` over `α ∈ [0,1]` by golden-section search until the
/// bracket is narrower than `tol_alpha`.
///
/// The reported capacity is the best objective value observed (the final
/// probes and the bracket midpoint), never an interpolation. Useless
/// channels (`P = Q`) return capacity 0 at `α* = 1/2`.
pub fn capacity_golden(w: &Channel, tol_alpha: f64) -> Result<CapacityResult> {
    if tol_alpha.is_nan() || tol_alpha <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tol_alpha must be positive, got {tol_alpha}"
        )));
    }
    if w.is_useless() {
        return Ok(CapacityResult::useless(CapacityMethod::GoldenSection));
    }

    // 1/phi
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let f = |a: f64| mi_nats(w, a);

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;

    while hi - lo > tol_alpha {
        iterations += 1;
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
        // Probes can collapse onto each other once the bracket reaches a
        // few ulps; further steps cannot shrink it.
        if iterations > 200 {
            break;
        }
    }

    let mid = 0.5 * (lo + hi);
    let mut best = (mid, f(mid));
    for cand in [(x1, f1), (x2, f2)] {
        if cand.1 > best.1 {
            best = cand;
        }
    }

    Ok(CapacityResult {
        capacity: best.1 / LN_2,
        alpha_star: best.0,
        method: CapacityMethod::GoldenSection,
        iterations,
        bracket_width: hi - lo,
        converged: hi - lo <= tol_alpha,
        gap_bits: None,
    })
}

/// Blahut–Arimoto iteration restricted to binary input.
///
/// With prior `(α, 1-α)` and `D_x = KL(W(·|x) || R)`, the capacity is
/// bracketed by `ln(α e^{D_0} + (1-α) e^{D_1}) <= C <= max(D_0, D_1)`.
/// Iteration stops once that gap drops below `tol_bits` or after
/// `max_iter` updates; `converged` records which.
pub fn capacity_blahut_arimoto(w: &Channel, tol_bits: f64, max_iter: usize) -> Result<CapacityResult> {
    if tol_bits.is_nan() || tol_bits <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tol_bits must be positive, got {tol_bits}"
        )));
    }
    if max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    if w.is_useless() {
        return Ok(CapacityResult::useless(CapacityMethod::BlahutArimoto));
    }

    let tol = tol_bits * LN_2;
    let mut alpha = 0.5f64;
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        iterations += 1;
        let (d0, d1) = divergences(w, alpha);
        // Shift by the larger exponent to keep exp() in range.
        let m = d0.max(d1);
        let e0 = alpha * (d0 - m).exp();
        let e1 = (1.0 - alpha) * (d1 - m).exp();
        let lower = m + (e0 + e1).ln();
        gap = m - lower;
        alpha = e0 / (e0 + e1);
        if gap < tol {
            converged = true;
            break;
        }
    }

    Ok(CapacityResult {
        capacity: mi_nats(w, alpha) / LN_2,
        alpha_star: alpha,
        method: CapacityMethod::BlahutArimoto,
        iterations,
        bracket_width: 0.0,
        converged,
        gap_bits: Some(gap / LN_2),
    })
}

/// `(KL(P || R), KL(Q || R))` in nats, `R = αP + (1-α)Q`. Outputs with
/// zero mass under the conditioned row contribute nothing.
fn divergences(w: &Channel, alpha: f64) -> (f64, f64) {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for (&p, &q) in w.p().iter().zip(w.q()) {
        let r = alpha * p + (1.0 - alpha) * q;
        if r <= 0.0 {
            continue;
        }
        if p > 0.0 {
            d0 += p * (p / r).ln();
        }
        if q > 0.0 {
            d1 += q * (q / r).ln();
        }
    }
    (d0, d1)
}

/// Exhaustive maximum of `I(W; α)` on `{0, step, 2 step, ..., 1}`.
///
/// Ties go to the smallest grid index; useless channels report `α* = 1/2`.
pub fn capacity_grid_oracle(w: &Channel, step: f64) -> Result<CapacityResult> {
    capacity_grid_oracle_with(w, step, Exec::default())
}

pub fn capacity_grid_oracle_with(w: &Channel, step: f64, exec: Exec) -> Result<CapacityResult> {
    if !(step > 0.0 && step <= 0.01) {
        return Err(Error::InvalidArgument(format!(
            "grid step must lie in (0, 0.01], got {step}"
        )));
    }
    if w.is_useless() {
        let mut r = CapacityResult::useless(CapacityMethod::GridOracle);
        r.bracket_width = step;
        return Ok(r);
    }

    let grid = unit_grid(step);
    const CHUNK: usize = 4096;
    let chunks = grid.len().div_ceil(CHUNK);
    let partial = exec.map_range(chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(grid.len());
        let mut best = (lo, f64::NEG_INFINITY);
        for (k, &a) in grid[lo..hi].iter().enumerate() {
            let v = mi_nats(w, a);
            if v > best.1 {
                best = (lo + k, v);
            }
        }
        best
    });
    let mut best = partial[0];
    for &cand in &partial[1..] {
        if cand.1 > best.1 {
            best = cand;
        }
    }

    Ok(CapacityResult {
        capacity: best.1 / LN_2,
        alpha_star: grid[best.0],
        method: CapacityMethod::GridOracle,
        iterations: grid.len(),
        bracket_width: step,
        converged: true,
        gap_bits: None,
    })
}

/// `{0, step, 2 step, ...}` closed at 1. When `1/step` is (nearly) an
/// integer the last point is snapped to exactly 1, otherwise 1 is appended.
pub(crate) fn unit_grid(step: f64) -> Vec<f64> {
    let n = (1.0 / step + 1e-9).floor() as usize;
    let mut g: Vec<f64> = (0..=n).map(|k| k as f64 * step).collect();
    let last = g[n];
    if (1.0 - last).abs() <= 1e-9 {
        g[n] = 1.0;
    } else {
        g.push(1.0);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::{binary_entropy, Unit};

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn golden_examples() {
        let bsc = Channel::bsc(0.11).unwrap();
        let r = capacity(&bsc);
        close(r.capacity, 1.0 - binary_entropy(0.11, Unit::Bits).unwrap(), 1e-14);
        close(r.capacity, 0.500084, 5e-7);
        close(r.alpha_star, 0.5, 1e-6);
        assert!(r.converged);

        let u = capacity(&Channel::useless(vec![0.1, 0.2, 0.7]).unwrap());
        assert_eq!((u.capacity, u.alpha_star), (0.0, 0.5));

        let z = capacity(&Channel::z_channel(0.5).unwrap());
        close(z.capacity, 1.25f64.log2(), 1e-12);
        close(z.capacity, 0.321928, 5e-7);
    }

    #[test]
    fn blahut_arimoto_examples() {
        let bsc = Channel::bsc(0.11).unwrap();
        let ba = capacity_blahut_arimoto(&bsc, DEFAULT_TOL_BITS, DEFAULT_MAX_ITER).unwrap();
        assert!(ba.converged);
        close(ba.capacity, capacity(&bsc).capacity, 1e-9);

        let bec = capacity_blahut_arimoto(&Channel::bec(0.3).unwrap(), 1e-12, 10_000).unwrap();
        close(bec.capacity, 0.7, 1e-12);

        let u = capacity_blahut_arimoto(&Channel::useless(vec![0.4, 0.6]).unwrap(), 1e-12, 10).unwrap();
        assert_eq!(u.capacity, 0.0);
    }

    #[test]
    fn blahut_arimoto_reports_iteration_cap() {
        let w = Channel::z_channel(0.9).unwrap();
        let r = capacity_blahut_arimoto(&w, 1e-15, 1).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 1);
        assert!(r.gap_bits.unwrap() > 1e-15);
    }

    #[test]
    fn grid_examples() {
        let w = Channel::perfect();
        let r = capacity_grid_oracle(&w, 1e-4).unwrap();
        assert_eq!(r.capacity, 1.0);
        assert_eq!(r.alpha_star, 0.5);

        let z = capacity_grid_oracle(&Channel::z_channel(0.5).unwrap(), 1e-6).unwrap();
        close(z.capacity, 0.321928, 5e-7);
        // Maximizer of the s = 1/2 Z-channel sits at α* = 0.6.
        close(z.alpha_star, 0.6, 2e-6);
    }

    #[test]
    fn argument_checks() {
        let w = Channel::bsc(0.2).unwrap();
        assert!(capacity_golden(&w, 0.0).is_err());
        assert!(capacity_blahut_arimoto(&w, 1e-9, 0).is_err());
        assert!(capacity_grid_oracle(&w, 0.02).is_err());
        assert!(capacity_grid_oracle(&w, -1e-3).is_err());
    }

    #[test]
    fn grid_is_closed_and_increasing() {
        for step in [1e-3, 0.01, 0.003, 1e-6] {
            let g = unit_grid(step);
            assert_eq!(g[0], 0.0);
            assert_eq!(*g.last().unwrap(), 1.0);
            assert!(g.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn sequential_and_parallel_grid_agree() {
        let w = Channel::new(vec![0.2, 0.5, 0.3], vec![0.6, 0.1, 0.3]).unwrap();
        let a = capacity_grid_oracle_with(&w, 1e-5, Exec::Sequential).unwrap();
        let b = capacity_grid_oracle_with(&w, 1e-5, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
