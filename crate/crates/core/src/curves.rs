//! Bound curves over a `z` grid, the data behind the lower- and upper-bound
//! comparison plots.

use crate::bounds::{evaluate_bound_set, BoundSet};
use crate::capacity::unit_grid;
use crate::error::{Error, Result};
use crate::fmt::sig;

pub const CURVES_HEADER: &str = "z,arikan_lower,gen_lower,gen_upper,arikan_upper";
pub const DEFAULT_STEP: f64 = 0.001;

#[derive(Clone, Debug, PartialEq)]
pub struct CurveTable {
    /// Strictly increasing, starts at 0 and ends at 1.
    pub z_grid: Vec<f64>,
    pub rows: Vec<BoundSet>,
}

/// Evaluates the bound set on `{0, step, ..., 1}`; `step` must lie in
/// `(0, 0.1]`.
pub fn curve_table(step: f64) -> Result<CurveTable> {
    if !(step > 0.0 && step <= 0.1) {
        return Err(Error::InvalidArgument(format!(
            "curve step must lie in (0, 0.1], got {step}"
        )));
    }
    let z_grid = unit_grid(step);
    let rows = z_grid
        .iter()
        .map(|&z| evaluate_bound_set(z))
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveTable { z_grid, rows })
}

impl CurveTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CURVES_HEADER);
        out.push('\n');
        for b in &self.rows {
            let cols = [b.z, b.arikan_lower, b.gen_lower, b.gen_upper, b.arikan_upper];
            out.push_str(&cols.map(sig).join(","));
            out.push('\n');
        }
        out
    }
}
