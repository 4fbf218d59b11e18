//! Two-channel polarization transforms and recursive exploration.
//!
//! `W⁻` and `W⁺` are built with uniform priors on the auxiliary inputs and
//! then treated as ordinary binary-input channels, so the capacity bounds
//! apply to them even when they are not symmetric.

use std::cmp::Ordering;

use serde::Serialize;

use crate::bounds::{evaluate_bound_set, BoundSet};
use crate::capacity::capacity;
use crate::channel::{Channel, Prior};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fmt::sig;
use crate::info::{mutual_information, Unit};

pub const DEFAULT_ALPHABET_CAP: usize = 1_000_000;
/// Relative tolerance when comparing likelihood-ratio cross products.
pub const MERGE_TOLERANCE: f64 = 1e-13;
pub const NODES_HEADER: &str = "path,n_outputs,z,sym_capacity_bits,gen_lower,gen_upper";

fn check_cap(outputs: usize, cap: usize) -> Result<()> {
    if outputs > cap {
        return Err(Error::AlphabetCap { depth: 1, outputs, cap });
    }
    Ok(())
}

/// `W⁻(y1, y2 | u1) = ½ Σ_{u2} W(y1 | u1 ⊕ u2) W(y2 | u2)`.
///
/// Output `(y1, y2)` is stored at index `y1 * N + y2`.
pub fn transform_minus(w: &Channel) -> Result<Channel> {
    transform_minus_capped(w, DEFAULT_ALPHABET_CAP)
}

pub fn transform_minus_capped(w: &Channel, cap: usize) -> Result<Channel> {
    let n = w.n_outputs();
    let outputs = n.saturating_mul(n);
    check_cap(outputs, cap)?;
    let (p, q) = (w.p(), w.q());
    let mut mp = Vec::with_capacity(outputs);
    let mut mq = Vec::with_capacity(outputs);
    for y1 in 0..n {
        for y2 in 0..n {
            mp.push(0.5 * (p[y1] * p[y2] + q[y1] * q[y2]));
            mq.push(0.5 * (q[y1] * p[y2] + p[y1] * q[y2]));
        }
    }
    Ok(Channel::from_parts_unchecked(mp, mq))
}

/// `W⁺(y1, y2, u1 | u2) = ½ W(y1 | u1 ⊕ u2) W(y2 | u2)`.
///
/// Output `(y1, y2, u1)` is stored at index `(y1 * N + y2) * 2 + u1`.
pub fn transform_plus(w: &Channel) -> Result<Channel> {
    transform_plus_capped(w, DEFAULT_ALPHABET_CAP)
}

pub fn transform_plus_capped(w: &Channel, cap: usize) -> Result<Channel> {
    let n = w.n_outputs();
    let outputs = n.checked_mul(n).and_then(|x| x.checked_mul(2)).unwrap_or(usize::MAX);
    check_cap(outputs, cap)?;
    let (p, q) = (w.p(), w.q());
    let mut pp = Vec::with_capacity(outputs);
    let mut pq = Vec::with_capacity(outputs);
    for y1 in 0..n {
        for y2 in 0..n {
            // u1 = 0
            pp.push(0.5 * p[y1] * p[y2]);
            pq.push(0.5 * q[y1] * q[y2]);
            // u1 = 1
            pp.push(0.5 * q[y1] * p[y2]);
            pq.push(0.5 * p[y1] * q[y2]);
        }
    }
    Ok(Channel::from_parts_unchecked(pp, pq))
}

/// `p_i q_j` vs `p_j q_i`, equal within [`MERGE_TOLERANCE`] relative.
fn same_ratio(a: (f64, f64), b: (f64, f64)) -> bool {
    let x = a.0 * b.1;
    let y = b.0 * a.1;
    (x - y).abs() <= MERGE_TOLERANCE * x.max(y)
}

/// Merges outputs with equal likelihood ratio `p_n : q_n` and drops dead
/// symbols (`p_n = q_n = 0`).
///
/// This is a sufficient-statistic reduction: `Z` and `I(W; α)` are
/// unchanged for every `α`. Merged classes appear in order of their first
/// member, so a channel with all-distinct ratios comes back unchanged.
pub fn merge_equivalent_outputs(w: &Channel) -> Channel {
    let (p, q) = (w.p(), w.q());
    let mut live: Vec<usize> = (0..w.n_outputs()).filter(|&i| p[i] > 0.0 || q[i] > 0.0).collect();
    // Sort by p / (p + q), which orders ratios monotonically and is finite
    // for every live symbol.
    let key = |i: usize| p[i] / (p[i] + q[i]);
    live.sort_by(|&a, &b| key(a).partial_cmp(&key(b)).unwrap_or(Ordering::Equal).then(a.cmp(&b)));

    // (first member index, summed p, summed q)
    let mut classes: Vec<(usize, f64, f64)> = Vec::new();
    let mut rep = (f64::NAN, f64::NAN);
    for &i in &live {
        let cur = (p[i], q[i]);
        match classes.last_mut() {
            Some(c) if same_ratio(rep, cur) => {
                c.0 = c.0.min(i);
                c.1 += p[i];
                c.2 += q[i];
            }
            _ => {
                classes.push((i, p[i], q[i]));
                rep = cur;
            }
        }
    }
    classes.sort_by_key(|c| c.0);
    let (mp, mq) = classes.into_iter().map(|(_, a, b)| (a, b)).unzip();
    Channel::from_parts_unchecked(mp, mq)
}

/// A synthesized channel in the polarization tree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolarNode {
    /// Transform choices from the root, `-` for minus and `+` for plus.
    pub path: String,
    #[serde(skip)]
    pub channel: Channel,
    pub n_outputs: usize,
    pub z: f64,
    /// `I(node; 1/2)` in bits.
    pub sym_capacity: f64,
    /// True capacity in bits (golden-section solver).
    pub capacity: f64,
    pub bounds: BoundSet,
}

impl PolarNode {
    fn new(path: String, channel: Channel) -> Self {
        let z = channel.bhattacharyya();
        PolarNode {
            path,
            n_outputs: channel.n_outputs(),
            z,
            sym_capacity: mutual_information(&channel, Prior::UNIFORM, Unit::Bits),
            capacity: capacity(&channel).capacity,
            bounds: evaluate_bound_set(z).expect("Z in [0,1]"),
            channel,
        }
    }

    /// Worst margin of `1 - Z <= I(·;1/2) <= C <= gen_upper(Z)`.
    pub fn sandwich_margin(&self) -> f64 {
        [
            self.sym_capacity - self.bounds.gen_lower,
            self.capacity - self.sym_capacity,
            self.bounds.gen_upper - self.capacity,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PolarOptions {
    pub cap: usize,
    pub exec: Exec,
}

impl Default for PolarOptions {
    fn default() -> Self {
        PolarOptions {
            cap: DEFAULT_ALPHABET_CAP,
            exec: Exec::default(),
        }
    }
}

/// All `2^depth` synthesized channels, ordered by path with `-` before `+`.
pub fn polarize(w: &Channel, depth: usize) -> Result<Vec<PolarNode>> {
    polarize_with(w, depth, PolarOptions::default())
}

pub fn polarize_with(w: &Channel, depth: usize, opts: PolarOptions) -> Result<Vec<PolarNode>> {
    expand(merge_equivalent_outputs(w), String::new(), depth, opts)
}

fn expand(w: Channel, path: String, remaining: usize, opts: PolarOptions) -> Result<Vec<PolarNode>> {
    if remaining == 0 {
        return Ok(vec![PolarNode::new(path, w)]);
    }
    let level = path.len() + 1;
    let at_level = |e: Error| match e {
        Error::AlphabetCap { outputs, cap, .. } => Error::AlphabetCap { depth: level, outputs, cap },
        other => other,
    };
    let minus = transform_minus_capped(&w, opts.cap).map_err(at_level)?;
    let plus = transform_plus_capped(&w, opts.cap).map_err(at_level)?;
    drop(w);
    let (left, right) = opts.exec.join(
        || expand(merge_equivalent_outputs(&minus), format!("{path}-"), remaining - 1, opts),
        || expand(merge_equivalent_outputs(&plus), format!("{path}+"), remaining - 1, opts),
    );
    let mut nodes = left?;
    nodes.extend(right?);
    Ok(nodes)
}

/// `|Σ I(node; 1/2) - 2^d I(base; 1/2)|` in bits.
pub fn conservation_residual(base: &Channel, nodes: &[PolarNode]) -> f64 {
    let total: f64 = nodes.iter().map(|n| n.sym_capacity).sum();
    let expect = nodes.len() as f64 * mutual_information(base, Prior::UNIFORM, Unit::Bits);
    (total - expect).abs()
}

pub fn nodes_to_csv(nodes: &[PolarNode]) -> String {
    let mut out = String::from(NODES_HEADER);
    out.push('\n');
    for n in nodes {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            n.path,
            n.n_outputs,
            sig(n.z),
            sig(n.sym_capacity),
            sig(n.bounds.gen_lower),
            sig(n.bounds.gen_upper)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::validate;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn bec_transforms() {
        let w = Channel::bec(0.5).unwrap();
        let m = transform_minus(&w).unwrap();
        assert_eq!(m.n_outputs(), 9);
        assert!(validate(m.p(), m.q()).is_ok());
        close(m.bhattacharyya(), 0.75, 1e-15);
        let merged = merge_equivalent_outputs(&m);
        assert_eq!(merged.n_outputs(), 3);
        close(merged.bhattacharyya(), 0.75, 1e-15);

        let p = transform_plus(&w).unwrap();
        assert_eq!(p.n_outputs(), 18);
        assert!(validate(p.p(), p.q()).is_ok());
        close(p.bhattacharyya(), 0.25, 1e-15);
        assert_eq!(merge_equivalent_outputs(&p).n_outputs(), 3);
    }

    #[test]
    fn extreme_channels_are_fixed_points() {
        for t in [transform_minus, transform_plus] {
            assert_eq!(t(&Channel::perfect()).unwrap().bhattacharyya(), 0.0);
            let u = Channel::useless(vec![0.3, 0.7]).unwrap();
            let v = merge_equivalent_outputs(&t(&u).unwrap());
            assert!(v.is_useless());
            close(v.bhattacharyya(), 1.0, 1e-15);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let w = Channel::new(vec![0.25; 4], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!(matches!(transform_minus_capped(&w, 15), Err(Error::AlphabetCap { outputs: 16, .. })));
        assert!(transform_minus_capped(&w, 16).is_ok());
        assert!(matches!(transform_plus_capped(&w, 31), Err(Error::AlphabetCap { outputs: 32, .. })));
    }

    #[test]
    fn merge_keeps_distinct_and_drops_dead() {
        let w = Channel::new(vec![0.2, 0.3, 0.5], vec![0.5, 0.3, 0.2]).unwrap();
        assert_eq!(merge_equivalent_outputs(&w), w);

        let w = Channel::new(vec![0.2, 0.0, 0.8], vec![0.5, 0.0, 0.5]).unwrap();
        let m = merge_equivalent_outputs(&w);
        assert_eq!(m.p(), &[0.2, 0.8]);

        // Two zero-q symbols share the infinite ratio.
        let w = Channel::new(vec![0.1, 0.3, 0.6], vec![0.0, 1.0, 0.0]).unwrap();
        let m = merge_equivalent_outputs(&w);
        assert_eq!(m.n_outputs(), 2);
        close(m.p()[0], 0.7, 1e-15);
    }

    #[test]
    fn bec_depth_two() {
        let nodes = polarize(&Channel::bec(0.5).unwrap(), 2).unwrap();
        let paths: Vec<&str> = nodes.iter().map(|n| n.path.as_str()).collect();
        assert_eq!(paths, ["--", "-+", "+-", "++"]);
        let z: Vec<f64> = nodes.iter().map(|n| n.z).collect();
        assert_eq!(z, [0.9375, 0.5625, 0.4375, 0.0625]);
    }

    #[test]
    fn depth_zero_is_base() {
        let w = Channel::z_channel(0.5).unwrap();
        let nodes = polarize(&w, 0).unwrap();
        assert_eq!(nodes.len(), 1);
        assert_eq!(nodes[0].path, "");
        close(nodes[0].z, w.bhattacharyya(), 0.0);
    }

    #[test]
    fn z_channel_conservation() {
        let w = Channel::z_channel(0.5).unwrap();
        let nodes = polarize(&w, 3).unwrap();
        assert_eq!(nodes.len(), 8);
        assert!(conservation_residual(&w, &nodes) <= 1e-8);
        for n in &nodes {
            assert!(n.sandwich_margin() >= -1e-7, "{}: {}", n.path, n.sandwich_margin());
        }
    }

    #[test]
    fn polarize_reports_depth_on_cap() {
        let w = Channel::new(vec![0.2, 0.3, 0.5], vec![0.6, 0.3, 0.1]).unwrap();
        let opts = PolarOptions { cap: 2000, exec: Exec::Sequential };
        match polarize_with(&w, 4, opts) {
            Err(Error::AlphabetCap { depth, .. }) => assert!(depth >= 2),
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn csv_layout() {
        let nodes = polarize(&Channel::bec(0.5).unwrap(), 1).unwrap();
        let csv = nodes_to_csv(&nodes);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], NODES_HEADER);
        assert_eq!(lines[1], "-,3,0.75,0.25,0.25,0.343942437027");
        assert_eq!(lines.len(), 3);
    }
}
