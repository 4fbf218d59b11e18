//! Binary-input channels and input priors.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Allowed deviation of `sum(p)` and `sum(q)` from 1.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Which conditional law a violation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Row {
    P,
    Q,
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Row::P => "p",
            Row::Q => "q",
        })
    }
}

/// A broken channel invariant, as reported by [`validate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Empty,
    LengthMismatch { p: usize, q: usize },
    NonFinite { row: Row, index: usize, value: f64 },
    OutOfRange { row: Row, index: usize, value: f64 },
    SumNotOne { row: Row, sum: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "N >= 1 violated: empty output alphabet"),
            Violation::LengthMismatch { p, q } => {
                write!(f, "length mismatch: |p| = {p}, |q| = {q}")
            }
            Violation::NonFinite { row, index, value } => {
                write!(f, "{row}[{index}] = {value} is not finite")
            }
            Violation::OutOfRange { row, index, value } => {
                write!(f, "{row}[{index}] = {value} outside [0,1]")
            }
            Violation::SumNotOne { row, sum } => {
                write!(f, "sum({row}) = {sum} differs from 1 by {:e}", (sum - 1.0).abs())
            }
        }
    }
}

/// Checks every channel invariant and reports all violations found.
pub fn validate(p: &[f64], q: &[f64]) -> std::result::Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    if p.len() != q.len() {
        out.push(Violation::LengthMismatch { p: p.len(), q: q.len() });
    }
    if p.is_empty() || q.is_empty() {
        out.push(Violation::Empty);
    }
    for (row, v) in [(Row::P, p), (Row::Q, q)] {
        let mut finite = true;
        for (index, &value) in v.iter().enumerate() {
            if !value.is_finite() {
                finite = false;
                out.push(Violation::NonFinite { row, index, value });
            } else if !(0.0..=1.0).contains(&value) {
                out.push(Violation::OutOfRange { row, index, value });
            }
        }
        if finite && !v.is_empty() {
            let sum: f64 = v.iter().sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                out.push(Violation::SumNotOne { row, sum });
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// A binary-input channel with `N` outputs.
///
/// `p[n] = W(n | 0)` and `q[n] = W(n | 1)`. Symbols with `p[n] = q[n] = 0`
/// are allowed and contribute nothing to any quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelFile", into = "ChannelFile")]
pub struct Channel {
    p: Vec<f64>,
    q: Vec<f64>,
}

impl Channel {
    pub fn new(p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        validate(&p, &q).map_err(Error::InvalidChannel)?;
        Ok(Channel { p, q })
    }

    /// Divides each row by its sum before validating.
    ///
    /// Rows must still be nonnegative and finite with a positive sum.
    pub fn new_renormalized(mut p: Vec<f64>, mut q: Vec<f64>) -> Result<Self> {
        for v in [&mut p, &mut q] {
            let s: f64 = v.iter().sum();
            if s > 0.0 && s.is_finite() {
                v.iter_mut().for_each(|x| *x /= s);
            }
        }
        Self::new(p, q)
    }

    /// Binary symmetric channel with crossover probability `eps`.
    pub fn bsc(eps: f64) -> Result<Self> {
        Self::new(vec![1.0 - eps, eps], vec![eps, 1.0 - eps])
    }

    /// Binary erasure channel; outputs are `(0, erasure, 1)`.
    pub fn bec(eps: f64) -> Result<Self> {
        Self::new(vec![1.0 - eps, eps, 0.0], vec![0.0, eps, 1.0 - eps])
    }

    /// Z-channel: input 0 is received noiselessly as output 0, input 1 lands
    /// on output 0 with probability `s`.
    pub fn z_channel(s: f64) -> Result<Self> {
        Self::new(vec![1.0, 0.0], vec![s, 1.0 - s])
    }

    pub fn perfect() -> Self {
        Channel {
            p: vec![1.0, 0.0],
            q: vec![0.0, 1.0],
        }
    }

    /// The channel with `P = Q = law`.
    pub fn useless(law: Vec<f64>) -> Result<Self> {
        Self::new(law.clone(), law)
    }

    pub fn n_outputs(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// Output laws are identical, so no information gets through.
    pub fn is_useless(&self) -> bool {
        self.p.iter().zip(&self.q).all(|(a, b)| a == b)
    }

    /// The channel with inputs relabelled (`P` and `Q` exchanged).
    pub fn swapped(&self) -> Self {
        Channel {
            p: self.q.clone(),
            q: self.p.clone(),
        }
    }

    /// Applies the output relabelling `n -> perm[n]` to both rows.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n_outputs();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
            return Err(Error::InvalidArgument(format!(
                "not a permutation of 0..{n}: {perm:?}"
            )));
        }
        let mut p = vec![0.0; n];
        let mut q = vec![0.0; n];
        for (i, &j) in perm.iter().enumerate() {
            p[j] = self.p[i];
            q[j] = self.q[i];
        }
        Ok(Channel { p, q })
    }

    /// `Z(W) = sum_n sqrt(p_n q_n)`.
    pub fn bhattacharyya(&self) -> f64 {
        crate::info::bhattacharyya(self)
    }

    /// Output distribution `R = αP + (1 - α)Q`.
    pub fn mixture(&self, prior: Prior) -> MixtureWeight {
        let a = prior.alpha();
        MixtureWeight(
            self.p
                .iter()
                .zip(&self.q)
                .map(|(p, q)| a * p + (1.0 - a) * q)
                .collect(),
        )
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::ChannelFormat(e.to_string()))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("channel serialization is infallible")
    }

    pub(crate) fn from_parts_unchecked(p: Vec<f64>, q: Vec<f64>) -> Self {
        debug_assert_eq!(p.len(), q.len());
        Channel { p, q }
    }
}

/// On-disk form: `{"outputs": N, "p": [...], "q": [...]}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    outputs: usize,
    p: Vec<f64>,
    q: Vec<f64>,
}

impl TryFrom<ChannelFile> for Channel {
    type Error = String;

    fn try_from(f: ChannelFile) -> std::result::Result<Self, String> {
        if f.p.len() != f.outputs || f.q.len() != f.outputs {
            return Err(format!(
                "\"outputs\" is {} but |p| = {} and |q| = {}",
                f.outputs,
                f.p.len(),
                f.q.len()
            ));
        }
        Channel::new(f.p, f.q).map_err(|e| e.to_string())
    }
}

impl From<Channel> for ChannelFile {
    fn from(c: Channel) -> Self {
        ChannelFile {
            outputs: c.p.len(),
            p: c.p,
            q: c.q,
        }
    }
}

/// Input prior: `alpha = Pr(X = 0)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct Prior(f64);

impl Prior {
    pub const UNIFORM: Prior = Prior(0.5);

    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && (0.0..=1.0).contains(&alpha) {
            Ok(Prior(alpha))
        } else {
            Err(Error::Domain {
                function: "Prior::new",
                value: alpha,
                domain: "[0,1]",
            })
        }
    }

    pub fn alpha(self) -> f64 {
        self.0
    }
}

/// Mixture output law `r_n = α p_n + (1 - α) q_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureWeight(pub Vec<f64>);

impl MixtureWeight {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}
