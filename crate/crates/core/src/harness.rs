//! Randomized verification of the capacity bounds.
//!
//! Each trial draws a channel from its own RNG stream, keyed by the master
//! seed and the trial index, so a report is bit-identical no matter how
//! many workers produced it.

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::bounds::{gen_lower, gen_upper, prior_lower_bound};
use crate::capacity::{
    capacity, capacity_blahut_arimoto, CapacityResult, DEFAULT_MAX_ITER, DEFAULT_TOL_BITS,
};
use crate::channel::{Channel, Prior};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::info::{binary_entropy, mutual_information, Unit};

/// Slack for the capacity sandwich, dominated by solver error.
pub const SANDWICH_TOLERANCE: f64 = 1e-7;
/// Slack for the prior-indexed intermediate bound, which needs no solver.
pub const PRIOR_BOUND_TOLERANCE: f64 = 1e-9;
/// Largest accepted disagreement between the two capacity solvers.
pub const SOLVER_AGREEMENT: f64 = 1e-8;
/// Fraction of trials that are also solved by Blahut–Arimoto.
pub const CROSS_CHECK_RATE: f64 = 0.01;
/// Priors at which the intermediate bound is checked: `{0, 1/16, ..., 1}`.
pub const PRIOR_GRID: usize = 17;
pub const HISTOGRAM_BINS: usize = 20;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// `P` and `Q` independently uniform on the simplex.
    #[default]
    DirichletUniform,
    /// Uniform draws with a random proper subset of entries zeroed.
    Sparse,
    /// `Q` a small random perturbation of `P`, so `Z` is close to 1.
    NearDegenerate,
}

impl std::str::FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet_uniform" => Ok(Sampler::DirichletUniform),
            "sparse" => Ok(Sampler::Sparse),
            "near_degenerate" => Ok(Sampler::NearDegenerate),
            _ => Err(Error::InvalidArgument(format!(
                "unknown sampler {s:?} (expected dirichlet_uniform, sparse or near_degenerate)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub seed: u64,
    pub trials: usize,
    /// Trial `i` uses `output_sizes[i % len]` outputs.
    pub output_sizes: Vec<usize>,
    pub sampler: Sampler,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            seed: 42,
            trials: 100_000,
            output_sizes: vec![2, 3, 4, 8, 16],
            sampler: Sampler::DirichletUniform,
        }
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.output_sizes.is_empty() {
            return Err(Error::InvalidArgument("output_sizes is empty".into()));
        }
        if let Some(n) = self.output_sizes.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidArgument(format!("output size {n} is below 2")));
        }
        Ok(())
    }
}

/// Per-trial RNG: the master seed selects the key, the trial index the
/// stream.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn uniform_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn sparse_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let zeros = rng.random_range(1..n);
    for i in sample_indices(rng, n, zeros) {
        v[i] = 0.0;
    }
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// Draws a random channel with `n_outputs >= 2` outputs.
pub fn sample_channel<R: Rng + ?Sized>(rng: &mut R, n_outputs: usize, sampler: Sampler) -> Result<Channel> {
    if n_outputs < 2 {
        return Err(Error::InvalidArgument(format!(
            "sampled channels need at least 2 outputs, got {n_outputs}"
        )));
    }
    let (p, q) = match sampler {
        Sampler::DirichletUniform => (uniform_simplex(rng, n_outputs), uniform_simplex(rng, n_outputs)),
        Sampler::Sparse => (sparse_simplex(rng, n_outputs), sparse_simplex(rng, n_outputs)),
        Sampler::NearDegenerate => {
            let p = uniform_simplex(rng, n_outputs);
            let d = uniform_simplex(rng, n_outputs);
            let eta = 10f64.powf(rng.random_range(-4.0..-1.0));
            let q = p.iter().zip(&d).map(|(a, b)| (1.0 - eta) * a + eta * b).collect();
            (p, q)
        }
    };
    // Rows were normalized by construction; renormalizing only absorbs
    // rounding.
    Channel::new_renormalized(p, q)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ViolationRecord {
    pub trial: usize,
    pub property: String,
    pub margin: f64,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    fn new(lo: f64, hi: f64, bins: usize) -> Self {
        Histogram {
            lo,
            hi,
            counts: vec![0; bins],
        }
    }

    /// Values outside `[lo, hi]` land in the edge bins.
    fn add(&mut self, x: f64) {
        let bins = self.counts.len();
        let k = ((x - self.lo) / (self.hi - self.lo) * bins as f64).floor();
        let k = if k.is_nan() { 0 } else { (k.max(0.0) as usize).min(bins - 1) };
        self.counts[k] += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialBatchReport {
    pub config: TrialConfig,
    pub trials: usize,
    pub violations: Vec<ViolationRecord>,
    /// `min (C - gen_lower(Z))` over trials.
    pub worst_lower_margin: f64,
    /// `min (gen_upper(Z) - C)` over trials.
    pub worst_upper_margin: f64,
    /// `min (I(W; α) - (H_b(α) - Z_b(α) Z))` over trials and prior grid.
    pub worst_prior_bound_margin: f64,
    pub mean_lower_gap: f64,
    pub mean_upper_gap: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub cross_checked: usize,
    pub max_solver_disagreement: f64,
    pub lower_gap_histogram: Histogram,
    pub upper_gap_histogram: Histogram,
}

impl TrialBatchReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

/// Outcome of a single trial.
#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub channel: Channel,
    pub z: f64,
    pub capacity: CapacityResult,
    pub lower_margin: f64,
    pub upper_margin: f64,
    pub prior_bound_margin: f64,
    pub sym_capacity_margin: f64,
    /// Blahut–Arimoto result, when this trial was cross-checked.
    pub cross_check: Option<CapacityResult>,
}

impl TrialOutcome {
    fn violations(&self) -> Vec<(&'static str, f64)> {
        let mut v = Vec::new();
        if self.lower_margin < -SANDWICH_TOLERANCE {
            v.push(("capacity_lower_bound", self.lower_margin));
        }
        if self.upper_margin < -SANDWICH_TOLERANCE {
            v.push(("capacity_upper_bound", self.upper_margin));
        }
        if self.prior_bound_margin < -PRIOR_BOUND_TOLERANCE {
            v.push(("prior_lower_bound", self.prior_bound_margin));
        }
        if self.sym_capacity_margin < -SANDWICH_TOLERANCE {
            v.push(("capacity_dominates_symmetric", self.sym_capacity_margin));
        }
        if let Some(ba) = &self.cross_check {
            let d = (ba.capacity - self.capacity.capacity).abs();
            if d > SOLVER_AGREEMENT {
                v.push(("solver_agreement", -d));
            }
        }
        v
    }
}

/// Evaluates every checked property on one channel.
pub fn evaluate_trial(w: Channel, cross_check: bool) -> TrialOutcome {
    let z = w.bhattacharyya();
    let cap = capacity(&w);
    let c = cap.capacity;
    let lower_margin = c - gen_lower(z).expect("z in [0,1]");
    let upper_margin = gen_upper(z).expect("z in [0,1]") - c;

    let prior_bound_margin = (0..PRIOR_GRID)
        .map(|k| {
            let a = k as f64 / (PRIOR_GRID - 1) as f64;
            let i = mutual_information(&w, Prior::new(a).expect("grid prior"), Unit::Bits);
            i - prior_lower_bound(a, z).expect("valid arguments")
        })
        .fold(f64::INFINITY, f64::min);

    let sym = mutual_information(&w, Prior::UNIFORM, Unit::Bits);
    let cross = cross_check.then(|| {
        capacity_blahut_arimoto(&w, DEFAULT_TOL_BITS, DEFAULT_MAX_ITER).expect("default arguments are valid")
    });

    TrialOutcome {
        z,
        lower_margin,
        upper_margin,
        prior_bound_margin,
        sym_capacity_margin: c - sym,
        capacity: cap,
        cross_check: cross,
        channel: w,
    }
}

fn run_trial(cfg: &TrialConfig, index: usize) -> TrialOutcome {
    let mut rng = trial_rng(cfg.seed, index);
    let n = cfg.output_sizes[index % cfg.output_sizes.len()];
    let w = sample_channel(&mut rng, n, cfg.sampler).expect("config validated");
    let cross = rng.random_bool(CROSS_CHECK_RATE);
    evaluate_trial(w, cross)
}

pub fn run_verification(cfg: &TrialConfig) -> Result<TrialBatchReport> {
    run_verification_with(cfg, Exec::default())
}

/// Runs `cfg.trials` independent trials and merges them in index order.
pub fn run_verification_with(cfg: &TrialConfig, exec: Exec) -> Result<TrialBatchReport> {
    cfg.validate()?;
    let outcomes = exec.map_range(cfg.trials, |i| run_trial(cfg, i));

    let mut report = TrialBatchReport {
        config: cfg.clone(),
        trials: cfg.trials,
        violations: Vec::new(),
        worst_lower_margin: f64::INFINITY,
        worst_upper_margin: f64::INFINITY,
        worst_prior_bound_margin: f64::INFINITY,
        mean_lower_gap: 0.0,
        mean_upper_gap: 0.0,
        z_min: f64::INFINITY,
        z_max: f64::NEG_INFINITY,
        cross_checked: 0,
        max_solver_disagreement: 0.0,
        lower_gap_histogram: Histogram::new(0.0, 1.0, HISTOGRAM_BINS),
        upper_gap_histogram: Histogram::new(0.0, 1.0, HISTOGRAM_BINS),
    };

    let mut sum_lower = 0.0;
    let mut sum_upper = 0.0;
    for (trial, o) in outcomes.iter().enumerate() {
        for (property, margin) in o.violations() {
            report.violations.push(ViolationRecord {
                trial,
                property: property.to_string(),
                margin,
                p: o.channel.p().to_vec(),
                q: o.channel.q().to_vec(),
            });
        }
        report.worst_lower_margin = report.worst_lower_margin.min(o.lower_margin);
        report.worst_upper_margin = report.worst_upper_margin.min(o.upper_margin);
        report.worst_prior_bound_margin = report.worst_prior_bound_margin.min(o.prior_bound_margin);
        report.z_min = report.z_min.min(o.z);
        report.z_max = report.z_max.max(o.z);
        sum_lower += o.lower_margin;
        sum_upper += o.upper_margin;
        report.lower_gap_histogram.add(o.lower_margin);
        report.upper_gap_histogram.add(o.upper_margin);
        if let Some(ba) = &o.cross_check {
            report.cross_checked += 1;
            let d = (ba.capacity - o.capacity.capacity).abs();
            report.max_solver_disagreement = report.max_solver_disagreement.max(d);
        }
    }
    report.mean_lower_gap = sum_lower / cfg.trials as f64;
    report.mean_upper_gap = sum_upper / cfg.trials as f64;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Tightness scans over closed-form families
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Bsc,
    Bec,
    /// Parameter `s = W(0 | 1)`, with `W(0 | 0) = 1`.
    ZChannel,
}

impl Family {
    pub fn channel(self, param: f64) -> Result<Channel> {
        match self {
            Family::Bsc => Channel::bsc(param),
            Family::Bec => Channel::bec(param),
            Family::ZChannel => Channel::z_channel(param),
        }
    }

    /// Closed-form capacity in bits.
    pub fn closed_form_capacity(self, param: f64) -> f64 {
        match self {
            Family::Bsc => 1.0 - binary_entropy(param, Unit::Bits).expect("param in [0,1]"),
            Family::Bec => 1.0 - param,
            Family::ZChannel => {
                let s = param;
                if s >= 1.0 {
                    0.0
                } else {
                    (1.0 + (1.0 - s) * s.powf(s / (1.0 - s))).log2()
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TightnessRow {
    pub param: f64,
    pub capacity: f64,
    pub z: f64,
    pub gen_lower: f64,
    pub gen_upper: f64,
}

/// Sweeps the family parameter over `{step, 2 step, ...} ∩ (0, 1)`.
pub fn tightness_scan(family: Family, grid_step: f64) -> Result<Vec<TightnessRow>> {
    if !(grid_step > 0.0 && grid_step <= 0.1) {
        return Err(Error::InvalidArgument(format!(
            "grid step must lie in (0, 0.1], got {grid_step}"
        )));
    }
    let n = (1.0 / grid_step + 1e-9).floor() as usize;
    (1..=n)
        .map(|k| k as f64 * grid_step)
        .filter(|&x| x < 1.0 - 1e-9)
        .map(|param| {
            let w = family.channel(param)?;
            let z = w.bhattacharyya();
            Ok(TightnessRow {
                param,
                capacity: capacity(&w).capacity,
                z,
                gen_lower: gen_lower(z)?,
                gen_upper: gen_upper(z)?,
            })
        })
        .collect()
}
