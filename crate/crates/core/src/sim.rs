//! Monte Carlo experiments: the empirical variance reduction factor and the
//! average inner-loop cost per inserted element.
//!
//! Each trial draws a fresh 64-bit key from a stream seeded by
//! `(master_seed, trial index)`. Trial elements are 16-byte strings made of
//! that key followed by a little-endian counter, and the three disjoint parts
//! of a set pair use disjoint counter ranges. Trials are independent, may run
//! in parallel, and are reduced in trial order so reports are bit-reproducible.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::analytics::{alpha, estimate_jaccard, runtime_bound};
use crate::error::{Error, Result};
use crate::rng::ElementStream;
use crate::sketch::{Algorithm, Signature, SketchBuilder, SketchConfig};

const TRIAL_DOMAIN: u64 = 0x7369_6d2d_7472_6961;

/// Cardinalities of `A \ B`, `B \ A` and `A ∩ B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SetProfile {
    pub a_only: u64,
    pub b_only: u64,
    pub shared: u64,
}

impl SetProfile {
    pub fn new(a_only: u64, b_only: u64, shared: u64) -> Result<Self> {
        if a_only == 0 && b_only == 0 && shared == 0 {
            return Err(Error::domain("profile", "0,0,0", "at least one cardinality must be positive"));
        }
        Ok(Self {
            a_only,
            b_only,
            shared,
        })
    }

    /// `|A ∪ B|`
    pub fn union(&self) -> u64 {
        self.a_only + self.b_only + self.shared
    }

    pub fn jaccard(&self) -> f64 {
        self.shared as f64 / self.union() as f64
    }
}

impl fmt::Display for SetProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.a_only, self.b_only, self.shared)
    }
}

impl FromStr for SetProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [a, b, i] = parts.as_slice() else {
            return Err(format!("expected three comma-separated counts A,B,I, got '{s}'"));
        };
        let parse = |v: &str| v.parse::<u64>().map_err(|e| format!("invalid count '{v}': {e}"));
        SetProfile::new(parse(a)?, parse(b)?, parse(i)?).map_err(|e| e.to_string())
    }
}

/// Key shared by all elements of one trial.
pub fn trial_key(master_seed: u64, trial: u64) -> u64 {
    ElementStream::seed_from_element(&trial.to_le_bytes(), master_seed ^ TRIAL_DOMAIN).next_u64()
}

pub fn trial_element(key: u64, counter: u64) -> [u8; 16] {
    let mut e = [0u8; 16];
    e[..8].copy_from_slice(&key.to_le_bytes());
    e[8..].copy_from_slice(&counter.to_le_bytes());
    e
}

/// The three disjoint element sets of one variance trial.
#[derive(Clone, Copy, Debug)]
pub struct TrialSets {
    key: u64,
    profile: SetProfile,
}

impl TrialSets {
    pub fn new(profile: SetProfile, master_seed: u64, trial: u64) -> Self {
        Self {
            key: trial_key(master_seed, trial),
            profile,
        }
    }

    fn range(&self, start: u64, len: u64) -> impl Iterator<Item = [u8; 16]> + '_ {
        (start..start + len).map(move |c| trial_element(self.key, c))
    }

    pub fn a_only(&self) -> impl Iterator<Item = [u8; 16]> + '_ {
        self.range(0, self.profile.a_only)
    }

    pub fn b_only(&self) -> impl Iterator<Item = [u8; 16]> + '_ {
        self.range(self.profile.a_only, self.profile.b_only)
    }

    pub fn shared(&self) -> impl Iterator<Item = [u8; 16]> + '_ {
        self.range(self.profile.a_only + self.profile.b_only, self.profile.shared)
    }

    pub fn set_a(&self) -> impl Iterator<Item = [u8; 16]> + '_ {
        self.a_only().chain(self.shared())
    }

    pub fn set_b(&self) -> impl Iterator<Item = [u8; 16]> + '_ {
        self.b_only().chain(self.shared())
    }

    /// Signatures of `A` and `B` under `config`.
    pub fn signatures(&self, config: SketchConfig) -> (Signature, Signature) {
        (
            Signature::from_elements(config, self.set_a()),
            Signature::from_elements(config, self.set_b()),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarianceSimSpec {
    pub m: u32,
    pub profile: SetProfile,
    pub trials: u64,
    pub master_seed: u64,
    pub algorithm: Algorithm,
}

impl VarianceSimSpec {
    pub fn new(m: u32, profile: SetProfile, trials: u64, master_seed: u64) -> Self {
        Self {
            m,
            profile,
            trials,
            master_seed,
            algorithm: Algorithm::SuperMinHash,
        }
    }

    pub fn with_algorithm(mut self, algorithm: Algorithm) -> Self {
        self.algorithm = algorithm;
        self
    }
}

/// Aggregated output of a variance experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct SimReport {
    pub m: u32,
    pub union: u64,
    pub jaccard: f64,
    pub trials: u64,
    pub master_seed: u64,
    pub algorithm: Algorithm,
    pub mean_estimate: f64,
    /// Sample variance of the estimates (n - 1 denominator).
    pub empirical_variance: f64,
    /// `empirical_variance * m / (J (1 - J))`
    pub empirical_alpha: f64,
    /// `alpha(m, u)`, or 1 for MinHash signatures.
    pub theoretical_alpha: f64,
    /// Standard error of `mean_estimate`.
    pub std_error: f64,
}

/// Sample mean and (n - 1)-variance, summed in index order.
fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1.0))
}

pub fn run_variance_sim(spec: &VarianceSimSpec) -> Result<SimReport> {
    let config = SketchConfig::new(spec.m, spec.algorithm, spec.master_seed)?;
    let j = spec.profile.jaccard();
    if j <= 0.0 || j >= 1.0 {
        return Err(Error::domain(
            "profile",
            spec.profile,
            "Jaccard index must lie strictly between 0 and 1",
        ));
    }
    if spec.trials < 2 {
        return Err(Error::domain("trials", spec.trials, "at least two trials are needed for a variance"));
    }

    let estimates: Vec<f64> = (0..spec.trials)
        .into_par_iter()
        .map(|t| {
            let (a, b) = TrialSets::new(spec.profile, spec.master_seed, t).signatures(config);
            estimate_jaccard(&a, &b).expect("non-empty sets with a shared config").j_hat
        })
        .collect();

    let (mean, variance) = mean_and_variance(&estimates);
    let m = f64::from(spec.m);
    let theoretical_alpha = if spec.algorithm.is_superminhash() {
        alpha(u64::from(spec.m), spec.profile.union())?
    } else {
        1.0
    };
    Ok(SimReport {
        m: spec.m,
        union: spec.profile.union(),
        jaccard: j,
        trials: spec.trials,
        master_seed: spec.master_seed,
        algorithm: spec.algorithm,
        mean_estimate: mean,
        empirical_variance: variance,
        empirical_alpha: variance * m / (j * (1.0 - j)),
        theoretical_alpha,
        std_error: (variance / spec.trials as f64).sqrt(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RuntimeSimSpec {
    pub m: u32,
    pub n: u64,
    pub trials: u64,
    pub master_seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RuntimeReport {
    pub m: u32,
    pub n: u64,
    pub trials: u64,
    pub master_seed: u64,
    /// Mean over trials of `total inner-loop iterations / n`.
    pub mean_iters_per_element: f64,
    /// Standard error of `mean_iters_per_element`.
    pub std_error: f64,
    /// Largest total iteration count of any single trial.
    pub max_total_iterations: u64,
    /// `runtime_bound(n, m) / n`
    pub bound_per_element: f64,
}

/// Inserts `n` distinct elements into a fresh optimised builder per trial and
/// reports the average inner-loop iterations per element.
pub fn run_runtime_sim(spec: &RuntimeSimSpec) -> Result<RuntimeReport> {
    let config = SketchConfig::new(spec.m, Algorithm::SuperMinHash, spec.master_seed)?;
    if spec.n == 0 {
        return Err(Error::domain("n", spec.n, "must be at least 1"));
    }
    if spec.trials == 0 {
        return Err(Error::domain("trials", spec.trials, "must be at least 1"));
    }

    let totals: Vec<u64> = (0..spec.trials)
        .into_par_iter()
        .map(|t| {
            let key = trial_key(spec.master_seed, t);
            let mut builder = SketchBuilder::new(config);
            for c in 0..spec.n {
                builder.add(&trial_element(key, c));
            }
            builder.inner_iterations()
        })
        .collect();

    let per_element: Vec<f64> = totals.iter().map(|&t| t as f64 / spec.n as f64).collect();
    let (mean, variance) = mean_and_variance(&per_element);
    Ok(RuntimeReport {
        m: spec.m,
        n: spec.n,
        trials: spec.trials,
        master_seed: spec.master_seed,
        mean_iters_per_element: mean,
        std_error: (variance / spec.trials as f64).sqrt(),
        max_total_iterations: totals.iter().copied().max().unwrap_or(0),
        bound_per_element: runtime_bound(spec.n, u64::from(spec.m))? / spec.n as f64,
    })
}
