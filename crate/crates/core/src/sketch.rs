//! Streaming signature builders.
//!
//! Four algorithms share one builder type:
//!
//! * [`Algorithm::MinHash`]: m independent uniform draws per element, slots in `[0, 1)`.
//! * [`Algorithm::SuperMinHashNaive`]: a full Fisher-Yates shuffle per element,
//!   then `h_j = min(h_j, x_j + p_j)`. Theta(m) work per element.
//! * [`Algorithm::SuperMinHashReference`]: the shuffle and the update fused into
//!   one loop, with lazy permutation initialisation through a timestamp array.
//! * [`Algorithm::SuperMinHash`]: the reference loop plus a histogram over the
//!   integral parts of the slots, which allows leaving the loop as soon as no
//!   further update is possible.
//!
//! The reference and optimised variants produce bitwise identical signatures.
//! The naive variant applies the permutation the other way round and agrees
//! with them only in distribution.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rng::ElementStream;

/// Slot value of a signature that has not seen any element.
pub const UNSET: f64 = f64::INFINITY;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Algorithm {
    MinHash,
    SuperMinHashNaive,
    SuperMinHashReference,
    #[default]
    SuperMinHash,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::MinHash,
        Algorithm::SuperMinHashNaive,
        Algorithm::SuperMinHashReference,
        Algorithm::SuperMinHash,
    ];

    /// Byte used in the signature file header.
    pub fn code(self) -> u8 {
        match self {
            Algorithm::MinHash => 0,
            Algorithm::SuperMinHashNaive => 1,
            Algorithm::SuperMinHashReference => 2,
            Algorithm::SuperMinHash => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(usize::from(code)).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::MinHash => "minhash",
            Algorithm::SuperMinHashNaive => "superminhash-naive",
            Algorithm::SuperMinHashReference => "superminhash-ref",
            Algorithm::SuperMinHash => "superminhash",
        }
    }

    pub fn is_superminhash(self) -> bool {
        self != Algorithm::MinHash
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                format!(
                    "unknown algorithm '{s}' (expected one of: minhash, superminhash-naive, superminhash-ref, superminhash)"
                )
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SketchConfig {
    m: u32,
    algorithm: Algorithm,
    global_seed: u64,
}

impl SketchConfig {
    pub fn new(m: u32, algorithm: Algorithm, global_seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::ZeroSize);
        }
        Ok(Self {
            m,
            algorithm,
            global_seed,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn size(&self) -> usize {
        self.m as usize
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn global_seed(&self) -> u64 {
        self.global_seed
    }

    pub(crate) fn ensure_same(&self, other: &SketchConfig) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ConfigMismatch {
                left: *self,
                right: *other,
            })
        }
    }
}

impl fmt::Display for SketchConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m={} algo={} seed={}", self.m, self.algorithm, self.global_seed)
    }
}

/// An immutable set signature. Unset slots hold [`UNSET`] (+infinity).
#[derive(Clone, Debug, PartialEq)]
pub struct Signature {
    config: SketchConfig,
    values: Vec<f64>,
}

impl Signature {
    /// All-unset signature, the signature of the empty set.
    pub fn empty(config: SketchConfig) -> Self {
        Self {
            config,
            values: vec![UNSET; config.size()],
        }
    }

    /// Builds a signature from raw slot values. The length must equal `m`.
    pub fn from_values(config: SketchConfig, values: Vec<f64>) -> Result<Self> {
        if values.len() != config.size() {
            return Err(Error::domain(
                "values.len()",
                values.len(),
                "must equal the signature size",
            ));
        }
        Ok(Self { config, values })
    }

    pub fn config(&self) -> &SketchConfig {
        &self.config
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn unset_count(&self) -> usize {
        self.values.iter().filter(|v| **v == UNSET).count()
    }

    pub fn is_empty(&self) -> bool {
        self.values.iter().all(|v| *v == UNSET)
    }

    /// Slot-wise minimum; the signature of the union of both input sets.
    pub fn merge(&self, other: &Signature) -> Result<Signature> {
        self.config.ensure_same(&other.config)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.min(*b))
            .collect();
        Ok(Signature {
            config: self.config,
            values,
        })
    }

    /// Builds the signature of all elements yielded by `elements`.
    pub fn from_elements<I, E>(config: SketchConfig, elements: I) -> Signature
    where
        I: IntoIterator<Item = E>,
        E: AsRef<[u8]>,
    {
        let mut builder = SketchBuilder::new(config);
        for e in elements {
            builder.add(e.as_ref());
        }
        builder.finalize()
    }
}

/// `x + j` for `x` in `[0, 1)`, rounded down if binary64 addition would carry
/// into `j + 1`. Keeps `floor(result) == j`.
#[inline]
fn offset(x: f64, j: usize) -> f64 {
    let v = x + j as f64;
    let ceiling = (j + 1) as f64;
    if v < ceiling {
        v
    } else {
        f64::from_bits(ceiling.to_bits() - 1)
    }
}

/// Histogram bucket of a slot value: its integral part, capped at `m - 1`.
#[inline]
fn bucket(value: f64, m: usize) -> usize {
    if value >= (m - 1) as f64 {
        m - 1
    } else {
        value as usize
    }
}

/// Mutable builder state. Elements can be added after [`finalize`](Self::finalize).
#[derive(Clone, Debug)]
pub struct SketchBuilder {
    config: SketchConfig,
    values: Vec<f64>,
    // permutation workspace
    perm: Vec<usize>,
    // perm[k] is valid for the current element iff stamps[k] == insertions
    stamps: Vec<i64>,
    histogram: Vec<u32>,
    max_nonzero: usize,
    insertions: u64,
    inner_iterations: u64,
    words: u64,
}

impl SketchBuilder {
    pub fn new(config: SketchConfig) -> Self {
        let m = config.size();
        let mut histogram = vec![0; m];
        histogram[m - 1] = config.m();
        Self {
            config,
            values: vec![UNSET; m],
            perm: vec![0; m],
            stamps: vec![-1; m],
            histogram,
            max_nonzero: m - 1,
            insertions: 0,
            inner_iterations: 0,
            words: 0,
        }
    }

    pub fn config(&self) -> &SketchConfig {
        &self.config
    }

    pub fn add(&mut self, element: &[u8]) {
        let mut stream = ElementStream::seed_from_element(element, self.config.global_seed());
        let iterations = match self.config.algorithm() {
            Algorithm::MinHash => self.add_minhash(&mut stream),
            Algorithm::SuperMinHashNaive => self.add_naive(&mut stream),
            Algorithm::SuperMinHashReference => self.add_reference(&mut stream),
            Algorithm::SuperMinHash => self.add_optimized(&mut stream),
        };
        self.inner_iterations += iterations;
        self.words += stream.draws();
        self.insertions += 1;
    }

    pub fn extend<I, E>(&mut self, elements: I)
    where
        I: IntoIterator<Item = E>,
        E: AsRef<[u8]>,
    {
        for e in elements {
            self.add(e.as_ref());
        }
    }

    /// Snapshot of the current signature.
    pub fn finalize(&self) -> Signature {
        Signature {
            config: self.config,
            values: self.values.clone(),
        }
    }

    /// Number of `add` calls, duplicates included.
    pub fn insertions(&self) -> u64 {
        self.insertions
    }

    /// Total inner-loop iterations over all insertions.
    pub fn inner_iterations(&self) -> u64 {
        self.inner_iterations
    }

    /// Total 64-bit words drawn from element streams.
    pub fn words_consumed(&self) -> u64 {
        self.words
    }

    /// Counts of slots per integral part (last bucket also holds unset slots).
    /// Only maintained by [`Algorithm::SuperMinHash`].
    pub fn histogram(&self) -> &[u32] {
        &self.histogram
    }

    /// Largest bucket index with a non-zero count.
    /// Only maintained by [`Algorithm::SuperMinHash`].
    pub fn max_nonzero(&self) -> usize {
        self.max_nonzero
    }

    fn add_minhash(&mut self, stream: &mut ElementStream) -> u64 {
        for h in self.values.iter_mut() {
            let x = stream.next_uniform_double();
            if x < *h {
                *h = x;
            }
        }
        self.values.len() as u64
    }

    fn add_naive(&mut self, stream: &mut ElementStream) -> u64 {
        let m = self.values.len();
        for (k, p) in self.perm.iter_mut().enumerate() {
            *p = k;
        }
        for j in 0..m {
            let r = stream.index_in(j, m - 1);
            self.perm.swap(j, r);
        }
        for j in 0..m {
            let x = stream.next_uniform_double();
            let candidate = offset(x, self.perm[j]);
            if candidate < self.values[j] {
                self.values[j] = candidate;
            }
        }
        m as u64
    }

    #[inline]
    fn shuffle_step(&mut self, j: usize, r: usize, stamp: i64) -> usize {
        if self.stamps[j] != stamp {
            self.stamps[j] = stamp;
            self.perm[j] = j;
        }
        if self.stamps[r] != stamp {
            self.stamps[r] = stamp;
            self.perm[r] = r;
        }
        self.perm.swap(j, r);
        self.perm[j]
    }

    fn add_reference(&mut self, stream: &mut ElementStream) -> u64 {
        let m = self.values.len();
        let stamp = self.insertions as i64;
        for j in 0..m {
            let x = stream.next_uniform_double();
            let r = stream.index_in(j, m - 1);
            let k = self.shuffle_step(j, r, stamp);
            let candidate = offset(x, j);
            if candidate < self.values[k] {
                self.values[k] = candidate;
            }
        }
        m as u64
    }

    fn add_optimized(&mut self, stream: &mut ElementStream) -> u64 {
        let m = self.values.len();
        let stamp = self.insertions as i64;
        let mut j = 0;
        while j <= self.max_nonzero {
            let x = stream.next_uniform_double();
            let r = stream.index_in(j, m - 1);
            let k = self.shuffle_step(j, r, stamp);
            let candidate = offset(x, j);
            if candidate < self.values[k] {
                let previous = bucket(self.values[k], m);
                self.values[k] = candidate;
                if j < previous {
                    self.histogram[previous] -= 1;
                    self.histogram[j] += 1;
                    while self.histogram[self.max_nonzero] == 0 {
                        self.max_nonzero -= 1;
                    }
                }
            }
            j += 1;
        }
        j as u64
    }
}
