//! Closed-form statistics of the Jaccard estimator.
//!
//! The variance of the estimator on SuperMinHash signatures is the MinHash
//! variance `J(1-J)/m` scaled by a factor `alpha(m, u)` that only depends on
//! the signature size `m` and the union cardinality `u`:
//!
//! ```text
//! alpha(m, u) = 1 - sum_{i=1}^{m-1} i^u ((i+1)^u + (i-1)^u - 2 i^u)
//!                   / ((m-1)^(u-1) m^u (u-1))
//! ```
//!
//! [`alpha`] evaluates this in log space so it stays finite for large `u`;
//! [`alpha_exact`] evaluates it with big integers and serves as a reference.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::sketch::{Signature, UNSET};

/// Result of comparing two signatures slot by slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateResult {
    /// `matches / m`
    pub j_hat: f64,
    pub matches: usize,
    pub m: usize,
}

/// Fraction of slots with bitwise-equal values.
///
/// Fails on differing configurations and on signatures with unset slots,
/// since the Jaccard index involving an empty set is undefined.
pub fn estimate_jaccard(a: &Signature, b: &Signature) -> Result<EstimateResult> {
    a.config().ensure_same(b.config())?;
    let unset = a.unset_count() + b.unset_count();
    if unset > 0 {
        return Err(Error::UnsetSlots { count: unset });
    }
    let matches = a
        .values()
        .iter()
        .zip(b.values())
        .filter(|(x, y)| x.to_bits() == y.to_bits() && **x != UNSET)
        .count();
    let m = a.values().len();
    Ok(EstimateResult {
        j_hat: matches as f64 / m as f64,
        matches,
        m,
    })
}

fn check_jaccard(j: f64) -> Result<()> {
    if (0.0..=1.0).contains(&j) {
        Ok(())
    } else {
        Err(Error::domain("J", j, "must lie in [0, 1]"))
    }
}

fn check_at_least(name: &'static str, value: u64, min: u64, constraint: &'static str) -> Result<()> {
    if value >= min {
        Ok(())
    } else {
        Err(Error::domain(name, value, constraint))
    }
}

/// MinHash estimator variance `J(1-J)/m`.
pub fn minhash_variance(j: f64, m: u64) -> Result<f64> {
    check_jaccard(j)?;
    check_at_least("m", m, 1, "must be at least 1")?;
    Ok(j * (1.0 - j) / m as f64)
}

/// `ln(n / d)` for `0 < n <= d`, accurate when the ratio is close to one.
fn ln_ratio(n: u64, d: u64) -> f64 {
    if 2 * n > d {
        (-((d - n) as f64 / d as f64)).ln_1p()
    } else {
        (n as f64 / d as f64).ln()
    }
}

/// `ln((1 + 1/i)^u + (1 - 1/i)^u - 2)` for `i >= 1`, `u >= 2`.
fn ln_second_difference(u: u64, i: u64) -> f64 {
    let uf = u as f64;
    if i == 1 {
        // 2^u - 2
        return uf * std::f64::consts::LN_2 + (-(2f64).powf(1.0 - uf)).ln_1p();
    }
    let y = 1.0 / i as f64;
    if uf * y <= 2.0 || u <= 64 {
        // 2 * sum over even k >= 2 of C(u, k) y^k; all terms positive
        let y2 = y * y;
        let mut term = uf * (uf - 1.0) / 2.0 * y2;
        let mut sum = term;
        let mut k = 2u64;
        while k + 2 <= u {
            let kf = k as f64;
            term *= (uf - kf) * (uf - kf - 1.0) / ((kf + 1.0) * (kf + 2.0)) * y2;
            sum += term;
            if term <= sum * 1e-18 {
                break;
            }
            k += 2;
        }
        (2.0 * sum).ln()
    } else {
        let up = uf * y.ln_1p();
        let down = uf * (-y).ln_1p();
        up + ((down - up).exp() - 2.0 * (-up).exp()).ln_1p()
    }
}

/// Variance reduction factor of SuperMinHash relative to MinHash.
///
/// `alpha(1, u)` and `alpha(m, 1)` are defined as 1; the formula is 0/0 there.
pub fn alpha(m: u64, u: u64) -> Result<f64> {
    check_at_least("m", m, 1, "must be at least 1")?;
    check_at_least("u", u, 1, "must be at least 1")?;
    if m == 1 || u == 1 {
        return Ok(1.0);
    }
    let uf = u as f64;
    let ln_u1 = (uf - 1.0).ln();
    let mut ratio = 0.0;
    for i in 1..m {
        let ln_term = (uf - 1.0) * ln_ratio(i, m - 1)
            + uf * ln_ratio(i, m)
            + (i as f64).ln()
            + ln_second_difference(u, i)
            - ln_u1;
        ratio += ln_term.exp();
    }
    Ok(1.0 - ratio)
}

/// Exact rational value of `alpha(m, u)`.
pub fn alpha_exact(m: u64, u: u64) -> Result<BigRational> {
    check_at_least("m", m, 1, "must be at least 1")?;
    check_at_least("u", u, 1, "must be at least 1")?;
    if m == 1 || u == 1 {
        return Ok(BigRational::one());
    }
    let exp = u32::try_from(u).map_err(|_| Error::domain("u", u, "too large for exact evaluation"))?;
    let powers: Vec<BigInt> = (0..=m).map(|i| BigInt::from(i).pow(exp)).collect();
    let mut numerator = BigInt::zero();
    for i in 1..m as usize {
        let second = &powers[i + 1] + &powers[i - 1] - (&powers[i] << 1);
        numerator += &powers[i] * second;
    }
    let denominator = BigInt::from(m - 1).pow(exp - 1) * BigInt::from(m).pow(exp) * BigInt::from(u - 1);
    Ok(BigRational::one() - BigRational::new(numerator, denominator))
}

/// Nearest binary64 value of an exact rational.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// SuperMinHash estimator variance `J(1-J)/m * alpha(m, u)`.
pub fn superminhash_variance(j: f64, m: u64, u: u64) -> Result<f64> {
    Ok(minhash_variance(j, m)? * alpha(m, u)?)
}

/// Probability that slot `j` matches given that a different slot `k` matches.
pub fn conditional_match_probability(j: f64, m: u64, u: u64) -> Result<f64> {
    check_jaccard(j)?;
    if j == 0.0 {
        return Err(Error::domain("J", j, "must be positive; the conditioning event has probability zero"));
    }
    check_at_least("m", m, 2, "must be at least 2")?;
    check_at_least("u", u, 2, "must be at least 2")?;
    Ok(j - (1.0 - j) * (1.0 - alpha(m, u)?) / (m - 1) as f64)
}

/// Covariance of the match indicators of two slots.
pub fn indicator_covariance(j: f64, m: u64, u: u64, same_slot: bool) -> Result<f64> {
    check_jaccard(j)?;
    check_at_least("u", u, 2, "must be at least 2")?;
    if same_slot {
        check_at_least("m", m, 1, "must be at least 1")?;
        return Ok(j * (1.0 - j));
    }
    check_at_least("m", m, 2, "must be at least 2 for distinct slots")?;
    Ok(-j * (1.0 - j) * (1.0 - alpha(m, u)?) / (m - 1) as f64)
}

/// `H_m = 1 + 1/2 + ... + 1/m`, summed from the smallest term; `H_0 = 0`.
pub fn harmonic(m: u64) -> f64 {
    (1..=m).rev().map(|k| 1.0 / k as f64).sum()
}

/// Upper bound on the expected total inner-loop iterations of the optimised
/// SuperMinHash builder after `n` distinct insertions:
/// `n + (m H_m - 1) H_{m-1} + m - 1`.
pub fn runtime_bound(n: u64, m: u64) -> Result<f64> {
    check_at_least("m", m, 1, "must be at least 1")?;
    let mf = m as f64;
    Ok(n as f64 + (mf * harmonic(m) - 1.0) * harmonic(m - 1) + mf - 1.0)
}
