//! Exact binomial sums and the moment formulas for the bordering construction.
//!
//! Everything here is computed in arbitrary-precision integers or rationals;
//! floating-point shadows are derived from the rationals and only feed the
//! transcendental bound formulas.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Binomial coefficient C(m, k), with C(m, k) = 0 for k < 0 or k > m.
///
/// Uses the descending-product formula with exact division.
pub fn binomial(m: u64, k: i64) -> BigInt {
    if k < 0 || (k as u64) > m {
        return BigInt::zero();
    }
    let k = (k as u64).min(m - k as u64);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(m - i) / BigInt::from(i + 1);
    }
    acc
}

/// Sum over p of C(2k, k+p)·|p|, by direct summation.
///
/// Equals k·C(2k, k) exactly for every k >= 0.
pub fn best_sum(k: u64) -> BigInt {
    let n = 2 * k;
    let mut acc = BigInt::zero();
    for p in -(k as i64)..=(k as i64) {
        if p == 0 {
            continue;
        }
        acc += binomial(n, k as i64 + p) * BigInt::from(p.unsigned_abs());
    }
    acc
}

/// Double sum over p, q of C(2k, k+p)·C(2k, k+q)·|p² − q²|, by direct
/// double summation. Equals 2k²·C(2k, k)² exactly.
pub fn double_sum(k: u64) -> BigInt {
    let n = 2 * k;
    // one row of Pascal's triangle, reused across the double loop
    let row: Vec<BigInt> = (0..=n).map(|j| binomial(n, j as i64)).collect();
    let mut acc = BigInt::zero();
    for p in -(k as i64)..=(k as i64) {
        let p2 = p * p;
        for q in -(k as i64)..=(k as i64) {
            let w = (p2 - q * q).unsigned_abs();
            if w == 0 {
                continue;
            }
            acc += &row[(k as i64 + p) as usize] * &row[(k as i64 + q) as usize] * BigInt::from(w);
        }
    }
    acc
}

/// Exact mean and variance of a diagonal entry g_ii of G = CA⁻¹B + I,
/// together with float shadows.
#[derive(Debug, Clone)]
pub struct MomentStats {
    pub h: u64,
    /// μ(h) = 1 + h·C(h, h/2)/2^h, exact.
    pub mu: BigRational,
    /// σ(h)² = 1 + h(h−1)·C(h/2, h/4)²/2^(h+1) − h²·C(h, h/2)²/2^(2h), exact.
    pub sigma2: BigRational,
    pub mu_f: f64,
    pub sigma2_f: f64,
    /// τ = σ/μ.
    pub tau_f: f64,
}

fn pow2(e: u64) -> BigInt {
    BigInt::one() << e
}

fn check_order(h: u64) -> Result<()> {
    if h < 4 || h % 4 != 0 {
        return Err(Error::InvalidHadamardOrder(h));
    }
    Ok(())
}

/// Exact moments μ(h), σ²(h) for a Hadamard order h (h >= 4, h ≡ 0 mod 4).
pub fn moments(h: u64) -> Result<MomentStats> {
    check_order(h)?;
    let central = binomial(h, (h / 2) as i64);
    let quarter = binomial(h / 2, (h / 4) as i64);
    let mu = BigRational::one()
        + BigRational::new(BigInt::from(h) * &central, pow2(h));
    let sigma2 = BigRational::one()
        + BigRational::new(BigInt::from(h) * BigInt::from(h - 1) * &quarter * &quarter, pow2(h + 1))
        - BigRational::new(BigInt::from(h) * BigInt::from(h) * &central * &central, pow2(2 * h));
    let mu_f = rational_to_f64(&mu);
    let sigma2_f = rational_to_f64(&sigma2);
    Ok(MomentStats {
        h,
        mu,
        sigma2,
        mu_f,
        sigma2_f,
        tau_f: sigma2_f.sqrt() / mu_f,
    })
}

/// True iff μ is strictly increasing and σ² strictly decreasing over
/// h = 4, 8, …, h_max, compared as exact rationals.
pub fn mu_monotone_check(h_max: u64) -> Result<bool> {
    if h_max < 8 || h_max % 4 != 0 {
        return Err(Error::RangeTooSmall(format!(
            "mu_monotone_check needs h_max >= 8 and divisible by 4, got {h_max}"
        )));
    }
    let mut prev = moments(4)?;
    for h in (8..=h_max).step_by(4) {
        let cur = moments(h)?;
        if prev.mu >= cur.mu || prev.sigma2 <= cur.sigma2 {
            return Ok(false);
        }
        prev = cur;
    }
    Ok(true)
}

/// Convert a BigRational to f64 without overflowing on huge numerators.
///
/// Shifts numerator and denominator down to at most 128 bits first, so the
/// result is accurate to well below 1e−15 relative error.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    let n = r.numer();
    let d = r.denom();
    if n.is_zero() {
        return 0.0;
    }
    let shift = (n.bits().max(d.bits()) as i64) - 128;
    let (ns, ds) = if shift > 0 {
        (n >> shift as u64, d >> shift as u64)
    } else {
        (n.clone(), d.clone())
    };
    ns.to_f64().unwrap() / ds.to_f64().unwrap()
}

/// Natural log of a positive big integer, exact to f64 precision.
pub fn ln_bigint(x: &BigInt) -> f64 {
    assert!(x.is_positive(), "ln of non-positive integer");
    let bits = x.bits();
    if bits <= 62 {
        return (x.to_f64().unwrap()).ln();
    }
    let shift = bits - 62;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a positive rational.
pub fn ln_rational(r: &BigRational) -> f64 {
    assert!(r.is_positive(), "ln of non-positive rational");
    let (sign, numer) = r.numer().clone().into_parts();
    debug_assert_eq!(sign, Sign::Plus);
    ln_bigint(&BigInt::from(numer)) - ln_bigint(r.denom())
}
