//! Big-integer helpers: parsing the item-count notations accepted on the
//! command line and logarithms of arbitrary-precision values.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Parse an item count given as a plain integer (`12345`), in scientific
/// notation (`1e30`, `2.5e6` is rejected — mantissa must be an integer), or
/// in power notation (`3^63`).
pub fn parse_count(token: &str) -> Result<BigUint> {
    let token = token.trim();
    if token.is_empty() {
        return Err(Error::input("empty count"));
    }
    if let Some((base, exp)) = token.split_once('^') {
        let base: BigUint = base
            .parse()
            .map_err(|_| Error::input(format!("bad base in `{token}`")))?;
        let exp: u32 = exp
            .parse()
            .map_err(|_| Error::input(format!("bad exponent in `{token}`")))?;
        return Ok(base.pow(exp));
    }
    if let Some((mant, exp)) = token.split_once(['e', 'E']) {
        let mant: BigUint = mant
            .parse()
            .map_err(|_| Error::input(format!("bad mantissa in `{token}`")))?;
        let exp: u32 = exp
            .parse()
            .map_err(|_| Error::input(format!("bad exponent in `{token}`")))?;
        return Ok(mant * BigUint::from(10u32).pow(exp));
    }
    token
        .parse()
        .map_err(|_| Error::input(format!("bad count `{token}`")))
}

/// Natural logarithm of a positive big integer.
///
/// Splits n as m * 2^s with m the top 53 bits, so the result is accurate to
/// f64 precision regardless of magnitude.
pub fn ln_big(n: &BigUint) -> f64 {
    assert!(!n.is_zero(), "ln of zero");
    let bits = n.bits();
    if bits <= 53 {
        return n.to_f64().unwrap().ln();
    }
    let shift = bits - 53;
    let top = (n >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Base-2 logarithm of a positive big integer.
pub fn log2_big(n: &BigUint) -> f64 {
    ln_big(n) / std::f64::consts::LN_2
}

/// Smallest q >= min_q with base^q >= n.
pub fn min_power_exponent(base: u64, n: &BigUint, min_q: u32) -> u32 {
    let base = BigUint::from(base);
    let mut q = min_q;
    let mut pow = base.pow(min_q);
    while pow < *n {
        pow *= &base;
        q += 1;
    }
    q
}

/// True when the value fits in u64 (item counts for materialized matrices).
pub fn to_u64(n: &BigUint) -> Option<u64> {
    n.to_u64()
}

/// n must be at least one (guards table formulas that take logs).
pub fn require_positive(n: &BigUint, what: &str) -> Result<()> {
    if n.is_zero() {
        return Err(Error::input(format!("{what} must be positive")));
    }
    Ok(())
}

/// Convenience: 1 as a BigUint.
pub fn one() -> BigUint {
    BigUint::one()
}
