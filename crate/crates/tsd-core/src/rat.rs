//! Exact rational scalars and small helpers shared across the crate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// The scalar type used everywhere: arbitrary-precision rationals.
pub type Q = BigRational;

/// Shorthand constructor from an integer pair; panics on zero denominator.
pub fn q(num: i64, den: i64) -> Q {
    assert!(den != 0, "zero denominator");
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Integer as a rational.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

/// Floor of a rational as a `BigInt`.
pub fn floor_int(x: &Q) -> BigInt {
    x.floor().to_integer()
}

/// Fractional part in `[0, 1)`.
pub fn fract(x: &Q) -> Q {
    x - Q::from_integer(floor_int(x))
}

/// True iff `x` is an integer.
pub fn is_integer(x: &Q) -> bool {
    x.denom().is_one()
}

/// Exact conversion to `i64` when `x` is an integer small enough; `None` otherwise.
pub fn to_i64(x: &Q) -> Option<i64> {
    if !is_integer(x) {
        return None;
    }
    x.numer().to_i64()
}

/// Ceiling of a rational as a `BigInt`.
pub fn ceil_int(x: &Q) -> BigInt {
    x.ceil().to_integer()
}

/// Canonical `"num/den"` rendering (always includes the denominator).
pub fn to_frac_string(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parse `"num/den"` or a bare integer string.
pub fn parse_frac(s: &str) -> Result<Q, String> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let num: BigInt = n
            .trim()
            .parse()
            .map_err(|e| format!("bad numerator {n:?}: {e}"))?;
        let den: BigInt = d
            .trim()
            .parse()
            .map_err(|e| format!("bad denominator {d:?}: {e}"))?;
        if den.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        Ok(Q::new(num, den))
    } else {
        let num: BigInt = s.parse().map_err(|e| format!("bad rational {s:?}: {e}"))?;
        Ok(Q::from_integer(num))
    }
}

/// Fixed-precision decimal rendering for presentation-only output (SVG).
/// Exact integer arithmetic; round-half-away-from-zero at `digits` places.
pub fn to_decimal_string(x: &Q, digits: u32) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = x * Q::from_integer(scale.clone());
    let twice = &scaled + &scaled;
    let rounded: BigInt = if scaled.is_negative() {
        -((-twice + Q::one()).floor().to_integer() / BigInt::from(2))
    } else {
        (twice + Q::one()).floor().to_integer() / BigInt::from(2)
    };
    let neg = rounded.is_negative();
    let abs = rounded.abs();
    let whole = &abs / &scale;
    let frac = &abs % &scale;
    let mut frac_s = frac.to_string();
    while (frac_s.len() as u32) < digits {
        frac_s.insert(0, '0');
    }
    if neg {
        format!("-{whole}.{frac_s}")
    } else {
        format!("{whole}.{frac_s}")
    }
}
