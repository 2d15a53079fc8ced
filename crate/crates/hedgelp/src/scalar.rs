//! Scalar abstraction shared by the float and exact solver modes, plus
//! exact decimal parsing and rendering for rationals.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Exact rational number used for all model data and LP coefficients.
pub type Rat = BigRational;

pub fn rat_int(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

pub fn rat_frac(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Numeric field the simplex is instantiated over. `f64` gives the float
/// mode with scaled tolerances, [`Rat`] gives the exact mode with zero
/// tolerances.
pub trait LpScalar:
    Clone
    + PartialEq
    + PartialOrd
    + fmt::Debug
    + fmt::Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic is exact and comparisons need no tolerance.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_rat(r: &Rat) -> Self;
    fn to_f64(&self) -> f64;
    /// Exact rational image of the value (the identity in exact mode, the
    /// binary expansion of the float otherwise).
    fn to_rat(&self) -> Rat;
    fn abs_val(&self) -> Self;
    /// Base feasibility/optimality tolerance (zero in exact mode); scaled
    /// by `1 + norm` wherever it is applied.
    fn base_eps() -> Self;

    fn is_positive_val(&self) -> bool {
        *self > Self::zero()
    }

    /// Round-trippable text form for CSV artifacts: shortest `f64` form in
    /// float mode; exact decimal when terminating, `p/q` otherwise, in
    /// exact mode.
    fn render(&self) -> String;

    /// Report form: exact values show the fraction with a decimal
    /// rendering alongside.
    fn describe(&self) -> String {
        self.render()
    }
}

impl LpScalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rat(r: &Rat) -> Self {
        ToPrimitive::to_f64(r).expect("rational out of f64 range")
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_rat(&self) -> Rat {
        Rat::from_float(*self).unwrap_or_else(|| Rat::new(0.into(), 1.into()))
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
    fn base_eps() -> Self {
        1e-9
    }
    fn render(&self) -> String {
        format!("{self}")
    }
}

impl LpScalar for Rat {
    const EXACT: bool = true;

    fn zero() -> Self {
        <Rat as Zero>::zero()
    }
    fn one() -> Self {
        <Rat as num_traits::One>::one()
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn to_rat(&self) -> Rat {
        self.clone()
    }
    fn abs_val(&self) -> Self {
        Signed::abs(self)
    }
    fn base_eps() -> Self {
        <Rat as Zero>::zero()
    }
    fn render(&self) -> String {
        rat_render(self)
    }
    fn describe(&self) -> String {
        if self.is_integer() {
            self.to_integer().to_string()
        } else {
            format!("{self} (= {})", rat_to_decimal(self, 14))
        }
    }
}

/// Exact decimal form when the expansion terminates (denominator has only
/// factors 2 and 5), `p/q` otherwise.
pub fn rat_render(r: &Rat) -> String {
    let mut den = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut digits = 0usize;
    while (&den % &two).is_zero() {
        den /= &two;
        digits += 1;
    }
    let mut fives = 0usize;
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if den == BigInt::from(1) {
        rat_to_decimal(r, digits.max(fives))
    } else {
        format!("{r}")
    }
}

/// Parses either a decimal literal or a `p/q` fraction.
pub fn rat_from_str(s: &str) -> Result<Rat, DecimalParseError> {
    let t = s.trim();
    if let Some(pos) = t.find('/') {
        let num: BigInt = t[..pos].trim().parse().map_err(|_| DecimalParseError(s.to_owned()))?;
        let den: BigInt = t[pos + 1..].trim().parse().map_err(|_| DecimalParseError(s.to_owned()))?;
        if den.is_zero() {
            return Err(DecimalParseError(s.to_owned()));
        }
        return Ok(Rat::new(num, den));
    }
    rat_from_decimal(t)
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("not a decimal number: {0:?}")]
pub struct DecimalParseError(pub String);

/// Parses a decimal literal (optionally signed, optionally with a fraction
/// part and a base-10 exponent) into an exact rational. `0.1` becomes
/// exactly 1/10, unlike a round trip through `f64`.
pub fn rat_from_decimal(s: &str) -> Result<Rat, DecimalParseError> {
    let err = || DecimalParseError(s.to_owned());
    let t = s.trim();
    if t.is_empty() {
        return Err(err());
    }
    let (t, sign) = match t.as_bytes()[0] {
        b'-' => (&t[1..], -1i64),
        b'+' => (&t[1..], 1),
        _ => (t, 1),
    };
    let (mantissa, exp10) = match t.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = t[pos + 1..].parse().map_err(|_| err())?;
            (&t[..pos], e)
        }
        None => (t, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = digits.parse().map_err(|_| err())?;
    let shift = exp10 - frac_part.len() as i64;
    // 10^|shift| is materialized below; refuse absurd exponents
    if shift.unsigned_abs() > 65_536 {
        return Err(err());
    }
    let ten = BigInt::from(10);
    let scale = num_traits::pow(ten, shift.unsigned_abs() as usize);
    let r = if shift >= 0 {
        Rat::from_integer(num * scale)
    } else {
        Rat::new(num, scale)
    };
    Ok(if sign < 0 { -r } else { r })
}

/// Renders a rational as a decimal string: exact when the expansion
/// terminates within `max_digits` fraction digits, otherwise rounded to
/// that many digits. Deterministic for identical inputs.
pub fn rat_to_decimal(r: &Rat, max_digits: usize) -> String {
    if r.is_zero() {
        return "0".to_owned();
    }
    let neg = r < &<Rat as Zero>::zero();
    let a = Signed::abs(r);
    let int = a.to_integer();
    let mut rem = a.fract();
    let mut frac = String::new();
    let ten = BigInt::from(10);
    for _ in 0..max_digits {
        if rem.is_zero() {
            break;
        }
        rem *= Rat::from_integer(ten.clone());
        let d = rem.to_integer();
        frac.push_str(&d.to_string());
        rem = rem.fract();
    }
    if !rem.is_zero() {
        // round the last digit
        let half = rat_frac(1, 2);
        if rem >= half {
            // propagate carry through the digit string
            let mut digits: Vec<u8> = frac.bytes().map(|b| b - b'0').collect();
            let mut i = digits.len();
            let mut carry = true;
            while carry && i > 0 {
                i -= 1;
                if digits[i] == 9 {
                    digits[i] = 0;
                } else {
                    digits[i] += 1;
                    carry = false;
                }
            }
            frac = digits.iter().map(|d| (d + b'0') as char).collect();
            if carry {
                let int = int + BigInt::from(1);
                while frac.ends_with('0') {
                    frac.pop();
                }
                let out = if frac.is_empty() { int.to_string() } else { format!("{int}.{frac}") };
                return if neg { format!("-{out}") } else { out };
            }
        }
    }
    while frac.ends_with('0') {
        frac.pop();
    }
    let out = if frac.is_empty() { int.to_string() } else { format!("{int}.{frac}") };
    if neg {
        format!("-{out}")
    } else {
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_parse_exact() {
        assert_eq!(rat_from_decimal("0.1").unwrap(), rat_frac(1, 10));
        assert_eq!(rat_from_decimal("-2.5").unwrap(), rat_frac(-5, 2));
        assert_eq!(rat_from_decimal("1e-3").unwrap(), rat_frac(1, 1000));
        assert_eq!(rat_from_decimal("2.5e2").unwrap(), rat_int(250));
        assert_eq!(rat_from_decimal("7").unwrap(), rat_int(7));
        assert_eq!(rat_from_decimal(".5").unwrap(), rat_frac(1, 2));
        assert!(rat_from_decimal("").is_err());
        assert!(rat_from_decimal("1.2.3").is_err());
        assert!(rat_from_decimal("abc").is_err());
        assert!(rat_from_decimal(".").is_err());
    }

    #[test]
    fn decimal_render() {
        assert_eq!(rat_to_decimal(&rat_frac(1, 4), 12), "0.25");
        assert_eq!(rat_to_decimal(&rat_frac(-3, 2), 12), "-1.5");
        assert_eq!(rat_to_decimal(&rat_int(0), 12), "0");
        assert_eq!(rat_to_decimal(&rat_frac(1, 3), 4), "0.3333");
        assert_eq!(rat_to_decimal(&rat_frac(2, 3), 4), "0.6667");
    }

    #[test]
    fn decimal_render_carry() {
        // 0.99996 rounded to 4 digits carries through to 1
        let r = rat_from_decimal("0.99996").unwrap();
        assert_eq!(rat_to_decimal(&r, 4), "1");
    }
}
