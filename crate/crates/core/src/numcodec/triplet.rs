use std::fmt;

use super::CodecError;

/// Default exponent range of every scheme.
pub const EXP_MIN: i32 = -100;
pub const EXP_MAX: i32 = 100;

/// Default number of significant digits.
pub const DEFAULT_DIGITS: u32 = 3;

/// A rounded real number `sign * mantissa * 10^exponent`.
///
/// Non-zero mantissas have exactly `d` decimal digits for the precision `d`
/// they were rounded to. Zero is always `(+1, 0, 0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FloatTriplet {
    sign: i8,
    mantissa: u32,
    exponent: i32,
}

impl FloatTriplet {
    pub const ZERO: FloatTriplet = FloatTriplet {
        sign: 1,
        mantissa: 0,
        exponent: 0,
    };

    /// Checked constructor for precision `digits`.
    pub fn new(sign: i8, mantissa: u32, exponent: i32, digits: u32) -> Result<Self, CodecError> {
        if sign != 1 && sign != -1 {
            return Err(CodecError::InvalidTriplet(format!("sign must be +1 or -1, got {sign}")));
        }
        if mantissa == 0 {
            if sign != 1 || exponent != 0 {
                return Err(CodecError::InvalidTriplet(
                    "zero must be encoded as (+1, 0, 0)".into(),
                ));
            }
            return Ok(Self::ZERO);
        }
        let (lo, hi) = mantissa_bounds(digits);
        if mantissa < lo || mantissa > hi {
            return Err(CodecError::Precision { mantissa, digits });
        }
        if !(EXP_MIN..=EXP_MAX).contains(&exponent) {
            return Err(CodecError::Overflow {
                exponent,
                min: EXP_MIN,
                max: EXP_MAX,
            });
        }
        Ok(FloatTriplet {
            sign,
            mantissa,
            exponent,
        })
    }

    /// Unchecked constructor for codec internals that already validated.
    pub(crate) fn from_parts(sign: i8, mantissa: u32, exponent: i32) -> Self {
        if mantissa == 0 {
            Self::ZERO
        } else {
            FloatTriplet {
                sign,
                mantissa,
                exponent,
            }
        }
    }

    #[inline]
    pub fn sign(&self) -> i8 {
        self.sign
    }

    #[inline]
    pub fn mantissa(&self) -> u32 {
        self.mantissa
    }

    #[inline]
    pub fn exponent(&self) -> i32 {
        self.exponent
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.mantissa == 0
    }

    /// `sign * mantissa` as a signed integer.
    #[inline]
    pub fn signed_mantissa(&self) -> i64 {
        self.sign as i64 * self.mantissa as i64
    }

    /// Number of decimal digits in the mantissa (0 for zero).
    pub fn digits(&self) -> u32 {
        if self.mantissa == 0 {
            0
        } else {
            self.mantissa.ilog10() + 1
        }
    }

    /// The nearest `f64` to `sign * mantissa * 10^exponent`.
    pub fn to_f64(&self) -> f64 {
        triplet_to_value(self)
    }
}

impl fmt::Display for FloatTriplet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}e{}", self.signed_mantissa(), self.exponent)
    }
}

/// Inclusive mantissa range `[10^(d-1), 10^d - 1]`.
pub fn mantissa_bounds(digits: u32) -> (u32, u32) {
    (10u32.pow(digits - 1), 10u32.pow(digits) - 1)
}

/// Round `x` to `digits` significant decimal digits.
///
/// Rounding is half-away-from-zero on the shortest decimal string that
/// round-trips `x`, so `0.125` rounds to `0.13` at two digits even though the
/// binary value is exact. A carry past `10^d - 1` moves into the exponent.
pub fn round_to_triplet(x: f64, digits: u32) -> Result<FloatTriplet, CodecError> {
    round_to_triplet_in(x, digits, EXP_MIN, EXP_MAX)
}

/// [`round_to_triplet`] with an explicit exponent range.
pub fn round_to_triplet_in(
    x: f64,
    digits: u32,
    exp_min: i32,
    exp_max: i32,
) -> Result<FloatTriplet, CodecError> {
    if !x.is_finite() {
        return Err(CodecError::NonFinite(x));
    }
    if !(1..=9).contains(&digits) {
        return Err(CodecError::InvalidScheme(format!(
            "precision must be between 1 and 9 digits, got {digits}"
        )));
    }
    if x == 0.0 {
        return Ok(FloatTriplet::ZERO);
    }
    let sign: i8 = if x < 0.0 { -1 } else { 1 };
    let repr = format!("{:e}", x.abs());
    let (mant_str, exp_str) = repr.split_once('e').expect("LowerExp always has an exponent");
    let sci_exp: i32 = exp_str.parse().expect("LowerExp exponent is an integer");
    let decimal: Vec<u8> = mant_str
        .bytes()
        .filter(u8::is_ascii_digit)
        .map(|b| b - b'0')
        .collect();

    let d = digits as usize;
    let mut mantissa: u64 = 0;
    for i in 0..d {
        mantissa = mantissa * 10 + decimal.get(i).copied().unwrap_or(0) as u64;
    }
    let mut exponent = sci_exp - (digits as i32 - 1);
    if decimal.get(d).is_some_and(|&next| next >= 5) {
        mantissa += 1;
        if mantissa == 10u64.pow(digits) {
            mantissa = 10u64.pow(digits - 1);
            exponent += 1;
        }
    }
    if exponent < exp_min || exponent > exp_max {
        return Err(CodecError::Overflow {
            exponent,
            min: exp_min,
            max: exp_max,
        });
    }
    Ok(FloatTriplet {
        sign,
        mantissa: mantissa as u32,
        exponent,
    })
}

/// `sign * mantissa * 10^exponent`, correctly rounded to `f64`.
pub fn triplet_to_value(t: &FloatTriplet) -> f64 {
    if t.is_zero() {
        return 0.0;
    }
    format!("{}e{}", t.signed_mantissa(), t.exponent)
        .parse()
        .expect("decimal literal parses")
}

/// Round a value to `digits` significant digits and return it as `f64`.
pub fn round_value(x: f64, digits: u32) -> Result<f64, CodecError> {
    round_to_triplet(x, digits).map(|t| t.to_f64())
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;

    fn t(sign: i8, m: u32, e: i32) -> FloatTriplet {
        FloatTriplet::new(sign, m, e, 3).unwrap()
    }

    #[test]
    fn worked_examples() {
        assert_eq!(round_to_triplet(23.14069, 3).unwrap(), t(1, 231, -1));
        assert_eq!(round_to_triplet(-0.5, 3).unwrap(), t(-1, 500, -3));
        assert_eq!(round_to_triplet(0.0, 3).unwrap(), FloatTriplet::ZERO);
        assert_eq!(round_to_triplet(-0.0, 3).unwrap(), FloatTriplet::ZERO);
        assert_eq!(round_to_triplet(3.14, 3).unwrap(), t(1, 314, -2));
        assert_eq!(round_to_triplet(-6.02e23, 3).unwrap(), t(-1, 602, 21));
    }

    #[test]
    fn carry_into_exponent() {
        assert_eq!(round_to_triplet(999.96, 3).unwrap(), t(1, 100, 1));
        assert_eq!(round_to_triplet(-9.9951, 3).unwrap(), t(-1, 100, -1));
        assert_eq!(round_to_triplet(999.4, 3).unwrap(), t(1, 999, 0));
    }

    #[test]
    fn half_away_from_zero_on_decimal_string() {
        assert_eq!(round_to_triplet(0.125, 2).unwrap().mantissa(), 13);
        assert_eq!(round_to_triplet(-0.125, 2).unwrap().signed_mantissa(), -13);
        // 2.675 is stored as 2.67499999..., but its shortest decimal is "2.675".
        assert_eq!(round_to_triplet(2.675, 3).unwrap(), t(1, 268, -2));
        assert_eq!(round_to_triplet(1.0, 4).unwrap(), FloatTriplet::new(1, 1000, -3, 4).unwrap());
    }

    #[test]
    fn exponent_clamp_is_an_error() {
        assert!(matches!(
            round_to_triplet(1e200, 3),
            Err(CodecError::Overflow { exponent: 198, .. })
        ));
        assert!(matches!(
            round_to_triplet(1e-150, 3),
            Err(CodecError::Overflow { .. })
        ));
        assert!(round_to_triplet(9.99e102, 3).is_ok());
        assert!(round_to_triplet(1e-98, 3).is_ok());
        assert!(matches!(
            round_to_triplet(f64::INFINITY, 3),
            Err(CodecError::NonFinite(_))
        ));
    }

    #[test]
    fn values() {
        assert_eq!(triplet_to_value(&t(1, 314, -2)), 3.14);
        assert_eq!(triplet_to_value(&FloatTriplet::ZERO), 0.0);
        assert_eq!(triplet_to_value(&t(-1, 602, 21)), -6.02e23);
    }

    #[test]
    fn constructor_invariants() {
        assert!(FloatTriplet::new(-1, 0, 0, 3).is_err());
        assert!(FloatTriplet::new(1, 0, 4, 3).is_err());
        assert!(FloatTriplet::new(1, 99, 0, 3).is_err());
        assert!(FloatTriplet::new(1, 1000, 0, 3).is_err());
        assert!(FloatTriplet::new(1, 100, 101, 3).is_err());
        assert!(FloatTriplet::new(0, 100, 0, 3).is_err());
        assert_eq!(t(-1, 602, 21).digits(), 3);
    }
}
