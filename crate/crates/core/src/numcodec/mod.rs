//! Rounded real numbers and their token encodings.
//!
//! A coefficient is first rounded to a [`FloatTriplet`] `(sign, mantissa,
//! exponent)` with a fixed number of significant digits, then spelled as
//! tokens by an [`EncodingScheme`]:
//!
//! | scheme | 3.14                | -6.02e7         |
//! |--------|---------------------|-----------------|
//! | P10    | `+ 3 1 4 E-2`       | `- 6 0 2 E5`    |
//! | P1000  | `+ 314 E-2`         | `- 602 E5`      |
//! | B1999  | `314 E-2`           | `-602 E5`       |
//! | FP15   | `FP314/-2`          | `FP-602/5`      |

mod scheme;
mod triplet;
mod vocab;

use thiserror::Error;

pub use scheme::{EncodingScheme, SchemeKind, SIGN_MINUS, SIGN_PLUS};
pub use triplet::{
    mantissa_bounds, round_to_triplet, round_to_triplet_in, round_value, triplet_to_value,
    FloatTriplet, DEFAULT_DIGITS, EXP_MAX, EXP_MIN,
};
pub use vocab::{dim_token, Vocabulary};

/// A number that cannot be rounded or encoded.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("cannot encode non-finite value {0}")]
    NonFinite(f64),
    #[error("exponent {exponent} outside {min}..={max}")]
    Overflow { exponent: i32, min: i32, max: i32 },
    #[error("exponent {exponent} outside the float-token dynamic range ±{bound}")]
    Range { exponent: i32, bound: i32 },
    #[error("mantissa {mantissa} does not have {digits} significant digits")]
    Precision { mantissa: u32, digits: u32 },
    #[error("invalid triplet: {0}")]
    InvalidTriplet(String),
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
}

/// Why a token sequence could not be parsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Arity { expected: usize, got: usize },
    UnknownToken(String),
    DigitOutOfBase { digit: i64, base: i64 },
    NonCanonical(String),
    MissingDimensions,
    ElementCount { expected: usize, got: usize },
    TrailingTokens(usize),
    Shape(String),
}

/// A malformed token sequence, with the offending token position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at token {position}: {kind:?}")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub fn new(position: usize, kind: ParseErrorKind) -> Self {
        ParseError { position, kind }
    }

    pub(crate) fn unknown(position: usize, tok: &str) -> Self {
        ParseError::new(position, ParseErrorKind::UnknownToken(tok.to_string()))
    }

    /// Shift the position by `offset` (when decoding a sub-slice).
    pub fn offset(mut self, offset: usize) -> Self {
        self.position += offset;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn schemes() -> impl Strategy<Value = EncodingScheme> {
        prop_oneof![
            Just(EncodingScheme::P10),
            Just(EncodingScheme::P100),
            Just(EncodingScheme::P1000),
            Just(EncodingScheme::P10000),
            Just(EncodingScheme::B1999),
            Just(EncodingScheme::FP15),
            Just("b11".parse().unwrap()),
            Just("p2".parse().unwrap()),
            Just("p7:d2".parse().unwrap()),
        ]
    }

    fn triplet_for(s: EncodingScheme) -> impl Strategy<Value = FloatTriplet> {
        let (lo, hi) = mantissa_bounds(s.precision);
        let (elo, ehi) = s.exponent_range();
        prop_oneof![
            1 => Just(FloatTriplet::ZERO),
            20 => (prop::bool::ANY, lo..=hi, elo..=ehi).prop_map(move |(neg, m, e)| {
                FloatTriplet::new(if neg { -1 } else { 1 }, m, e, s.precision).unwrap()
            }),
        ]
    }

    proptest! {
        #[test]
        fn decode_inverts_encode((s, t) in schemes().prop_flat_map(|s| (Just(s), triplet_for(s)))) {
            let toks = s.encode(&t).unwrap();
            prop_assert_eq!(toks.len(), s.arity());
            prop_assert_eq!(s.decode(&toks).unwrap(), t);
            let vocab = Vocabulary::build(&s, 0, &[] as &[&str]);
            for tok in &toks {
                prop_assert!(vocab.contains(tok), "{} missing from {}", tok, s);
            }
        }

        #[test]
        fn rounding_is_idempotent(x in -1e6f64..1e6, d in 2u32..=4) {
            let t = round_to_triplet(x, d).unwrap();
            prop_assert_eq!(round_to_triplet(triplet_to_value(&t), d).unwrap(), t);
        }

        #[test]
        fn rounding_error_is_half_unit(x in prop::num::f64::NORMAL.prop_filter("in range", |x| x.abs() > 1e-90 && x.abs() < 1e90)) {
            let t = round_to_triplet(x, 3).unwrap();
            let rel = (triplet_to_value(&t) - x).abs() / x.abs();
            prop_assert!(rel <= 0.005 * (1.0 + 1e-12));
        }
    }
}
