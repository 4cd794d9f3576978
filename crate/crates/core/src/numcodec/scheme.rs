use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::triplet::{mantissa_bounds, round_to_triplet_in, FloatTriplet, EXP_MAX, EXP_MIN};
use super::{CodecError, ParseError, ParseErrorKind};

/// Token family of a coefficient encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchemeKind {
    /// Sign token, mantissa digits in base `base`, exponent token.
    Positional { base: u32 },
    /// Signed mantissa in balanced base `2a + 1` (digits in `[-a, a]`),
    /// exponent token.
    Balanced { a: u32 },
    /// One `FPm/b` token per number, `|b| <= (p + 2) / 2`.
    FloatToken { p: u32 },
}

/// A parameterized coefficient codec.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EncodingScheme {
    pub kind: SchemeKind,
    pub precision: u32,
    pub exp_min: i32,
    pub exp_max: i32,
}

pub const SIGN_PLUS: &str = "+";
pub const SIGN_MINUS: &str = "-";

impl EncodingScheme {
    pub const P10: EncodingScheme = Self::preset(SchemeKind::Positional { base: 10 }, 3);
    pub const P100: EncodingScheme = Self::preset(SchemeKind::Positional { base: 100 }, 2);
    pub const P1000: EncodingScheme = Self::preset(SchemeKind::Positional { base: 1000 }, 3);
    pub const P10000: EncodingScheme = Self::preset(SchemeKind::Positional { base: 10000 }, 4);
    pub const B1999: EncodingScheme = Self::preset(SchemeKind::Balanced { a: 999 }, 3);
    pub const FP15: EncodingScheme = Self::preset(SchemeKind::FloatToken { p: 14 }, 3);

    pub const PRESETS: [(&'static str, EncodingScheme); 6] = [
        ("p10", Self::P10),
        ("p100", Self::P100),
        ("p1000", Self::P1000),
        ("p10000", Self::P10000),
        ("b1999", Self::B1999),
        ("fp15", Self::FP15),
    ];

    const fn preset(kind: SchemeKind, precision: u32) -> Self {
        EncodingScheme {
            kind,
            precision,
            exp_min: EXP_MIN,
            exp_max: EXP_MAX,
        }
    }

    /// Validated constructor with the default exponent range.
    pub fn new(kind: SchemeKind, precision: u32) -> Result<Self, CodecError> {
        let s = Self::preset(kind, precision);
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), CodecError> {
        let bad = |msg: String| Err(CodecError::InvalidScheme(msg));
        if !(2..=4).contains(&self.precision) {
            return bad(format!("precision must be 2..=4 digits, got {}", self.precision));
        }
        if self.exp_min > self.exp_max || self.exp_min < EXP_MIN || self.exp_max > EXP_MAX {
            return bad(format!(
                "exponent range {}..={} must lie within {EXP_MIN}..={EXP_MAX}",
                self.exp_min, self.exp_max
            ));
        }
        match self.kind {
            SchemeKind::Positional { base } if base < 2 => bad(format!("base must be >= 2, got {base}")),
            SchemeKind::Balanced { a } if a < 1 => bad("balanced base needs a >= 1".into()),
            SchemeKind::FloatToken { p } if p % 2 != 0 => bad(format!("p must be even, got {p}")),
            _ => Ok(()),
        }
    }

    /// Number of mantissa digit tokens (positional and balanced schemes).
    pub fn mantissa_width(&self) -> usize {
        let max_mantissa = 10u64.pow(self.precision) - 1;
        match self.kind {
            SchemeKind::Positional { base } => {
                let (mut w, mut cap) = (1usize, base as u64);
                while cap <= max_mantissa {
                    cap = cap.saturating_mul(base as u64);
                    w += 1;
                }
                w
            }
            SchemeKind::Balanced { a } => {
                let radix = 2 * a as u64 + 1;
                let (mut w, mut cap) = (1usize, radix);
                // largest magnitude on w digits is (radix^w - 1) / 2
                while (cap - 1) / 2 < max_mantissa {
                    cap = cap.saturating_mul(radix);
                    w += 1;
                }
                w
            }
            SchemeKind::FloatToken { .. } => 0,
        }
    }

    /// Tokens per coefficient.
    pub fn arity(&self) -> usize {
        match self.kind {
            SchemeKind::Positional { .. } => self.mantissa_width() + 2,
            SchemeKind::Balanced { .. } => self.mantissa_width() + 1,
            SchemeKind::FloatToken { .. } => 1,
        }
    }

    /// Effective exponent range (narrowed to `±(p+2)/2` for float tokens).
    pub fn exponent_range(&self) -> (i32, i32) {
        match self.kind {
            SchemeKind::FloatToken { p } => {
                let b = (p as i32 + 2) / 2;
                (self.exp_min.max(-b), self.exp_max.min(b))
            }
            _ => (self.exp_min, self.exp_max),
        }
    }

    /// Round `x` to this scheme's precision and the default exponent range.
    /// Dynamic-range limits of float tokens are reported by [`encode`](Self::encode).
    pub fn round(&self, x: f64) -> Result<FloatTriplet, CodecError> {
        round_to_triplet_in(x, self.precision, self.exp_min, self.exp_max)
    }

    /// Round `x` and encode it.
    pub fn encode_value(&self, x: f64) -> Result<Vec<String>, CodecError> {
        self.encode(&self.round(x)?)
    }

    pub fn encode(&self, t: &FloatTriplet) -> Result<Vec<String>, CodecError> {
        let mut out = Vec::with_capacity(self.arity());
        self.encode_into(t, &mut out)?;
        Ok(out)
    }

    /// Append the tokens for `t` to `out`. On error `out` is left unchanged.
    pub fn encode_into(&self, t: &FloatTriplet, out: &mut Vec<String>) -> Result<(), CodecError> {
        self.check_representable(t)?;
        match self.kind {
            SchemeKind::Positional { base } => {
                out.push(if t.sign() < 0 { SIGN_MINUS } else { SIGN_PLUS }.to_string());
                let w = self.mantissa_width();
                let start = out.len();
                out.resize(start + w, String::new());
                let mut m = t.mantissa() as u64;
                for slot in out[start..].iter_mut().rev() {
                    *slot = (m % base as u64).to_string();
                    m /= base as u64;
                }
                out.push(exponent_token(t.exponent()));
            }
            SchemeKind::Balanced { a } => {
                let radix = 2 * a as i64 + 1;
                let w = self.mantissa_width();
                let start = out.len();
                out.resize(start + w, String::new());
                let mut v = t.signed_mantissa();
                for slot in out[start..].iter_mut().rev() {
                    let mut r = v.rem_euclid(radix);
                    if r > a as i64 {
                        r -= radix;
                    }
                    *slot = r.to_string();
                    v = (v - r) / radix;
                }
                out.push(exponent_token(t.exponent()));
            }
            SchemeKind::FloatToken { .. } => {
                out.push(format!("FP{}/{}", t.signed_mantissa(), t.exponent()));
            }
        }
        Ok(())
    }

    fn check_representable(&self, t: &FloatTriplet) -> Result<(), CodecError> {
        if t.is_zero() {
            return Ok(());
        }
        let (lo, hi) = mantissa_bounds(self.precision);
        if t.mantissa() < lo || t.mantissa() > hi {
            return Err(CodecError::Precision {
                mantissa: t.mantissa(),
                digits: self.precision,
            });
        }
        if t.exponent() < self.exp_min || t.exponent() > self.exp_max {
            return Err(CodecError::Overflow {
                exponent: t.exponent(),
                min: self.exp_min,
                max: self.exp_max,
            });
        }
        if let SchemeKind::FloatToken { p } = self.kind {
            let bound = (p as i32 + 2) / 2;
            if t.exponent().abs() > bound {
                return Err(CodecError::Range {
                    exponent: t.exponent(),
                    bound,
                });
            }
        }
        Ok(())
    }

    /// Decode exactly [`arity`](Self::arity) tokens. Error positions are
    /// relative to the start of `toks`.
    pub fn decode<S: AsRef<str>>(&self, toks: &[S]) -> Result<FloatTriplet, ParseError> {
        let arity = self.arity();
        if toks.len() != arity {
            return Err(ParseError::new(
                toks.len().min(arity),
                ParseErrorKind::Arity {
                    expected: arity,
                    got: toks.len(),
                },
            ));
        }
        match self.kind {
            SchemeKind::Positional { base } => {
                let sign: i8 = match toks[0].as_ref() {
                    SIGN_PLUS => 1,
                    SIGN_MINUS => -1,
                    other => return Err(ParseError::unknown(0, other)),
                };
                let w = self.mantissa_width();
                let mut m: u64 = 0;
                for (i, tok) in toks[1..=w].iter().enumerate() {
                    let tok = tok.as_ref();
                    let digit = parse_canonical_u64(tok).ok_or_else(|| ParseError::unknown(i + 1, tok))?;
                    if digit >= base as u64 {
                        return Err(ParseError::new(
                            i + 1,
                            ParseErrorKind::DigitOutOfBase {
                                digit: digit as i64,
                                base: base as i64,
                            },
                        ));
                    }
                    m = m.saturating_mul(base as u64).saturating_add(digit);
                }
                let e = self.parse_exponent(toks[w + 1].as_ref(), w + 1)?;
                self.finish(sign, m, e, 1)
            }
            SchemeKind::Balanced { a } => {
                let radix = 2 * a as i64 + 1;
                let w = self.mantissa_width();
                let mut v: i64 = 0;
                for (i, tok) in toks[..w].iter().enumerate() {
                    let tok = tok.as_ref();
                    let digit = parse_canonical_i64(tok).ok_or_else(|| ParseError::unknown(i, tok))?;
                    if digit.abs() > a as i64 {
                        return Err(ParseError::new(
                            i,
                            ParseErrorKind::DigitOutOfBase { digit, base: radix },
                        ));
                    }
                    v = v.saturating_mul(radix).saturating_add(digit);
                }
                let e = self.parse_exponent(toks[w].as_ref(), w)?;
                let sign = if v < 0 { -1 } else { 1 };
                self.finish(sign, v.unsigned_abs(), e, 0)
            }
            SchemeKind::FloatToken { .. } => {
                let tok = toks[0].as_ref();
                let (m, b) = tok
                    .strip_prefix("FP")
                    .and_then(|rest| rest.split_once('/'))
                    .and_then(|(m, b)| Some((parse_canonical_i64(m)?, parse_canonical_i64(b)?)))
                    .ok_or_else(|| ParseError::unknown(0, tok))?;
                let (lo, hi) = self.exponent_range();
                if b < lo as i64 || b > hi as i64 {
                    return Err(ParseError::unknown(0, tok));
                }
                let sign = if m < 0 { -1 } else { 1 };
                self.finish(sign, m.unsigned_abs(), b as i32, 0)
            }
        }
    }

    fn parse_exponent(&self, tok: &str, pos: usize) -> Result<i32, ParseError> {
        tok.strip_prefix('E')
            .and_then(parse_canonical_i64)
            .filter(|e| (self.exp_min as i64..=self.exp_max as i64).contains(e))
            .map(|e| e as i32)
            .ok_or_else(|| ParseError::unknown(pos, tok))
    }

    /// Zero mantissas decode to zero whatever the sign or exponent; non-zero
    /// mantissas must have exactly `precision` digits.
    fn finish(&self, sign: i8, mantissa: u64, exponent: i32, pos: usize) -> Result<FloatTriplet, ParseError> {
        if mantissa == 0 {
            return Ok(FloatTriplet::ZERO);
        }
        let (lo, hi) = mantissa_bounds(self.precision);
        if mantissa < lo as u64 || mantissa > hi as u64 {
            return Err(ParseError::new(
                pos,
                ParseErrorKind::NonCanonical(format!(
                    "mantissa {mantissa} does not have {} significant digits",
                    self.precision
                )),
            ));
        }
        Ok(FloatTriplet::from_parts(sign, mantissa as u32, exponent))
    }

    /// Canonical name: the preset name when one matches, otherwise
    /// `p<base>`, `b<2a+1>` or `fp<p+1>`, suffixed with `:d<precision>`.
    pub fn name(&self) -> String {
        if let Some((name, _)) = Self::PRESETS.iter().find(|(_, s)| s == self) {
            return (*name).to_string();
        }
        let stem = match self.kind {
            SchemeKind::Positional { base } => format!("p{base}"),
            SchemeKind::Balanced { a } => format!("b{}", 2 * a + 1),
            SchemeKind::FloatToken { p } => format!("fp{}", p + 1),
        };
        let mut name = format!("{stem}:d{}", self.precision);
        if (self.exp_min, self.exp_max) != (EXP_MIN, EXP_MAX) {
            name.push_str(&format!(":e{}..{}", self.exp_min, self.exp_max));
        }
        name
    }
}

impl fmt::Display for EncodingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for EncodingScheme {
    type Err = CodecError;

    /// Accepts preset names (`p10`, `p100`, `p1000`, `p10000`, `b1999`,
    /// `fp15`) and generic forms `p<B>`, `b<2a+1>`, `fp<p+1>` with optional
    /// `:d<digits>` and `:e<min>..<max>` suffixes.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let mut parts = lower.split(':');
        let stem = parts.next().unwrap_or_default();
        let invalid = || CodecError::InvalidScheme(format!("cannot parse scheme `{s}`"));

        let mut scheme = if let Some((_, preset)) = Self::PRESETS.iter().find(|(n, _)| *n == stem) {
            *preset
        } else if let Some(rest) = stem.strip_prefix("fp") {
            let n: u32 = rest.parse().map_err(|_| invalid())?;
            Self::preset(SchemeKind::FloatToken { p: n.checked_sub(1).ok_or_else(invalid)? }, 3)
        } else if let Some(rest) = stem.strip_prefix('p') {
            Self::preset(SchemeKind::Positional { base: rest.parse().map_err(|_| invalid())? }, 3)
        } else if let Some(rest) = stem.strip_prefix('b') {
            let radix: u32 = rest.parse().map_err(|_| invalid())?;
            if radix < 3 || radix.is_multiple_of(2) {
                return Err(CodecError::InvalidScheme(format!(
                    "balanced base must be odd and >= 3, got {radix}"
                )));
            }
            Self::preset(SchemeKind::Balanced { a: (radix - 1) / 2 }, 3)
        } else {
            return Err(invalid());
        };

        for part in parts {
            if let Some(d) = part.strip_prefix('d') {
                scheme.precision = d.parse().map_err(|_| invalid())?;
            } else if let Some(range) = part.strip_prefix('e') {
                let (lo, hi) = range.split_once("..").ok_or_else(invalid)?;
                scheme.exp_min = lo.parse().map_err(|_| invalid())?;
                scheme.exp_max = hi.parse().map_err(|_| invalid())?;
            } else {
                return Err(invalid());
            }
        }
        scheme.validate()?;
        Ok(scheme)
    }
}

pub(crate) fn exponent_token(e: i32) -> String {
    format!("E{e}")
}

fn parse_canonical_u64(tok: &str) -> Option<u64> {
    let v: u64 = tok.parse().ok()?;
    (v.to_string() == tok).then_some(v)
}

fn parse_canonical_i64(tok: &str) -> Option<i64> {
    let v: i64 = tok.parse().ok()?;
    (v.to_string() == tok).then_some(v)
}
