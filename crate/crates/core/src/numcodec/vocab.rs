use std::collections::HashMap;
use std::io::{self, Write};

use sha2::{Digest, Sha256};

use super::scheme::{exponent_token, EncodingScheme, SchemeKind, SIGN_MINUS, SIGN_PLUS};
use super::triplet::mantissa_bounds;

/// Dimension token for a matrix side of length `n` (`V5`).
pub fn dim_token(n: usize) -> String {
    format!("V{n}")
}

/// Ordered, duplicate-free token list with its inverse index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    number_tokens: usize,
}

impl Vocabulary {
    /// Canonical vocabulary for `scheme`: every number token the scheme can
    /// emit, then `V1..V{max_dim}`, then `task_tokens` in the given order.
    ///
    /// Number tokens are ordered as signs, mantissa tokens, exponents for
    /// positional schemes; mantissa tokens then exponents for balanced
    /// schemes; and `FP0/0` followed by `FPm/b` grouped by exponent for
    /// float tokens.
    pub fn build<S: AsRef<str>>(scheme: &EncodingScheme, max_dim: usize, task_tokens: &[S]) -> Self {
        let mut v = Vocabulary {
            tokens: Vec::new(),
            index: HashMap::new(),
            number_tokens: 0,
        };
        for tok in number_tokens(scheme) {
            v.push(tok);
        }
        v.number_tokens = v.tokens.len();
        for n in 1..=max_dim {
            v.push(dim_token(n));
        }
        for t in task_tokens {
            v.push(t.as_ref().to_string());
        }
        v
    }

    fn push(&mut self, tok: String) {
        if !self.index.contains_key(&tok) {
            self.index.insert(tok.clone(), self.tokens.len());
            self.tokens.push(tok);
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Count of number tokens (excluding dimension and task tokens).
    pub fn number_token_count(&self) -> usize {
        self.number_tokens
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    /// One token per line; the line number (from 0) is the token id.
    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        for t in &self.tokens {
            writeln!(w, "{t}")?;
        }
        Ok(())
    }

    /// Hex SHA-256 of the exported token file.
    pub fn sha256(&self) -> String {
        let mut hasher = Sha256::new();
        for t in &self.tokens {
            hasher.update(t.as_bytes());
            hasher.update(b"\n");
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn number_tokens(scheme: &EncodingScheme) -> Vec<String> {
    let (lo, hi) = mantissa_bounds(scheme.precision);
    let (exp_lo, exp_hi) = scheme.exponent_range();
    let exponents = || (exp_lo..=exp_hi).map(exponent_token);
    let single_token_mantissa = scheme.mantissa_width() == 1;
    let mut out = Vec::new();
    match scheme.kind {
        SchemeKind::Positional { base } => {
            out.push(SIGN_PLUS.to_string());
            out.push(SIGN_MINUS.to_string());
            if single_token_mantissa {
                out.push("0".to_string());
                out.extend((lo..=hi).map(|m| m.to_string()));
            } else {
                out.extend((0..base).map(|d| d.to_string()));
            }
            out.extend(exponents());
        }
        SchemeKind::Balanced { a } => {
            if single_token_mantissa {
                out.extend((lo..=hi).rev().map(|m| format!("-{m}")));
                out.push("0".to_string());
                out.extend((lo..=hi).map(|m| m.to_string()));
            } else {
                out.extend((-(a as i64)..=a as i64).map(|d| d.to_string()));
            }
            out.extend(exponents());
        }
        SchemeKind::FloatToken { .. } => {
            out.push("FP0/0".to_string());
            for b in exp_lo..=exp_hi {
                for m in (lo..=hi).rev() {
                    out.push(format!("FP-{m}/{b}"));
                }
                for m in lo..=hi {
                    out.push(format!("FP{m}/{b}"));
                }
            }
        }
    }
    out
}
