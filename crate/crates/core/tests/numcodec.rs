#![allow(clippy::approx_constant)]

use linseq::matseq::{matrix_to_tokens, tokens_to_matrix, SequenceLayout};
use linseq::numcodec::{CodecError, EncodingScheme, FloatTriplet, ParseErrorKind, Vocabulary};
use linseq::Matrix;
use proptest::prelude::*;

fn enc(s: EncodingScheme, x: f64) -> Vec<String> {
    s.encode_value(x).unwrap()
}

#[test]
fn worked_examples_for_pi_ish() {
    assert_eq!(enc(EncodingScheme::P10, 3.14), ["+", "3", "1", "4", "E-2"]);
    assert_eq!(enc(EncodingScheme::P1000, 3.14), ["+", "314", "E-2"]);
    assert_eq!(enc(EncodingScheme::B1999, 3.14), ["314", "E-2"]);
    assert_eq!(enc(EncodingScheme::FP15, 3.14), ["FP314/-2"]);
}

#[test]
fn large_negative_in_positional_and_balanced() {
    assert_eq!(enc(EncodingScheme::P10, -6.02e23), ["-", "6", "0", "2", "E21"]);
    assert_eq!(enc(EncodingScheme::P1000, -6.02e23), ["-", "602", "E21"]);
    assert_eq!(enc(EncodingScheme::B1999, -6.02e23), ["-602", "E21"]);
}

#[test]
fn float_tokens_have_a_bounded_exponent() {
    assert_eq!(
        EncodingScheme::FP15.encode_value(-6.02e23),
        Err(CodecError::Range { exponent: 21, bound: 8 })
    );
    assert_eq!(enc(EncodingScheme::FP15, -6.02e7), ["FP-602/5"]);
    assert_eq!(enc(EncodingScheme::FP15, 1e10), ["FP100/8"]);
    assert_eq!(enc(EncodingScheme::FP15, 1.23e-6), ["FP123/-8"]);
    assert!(EncodingScheme::FP15.encode_value(1.23e-7).is_err());
    let err = EncodingScheme::FP15.decode(&["FP-602/21"]).unwrap_err();
    assert!(matches!(err.kind, ParseErrorKind::UnknownToken(_)));
}

#[test]
fn appendix_style_examples() {
    assert_eq!(enc(EncodingScheme::P10, std::f64::consts::PI.exp()), ["+", "2", "3", "1", "E-1"]);
    assert_eq!(enc(EncodingScheme::P1000, std::f64::consts::PI.exp()), ["+", "231", "E-1"]);
    assert_eq!(enc(EncodingScheme::P10, -0.5), ["-", "5", "0", "0", "E-3"]);
    assert_eq!(enc(EncodingScheme::P1000, -0.5), ["-", "500", "E-3"]);
}

#[test]
fn zero_and_rounding_edges() {
    assert_eq!(enc(EncodingScheme::P10, 0.0), ["+", "0", "0", "0", "E0"]);
    assert_eq!(EncodingScheme::P10.round(0.9995).unwrap(), FloatTriplet::new(1, 100, -2, 3).unwrap());
    assert_eq!(EncodingScheme::P10.round(-2.675).unwrap().to_f64(), -2.68);
    assert!(matches!(EncodingScheme::P10.encode_value(1e120), Err(CodecError::Overflow { .. })));
    assert!(matches!(EncodingScheme::P10.encode_value(f64::NAN), Err(CodecError::NonFinite(_))));
}

#[test]
fn vocabulary_sizes() {
    let size = |s: EncodingScheme| Vocabulary::build(&s, 0, &[] as &[&str]).len();
    assert_eq!(size(EncodingScheme::P10), 213);
    assert_eq!(size(EncodingScheme::P100), 294);
    assert_eq!(size(EncodingScheme::P1000), 1104);
    assert_eq!(size(EncodingScheme::P10000), 9204);
    assert_eq!(size(EncodingScheme::B1999), 2002);
    assert_eq!(size(EncodingScheme::FP15), 30601);
}

#[test]
fn sequence_lengths_of_a_twenty_by_twenty_matrix() {
    let m = Matrix::from_fn(20, 20, |i, j| (i as f64 - j as f64) * 0.37 + 0.01);
    assert_eq!(matrix_to_tokens(&m, &SequenceLayout::new(EncodingScheme::P10)).unwrap().len(), 2002);
    assert_eq!(matrix_to_tokens(&m, &SequenceLayout::new(EncodingScheme::FP15)).unwrap().len(), 402);
}

fn scheme() -> impl Strategy<Value = EncodingScheme> {
    prop::sample::select(vec![
        EncodingScheme::P10,
        EncodingScheme::P100,
        EncodingScheme::P1000,
        EncodingScheme::P10000,
        EncodingScheme::B1999,
        EncodingScheme::FP15,
    ])
}

proptest! {
    #[test]
    fn matrices_survive_serialization(
        s in scheme(),
        rows in 1usize..6,
        cols in 1usize..6,
        seed in prop::collection::vec(-1e4f64..1e4, 36),
    ) {
        let m = Matrix::from_fn(rows, cols, |i, j| seed[i * 6 + j]);
        let layout = SequenceLayout::new(s);
        let toks = matrix_to_tokens(&m, &layout).unwrap();
        prop_assert_eq!(toks.len(), layout.token_len(rows, cols));
        let back = tokens_to_matrix(&toks, &layout).unwrap();
        prop_assert_eq!(matrix_to_tokens(&back, &layout).unwrap(), toks);
        let half_unit = 0.5 * 10f64.powi(1 - s.precision as i32);
        for (a, b) in back.data().iter().zip(m.data()) {
            prop_assert!((a - b).abs() <= half_unit * b.abs() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn every_emitted_token_is_in_the_vocabulary(s in scheme(), x in -1e6f64..1e6) {
        let v = Vocabulary::build(&s, 0, &[] as &[&str]);
        for t in s.encode_value(x).unwrap() {
            prop_assert!(v.contains(&t));
        }
    }

    #[test]
    fn truncated_sequences_never_parse(s in scheme(), n in 1usize..4, cut in 1usize..10) {
        let m = Matrix::from_fn(n, n, |i, j| (i * n + j) as f64 + 0.5);
        let layout = SequenceLayout::new(s);
        let toks = matrix_to_tokens(&m, &layout).unwrap();
        let cut = cut.min(toks.len());
        prop_assert!(tokens_to_matrix(&toks[..toks.len() - cut], &layout).is_err());
    }
}
