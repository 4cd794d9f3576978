//! Parameter counts of encoder-decoder transformers.

use serde::Serialize;

/// Layer counts, widths and vocabulary sizes of a transformer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TransformerShape {
    pub enc_layers: u64,
    pub dec_layers: u64,
    pub enc_dim: u64,
    pub dec_dim: u64,
    pub vocab_in: u64,
    pub vocab_out: u64,
    /// Positional table size, the longest sequence the model reads or writes.
    pub positions: u64,
}

impl TransformerShape {
    /// Same width on both sides and one shared vocabulary size.
    pub fn symmetric(enc_layers: u64, dec_layers: u64, dim: u64, vocab: u64, positions: u64) -> Self {
        TransformerShape {
            enc_layers,
            dec_layers,
            enc_dim: dim,
            dec_dim: dim,
            vocab_in: vocab,
            vocab_out: vocab,
            positions,
        }
    }
}

/// The four addends of the count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ParamCount {
    pub input_embedding: u64,
    pub output_embedding: u64,
    pub encoder: u64,
    pub decoder: u64,
}

impl ParamCount {
    pub fn total(&self) -> u64 {
        self.input_embedding + self.output_embedding + self.encoder + self.decoder
    }
}

/// Self-attention, a `4d` feed-forward block and two layer norms.
pub fn encoder_layer(d: u64) -> u64 {
    d * (12 * d + 13)
}

/// An encoder layer plus cross-attention over a `d_enc` memory and a third
/// layer norm.
pub fn decoder_layer(d: u64, d_enc: u64) -> u64 {
    d * (14 * d + 2 * d_enc + 19)
}

pub fn param_count(s: &TransformerShape) -> ParamCount {
    ParamCount {
        input_embedding: s.enc_dim * (s.vocab_in + s.positions + 2),
        output_embedding: (s.vocab_out + s.positions + 2) * s.dec_dim + s.vocab_out,
        encoder: s.enc_layers * encoder_layer(s.enc_dim),
        decoder: s.dec_layers * decoder_layer(s.dec_dim, s.enc_dim),
    }
}

/// The shared vocabulary size `w` that makes `shape` (with `vocab_in =
/// vocab_out = w`) count exactly `total` parameters, if one exists.
pub fn solve_shared_vocab(shape: &TransformerShape, total: u64) -> Option<u64> {
    let base = param_count(&TransformerShape {
        vocab_in: 0,
        vocab_out: 0,
        ..*shape
    })
    .total();
    let per_word = shape.enc_dim + shape.dec_dim + 1;
    let rest = total.checked_sub(base)?;
    (rest % per_word == 0).then_some(rest / per_word)
}

/// The input vocabulary size that makes `shape` count exactly `total`
/// parameters, keeping its output vocabulary.
pub fn solve_vocab_in(shape: &TransformerShape, total: u64) -> Option<u64> {
    let base = param_count(&TransformerShape { vocab_in: 0, ..*shape }).total();
    let rest = total.checked_sub(base)?;
    (rest % shape.enc_dim == 0).then_some(rest / shape.enc_dim)
}

/// A model size quoted for reference: layers, width, scheme name, count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReferenceModel {
    pub experiment: &'static str,
    pub enc_layers: u64,
    pub dec_layers: u64,
    pub dim: u64,
    pub scheme: &'static str,
    pub params: u64,
}

const fn model(
    experiment: &'static str,
    enc_layers: u64,
    dec_layers: u64,
    dim: u64,
    scheme: &'static str,
    params: u64,
) -> ReferenceModel {
    ReferenceModel {
        experiment,
        enc_layers,
        dec_layers,
        dim,
        scheme,
        params,
    }
}

/// Published model sizes, reproduced by solving for the vocabulary.
pub const REFERENCE_MODELS: [ReferenceModel; 15] = [
    model("transposition", 1, 1, 256, "P10", 2_276_171),
    model("transposition", 1, 1, 256, "P1000", 2_737_871),
    model("transposition", 1, 1, 256, "B1999", 3_297_554),
    model("transposition", 1, 1, 256, "FP15", 17_045_441),
    model("addition", 2, 2, 512, "B1999", 17_619_218),
    model("matvec", 2, 2, 512, "P10", 15_578_443),
    model("matvec", 2, 2, 512, "P1000", 16_500_943),
    model("matvec", 4, 4, 512, "P1000", 31_213_775),
    model("matmul", 1, 4, 512, "P1000", 21_756_623),
    model("matmul", 1, 6, 512, "P1000", 30_164_687),
    model("eigen", 1, 6, 512, "FP15", 58_751_937),
    model("eigen", 6, 1, 512, "FP15", 53_493_697),
    model("eigen", 6, 1, 512, "P1000", 24_906_447),
    model("eigen", 6, 6, 512, "P1000", 45_926_607),
    model("inversion", 6, 1, 512, "FP15/P1000", 39_186_127),
];
