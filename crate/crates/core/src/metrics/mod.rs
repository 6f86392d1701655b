//! Corpus-level translation quality metrics.

mod bleu;
mod chrf;
mod ter;

use serde::Serialize;

pub use bleu::{corpus_bleu, BleuSmoothing};
pub use chrf::{corpus_chrf, corpus_chrf3};
pub use ter::{corpus_ter, edit_distance, sentence_ter, translation_edits, TerStats};

use crate::corpus::{Sentence, Vocab};
use crate::error::{Error, Result};

/// A hypothesis aligned with its reference.
#[derive(Debug, Clone, Copy)]
pub struct EvalPair<'a, T> {
    pub hypothesis: &'a [T],
    pub reference: &'a [T],
}

impl<'a, T> EvalPair<'a, T> {
    pub fn new(hypothesis: &'a [T], reference: &'a [T]) -> Self {
        Self { hypothesis, reference }
    }
}

pub(crate) fn check_pairs<T>(pairs: &[EvalPair<'_, T>]) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("no sentence pairs to evaluate"));
    }
    if let Some(i) = pairs.iter().position(|p| p.reference.is_empty()) {
        return Err(Error::EmptyReference(i));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QualityScores {
    pub bleu: f64,
    pub ter: f64,
    pub chrf3: f64,
}

/// BLEU, TER and chrF3 of aligned hypothesis/reference corpora.
pub fn evaluate(hyps: &[Sentence], refs: &[Sentence], vocab: &Vocab, smoothing: BleuSmoothing) -> Result<QualityScores> {
    if hyps.len() != refs.len() {
        return Err(Error::LengthMismatch {
            hyp: hyps.len(),
            reference: refs.len(),
        });
    }
    let pairs: Vec<EvalPair<'_, _>> = hyps
        .iter()
        .zip(refs)
        .map(|(h, r)| EvalPair::new(h.tokens.as_slice(), r.tokens.as_slice()))
        .collect();
    let words: Vec<(Vec<&str>, Vec<&str>)> = pairs
        .iter()
        .map(|p| (vocab.words(p.hypothesis).collect(), vocab.words(p.reference).collect()))
        .collect();
    let word_pairs: Vec<EvalPair<'_, &str>> = words.iter().map(|(h, r)| EvalPair::new(h, r)).collect();
    Ok(QualityScores {
        bleu: corpus_bleu(&pairs, smoothing)?,
        ter: corpus_ter(&pairs)?,
        chrf3: corpus_chrf3(&word_pairs)?,
    })
}
