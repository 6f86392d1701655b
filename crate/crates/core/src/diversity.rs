//! Document-level lexical diversity: type/token ratio, Yule's I and MTLD.
//!
//! A document is the flattened token stream of its sentences, in order.

use std::hash::Hash;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use crate::corpus::{Sentence, TokenId};
use crate::error::{Error, Result};

pub const MTLD_THRESHOLD: f64 = 0.72;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiversityScores {
    pub ttr: f64,
    /// `f64::INFINITY` when every type occurs exactly once.
    pub yules_i: f64,
    /// `None` when a pass completes no (partial) factor.
    pub mtld: Option<f64>,
}

pub fn flatten(doc: &[Sentence]) -> Vec<TokenId> {
    doc.iter().flat_map(|s| s.tokens.iter().copied()).collect()
}

fn non_empty<T>(tokens: &[T]) -> Result<()> {
    if tokens.is_empty() {
        Err(Error::EmptyInput("document has no tokens"))
    } else {
        Ok(())
    }
}

pub fn ttr(doc: &[Sentence]) -> Result<f64> {
    ttr_tokens(&flatten(doc))
}

pub fn ttr_tokens<T: Eq + Hash>(tokens: &[T]) -> Result<f64> {
    non_empty(tokens)?;
    let types: FxHashSet<&T> = tokens.iter().collect();
    Ok(types.len() as f64 / tokens.len() as f64)
}

pub fn yules_i(doc: &[Sentence]) -> Result<f64> {
    yules_i_tokens(&flatten(doc))
}

/// `M1² / (M2 − M1)` with `M1` the token count and `M2 = Σ f²·V(f)`.
pub fn yules_i_tokens<T: Eq + Hash>(tokens: &[T]) -> Result<f64> {
    non_empty(tokens)?;
    let mut freq: FxHashMap<&T, u64> = FxHashMap::default();
    for t in tokens {
        *freq.entry(t).or_insert(0) += 1;
    }
    let m1 = tokens.len() as u64;
    let m2: u64 = freq.values().map(|&f| f * f).sum();
    if m2 == m1 {
        return Ok(f64::INFINITY);
    }
    Ok((m1 as f64 * m1 as f64) / (m2 - m1) as f64)
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold < 1.0 {
        Ok(())
    } else {
        Err(Error::Threshold(threshold))
    }
}

/// Factor count of one MTLD pass. A factor closes when the running TTR drops
/// below `threshold`; the unfinished tail adds `(1 − TTR) / (1 − threshold)`.
fn factor_count<'a, T: Eq + Hash + 'a>(tokens: impl Iterator<Item = &'a T>, threshold: f64) -> f64 {
    let mut factors = 0.0;
    let mut types = FxHashSet::default();
    let mut count = 0usize;
    for t in tokens {
        count += 1;
        types.insert(t);
        if (types.len() as f64 / count as f64) < threshold {
            factors += 1.0;
            types.clear();
            count = 0;
        }
    }
    if count > 0 {
        let ttr = types.len() as f64 / count as f64;
        factors += (1.0 - ttr) / (1.0 - threshold);
    }
    factors
}

/// Single left-to-right MTLD pass.
pub fn mtld_forward<T: Eq + Hash>(tokens: &[T], threshold: f64) -> Result<Option<f64>> {
    non_empty(tokens)?;
    check_threshold(threshold)?;
    let factors = factor_count(tokens.iter(), threshold);
    Ok((factors != 0.0).then(|| tokens.len() as f64 / factors))
}

/// Single right-to-left MTLD pass.
pub fn mtld_backward<T: Eq + Hash>(tokens: &[T], threshold: f64) -> Result<Option<f64>> {
    non_empty(tokens)?;
    check_threshold(threshold)?;
    let factors = factor_count(tokens.iter().rev(), threshold);
    Ok((factors != 0.0).then(|| tokens.len() as f64 / factors))
}

/// Bidirectional MTLD: mean of the forward and backward passes.
pub fn mtld_tokens<T: Eq + Hash>(tokens: &[T], threshold: f64) -> Result<Option<f64>> {
    let fwd = mtld_forward(tokens, threshold)?;
    let bwd = mtld_backward(tokens, threshold)?;
    Ok(fwd.zip(bwd).map(|(f, b)| (f + b) / 2.0))
}

pub fn mtld(doc: &[Sentence], threshold: f64) -> Result<Option<f64>> {
    mtld_tokens(&flatten(doc), threshold)
}

pub fn diversity(doc: &[Sentence]) -> Result<DiversityScores> {
    let tokens = flatten(doc);
    Ok(DiversityScores {
        ttr: ttr_tokens(&tokens)?,
        yules_i: yules_i_tokens(&tokens)?,
        mtld: mtld_tokens(&tokens, MTLD_THRESHOLD)?,
    })
}
