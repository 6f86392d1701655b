use std::hash::Hash;

use rustc_hash::FxHashMap;

use super::{check_pairs, EvalPair};
use crate::error::Result;

const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum BleuSmoothing {
    #[default]
    None,
    /// Add one to matches and totals of orders 2..=4.
    AddOne,
}

fn counts<T: Eq + Hash>(tokens: &[T], n: usize) -> FxHashMap<&[T], u32> {
    let mut m = FxHashMap::default();
    for g in tokens.windows(n) {
        *m.entry(g).or_insert(0) += 1;
    }
    m
}

/// Corpus BLEU in `[0, 100]`: clipped n-gram precisions for orders 1..=4
/// accumulated over the corpus, geometric mean, brevity penalty.
///
/// An order for which the hypotheses contain no n-grams at all is left out of
/// the mean; any remaining order with zero matches gives 0.
pub fn corpus_bleu<T: Eq + Hash>(pairs: &[EvalPair<'_, T>], smoothing: BleuSmoothing) -> Result<f64> {
    check_pairs(pairs)?;
    let mut matches = [0u64; MAX_ORDER];
    let mut totals = [0u64; MAX_ORDER];
    let mut hyp_len = 0u64;
    let mut ref_len = 0u64;
    for p in pairs {
        hyp_len += p.hypothesis.len() as u64;
        ref_len += p.reference.len() as u64;
        for n in 1..=MAX_ORDER {
            let r = counts(p.reference, n);
            for (g, c) in counts(p.hypothesis, n) {
                matches[n - 1] += u64::from(c.min(r.get(g).copied().unwrap_or(0)));
            }
            totals[n - 1] += (p.hypothesis.len() + 1).saturating_sub(n) as u64;
        }
    }
    if hyp_len == 0 {
        return Ok(0.0);
    }

    let mut log_sum = 0.0;
    let mut used = 0;
    for n in 0..MAX_ORDER {
        if totals[n] == 0 {
            continue;
        }
        let (m, t) = match smoothing {
            BleuSmoothing::AddOne if n > 0 => (matches[n] + 1, totals[n] + 1),
            _ => (matches[n], totals[n]),
        };
        if m == 0 {
            return Ok(0.0);
        }
        log_sum += (m as f64 / t as f64).ln();
        used += 1;
    }
    let brevity = if hyp_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    Ok(100.0 * brevity * (log_sum / used as f64).exp())
}
