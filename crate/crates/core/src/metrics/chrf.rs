use rustc_hash::FxHashMap;

use super::{check_pairs, EvalPair};
use crate::error::Result;

pub const CHRF_ORDER: usize = 6;
pub const CHRF_BETA: f64 = 3.0;

fn char_ngrams(chars: &[char], n: usize) -> FxHashMap<&[char], u32> {
    let mut m = FxHashMap::default();
    for g in chars.windows(n) {
        *m.entry(g).or_insert(0) += 1;
    }
    m
}

/// chrF with β = 3 and character orders 1..=6, in `[0, 100]`.
pub fn corpus_chrf3<S: AsRef<str>>(pairs: &[EvalPair<'_, S>]) -> Result<f64> {
    corpus_chrf(pairs, CHRF_ORDER, CHRF_BETA)
}

/// Character n-gram F-score.
///
/// Tokens are concatenated without spaces, so n-grams may span word
/// boundaries but never contain whitespace. Hypothesis, reference and match
/// counts are summed over the corpus per order; precision and recall are
/// averaged over the orders for which both sides have n-grams, then combined
/// into F-beta.
pub fn corpus_chrf<S: AsRef<str>>(pairs: &[EvalPair<'_, S>], order: usize, beta: f64) -> Result<f64> {
    check_pairs(pairs)?;
    let mut stats = vec![[0u64; 3]; order];
    for p in pairs {
        let hyp = stream(p.hypothesis);
        let reference = stream(p.reference);
        for (n, st) in (1..=order).zip(stats.iter_mut()) {
            let h = char_ngrams(&hyp, n);
            let r = char_ngrams(&reference, n);
            st[0] += h.values().map(|&c| u64::from(c)).sum::<u64>();
            st[1] += r.values().map(|&c| u64::from(c)).sum::<u64>();
            st[2] += h
                .iter()
                .map(|(g, &c)| u64::from(c.min(r.get(g).copied().unwrap_or(0))))
                .sum::<u64>();
        }
    }

    let mut precision = 0.0;
    let mut recall = 0.0;
    let mut effective = 0;
    for [hyp, reference, common] in stats {
        if hyp > 0 && reference > 0 {
            precision += common as f64 / hyp as f64;
            recall += common as f64 / reference as f64;
            effective += 1;
        }
    }
    if effective == 0 {
        return Ok(0.0);
    }
    precision /= effective as f64;
    recall /= effective as f64;
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    let b2 = beta * beta;
    Ok(100.0 * (1.0 + b2) * precision * recall / (b2 * precision + recall))
}

fn stream<S: AsRef<str>>(tokens: &[S]) -> Vec<char> {
    tokens
        .iter()
        .flat_map(|t| t.as_ref().chars())
        .filter(|c| !c.is_whitespace())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_disjoint() {
        let a = ["hello", "world"];
        assert_eq!(corpus_chrf3(&[EvalPair::new(&a[..], &a[..])]).unwrap(), 100.0);
        let b = ["xyz"];
        assert_eq!(corpus_chrf3(&[EvalPair::new(&a[..], &b[..])]).unwrap(), 0.0);
    }

    #[test]
    fn short_pair_by_hand() {
        // order 1: P = 2/2, R = 2/3; order 2: P = 1/1, R = 1/2; higher orders
        // have no hypothesis n-grams. avgP = 1, avgR = 7/12,
        // F3 = 10 * (7/12) / (9 + 7/12) = 70/115.
        let h = ["ab"];
        let r = ["abc"];
        let got = corpus_chrf3(&[EvalPair::new(&h[..], &r[..])]).unwrap();
        assert!((got - 100.0 * 70.0 / 115.0).abs() < 1e-9, "{got}");
    }

    #[test]
    fn spaces_are_ignored() {
        let h = ["ab", "c"];
        let r = ["abc"];
        assert_eq!(corpus_chrf3(&[EvalPair::new(&h[..], &r[..])]).unwrap(), 100.0);
    }
}
