//! Seed n-gram features and the decaying occurrence counts over the selected
//! set.
//!
//! Every distinct seed n-gram gets a dense feature id. Candidate sentences
//! are reduced to the list of feature ids they share with the seed, and the
//! counts over the selected set are a flat array indexed by feature id.
//! N-grams that never occur in the seed are not tracked at all.

use rustc_hash::FxHashMap;

use crate::corpus::{Sentence, TokenId};
use crate::error::{Error, Result};

pub const DEFAULT_ORDER: usize = 3;

pub type FeatureId = u32;

/// All contiguous n-grams of orders `1..=order`, enumerated by order first,
/// then left to right.
pub fn ngrams<T>(tokens: &[T], order: usize) -> impl Iterator<Item = &[T]> {
    assert!(order >= 1, "n-gram order must be at least 1");
    (1..=order).flat_map(move |n| tokens.windows(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NGram(pub Vec<TokenId>);

impl NGram {
    pub fn order(&self) -> usize {
        self.0.len()
    }
}

/// The n-gram multiset of `s`, as a list in enumeration order.
pub fn extract_ngrams(s: &Sentence, order: usize) -> Vec<NGram> {
    ngrams(&s.tokens, order).map(|g| NGram(g.to_vec())).collect()
}

/// Whether a candidate's repeated occurrences of a shared n-gram each add to
/// its score, or only the first one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum CountMode {
    #[default]
    PerOccurrence,
    Distinct,
}

/// The n-grams of orders `1..=order` occurring in the seed.
#[derive(Debug, Clone)]
pub struct SeedNGramSet {
    order: usize,
    index: FxHashMap<Box<[TokenId]>, FeatureId>,
    grams: Vec<Box<[TokenId]>>,
}

impl SeedNGramSet {
    pub fn new(seed: &[Sentence], order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::Config("n-gram order must be at least 1".into()));
        }
        if seed.iter().all(Sentence::is_empty) {
            return Err(Error::EmptyInput("seed corpus is empty"));
        }
        let mut set = Self {
            order,
            index: FxHashMap::default(),
            grams: Vec::new(),
        };
        for s in seed {
            for g in ngrams(&s.tokens, order) {
                if !set.index.contains_key(g) {
                    let id = FeatureId::try_from(set.grams.len()).expect("too many seed n-grams");
                    set.index.insert(g.into(), id);
                    set.grams.push(g.into());
                }
            }
        }
        Ok(set)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of distinct seed n-grams.
    pub fn len(&self) -> usize {
        self.grams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grams.is_empty()
    }

    pub fn contains(&self, gram: &[TokenId]) -> bool {
        self.index.contains_key(gram)
    }

    pub fn feature(&self, gram: &[TokenId]) -> Option<FeatureId> {
        self.index.get(gram).copied()
    }

    pub fn gram(&self, feature: FeatureId) -> &[TokenId] {
        &self.grams[feature as usize]
    }

    /// Feature ids of the seed n-grams occurring in `tokens`, one entry per
    /// occurrence (or per distinct n-gram in [`CountMode::Distinct`]), in
    /// enumeration order.
    pub fn features_of(&self, tokens: &[TokenId], mode: CountMode) -> Vec<FeatureId> {
        let mut out: Vec<FeatureId> = ngrams(tokens, self.order).filter_map(|g| self.feature(g)).collect();
        if mode == CountMode::Distinct {
            let mut seen = rustc_hash::FxHashSet::default();
            out.retain(|f| seen.insert(*f));
        }
        out
    }
}

/// The sub-multiset of `extract_ngrams(s)` whose members occur in the seed.
pub fn shared_ngrams(s: &Sentence, seed: &SeedNGramSet) -> Vec<NGram> {
    ngrams(&s.tokens, seed.order())
        .filter(|g| seed.contains(g))
        .map(|g| NGram(g.to_vec()))
        .collect()
}

/// Occurrence counts of seed n-grams over the selected sentences.
#[derive(Debug, Clone)]
pub struct SelectedCounts {
    counts: Vec<u32>,
    version: u64,
}

impl SelectedCounts {
    pub fn new(seed: &SeedNGramSet) -> Self {
        Self {
            counts: vec![0; seed.len()],
            version: 0,
        }
    }

    pub(crate) fn with_len(n: usize) -> Self {
        Self {
            counts: vec![0; n],
            version: 0,
        }
    }

    pub fn count(&self, feature: FeatureId) -> u32 {
        self.counts[feature as usize]
    }

    /// Count of an arbitrary n-gram; zero for anything outside the seed.
    pub fn count_of(&self, seed: &SeedNGramSet, gram: &[TokenId]) -> u32 {
        seed.feature(gram).map_or(0, |f| self.count(f))
    }

    /// Number of updates applied so far.
    pub fn version(&self) -> u64 {
        self.version
    }

    /// Records a newly selected sentence.
    pub fn add_selected(&mut self, seed: &SeedNGramSet, s: &Sentence) {
        let features = seed.features_of(&s.tokens, CountMode::PerOccurrence);
        self.add_features(&features);
    }

    /// Records a selected sentence given its per-occurrence feature list.
    pub fn add_features(&mut self, features: &[FeatureId]) {
        for &f in features {
            let c = &mut self.counts[f as usize];
            *c = c.saturating_add(1);
        }
        self.version += 1;
    }

    /// Non-zero counts as (n-gram, count), sorted by n-gram.
    pub fn nonzero(&self, seed: &SeedNGramSet) -> Vec<(NGram, u32)> {
        let mut out: Vec<_> = self
            .counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(f, &c)| (NGram(seed.gram(f as FeatureId).to_vec()), c))
            .collect();
        out.sort();
        out
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::corpus::Vocab;

    fn sent(vocab: &mut Vocab, words: &str) -> Sentence {
        Sentence::new(vocab.encode(&words.split_whitespace().collect::<Vec<_>>()), 0)
    }

    fn gram(vocab: &mut Vocab, words: &str) -> NGram {
        NGram(vocab.encode(&words.split_whitespace().collect::<Vec<_>>()))
    }

    fn multiset(grams: Vec<NGram>) -> HashMap<NGram, usize> {
        let mut m = HashMap::new();
        for g in grams {
            *m.entry(g).or_default() += 1;
        }
        m
    }

    #[test]
    fn extract_enumerates_all_orders() {
        let mut v = Vocab::new();
        let s = sent(&mut v, "a b c");
        let got = multiset(extract_ngrams(&s, 2));
        let want = multiset(["a", "b", "c", "a b", "b c"].iter().map(|g| gram(&mut v, g)).collect());
        assert_eq!(got, want);
    }

    #[test]
    fn extract_keeps_multiplicity() {
        let mut v = Vocab::new();
        let s = sent(&mut v, "a a");
        let got = multiset(extract_ngrams(&s, 2));
        assert_eq!(got[&gram(&mut v, "a")], 2);
        assert_eq!(got[&gram(&mut v, "a a")], 1);
        assert_eq!(got.len(), 2);
    }

    #[test]
    fn extract_truncates_to_sentence_length() {
        let mut v = Vocab::new();
        let s = sent(&mut v, "a");
        assert_eq!(extract_ngrams(&s, 3), vec![gram(&mut v, "a")]);
        assert!(extract_ngrams(&Sentence::new(vec![], 0), 3).is_empty());
    }

    #[test]
    fn extract_count_formula() {
        let mut v = Vocab::new();
        for m in 0..8usize {
            let words: Vec<String> = (0..m).map(|i| format!("w{i}")).collect();
            let s = Sentence::new(v.encode(&words), 0);
            for order in 1..5usize {
                let want: usize = (1..=order).map(|k| (m + 1).saturating_sub(k)).sum();
                assert_eq!(extract_ngrams(&s, order).len(), want);
            }
        }
    }

    fn seed_abc(v: &mut Vocab) -> SeedNGramSet {
        let s = sent(v, "a b c");
        SeedNGramSet::new(&[s], 3).unwrap()
    }

    #[test]
    fn shared_with_seed() {
        let mut v = Vocab::new();
        let seed = seed_abc(&mut v);
        assert_eq!(seed.len(), 6);
        let s = sent(&mut v, "a b d");
        let got = multiset(shared_ngrams(&s, &seed));
        let want = multiset(["a", "b", "a b"].iter().map(|g| gram(&mut v, g)).collect());
        assert_eq!(got, want);

        let s = sent(&mut v, "x y");
        assert!(shared_ngrams(&s, &seed).is_empty());

        let s = sent(&mut v, "a a");
        assert_eq!(shared_ngrams(&s, &seed), vec![gram(&mut v, "a"), gram(&mut v, "a")]);
    }

    #[test]
    fn distinct_mode_dedups() {
        let mut v = Vocab::new();
        let seed = seed_abc(&mut v);
        let s = sent(&mut v, "a a b");
        assert_eq!(seed.features_of(&s.tokens, CountMode::PerOccurrence).len(), 4);
        assert_eq!(seed.features_of(&s.tokens, CountMode::Distinct).len(), 3);
    }

    #[test]
    fn counts_accumulate() {
        let mut v = Vocab::new();
        let seed = SeedNGramSet::new(&[sent(&mut v, "a b")], 3).unwrap();
        let mut counts = SelectedCounts::new(&seed);
        let s = sent(&mut v, "a b");
        counts.add_selected(&seed, &s);
        let a = gram(&mut v, "a");
        let b = gram(&mut v, "b");
        let ab = gram(&mut v, "a b");
        assert_eq!(counts.nonzero(&seed).len(), 3);
        for g in [&a, &b, &ab] {
            assert_eq!(counts.count_of(&seed, &g.0), 1);
        }
        counts.add_selected(&seed, &s);
        for g in [&a, &b, &ab] {
            assert_eq!(counts.count_of(&seed, &g.0), 2);
        }
        let before = counts.nonzero(&seed);
        counts.add_selected(&seed, &sent(&mut v, "x"));
        assert_eq!(counts.nonzero(&seed), before);
        assert_eq!(counts.version(), 3);
    }

    #[test]
    fn empty_seed_rejected() {
        assert!(SeedNGramSet::new(&[], 3).is_err());
        assert!(SeedNGramSet::new(&[Sentence::new(vec![], 0)], 3).is_err());
        let mut v = Vocab::new();
        assert!(SeedNGramSet::new(&[sent(&mut v, "a")], 0).is_err());
    }

    /// Every n-gram over a 4-word vocabulary up to order 3 gets its own
    /// feature id and looks up back to itself.
    #[test]
    fn feature_ids_do_not_collide() {
        let mut v = Vocab::new();
        let words: Vec<TokenId> = ["p", "q", "r", "s"].iter().map(|w| v.intern(w)).collect();
        let mut all = Vec::new();
        for &x in &words {
            all.push(vec![x]);
            for &y in &words {
                all.push(vec![x, y]);
                for &z in &words {
                    all.push(vec![x, y, z]);
                }
            }
        }
        // Each gram becomes its own seed sentence, so the seed holds every
        // n-gram over the vocabulary.
        let seed_sents: Vec<Sentence> = all.iter().map(|g| Sentence::new(g.clone(), 0)).collect();
        let seed = SeedNGramSet::new(&seed_sents, 3).unwrap();
        assert_eq!(seed.len(), 4 + 16 + 64);
        let mut ids = std::collections::HashSet::new();
        for g in &all {
            let f = seed.feature(g).unwrap();
            assert!(ids.insert(f));
            assert_eq!(seed.gram(f), &g[..]);
        }
    }
}
