//! Greedy feature-decay selection.
//!
//! A candidate's score is the sum, over every occurrence of a seed n-gram in
//! its source side, of `0.5^c` (where `c` counts that n-gram over the
//! already-selected sentences), divided by the source length. The effective
//! score multiplies it by a per-system factor.
//!
//! Counts only grow, so scores only shrink. The engine therefore keeps every
//! candidate in a max-heap under the score it had when last evaluated and
//! re-evaluates lazily: a popped entry that is stale is re-scored and pushed
//! back unless it still beats the next entry. Ties on effective score go to
//! the lower target index, then the lexicographically smaller system name,
//! then the earlier candidate.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{CandidatePair, MultiSourcePool, Sentence, SystemId, TokenId};
use crate::error::{Error, Result};
use crate::ngram::{CountMode, FeatureId, SeedNGramSet, SelectedCounts};

/// Counts at or above this contribute nothing.
pub const DECAY_CUTOFF: u32 = 64;

const DECAY_WEIGHTS: [f64; DECAY_CUTOFF as usize] = {
    let mut w = [0.0; DECAY_CUTOFF as usize];
    let mut x = 1.0;
    let mut i = 0;
    while i < w.len() {
        w[i] = x;
        x *= 0.5;
        i += 1;
    }
    w
};

/// `0.5^count`, or 0 once `count` reaches [`DECAY_CUTOFF`].
#[inline]
pub fn decay_weight(count: u32) -> f64 {
    DECAY_WEIGHTS.get(count as usize).copied().unwrap_or(0.0)
}

/// Score of a sentence against the seed given the counts of the selected set.
pub fn fda_score(s: &Sentence, seed: &SeedNGramSet, counts: &SelectedCounts) -> f64 {
    let features = seed.features_of(&s.tokens, CountMode::PerOccurrence);
    score_features(&features, s.len(), counts)
}

#[inline]
fn score_features(features: &[FeatureId], len: usize, counts: &SelectedCounts) -> f64 {
    if len == 0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for &f in features {
        sum += decay_weight(counts.count(f));
    }
    sum / len as f64
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Exclusivity {
    /// Any (system, target) pair may be selected.
    #[default]
    None,
    /// Once a target is selected, its other candidates are withdrawn.
    PerTarget,
}

#[derive(Debug, Clone, Copy)]
pub struct SelectionParams {
    pub budget: usize,
    pub exclusivity: Exclusivity,
    /// When false the counts stay at zero and the ranking is static.
    pub decay: bool,
}

impl SelectionParams {
    pub fn new(budget: usize, exclusivity: Exclusivity) -> Self {
        Self {
            budget,
            exclusivity,
            decay: true,
        }
    }
}

/// Candidates reduced to their seed features.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    systems: Vec<SystemId>,
    num_targets: usize,
    num_features: usize,
    pairs: Vec<CandidatePair>,
    lengths: Vec<u32>,
    offsets: Vec<usize>,
    /// Per-occurrence feature lists; these drive the count updates.
    features: Vec<FeatureId>,
    /// Lists used for scoring when they differ from `features`.
    distinct: Option<(Vec<usize>, Vec<FeatureId>)>,
}

impl CandidateSet {
    /// Builds a candidate set from explicit (pair, source tokens) items.
    /// Candidate order is the order of `items`.
    pub fn new<'a, I>(systems: Vec<SystemId>, num_targets: usize, items: I, seed: &SeedNGramSet, mode: CountMode) -> Result<Self>
    where
        I: IntoIterator<Item = (CandidatePair, &'a [TokenId])>,
    {
        let items: Vec<(CandidatePair, &[TokenId])> = items.into_iter().collect();
        let mut seen = rustc_hash::FxHashSet::default();
        for (pair, _) in &items {
            if pair.system >= systems.len() || pair.target_idx >= num_targets {
                return Err(Error::Config(format!("candidate {pair:?} out of range")));
            }
            if !seen.insert(*pair) {
                return Err(Error::Config(format!("duplicate candidate {pair:?}")));
            }
        }
        let lists: Vec<(Vec<FeatureId>, Option<Vec<FeatureId>>)> = items
            .par_iter()
            .map(|(_, tokens)| {
                let all = seed.features_of(tokens, CountMode::PerOccurrence);
                let distinct = (mode == CountMode::Distinct).then(|| seed.features_of(tokens, CountMode::Distinct));
                (all, distinct)
            })
            .collect();

        let mut offsets = Vec::with_capacity(items.len() + 1);
        let mut features = Vec::new();
        let mut d_offsets = Vec::new();
        let mut d_features = Vec::new();
        offsets.push(0);
        d_offsets.push(0);
        for (all, distinct) in lists {
            features.extend_from_slice(&all);
            offsets.push(features.len());
            if let Some(d) = distinct {
                d_features.extend_from_slice(&d);
                d_offsets.push(d_features.len());
            }
        }
        features.shrink_to_fit();
        Ok(Self {
            systems,
            num_targets,
            num_features: seed.len(),
            pairs: items.iter().map(|(p, _)| *p).collect(),
            lengths: items.iter().map(|(_, t)| t.len() as u32).collect(),
            offsets,
            features,
            distinct: (mode == CountMode::Distinct).then_some((d_offsets, d_features)),
        })
    }

    /// Every (system, target) pair of the pool, system-major.
    pub fn from_pool(pool: &MultiSourcePool, seed: &SeedNGramSet, mode: CountMode) -> Result<Self> {
        Self::new(
            pool.systems().to_vec(),
            pool.num_targets(),
            pool.candidate_pairs().map(|p| (p, pool.source(p).tokens.as_slice())),
            seed,
            mode,
        )
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn systems(&self) -> &[SystemId] {
        &self.systems
    }

    pub fn num_targets(&self) -> usize {
        self.num_targets
    }

    pub fn pair(&self, idx: usize) -> CandidatePair {
        self.pairs[idx]
    }

    pub fn pairs(&self) -> &[CandidatePair] {
        &self.pairs
    }

    /// Source length in tokens.
    pub fn length(&self, idx: usize) -> usize {
        self.lengths[idx] as usize
    }

    fn occurrences(&self, idx: usize) -> &[FeatureId] {
        &self.features[self.offsets[idx]..self.offsets[idx + 1]]
    }

    fn scoring_features(&self, idx: usize) -> &[FeatureId] {
        match &self.distinct {
            Some((offsets, features)) => &features[offsets[idx]..offsets[idx + 1]],
            None => self.occurrences(idx),
        }
    }

    /// Unscaled score of candidate `idx` under `counts`.
    pub fn base_score(&self, idx: usize, counts: &SelectedCounts) -> f64 {
        score_features(self.scoring_features(idx), self.length(idx), counts)
    }

    /// Records candidate `idx` as selected.
    pub fn add_to_counts(&self, idx: usize, counts: &mut SelectedCounts) {
        counts.add_features(self.occurrences(idx));
    }

    pub fn new_counts(&self) -> SelectedCounts {
        SelectedCounts::with_len(self.num_features)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionRecord {
    /// 1-based selection rank.
    pub rank: usize,
    pub system: usize,
    pub target_idx: usize,
    /// Effective score at the time of selection.
    pub score: f64,
    /// Assigned by the zero-overlap fallback rather than by score.
    pub fallback: bool,
}

impl SelectionRecord {
    pub fn pair(&self) -> CandidatePair {
        CandidatePair {
            system: self.system,
            target_idx: self.target_idx,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    pub systems: Vec<SystemId>,
    pub records: Vec<SelectionRecord>,
    /// Aligned with `systems`.
    pub per_system_counts: Vec<usize>,
    /// Budget that could not be filled from positive-score candidates.
    pub shortfall: usize,
}

impl SelectionResult {
    pub fn empty(systems: Vec<SystemId>) -> Self {
        let n = systems.len();
        Self {
            systems,
            records: Vec::new(),
            per_system_counts: vec![0; n],
            shortfall: 0,
        }
    }

    pub(crate) fn push(&mut self, system: usize, target_idx: usize, score: f64, fallback: bool) {
        self.records.push(SelectionRecord {
            rank: self.records.len() + 1,
            system,
            target_idx,
            score,
            fallback,
        });
        self.per_system_counts[system] += 1;
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count_for(&self, system: &str) -> usize {
        self.systems
            .iter()
            .position(|s| s.as_str() == system)
            .map_or(0, |i| self.per_system_counts[i])
    }

    pub fn fallback_count(&self) -> usize {
        self.records.iter().filter(|r| r.fallback).count()
    }
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    score: f64,
    target: u32,
    system_rank: u32,
    idx: u32,
    stamp: u64,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.target.cmp(&self.target))
            .then_with(|| other.system_rank.cmp(&self.system_rank))
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

/// Rank of each system's name in lexicographic order.
fn system_ranks(systems: &[SystemId]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..systems.len()).collect();
    order.sort_by(|&a, &b| systems[a].cmp(&systems[b]));
    let mut ranks = vec![0; systems.len()];
    for (rank, sys) in order.into_iter().enumerate() {
        ranks[sys] = rank as u32;
    }
    ranks
}

fn check_factors(systems: &[SystemId], factors: &[f64]) -> Result<()> {
    if factors.len() != systems.len() {
        return Err(Error::Config(format!(
            "expected {} system factors, got {}",
            systems.len(),
            factors.len()
        )));
    }
    for (sys, &f) in systems.iter().zip(factors) {
        if !(f.is_finite() && f > 0.0) {
            return Err(Error::Factor {
                system: sys.to_string(),
                reason: format!("factor must be finite and positive, got {f}"),
            });
        }
    }
    Ok(())
}

/// Greedy selection over `cands`.
///
/// `factors` holds one positive multiplier per system of the candidate set.
/// Selection stops after `params.budget` records or when no remaining
/// candidate has a positive effective score.
pub fn select_greedy(cands: &CandidateSet, factors: &[f64], params: SelectionParams) -> Result<SelectionResult> {
    check_factors(&cands.systems, factors)?;
    let mut result = SelectionResult::empty(cands.systems.clone());
    if params.budget == 0 || cands.is_empty() {
        return Ok(result);
    }
    let ranks = system_ranks(&cands.systems);
    let mut counts = cands.new_counts();

    let initial: Vec<Entry> = (0..cands.len())
        .into_par_iter()
        .filter_map(|idx| {
            let pair = cands.pairs[idx];
            let score = cands.base_score(idx, &counts) * factors[pair.system];
            (score > 0.0).then_some(Entry {
                score,
                target: pair.target_idx as u32,
                system_rank: ranks[pair.system],
                idx: idx as u32,
                stamp: 0,
            })
        })
        .collect();
    let mut heap = BinaryHeap::from(initial);

    let exclusive = params.exclusivity == Exclusivity::PerTarget;
    let mut taken = vec![false; if exclusive { cands.num_targets } else { 0 }];

    while result.len() < params.budget {
        let Some(mut top) = heap.pop() else { break };
        if exclusive && taken[top.target as usize] {
            continue;
        }
        if top.stamp != counts.version() {
            let idx = top.idx as usize;
            top.score = cands.base_score(idx, &counts) * factors[cands.pairs[idx].system];
            top.stamp = counts.version();
            if top.score <= 0.0 {
                continue;
            }
            if heap.peek().is_some_and(|next| top < *next) {
                heap.push(top);
                continue;
            }
        }
        let idx = top.idx as usize;
        let pair = cands.pairs[idx];
        result.push(pair.system, pair.target_idx, top.score, false);
        if exclusive {
            taken[pair.target_idx] = true;
        }
        if params.decay {
            cands.add_to_counts(idx, &mut counts);
        }
    }
    log::debug!("greedy selection finished with {} records, {} heap entries left", result.len(), heap.len());
    Ok(result)
}
