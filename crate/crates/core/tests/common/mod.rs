//! Test-only oracles. Everything here works on plain strings and recomputes
//! from scratch, sharing no code path with the library.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use fdasel::{MultiSourcePool, SeedNGramSet, Sentence, SystemId};
use rand::{Rng, RngExt};

pub type Words = Vec<String>;

/// A small multi-system pool held as strings.
#[derive(Debug, Clone)]
pub struct ToyPool {
    pub systems: Vec<String>,
    pub targets: Vec<Words>,
    /// `sources[system][target]`
    pub sources: Vec<Vec<Words>>,
    pub seed: Vec<Words>,
}

pub fn words(s: &str) -> Words {
    s.split_whitespace().map(str::to_string).collect()
}

fn random_sentence<R: Rng>(rng: &mut R, vocab: usize, max_len: usize) -> Words {
    let len = rng.random_range(0..=max_len);
    (0..len).map(|_| format!("w{}", rng.random_range(0..vocab))).collect()
}

impl ToyPool {
    /// Random pool with at most `max_cands` candidates.
    pub fn random<R: Rng>(rng: &mut R, max_cands: usize, max_vocab: usize) -> Self {
        let n_sys = rng.random_range(1..=4);
        let max_targets = (max_cands / n_sys).max(1);
        let n_targets = rng.random_range(1..=max_targets.min(125));
        let vocab = rng.random_range(2..=max_vocab);
        // shuffled names so that system order and name order differ
        let mut names = ["delta", "alpha", "charlie", "bravo"];
        for i in (1..names.len()).rev() {
            names.swap(i, rng.random_range(0..=i));
        }
        let systems: Vec<String> = names[..n_sys].iter().map(|s| s.to_string()).collect();
        let targets = (0..n_targets).map(|i| vec![format!("t{i}")]).collect();
        let mut sources: Vec<Vec<Words>> = (0..n_sys)
            .map(|_| (0..n_targets).map(|_| random_sentence(rng, vocab, 7)).collect())
            .collect();
        // identical outputs across systems produce exact score ties
        for sys in 1..n_sys {
            let (earlier, rest) = sources.split_at_mut(sys);
            for (t, slot) in rest[0].iter_mut().enumerate() {
                if rng.random_bool(0.3) {
                    *slot = earlier[rng.random_range(0..sys)][t].clone();
                }
            }
        }
        let n_seed = rng.random_range(1..=5);
        let mut seed: Vec<Words> = (0..n_seed).map(|_| random_sentence(rng, vocab, 8)).collect();
        if seed.iter().all(Vec::is_empty) {
            seed[0].push("w0".into());
        }
        ToyPool {
            systems,
            targets,
            sources,
            seed,
        }
    }

    pub fn build(&self, order: usize) -> (MultiSourcePool, SeedNGramSet) {
        let mut vocab = fdasel::Vocab::new();
        let targets = self
            .targets
            .iter()
            .enumerate()
            .map(|(i, t)| Sentence::new(vocab.encode(t), i))
            .collect();
        let sources = self
            .systems
            .iter()
            .zip(&self.sources)
            .map(|(name, list)| {
                let sents = list
                    .iter()
                    .enumerate()
                    .map(|(i, s)| Sentence::new(vocab.encode(s), i))
                    .collect();
                (SystemId::new(name.clone()).unwrap(), sents)
            })
            .collect();
        let seed: Vec<Sentence> = self.seed.iter().map(|s| Sentence::new(vocab.encode(s), 0)).collect();
        let pool = MultiSourcePool::new(vocab, targets, sources).unwrap();
        let seed = SeedNGramSet::new(&seed, order).unwrap();
        (pool, seed)
    }

    pub fn num_candidates(&self) -> usize {
        self.systems.len() * self.targets.len()
    }
}

fn all_ngrams(s: &[String], order: usize) -> Vec<Words> {
    let mut out = Vec::new();
    for n in 1..=order {
        if s.len() >= n {
            for i in 0..=s.len() - n {
                out.push(s[i..i + n].to_vec());
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    pub order: usize,
    pub budget: usize,
    pub exclusive: bool,
    pub decay: bool,
    pub distinct: bool,
}

impl OracleOptions {
    pub fn new(budget: usize, exclusive: bool) -> Self {
        Self {
            order: 3,
            budget,
            exclusive,
            decay: true,
            distinct: false,
        }
    }
}

/// `(system, target, score)` per step.
pub type OracleStep = (usize, usize, f64);

/// Recomputes every remaining candidate's score at every step and takes the
/// best one: higher score, then lower target, then smaller system name, then
/// earlier candidate (system-major order).
pub fn naive_select(pool: &ToyPool, factors: &[f64], opt: OracleOptions) -> Vec<OracleStep> {
    let seed: HashSet<Words> = pool.seed.iter().flat_map(|s| all_ngrams(s, opt.order)).collect();
    let mut counts: HashMap<Words, u32> = HashMap::new();
    let mut cands: Vec<(usize, usize)> = Vec::new();
    for s in 0..pool.systems.len() {
        for t in 0..pool.targets.len() {
            cands.push((s, t));
        }
    }
    // the n-grams a candidate shares with the seed never change; their
    // weights are recomputed from the counts at every step
    let shared: Vec<Vec<Words>> = cands
        .iter()
        .map(|&(s, t)| {
            let mut g: Vec<Words> = all_ngrams(&pool.sources[s][t], opt.order)
                .into_iter()
                .filter(|g| seed.contains(g))
                .collect();
            if opt.distinct {
                let mut seen = HashSet::new();
                g.retain(|x| seen.insert(x.clone()));
            }
            g
        })
        .collect();
    let mut alive = vec![true; cands.len()];
    let mut out = Vec::new();
    while out.len() < opt.budget {
        let mut best: Option<(usize, f64)> = None;
        for (ci, &(s, t)) in cands.iter().enumerate() {
            if !alive[ci] {
                continue;
            }
            let sent = &pool.sources[s][t];
            let score = if sent.is_empty() {
                0.0
            } else {
                let mut sum = 0.0;
                for g in &shared[ci] {
                    let c = counts.get(g).copied().unwrap_or(0);
                    sum += if c >= 64 { 0.0 } else { 0.5f64.powi(c as i32) };
                }
                sum / sent.len() as f64 * factors[s]
            };
            let better = match best {
                None => true,
                Some((bi, bs)) => {
                    let (bsys, bt) = cands[bi];
                    score > bs
                        || (score == bs
                            && (t, &pool.systems[s], ci) < (bt, &pool.systems[bsys], bi))
                }
            };
            if better {
                best = Some((ci, score));
            }
        }
        let Some((ci, score)) = best else { break };
        if score <= 0.0 {
            break;
        }
        let (s, t) = cands[ci];
        out.push((s, t, score));
        alive[ci] = false;
        if opt.exclusive {
            for (cj, &(_, tj)) in cands.iter().enumerate() {
                if tj == t {
                    alive[cj] = false;
                }
            }
        }
        if opt.decay {
            for g in all_ngrams(&pool.sources[s][t], opt.order) {
                if seed.contains(&g) {
                    *counts.entry(g).or_insert(0) += 1;
                }
            }
        }
    }
    out
}

/// Word-level Levenshtein distance.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for i in 1..=a.len() {
        let mut cur = vec![i; b.len() + 1];
        for j in 1..=b.len() {
            cur[j] = (prev[j] + 1).min(cur[j - 1] + 1).min(prev[j - 1] + usize::from(a[i - 1] != b[j - 1]));
        }
        prev = cur;
    }
    prev[b.len()]
}

fn block_moves<T: Clone>(h: &[T]) -> Vec<Vec<T>> {
    let n = h.len();
    let mut out = Vec::new();
    for start in 0..n {
        for len in 1..=n - start {
            let block = &h[start..start + len];
            let mut rest = h[..start].to_vec();
            rest.extend_from_slice(&h[start + len..]);
            for at in 0..=rest.len() {
                if at == start {
                    continue;
                }
                let mut moved = rest[..at].to_vec();
                moved.extend_from_slice(block);
                moved.extend_from_slice(&rest[at..]);
                out.push(moved);
            }
        }
    }
    out
}

/// Minimum over all sequences of block moves of (moves + Levenshtein of the
/// result), by breadth-first search over move counts.
pub fn optimal_ter_edits<T: Clone + Eq + std::hash::Hash>(h: &[T], r: &[T]) -> usize {
    let mut best = levenshtein(h, r);
    let mut seen: HashSet<Vec<T>> = HashSet::from([h.to_vec()]);
    let mut frontier = vec![h.to_vec()];
    let mut k = 0;
    while !frontier.is_empty() && k + 1 < best {
        k += 1;
        let mut next = Vec::new();
        for x in &frontier {
            for y in block_moves(x) {
                if seen.insert(y.clone()) {
                    best = best.min(k + levenshtein(&y, r));
                    next.push(y);
                }
            }
        }
        frontier = next;
    }
    best
}

fn distinct<T: Eq + std::hash::Hash>(s: &[T]) -> usize {
    s.iter().collect::<HashSet<_>>().len()
}

/// Factor count of one MTLD pass, recomputing each segment's TTR from its
/// token slice.
fn mtld_pass<T: Eq + std::hash::Hash>(tokens: &[T], threshold: f64) -> f64 {
    let mut factors = 0.0;
    let mut start = 0;
    for end in 0..tokens.len() {
        let seg = &tokens[start..=end];
        if (distinct(seg) as f64 / seg.len() as f64) < threshold {
            factors += 1.0;
            start = end + 1;
        }
    }
    if start < tokens.len() {
        let rest = &tokens[start..];
        factors += (1.0 - distinct(rest) as f64 / rest.len() as f64) / (1.0 - threshold);
    }
    factors
}

pub fn mtld_scanner<T: Eq + std::hash::Hash + Clone>(tokens: &[T], threshold: f64) -> Option<f64> {
    let fwd = mtld_pass(tokens, threshold);
    let rev: Vec<T> = tokens.iter().rev().cloned().collect();
    let bwd = mtld_pass(&rev, threshold);
    if fwd == 0.0 || bwd == 0.0 {
        return None;
    }
    let n = tokens.len() as f64;
    Some((n / fwd + n / bwd) / 2.0)
}

/// Yule's I through frequency classes: `V(f)` types occur exactly `f` times.
pub fn yule_by_classes<T: Eq + std::hash::Hash>(tokens: &[T]) -> f64 {
    let mut freq: HashMap<&T, u64> = HashMap::new();
    for t in tokens {
        *freq.entry(t).or_default() += 1;
    }
    let mut classes: HashMap<u64, u64> = HashMap::new();
    for &f in freq.values() {
        *classes.entry(f).or_default() += 1;
    }
    let m1: u64 = classes.iter().map(|(f, v)| f * v).sum();
    let m2: u64 = classes.iter().map(|(f, v)| f * f * v).sum();
    if m1 == m2 {
        f64::INFINITY
    } else {
        (m1 * m1) as f64 / (m2 - m1) as f64
    }
}

#[derive(Debug, serde::Deserialize)]
pub struct MetricCorpus {
    pub hyp: Vec<Words>,
    #[serde(rename = "ref")]
    pub reference: Vec<Words>,
    pub bleu: f64,
    pub bleu_add_one: f64,
    pub chrf3: f64,
    pub ter: f64,
    pub ter_edits: Vec<(usize, usize)>,
}

#[derive(Debug, serde::Deserialize)]
pub struct ShortPair {
    pub hyp: Words,
    #[serde(rename = "ref")]
    pub reference: Words,
    pub edits: usize,
}

/// Scores produced by an external reference implementation.
#[derive(Debug, serde::Deserialize)]
pub struct MetricFixtures {
    pub corpora: Vec<MetricCorpus>,
    pub short_pairs: Vec<ShortPair>,
}

pub fn metric_fixtures() -> MetricFixtures {
    let text = include_str!("../fixtures/metric_fixtures.json");
    serde_json::from_str(text).expect("fixture file parses")
}
