//! The four selection configurations built on the greedy engine.
//!
//! * `FromAll`: one candidate per (system, target); a target may be chosen
//!   through several systems.
//! * `EachFromAll`: at most one record per target. Targets left unselected
//!   because none of their candidates overlaps the seed get a system drawn
//!   uniformly at random.
//! * `EachFromAllX4`: the `EachFromAll` records repeated four times.
//! * `EachFromAllRescored`: `EachFromAll` with per-system factors.

use std::fmt;
use std::str::FromStr;

use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg64;

use crate::corpus::MultiSourcePool;
use crate::error::{Error, Result};
use crate::fda::{select_greedy, CandidateSet, Exclusivity, SelectionParams, SelectionResult};
use crate::ngram::{CountMode, SeedNGramSet};
use crate::rescore::SystemFactorTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    FromAll,
    EachFromAll,
    EachFromAllX4,
    EachFromAllRescored,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::FromAll,
        StrategyKind::EachFromAll,
        StrategyKind::EachFromAllX4,
        StrategyKind::EachFromAllRescored,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::FromAll => "from-all",
            StrategyKind::EachFromAll => "each-from-all",
            StrategyKind::EachFromAllX4 => "each-from-all-x4",
            StrategyKind::EachFromAllRescored => "each-from-all-rs",
        }
    }

    pub fn needs_factors(self) -> bool {
        self == StrategyKind::EachFromAllRescored
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown strategy {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    Count(usize),
    /// One record per target.
    AllTargets,
}

impl FromStr for Budget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "all-targets" {
            return Ok(Budget::AllTargets);
        }
        s.parse()
            .map(Budget::Count)
            .map_err(|_| Error::Config(format!("budget must be a non-negative integer or \"all-targets\", got {s:?}")))
    }
}

#[derive(Debug, Clone)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    pub budget: Budget,
    pub rng_seed: u64,
    pub factors: Option<SystemFactorTable>,
    pub count_mode: CountMode,
}

impl StrategyConfig {
    pub fn new(kind: StrategyKind, budget: Budget) -> Self {
        Self {
            kind,
            budget,
            rng_seed: 0,
            factors: None,
            count_mode: CountMode::PerOccurrence,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, self.budget) {
            (StrategyKind::FromAll, Budget::AllTargets) => {
                return Err(Error::Config("from-all needs a numeric --budget".into()))
            }
            (StrategyKind::FromAll, Budget::Count(_)) => {}
            (kind, Budget::Count(_)) => {
                return Err(Error::Config(format!(
                    "{kind} selects one record per target; its budget must be \"all-targets\""
                )))
            }
            (_, Budget::AllTargets) => {}
        }
        match (self.kind.needs_factors(), self.factors.is_some()) {
            (true, false) => Err(Error::Config(format!("{} requires --factors", self.kind))),
            (false, true) => Err(Error::Config(format!("--factors is only used by {}", StrategyKind::EachFromAllRescored))),
            _ => Ok(()),
        }
    }
}

/// Greedy selection without exclusivity and unit factors. A budget above the
/// number of positive-score candidates is left partly unfilled and the
/// difference is reported as `shortfall`.
pub fn run_from_all(cands: &CandidateSet, budget: usize) -> Result<SelectionResult> {
    let factors = vec![1.0; cands.systems().len()];
    let mut result = select_greedy(cands, &factors, SelectionParams::new(budget, Exclusivity::None))?;
    result.shortfall = budget - result.len();
    if result.shortfall > 0 {
        log::warn!("budget of {budget} left {} records unfilled", result.shortfall);
    }
    Ok(result)
}

/// Per-target exclusive selection followed by the random fallback, so that
/// every target that has candidates appears exactly once.
pub fn run_each_from_all(cands: &CandidateSet, factors: &[f64], rng_seed: u64) -> Result<SelectionResult> {
    let mut result = select_greedy(cands, factors, SelectionParams::new(usize::MAX, Exclusivity::PerTarget))?;
    assign_fallback(cands, &mut result, rng_seed);
    Ok(result)
}

/// The zero-overlap fallback. Unselected targets are visited in ascending
/// order; each gets a uniform draw over the systems whose source for it is
/// non-empty, or over all its systems when every source is empty.
fn assign_fallback(cands: &CandidateSet, result: &mut SelectionResult, rng_seed: u64) {
    let n = cands.num_targets();
    let mut taken = vec![false; n];
    for r in &result.records {
        taken[r.target_idx] = true;
    }
    // Candidate systems per target, in system order.
    let mut options: Vec<Vec<(usize, bool)>> = vec![Vec::new(); n];
    for (idx, pair) in cands.pairs().iter().enumerate() {
        if !taken[pair.target_idx] {
            options[pair.target_idx].push((pair.system, cands.length(idx) > 0));
        }
    }
    let mut rng = Pcg64::seed_from_u64(rng_seed);
    let mut eligible = Vec::new();
    for (target, opts) in options.iter_mut().enumerate() {
        if taken[target] || opts.is_empty() {
            continue;
        }
        opts.sort_unstable();
        eligible.clear();
        eligible.extend(opts.iter().filter(|o| o.1).map(|o| o.0));
        if eligible.is_empty() {
            eligible.extend(opts.iter().map(|o| o.0));
        }
        let system = eligible[rng.random_range(0..eligible.len())];
        result.push(system, target, 0.0, true);
    }
    if result.fallback_count() > 0 {
        log::info!("{} targets had no seed overlap and were assigned at random", result.fallback_count());
    }
}

/// `base` repeated `times` times with ranks renumbered.
pub fn repeat(base: &SelectionResult, times: usize) -> SelectionResult {
    let mut out = SelectionResult::empty(base.systems.clone());
    out.shortfall = base.shortfall * times;
    for _ in 0..times {
        for r in &base.records {
            out.push(r.system, r.target_idx, r.score, r.fallback);
        }
    }
    out
}

pub fn run_each_from_all_x4(cands: &CandidateSet, rng_seed: u64) -> Result<SelectionResult> {
    let base = run_each_from_all(cands, &vec![1.0; cands.systems().len()], rng_seed)?;
    Ok(repeat(&base, 4))
}

pub fn run_rescored(cands: &CandidateSet, table: &SystemFactorTable, rng_seed: u64) -> Result<SelectionResult> {
    let factors = table.factors_for(cands.systems())?;
    run_each_from_all(cands, &factors, rng_seed)
}

/// Validates `config`, builds the candidate set and runs the strategy.
pub fn run_strategy(pool: &MultiSourcePool, seed: &SeedNGramSet, config: &StrategyConfig) -> Result<SelectionResult> {
    config.validate()?;
    let cands = CandidateSet::from_pool(pool, seed, config.count_mode)?;
    log::info!(
        "running {} over {} candidates ({} systems, {} targets)",
        config.kind,
        cands.len(),
        pool.systems().len(),
        pool.num_targets()
    );
    let unit = vec![1.0; cands.systems().len()];
    match config.kind {
        StrategyKind::FromAll => match config.budget {
            Budget::Count(n) => run_from_all(&cands, n),
            Budget::AllTargets => unreachable!("rejected by validate"),
        },
        StrategyKind::EachFromAll => run_each_from_all(&cands, &unit, config.rng_seed),
        StrategyKind::EachFromAllX4 => run_each_from_all_x4(&cands, config.rng_seed),
        StrategyKind::EachFromAllRescored => {
            let table = config.factors.as_ref().expect("checked by validate");
            run_rescored(&cands, table, config.rng_seed)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Sentence, SystemId, Vocab};

    fn pool(rows: &[[&str; 3]]) -> (MultiSourcePool, SeedNGramSet) {
        let mut v = Vocab::new();
        let mut enc = |s: &str, i: usize| Sentence::new(v.encode(&s.split_whitespace().collect::<Vec<_>>()), i);
        let targets = rows.iter().enumerate().map(|(i, r)| enc(r[0], i)).collect();
        let a = rows.iter().enumerate().map(|(i, r)| enc(r[1], i)).collect();
        let b = rows.iter().enumerate().map(|(i, r)| enc(r[2], i)).collect();
        let seed = vec![enc("a b c", 0)];
        let p = MultiSourcePool::new(
            v,
            targets,
            vec![(SystemId::new("A").unwrap(), a), (SystemId::new("B").unwrap(), b)],
        )
        .unwrap();
        let seed = SeedNGramSet::new(&seed, 3).unwrap();
        (p, seed)
    }

    #[test]
    fn parse_names() {
        for k in StrategyKind::ALL {
            assert_eq!(k.name().parse::<StrategyKind>().unwrap(), k);
        }
        assert!("random".parse::<StrategyKind>().is_err());
        assert_eq!("all-targets".parse::<Budget>().unwrap(), Budget::AllTargets);
        assert_eq!("12".parse::<Budget>().unwrap(), Budget::Count(12));
        assert!("-1".parse::<Budget>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(StrategyConfig::new(StrategyKind::FromAll, Budget::AllTargets).validate().is_err());
        assert!(StrategyConfig::new(StrategyKind::FromAll, Budget::Count(3)).validate().is_ok());
        assert!(StrategyConfig::new(StrategyKind::EachFromAll, Budget::Count(3)).validate().is_err());
        let rs = StrategyConfig::new(StrategyKind::EachFromAllRescored, Budget::AllTargets);
        let err = rs.validate().unwrap_err().to_string();
        assert!(err.contains("--factors"), "{err}");
    }

    #[test]
    fn from_all_duplicates_and_shortfall() {
        let (p, seed) = pool(&[["t0", "a b", "a b"], ["t1", "x", "y"]]);
        let cands = CandidateSet::from_pool(&p, &seed, CountMode::PerOccurrence).unwrap();
        let r = run_from_all(&cands, 3).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.records.iter().all(|x| x.target_idx == 0));
        assert_eq!(r.shortfall, 1);
        assert!(run_from_all(&cands, 0).unwrap().is_empty());
    }

    #[test]
    fn each_from_all_fallback_skips_empty_sources() {
        let (p, seed) = pool(&[["t0", "a b", "a"], ["t1", "x", ""], ["t2", "", ""]]);
        let cands = CandidateSet::from_pool(&p, &seed, CountMode::PerOccurrence).unwrap();
        for rng_seed in 0..20 {
            let r = run_each_from_all(&cands, &[1.0, 1.0], rng_seed).unwrap();
            let targets: Vec<_> = r.records.iter().map(|x| x.target_idx).collect();
            assert_eq!(targets, [0, 1, 2]);
            assert!(!r.records[0].fallback);
            assert_eq!(r.records[1].system, 0);
            assert!(r.records[1].fallback && r.records[2].fallback);
            assert_eq!(r.records[1].score, 0.0);
        }
    }

    #[test]
    fn x4_repeats() {
        let (p, seed) = pool(&[["t0", "a b", "a"], ["t1", "b c", "c"]]);
        let cands = CandidateSet::from_pool(&p, &seed, CountMode::PerOccurrence).unwrap();
        let base = run_each_from_all(&cands, &[1.0, 1.0], 0).unwrap();
        let x4 = run_each_from_all_x4(&cands, 0).unwrap();
        assert_eq!(x4.len(), 4 * base.len());
        for (i, r) in x4.records.iter().enumerate() {
            let b = base.records[i % base.len()];
            assert_eq!(r.rank, i + 1);
            assert_eq!((r.system, r.target_idx, r.score, r.fallback), (b.system, b.target_idx, b.score, b.fallback));
        }
        let want: Vec<_> = base.per_system_counts.iter().map(|c| c * 4).collect();
        assert_eq!(x4.per_system_counts, want);
    }
}
