use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fdasel::corpus::{load_corpus, EmptyLinePolicy, LoadOptions, Vocab};
use fdasel::diversity::{diversity as diversity_scores, flatten};
use fdasel::metrics::{evaluate as quality, BleuSmoothing};
use fdasel::report::{diversity_tsv, histogram_csv, histogram_tsv, lengths_tsv};
use fdasel::rescore::SystemMeasurement;
use fdasel::selection_io::{read_selection, write_selection_file};
use fdasel::{
    build_factor_table, diversity_table, length_table, load_pool, run_strategy, selection_histogram, Budget, CountMode,
    Error, MultiSourcePool, PoolManifest, ReportBundle, SeedNGramSet, Sentence, StrategyConfig, StrategyKind,
    SystemFactorTable, SystemId,
};
use serde::Serialize;

use crate::{DiversityArgs, EvaluateArgs, ReportArgs, RescoreArgs, SelectArgs, Smoothing};

/// Process exit status of a failed command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum FailureKind {
    Internal = 1,
    Config = 2,
    Data = 3,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: FailureKind,
    pub message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            kind: FailureKind::Config,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self {
            kind: FailureKind::Internal,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let kind = if e.is_config() { FailureKind::Config } else { FailureKind::Data };
        Self {
            kind,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

// Output files are ours to write; failing to do so is not the input's fault.
fn write_output(path: &Path, contents: &str) -> CmdResult {
    fs::write(path, contents).map_err(|e| Failure::internal(format!("cannot write {}: {e}", path.display())))
}

fn create_dir(path: &Path) -> CmdResult {
    fs::create_dir_all(path).map_err(|e| Failure::internal(format!("cannot create {}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct SelectEcho<'a> {
    strategy: &'a str,
    seed: &'a Path,
    pool: &'a Path,
    out: &'a Path,
    budget: &'a str,
    factors: Option<&'a Path>,
    rng_seed: u64,
    order: u16,
    lowercase: bool,
    count_distinct: bool,
}

#[derive(Serialize)]
struct SystemCount<'a> {
    system: &'a str,
    selected: usize,
}

#[derive(Serialize)]
struct SelectSummary<'a> {
    tool: &'static str,
    version: &'static str,
    config: SelectEcho<'a>,
    selected: usize,
    fallback: usize,
    shortfall: usize,
    per_system_counts: Vec<SystemCount<'a>>,
    wall_time_secs: f64,
}

pub fn select(a: &SelectArgs) -> CmdResult {
    let start = Instant::now();
    let kind: StrategyKind = a.strategy.parse()?;
    let budget: Budget = a.budget.parse()?;
    let mut config = StrategyConfig::new(kind, budget);
    config.rng_seed = a.rng_seed;
    if a.count_distinct {
        config.count_mode = CountMode::Distinct;
    }
    // checked with a placeholder so that flag errors come before any file is read
    config.factors = a.factors.as_ref().map(|_| SystemFactorTable::default());
    config.validate()?;
    if let Some(path) = &a.factors {
        config.factors = Some(SystemFactorTable::from_path(path)?);
    }

    let manifest = PoolManifest::from_path(&a.pool)?;
    let mut pool = load_pool(&manifest, a.lowercase)?;
    let seed_lines = load_corpus(
        &a.seed,
        LoadOptions::new(EmptyLinePolicy::Skip, a.lowercase),
        pool.vocab_mut(),
    )?;
    let seed = SeedNGramSet::new(&seed_lines, a.order.into())?;
    log::info!("seed: {} sentences, {} distinct n-grams", seed_lines.len(), seed.len());

    let result = run_strategy(&pool, &seed, &config)?;
    create_dir(&a.out)?;
    let sel_path = a.out.join("selection.tsv");
    write_selection_file(&sel_path, &result, &pool)
        .map_err(|e| Failure::internal(format!("cannot write selection: {e}")))?;

    let summary = SelectSummary {
        tool: "fdasel",
        version: env!("CARGO_PKG_VERSION"),
        config: SelectEcho {
            strategy: kind.name(),
            seed: &a.seed,
            pool: &a.pool,
            out: &a.out,
            budget: &a.budget,
            factors: a.factors.as_deref(),
            rng_seed: a.rng_seed,
            order: a.order,
            lowercase: a.lowercase,
            count_distinct: a.count_distinct,
        },
        selected: result.len(),
        fallback: result.fallback_count(),
        shortfall: result.shortfall,
        per_system_counts: result
            .systems
            .iter()
            .zip(&result.per_system_counts)
            .map(|(s, &n)| SystemCount {
                system: s.as_str(),
                selected: n,
            })
            .collect(),
        wall_time_secs: round4(start.elapsed().as_secs_f64()),
    };
    write_output(&a.out.join("summary.json"), &to_json(&summary))?;
    log::info!("wrote {} records to {}", result.len(), sel_path.display());
    Ok(())
}

#[derive(Serialize)]
struct QualityJson {
    bleu: f64,
    ter: f64,
    chrf3: f64,
}

pub fn evaluate(a: &EvaluateArgs) -> CmdResult {
    let opts = LoadOptions::new(EmptyLinePolicy::Keep, a.lowercase);
    let mut vocab = Vocab::new();
    let hyps = load_corpus(&a.hyp, opts, &mut vocab)?;
    let refs = load_corpus(&a.reference, opts, &mut vocab)?;
    let smoothing = match a.smoothing {
        Smoothing::None => BleuSmoothing::None,
        Smoothing::AddOne => BleuSmoothing::AddOne,
    };
    let q = quality(&hyps, &refs, &vocab, smoothing)?;
    let out = QualityJson {
        bleu: round4(q.bleu),
        ter: round4(q.ter),
        chrf3: round4(q.chrf3),
    };
    println!("{}", serde_json::to_string(&out).expect("scores serialize"));
    Ok(())
}

#[derive(Serialize)]
struct DiversityJson {
    ttr: f64,
    yules_i: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    yules_i_reason: Option<&'static str>,
    mtld: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mtld_reason: Option<&'static str>,
}

pub fn diversity(a: &DiversityArgs) -> CmdResult {
    let mut vocab = Vocab::new();
    let doc = load_corpus(&a.input, LoadOptions::new(EmptyLinePolicy::Skip, a.lowercase), &mut vocab)?;
    let d = diversity_scores(&doc)?;
    let yules = d.yules_i.is_finite().then(|| round4(d.yules_i));
    let out = DiversityJson {
        ttr: round4(d.ttr),
        yules_i: yules,
        yules_i_reason: yules.is_none().then_some("every type occurs exactly once"),
        mtld: d.mtld.map(round4),
        mtld_reason: d.mtld.is_none().then_some("a pass completed no factor"),
    };
    println!("{}", serde_json::to_string(&out).expect("scores serialize"));
    Ok(())
}

fn parse_system_spec(spec: &str) -> Result<SystemMeasurement, Failure> {
    let bad = || Failure::config(format!("--system expects NAME=DEVSET_HYP[,BACKTRANSLATION], got {spec:?}"));
    let (name, files) = spec.split_once('=').ok_or_else(bad)?;
    let (hyp, bt) = match files.split_once(',') {
        Some((h, b)) => (h, Some(b)),
        None => (files, None),
    };
    if hyp.is_empty() || bt == Some("") {
        return Err(bad());
    }
    Ok(SystemMeasurement {
        system: SystemId::new(name).map_err(|_| bad())?,
        devset_hypothesis: PathBuf::from(hyp),
        backtranslation: bt.map(PathBuf::from),
    })
}

pub fn rescore_factors(a: &RescoreArgs) -> CmdResult {
    let table = match (&a.supplied, &a.reference) {
        (Some(path), _) => {
            if !a.systems.is_empty() || a.pool.is_some() {
                return Err(Failure::config("--supplied cannot be combined with --system or --pool"));
            }
            SystemFactorTable::from_path(path)?
        }
        (None, Some(reference)) => {
            if a.systems.is_empty() {
                return Err(Failure::config("computed mode needs at least one --system"));
            }
            let systems = a.systems.iter().map(|s| parse_system_spec(s)).collect::<Result<Vec<_>, _>>()?;
            let pool: Option<MultiSourcePool> = match &a.pool {
                Some(p) => Some(load_pool(&PoolManifest::from_path(p)?, a.lowercase)?),
                None => None,
            };
            build_factor_table(reference, &systems, pool.as_ref(), a.lowercase)?
        }
        (None, None) => return Err(Failure::config("give either --supplied or --ref with --system")),
    };
    let json = table.to_json();
    match &a.out {
        Some(path) => write_output(path, &json),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

pub fn report(a: &ReportArgs) -> CmdResult {
    if a.bin_size == 0 {
        return Err(Failure::config("--bin-size must be at least 1"));
    }
    let manifest = PoolManifest::from_path(&a.pool)?;
    let mut pool = load_pool(&manifest, a.lowercase)?;
    let devset = match &a.devset {
        Some(p) => Some(load_corpus(p, LoadOptions::new(EmptyLinePolicy::Skip, a.lowercase), pool.vocab_mut())?),
        None => None,
    };
    let result = read_selection(&a.selection, &pool)?;
    let histogram = selection_histogram(&result, a.bin_size)?;

    let selected: Vec<Sentence> = result.records.iter().map(|r| pool.source(r.pair()).clone()).collect();
    let labels: Vec<String> = pool.systems().iter().map(|s| format!("pool:{s}")).collect();
    let mut docs: Vec<(&str, &[Sentence])> = Vec::new();
    if selected.is_empty() {
        log::warn!("the selection is empty; omitting it from the tables");
    } else {
        docs.push(("selected", &selected));
    }
    for (i, label) in labels.iter().enumerate() {
        docs.push((label, pool.sources(i)));
    }
    if let Some(d) = &devset {
        docs.push(("devset", d));
    }
    let lengths = length_table(docs.iter().copied())?;
    let with_tokens = docs.iter().copied().filter(|(label, doc)| {
        let keep = !flatten(doc).is_empty();
        if !keep {
            log::warn!("{label} has no tokens; omitted from the diversity table");
        }
        keep
    });
    let diversity = diversity_table(with_tokens)?;

    create_dir(&a.out)?;
    write_output(&a.out.join("histogram.tsv"), &histogram_tsv(&histogram))?;
    if a.csv {
        write_output(&a.out.join("histogram.csv"), &histogram_csv(&histogram))?;
    }
    write_output(&a.out.join("lengths.tsv"), &lengths_tsv(&lengths))?;
    write_output(&a.out.join("diversity.tsv"), &diversity_tsv(&diversity))?;
    let bundle = ReportBundle {
        per_system_counts: result.systems.iter().cloned().zip(result.per_system_counts.iter().copied()).collect(),
        histogram,
        lengths,
        diversity,
    };
    write_output(&a.out.join("report.json"), &bundle.to_json())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn system_specs() {
        let m = parse_system_spec("trans=dev.hyp,bt.txt").unwrap();
        assert_eq!(m.system.as_str(), "trans");
        assert_eq!(m.devset_hypothesis, PathBuf::from("dev.hyp"));
        assert_eq!(m.backtranslation, Some(PathBuf::from("bt.txt")));
        assert_eq!(parse_system_spec("smt=dev.hyp").unwrap().backtranslation, None);
        for bad in ["smt", "=dev.hyp", "smt=", "smt=dev.hyp,"] {
            assert_eq!(parse_system_spec(bad).unwrap_err().kind, FailureKind::Config, "{bad}");
        }
    }

    #[test]
    fn rounding() {
        assert_eq!(round4(66.666_666), 66.6667);
        assert_eq!(round4(100.0), 100.0);
    }
}
