//! Python bindings: pools, selection strategies, metrics and factors.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use fdasel::corpus::parse_corpus;
use fdasel::diversity::diversity as diversity_scores;
use fdasel::metrics::{evaluate as quality, BleuSmoothing};
use fdasel::rescore::SuppliedValues;
use fdasel::selection_io::{write_selection, write_selection_file};
use fdasel::{
    fda_score as score_one, load_pool, run_strategy, selection_histogram, Budget, CountMode, EmptyLinePolicy, Error,
    LoadOptions, MultiSourcePool, PoolManifest, SeedNGramSet, SelectedCounts, SelectionResult, Sentence,
    StrategyConfig, StrategyKind, SystemFactorTable, SystemId, Vocab, DEFAULT_BIN_SIZE,
};
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(fdasel, FdaselError, PyValueError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => FdaselError::new_err(other.to_string()),
    }
}

/// Encodes one sentence per string. Strings must not contain line breaks.
fn encode_lines(lines: &[String], vocab: &mut Vocab, opts: LoadOptions) -> Result<Vec<Sentence>, Error> {
    if let Some(i) = lines.iter().position(|l| l.contains('\n')) {
        return Err(Error::Format {
            path: PathBuf::from("<python>"),
            line: i + 1,
            message: "sentence contains a line break".into(),
        });
    }
    let mut text = lines.join("\n");
    text.push('\n');
    if lines.is_empty() {
        text.clear();
    }
    parse_corpus(&text, Path::new("<python>"), opts, vocab)
}

fn keep(lowercase: bool) -> LoadOptions {
    LoadOptions::new(EmptyLinePolicy::Keep, lowercase)
}

/// A target corpus with one aligned source corpus per system.
#[pyclass(name = "Pool", module = "fdasel")]
struct PyPool {
    inner: MultiSourcePool,
    lowercase: bool,
}

#[pymethods]
impl PyPool {
    /// `sources` is a list of `(system_name, lines)` in system order.
    #[new]
    #[pyo3(signature = (targets, sources, lowercase = false))]
    fn new(targets: Vec<String>, sources: Vec<(String, Vec<String>)>, lowercase: bool) -> PyResult<Self> {
        let mut vocab = Vocab::new();
        let targets = encode_lines(&targets, &mut vocab, keep(lowercase)).map_err(to_py)?;
        let mut systems = Vec::with_capacity(sources.len());
        for (name, lines) in sources {
            let sents = encode_lines(&lines, &mut vocab, keep(lowercase)).map_err(to_py)?;
            systems.push((SystemId::new(name).map_err(to_py)?, sents));
        }
        let inner = MultiSourcePool::new(vocab, targets, systems).map_err(to_py)?;
        Ok(Self { inner, lowercase })
    }

    #[staticmethod]
    #[pyo3(signature = (path, lowercase = false))]
    fn from_manifest(path: PathBuf, lowercase: bool) -> PyResult<Self> {
        let manifest = PoolManifest::from_path(path).map_err(to_py)?;
        let inner = load_pool(&manifest, lowercase).map_err(to_py)?;
        Ok(Self { inner, lowercase })
    }

    #[getter]
    fn systems(&self) -> Vec<String> {
        self.inner.systems().iter().map(|s| s.to_string()).collect()
    }

    #[getter]
    fn num_targets(&self) -> usize {
        self.inner.num_targets()
    }

    fn source(&self, system: &str, line: usize) -> PyResult<String> {
        let idx = self
            .inner
            .system_index(system)
            .ok_or_else(|| to_py(Error::UnknownSystem(system.into())))?;
        let sent = self
            .inner
            .sources(idx)
            .get(line)
            .ok_or_else(|| FdaselError::new_err(format!("line {line} is out of range")))?;
        Ok(self.inner.vocab().render(&sent.tokens))
    }

    /// Runs a selection strategy. `budget=None` means one record per target;
    /// `factors` maps system names to positive multipliers.
    #[pyo3(signature = (seed, strategy = "each-from-all", budget = None, factors = None, rng_seed = 0, order = 3, count_distinct = false))]
    #[allow(clippy::too_many_arguments)]
    fn select(
        &mut self,
        seed: Vec<String>,
        strategy: &str,
        budget: Option<usize>,
        factors: Option<HashMap<String, f64>>,
        rng_seed: u64,
        order: usize,
        count_distinct: bool,
    ) -> PyResult<PySelection> {
        let kind: StrategyKind = strategy.parse().map_err(to_py)?;
        let mut config = StrategyConfig::new(kind, budget.map_or(Budget::AllTargets, Budget::Count));
        config.rng_seed = rng_seed;
        if count_distinct {
            config.count_mode = CountMode::Distinct;
        }
        if let Some(f) = factors {
            let entries = f
                .into_iter()
                .map(|(name, phi)| {
                    let values = SuppliedValues {
                        phi: Some(phi),
                        ..Default::default()
                    };
                    Ok((SystemId::new(name)?, values))
                })
                .collect::<Result<Vec<_>, Error>>()
                .map_err(to_py)?;
            config.factors = Some(SystemFactorTable::from_supplied(entries).map_err(to_py)?);
        }
        let opts = LoadOptions::new(EmptyLinePolicy::Skip, self.lowercase);
        let seed_lines = encode_lines(&seed, self.inner.vocab_mut(), opts).map_err(to_py)?;
        let seed = SeedNGramSet::new(&seed_lines, order).map_err(to_py)?;
        let result = run_strategy(&self.inner, &seed, &config).map_err(to_py)?;
        Ok(PySelection { inner: result })
    }

    /// The selection in the TSV layout written by the command-line tool.
    fn selection_tsv(&self, selection: &PySelection) -> PyResult<String> {
        let mut buf = Vec::new();
        write_selection(&mut buf, &selection.inner, &self.inner).map_err(|e| PyOSError::new_err(e.to_string()))?;
        String::from_utf8(buf).map_err(|e| FdaselError::new_err(e.to_string()))
    }

    fn write_selection(&self, selection: &PySelection, path: PathBuf) -> PyResult<()> {
        write_selection_file(&path, &selection.inner, &self.inner).map_err(to_py)
    }
}

#[pyclass(name = "Selection", module = "fdasel")]
struct PySelection {
    inner: SelectionResult,
}

#[pymethods]
impl PySelection {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// `(rank, score, system, target_line, fallback)` tuples in rank order.
    #[getter]
    fn records(&self) -> Vec<(usize, f64, String, usize, bool)> {
        self.inner
            .records
            .iter()
            .map(|r| (r.rank, r.score, self.inner.systems[r.system].to_string(), r.target_idx, r.fallback))
            .collect()
    }

    #[getter]
    fn per_system_counts(&self) -> HashMap<String, usize> {
        self.inner
            .systems
            .iter()
            .zip(&self.inner.per_system_counts)
            .map(|(s, &n)| (s.to_string(), n))
            .collect()
    }

    #[getter]
    fn shortfall(&self) -> usize {
        self.inner.shortfall
    }

    #[getter]
    fn fallback_count(&self) -> usize {
        self.inner.fallback_count()
    }

    #[pyo3(signature = (bin_size = DEFAULT_BIN_SIZE))]
    fn histogram<'py>(&self, py: Python<'py>, bin_size: usize) -> PyResult<Bound<'py, PyDict>> {
        let h = selection_histogram(&self.inner, bin_size).map_err(to_py)?;
        let out = PyDict::new(py);
        out.set_item("bin_size", h.bin_size)?;
        out.set_item("systems", h.systems.iter().map(|s| s.to_string()).collect::<Vec<_>>())?;
        out.set_item("first_ranks", h.bins.iter().map(|b| b.first_rank).collect::<Vec<_>>())?;
        out.set_item("counts", h.bins.iter().map(|b| b.counts.clone()).collect::<Vec<_>>())?;
        out.set_item("last_bin_extrapolated", h.last_bin_extrapolated)?;
        out.set_item("extrapolation_factor", h.extrapolation_factor)?;
        out.set_item("extrapolated_last", h.extrapolated_last)?;
        Ok(out)
    }
}

/// Corpus BLEU, TER and chrF3 of aligned hypothesis and reference lines.
#[pyfunction]
#[pyo3(signature = (hypotheses, references, smoothing = "none", lowercase = false))]
fn evaluate<'py>(
    py: Python<'py>,
    hypotheses: Vec<String>,
    references: Vec<String>,
    smoothing: &str,
    lowercase: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let smoothing = match smoothing {
        "none" => BleuSmoothing::None,
        "add-one" => BleuSmoothing::AddOne,
        other => return Err(FdaselError::new_err(format!("unknown smoothing {other:?}"))),
    };
    let mut vocab = Vocab::new();
    let hyps = encode_lines(&hypotheses, &mut vocab, keep(lowercase)).map_err(to_py)?;
    let refs = encode_lines(&references, &mut vocab, keep(lowercase)).map_err(to_py)?;
    let q = quality(&hyps, &refs, &vocab, smoothing).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("bleu", q.bleu)?;
    out.set_item("ter", q.ter)?;
    out.set_item("chrf3", q.chrf3)?;
    Ok(out)
}

/// TTR, Yule's I and MTLD of the lines read as one document. Undefined
/// values come back as `None`.
#[pyfunction]
fn diversity<'py>(py: Python<'py>, lines: Vec<String>) -> PyResult<Bound<'py, PyDict>> {
    let mut vocab = Vocab::new();
    let doc = encode_lines(&lines, &mut vocab, keep(false)).map_err(to_py)?;
    let d = diversity_scores(&doc).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("ttr", d.ttr)?;
    out.set_item("yules_i", d.yules_i.is_finite().then_some(d.yules_i))?;
    out.set_item("mtld", d.mtld)?;
    Ok(out)
}

#[pyfunction]
fn compute_phi(bleu: f64, ter: f64, mtld: f64) -> PyResult<f64> {
    fdasel::compute_phi(bleu, ter, mtld).map_err(to_py)
}

/// Score of `sentence` against `seed` after the sentences in `selected`
/// have been taken.
#[pyfunction]
#[pyo3(signature = (sentence, seed, selected = Vec::new(), order = 3))]
fn fda_score(sentence: String, seed: Vec<String>, selected: Vec<String>, order: usize) -> PyResult<f64> {
    let mut vocab = Vocab::new();
    let opts = keep(false);
    let seed = encode_lines(&seed, &mut vocab, opts).map_err(to_py)?;
    let seed = SeedNGramSet::new(&seed, order).map_err(to_py)?;
    let mut counts = SelectedCounts::new(&seed);
    for s in encode_lines(&selected, &mut vocab, opts).map_err(to_py)? {
        counts.add_selected(&seed, &s);
    }
    let s = encode_lines(&[sentence], &mut vocab, opts).map_err(to_py)?;
    Ok(score_one(&s[0], &seed, &counts))
}

#[pymodule]
#[pyo3(name = "fdasel")]
fn fdasel_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("FdaselError", m.py().get_type::<FdaselError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyPool>()?;
    m.add_class::<PySelection>()?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(diversity, m)?)?;
    m.add_function(wrap_pyfunction!(compute_phi, m)?)?;
    m.add_function(wrap_pyfunction!(fda_score, m)?)?;
    Ok(())
}
