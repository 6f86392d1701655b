//! Plain-text corpora and multi-system backtranslation pools.
//!
//! Corpora are pre-tokenized: one sentence per line, tokens separated by
//! ASCII spaces. Tokens are interned into a [`Vocab`] so that sentences are
//! compact `u32` sequences; every structure that compares tokens across files
//! (seed vs. pool, hypothesis vs. reference) must share the same vocabulary.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An interned token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TokenId(pub u32);

/// A token interner.
#[derive(Debug, Clone, Default)]
pub struct Vocab {
    ids: HashMap<Box<str>, TokenId>,
    words: Vec<Box<str>>,
}

impl Vocab {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, word: &str) -> TokenId {
        if let Some(&id) = self.ids.get(word) {
            return id;
        }
        let id = TokenId(u32::try_from(self.words.len()).expect("vocabulary exceeds u32 range"));
        self.words.push(word.into());
        self.ids.insert(word.into(), id);
        id
    }

    pub fn get(&self, word: &str) -> Option<TokenId> {
        self.ids.get(word).copied()
    }

    pub fn word(&self, id: TokenId) -> &str {
        &self.words[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Tokens of `words`, interning unseen ones.
    pub fn encode<S: AsRef<str>>(&mut self, words: &[S]) -> Vec<TokenId> {
        words.iter().map(|w| self.intern(w.as_ref())).collect()
    }

    pub fn words<'a>(&'a self, tokens: &'a [TokenId]) -> impl Iterator<Item = &'a str> + 'a {
        tokens.iter().map(move |&t| self.word(t))
    }

    /// Space-joined surface text of a token sequence.
    pub fn render(&self, tokens: &[TokenId]) -> String {
        let mut out = String::new();
        for (i, word) in self.words(tokens).enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(word);
        }
        out
    }

    /// Interns every word of `other` and returns the old-id -> new-id map.
    fn absorb(&mut self, other: &Vocab) -> Vec<TokenId> {
        other.words.iter().map(|w| self.intern(w)).collect()
    }
}

/// One line of a corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<TokenId>,
    /// 0-based line index in the file the sentence was read from.
    pub line_no: usize,
}

impl Sentence {
    pub fn new(tokens: Vec<TokenId>, line_no: usize) -> Self {
        Self { tokens, line_no }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// What to do with whitespace-only lines.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum EmptyLinePolicy {
    /// Drop the line; later sentences keep their original `line_no`.
    #[default]
    Skip,
    /// Fail on the first empty line.
    Error,
    /// Keep it as a zero-token sentence. Used for pools, where dropping a
    /// line would break alignment.
    Keep,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub empty_lines: EmptyLinePolicy,
    pub lowercase: bool,
}

impl LoadOptions {
    pub fn new(empty_lines: EmptyLinePolicy, lowercase: bool) -> Self {
        Self {
            empty_lines,
            lowercase,
        }
    }
}

pub fn load_corpus(path: impl AsRef<Path>, opts: LoadOptions, vocab: &mut Vocab) -> Result<Vec<Sentence>> {
    let path = path.as_ref();
    let text = read_utf8(path)?;
    parse_corpus(&text, path, opts, vocab)
}

/// Parses corpus text. `path` is only used in diagnostics.
pub fn parse_corpus(text: &str, path: &Path, opts: LoadOptions, vocab: &mut Vocab) -> Result<Vec<Sentence>> {
    let mut sentences = Vec::new();
    for (line_no, line) in lines(text).enumerate() {
        if line.trim().is_empty() {
            match opts.empty_lines {
                EmptyLinePolicy::Skip => continue,
                EmptyLinePolicy::Error => {
                    return Err(Error::EmptyLine {
                        path: path.to_path_buf(),
                        line: line_no,
                    })
                }
                EmptyLinePolicy::Keep => {
                    sentences.push(Sentence::new(Vec::new(), line_no));
                    continue;
                }
            }
        }
        let mut tokens = Vec::new();
        for token in line.split(' ').filter(|t| !t.is_empty()) {
            if token.chars().any(char::is_whitespace) {
                return Err(Error::BadToken {
                    path: path.to_path_buf(),
                    line: line_no,
                    token: token.to_string(),
                });
            }
            tokens.push(if opts.lowercase {
                vocab.intern(&token.to_lowercase())
            } else {
                vocab.intern(token)
            });
        }
        sentences.push(Sentence::new(tokens, line_no));
    }
    Ok(sentences)
}

/// Writes sentences one per line, LF-terminated.
pub fn write_corpus(path: impl AsRef<Path>, sentences: &[Sentence], vocab: &Vocab) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for s in sentences {
        writeln!(out, "{}", vocab.render(&s.tokens)).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn read_utf8(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    String::from_utf8(bytes).map_err(|e| Error::Utf8 {
        path: path.to_path_buf(),
        offset: e.utf8_error().valid_up_to(),
    })
}

/// Lines of `text`; a trailing newline does not start an extra line.
fn lines(text: &str) -> impl Iterator<Item = &str> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    let empty = text.is_empty();
    body.split('\n')
        .filter(move |_| !empty)
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
}

/// Name of a backtranslation system.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SystemId(String);

impl SystemId {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::Config("system name must be non-empty".into()));
        }
        Ok(Self(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A target-language corpus together with one aligned synthetic source
/// corpus per backtranslation system.
#[derive(Debug, Clone)]
pub struct MultiSourcePool {
    vocab: Vocab,
    targets: Vec<Sentence>,
    systems: Vec<SystemId>,
    sources: Vec<Vec<Sentence>>,
}

/// A (system, target line) pair: the unit the selection ranks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CandidatePair {
    /// Index into [`MultiSourcePool::systems`].
    pub system: usize,
    pub target_idx: usize,
}

impl MultiSourcePool {
    pub fn new(vocab: Vocab, targets: Vec<Sentence>, sources: Vec<(SystemId, Vec<Sentence>)>) -> Result<Self> {
        if sources.is_empty() {
            return Err(Error::Config("a pool needs at least one system".into()));
        }
        let mut systems = Vec::with_capacity(sources.len());
        let mut lists = Vec::with_capacity(sources.len());
        for (name, list) in sources {
            if systems.contains(&name) {
                return Err(Error::DuplicateSystem(name.0));
            }
            if list.len() != targets.len() {
                return Err(Error::Misaligned {
                    system: name.0,
                    file: PathBuf::from("<memory>"),
                    target: PathBuf::from("<memory>"),
                    expected: targets.len(),
                    found: list.len(),
                });
            }
            systems.push(name);
            lists.push(list);
        }
        Ok(Self {
            vocab,
            targets,
            systems,
            sources: lists,
        })
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    /// Mutable access for loading further corpora (seed, devsets) against
    /// the pool's vocabulary.
    pub fn vocab_mut(&mut self) -> &mut Vocab {
        &mut self.vocab
    }

    pub fn systems(&self) -> &[SystemId] {
        &self.systems
    }

    pub fn system_index(&self, name: &str) -> Option<usize> {
        self.systems.iter().position(|s| s.as_str() == name)
    }

    pub fn num_targets(&self) -> usize {
        self.targets.len()
    }

    pub fn targets(&self) -> &[Sentence] {
        &self.targets
    }

    pub fn sources(&self, system: usize) -> &[Sentence] {
        &self.sources[system]
    }

    pub fn source(&self, pair: CandidatePair) -> &Sentence {
        &self.sources[pair.system][pair.target_idx]
    }

    pub fn target(&self, pair: CandidatePair) -> &Sentence {
        &self.targets[pair.target_idx]
    }

    /// All candidates, system-major: every line of the first system, then the
    /// second, and so on.
    pub fn candidate_pairs(&self) -> impl Iterator<Item = CandidatePair> + '_ {
        (0..self.systems.len())
            .flat_map(move |system| (0..self.targets.len()).map(move |target_idx| CandidatePair { system, target_idx }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestSystem {
    pub name: String,
    pub source: PathBuf,
}

/// `{"target": path, "systems": [{"name": str, "source": path}, ...]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolManifest {
    pub target: PathBuf,
    pub systems: Vec<ManifestSystem>,
}

impl PoolManifest {
    /// Reads a manifest; relative paths are resolved against the manifest's
    /// directory.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = read_utf8(path)?;
        let mut manifest: PoolManifest = serde_json::from_str(&text).map_err(|e| Error::Manifest {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        manifest.target = base.join(&manifest.target);
        for sys in &mut manifest.systems {
            sys.source = base.join(&sys.source);
        }
        Ok(manifest)
    }

    fn validate(&self) -> Result<()> {
        if self.systems.is_empty() {
            return Err(Error::Manifest {
                path: self.target.clone(),
                message: "no systems listed".into(),
            });
        }
        for (i, sys) in self.systems.iter().enumerate() {
            if sys.name.is_empty() {
                return Err(Error::Manifest {
                    path: sys.source.clone(),
                    message: "empty system name".into(),
                });
            }
            if self.systems[..i].iter().any(|s| s.name == sys.name) {
                return Err(Error::DuplicateSystem(sys.name.clone()));
            }
        }
        Ok(())
    }
}

/// Loads every file named by the manifest and checks line alignment.
///
/// Files are parsed in parallel, each into its own vocabulary; the
/// vocabularies are then merged in manifest order so token ids do not depend
/// on thread scheduling.
pub fn load_pool(manifest: &PoolManifest, lowercase: bool) -> Result<MultiSourcePool> {
    manifest.validate()?;
    let opts = LoadOptions::new(EmptyLinePolicy::Keep, lowercase);
    let paths: Vec<&Path> = std::iter::once(manifest.target.as_path())
        .chain(manifest.systems.iter().map(|s| s.source.as_path()))
        .collect();
    let parsed: Vec<(Vocab, Vec<Sentence>)> = paths
        .par_iter()
        .map(|path| {
            let mut local = Vocab::new();
            let sentences = load_corpus(path, opts, &mut local)?;
            Ok((local, sentences))
        })
        .collect::<Result<_>>()?;

    let mut vocab = Vocab::new();
    let mut corpora = Vec::with_capacity(parsed.len());
    for (local, mut sentences) in parsed {
        let remap = vocab.absorb(&local);
        for s in &mut sentences {
            for t in &mut s.tokens {
                *t = remap[t.0 as usize];
            }
        }
        corpora.push(sentences);
    }

    let mut corpora = corpora.into_iter();
    let targets = corpora.next().expect("target corpus");
    let mut sources = Vec::with_capacity(manifest.systems.len());
    for (sys, list) in manifest.systems.iter().zip(corpora) {
        if list.len() != targets.len() {
            return Err(Error::Misaligned {
                system: sys.name.clone(),
                file: sys.source.clone(),
                target: manifest.target.clone(),
                expected: targets.len(),
                found: list.len(),
            });
        }
        sources.push((SystemId::new(sys.name.clone())?, list));
    }
    MultiSourcePool::new(vocab, targets, sources)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, policy: EmptyLinePolicy) -> Result<(Vocab, Vec<Sentence>)> {
        let mut vocab = Vocab::new();
        let s = parse_corpus(text, Path::new("t.txt"), LoadOptions::new(policy, false), &mut vocab)?;
        Ok((vocab, s))
    }

    fn words(vocab: &Vocab, s: &Sentence) -> Vec<String> {
        vocab.words(&s.tokens).map(str::to_string).collect()
    }

    #[test]
    fn parses_lines_in_order() {
        let (vocab, s) = parse("a b c\nd e\n", EmptyLinePolicy::Skip).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(words(&vocab, &s[0]), ["a", "b", "c"]);
        assert_eq!(s[0].line_no, 0);
        assert_eq!(words(&vocab, &s[1]), ["d", "e"]);
        assert_eq!(s[1].line_no, 1);
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        let (_, s) = parse("", EmptyLinePolicy::Skip).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn skip_preserves_line_numbers() {
        let (_, s) = parse("x\n\ny\n", EmptyLinePolicy::Skip).unwrap();
        assert_eq!(s.iter().map(|s| s.line_no).collect::<Vec<_>>(), [0, 2]);
    }

    #[test]
    fn empty_line_policies() {
        let err = parse("x\n  \ny\n", EmptyLinePolicy::Error).unwrap_err();
        assert!(matches!(err, Error::EmptyLine { line: 1, .. }));
        let (_, s) = parse("x\n\ny\n", EmptyLinePolicy::Keep).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s[1].is_empty());
    }

    #[test]
    fn last_line_without_newline() {
        let (_, s) = parse("a\nb", EmptyLinePolicy::Skip).unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn tab_inside_token_is_rejected() {
        let err = parse("a\tb c\n", EmptyLinePolicy::Skip).unwrap_err();
        assert!(matches!(err, Error::BadToken { line: 0, .. }));
    }

    #[test]
    fn lowercasing_is_opt_in() {
        let mut vocab = Vocab::new();
        let opts = LoadOptions::new(EmptyLinePolicy::Skip, true);
        let s = parse_corpus("Hola MUNDO\n", Path::new("t"), opts, &mut vocab).unwrap();
        assert_eq!(vocab.render(&s[0].tokens), "hola mundo");
        let (vocab, s) = parse("Hola\n", EmptyLinePolicy::Skip).unwrap();
        assert_eq!(vocab.render(&s[0].tokens), "Hola");
    }

    #[test]
    fn invalid_utf8_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        fs::write(&path, b"ok\n\xff\xfe\n").unwrap();
        let err = load_corpus(&path, LoadOptions::default(), &mut Vocab::new()).unwrap_err();
        assert!(matches!(err, Error::Utf8 { offset: 3, .. }));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_corpus("/nonexistent/file.txt", LoadOptions::default(), &mut Vocab::new()).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn interner_is_stable() {
        let mut v = Vocab::new();
        let a = v.intern("a");
        let b = v.intern("b");
        assert_ne!(a, b);
        assert_eq!(v.intern("a"), a);
        assert_eq!(v.word(b), "b");
        assert_eq!(v.get("zzz"), None);
    }

    #[test]
    fn in_memory_pool_validation() {
        let mut vocab = Vocab::new();
        let t = vec![Sentence::new(vocab.encode(&["x"]), 0)];
        let a = SystemId::new("a").unwrap();
        let err = MultiSourcePool::new(vocab.clone(), t.clone(), vec![(a.clone(), t.clone()), (a.clone(), t.clone())])
            .unwrap_err();
        assert!(matches!(err, Error::DuplicateSystem(_)));
        let err = MultiSourcePool::new(vocab.clone(), t.clone(), vec![(a.clone(), vec![])]).unwrap_err();
        assert!(matches!(err, Error::Misaligned { expected: 1, found: 0, .. }));
        assert!(MultiSourcePool::new(vocab, t, vec![]).is_err());
        assert!(SystemId::new("").is_err());
    }
}
