//! Feature-decay selection of backtranslated parallel data from several MT
//! systems, with quality and diversity metrics and analysis reports.

pub mod corpus;
pub mod diversity;
pub mod error;
pub mod fda;
pub mod metrics;
pub mod ngram;
pub mod report;
pub mod rescore;
pub mod selection_io;
pub mod strategy;

pub use corpus::{
    load_corpus, load_pool, CandidatePair, EmptyLinePolicy, LoadOptions, MultiSourcePool, PoolManifest, Sentence,
    SystemId, TokenId, Vocab,
};
pub use error::{Error, Result};
pub use fda::{fda_score, select_greedy, CandidateSet, Exclusivity, SelectionParams, SelectionRecord, SelectionResult};
pub use ngram::{CountMode, SeedNGramSet, SelectedCounts};
pub use report::{diversity_table, length_table, selection_histogram, BinHistogram, ReportBundle, DEFAULT_BIN_SIZE};
pub use rescore::{build_factor_table, compute_phi, SystemFactorTable};
pub use strategy::{run_strategy, Budget, StrategyConfig, StrategyKind};
