//! Selection output as TSV.
//!
//! Header `rank effective_score system target_line_no source_text
//! target_text`, scores with 9 decimals, line numbers 0-based.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::corpus::{read_utf8, MultiSourcePool};
use crate::error::{Error, Result};
use crate::fda::SelectionResult;

pub const SELECTION_HEADER: &str = "rank\teffective_score\tsystem\ttarget_line_no\tsource_text\ttarget_text";

pub fn write_selection<W: Write>(mut w: W, result: &SelectionResult, pool: &MultiSourcePool) -> io::Result<()> {
    writeln!(w, "{SELECTION_HEADER}")?;
    let vocab = pool.vocab();
    for r in &result.records {
        let pair = r.pair();
        writeln!(
            w,
            "{}\t{:.9}\t{}\t{}\t{}\t{}",
            r.rank,
            r.score,
            result.systems[r.system],
            pool.target(pair).line_no,
            vocab.render(&pool.source(pair).tokens),
            vocab.render(&pool.target(pair).tokens),
        )?;
    }
    w.flush()
}

pub fn write_selection_file(path: &Path, result: &SelectionResult, pool: &MultiSourcePool) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_selection(io::BufWriter::new(file), result, pool).map_err(|e| Error::io(path, e))
}

/// Reads a selection file back against the pool it was made from.
///
/// Scores keep their printed precision. Records with score 0 are marked as
/// fallback assignments, the only way a zero-score record can arise.
pub fn read_selection(path: &Path, pool: &MultiSourcePool) -> Result<SelectionResult> {
    let text = read_utf8(path)?;
    let mut lines = text.lines();
    let bad = |line: usize, message: String| Error::Format {
        path: path.to_path_buf(),
        line,
        message,
    };
    match lines.next() {
        Some(h) if h == SELECTION_HEADER => {}
        _ => return Err(bad(1, format!("expected header {SELECTION_HEADER:?}"))),
    }
    let mut result = SelectionResult::empty(pool.systems().to_vec());
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 6 {
            return Err(bad(line_no, format!("expected 6 fields, found {}", fields.len())));
        }
        let rank: usize = fields[0]
            .parse()
            .map_err(|_| bad(line_no, format!("invalid rank {:?}", fields[0])))?;
        if rank != result.len() + 1 {
            return Err(bad(line_no, format!("rank {rank} out of sequence")));
        }
        let score: f64 = fields[1]
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite() && *s >= 0.0)
            .ok_or_else(|| bad(line_no, format!("invalid score {:?}", fields[1])))?;
        let system = pool
            .system_index(fields[2])
            .ok_or_else(|| Error::UnknownSystem(fields[2].to_string()))?;
        let target: usize = fields[3]
            .parse()
            .ok()
            .filter(|&t| t < pool.num_targets())
            .ok_or_else(|| bad(line_no, format!("target line {:?} is not in the pool", fields[3])))?;
        result.push(system, target, score, score == 0.0);
    }
    Ok(result)
}
