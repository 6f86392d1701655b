//! Analysis artifacts: per-system selection counts in rank bins, mean
//! sentence lengths and lexical diversity tables.

use std::fmt::Write as _;

use serde::Serialize;

use crate::corpus::{Sentence, SystemId};
use crate::diversity::diversity;
use crate::error::{Error, Result};
use crate::fda::SelectionResult;

pub const DEFAULT_BIN_SIZE: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bin {
    /// 1-based rank of the first record in the bin.
    pub first_rank: usize,
    pub size: usize,
    /// Raw counts, aligned with the histogram's systems.
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinHistogram {
    pub bin_size: usize,
    pub systems: Vec<SystemId>,
    pub bins: Vec<Bin>,
    /// Set when the last bin is partial.
    pub last_bin_extrapolated: bool,
    /// `bin_size / size` of the last bin; 1 when it is full.
    pub extrapolation_factor: f64,
    /// Last-bin counts scaled by `extrapolation_factor`.
    pub extrapolated_last: Vec<f64>,
}

impl BinHistogram {
    /// Raw counts summed over all bins.
    pub fn totals(&self) -> Vec<usize> {
        let mut t = vec![0; self.systems.len()];
        for b in &self.bins {
            for (acc, c) in t.iter_mut().zip(&b.counts) {
                *acc += c;
            }
        }
        t
    }
}

/// Splits the records, in rank order, into consecutive bins of `bin_size`.
pub fn selection_histogram(result: &SelectionResult, bin_size: usize) -> Result<BinHistogram> {
    if bin_size == 0 {
        return Err(Error::Config("bin size must be at least 1".into()));
    }
    let n = result.systems.len();
    let bins: Vec<Bin> = result
        .records
        .chunks(bin_size)
        .enumerate()
        .map(|(i, chunk)| {
            let mut counts = vec![0; n];
            for r in chunk {
                counts[r.system] += 1;
            }
            Bin {
                first_rank: i * bin_size + 1,
                size: chunk.len(),
                counts,
            }
        })
        .collect();
    let (extrapolated, factor, scaled) = match bins.last() {
        Some(last) => {
            let factor = bin_size as f64 / last.size as f64;
            let scaled = last.counts.iter().map(|&c| c as f64 * factor).collect();
            (last.size < bin_size, factor, scaled)
        }
        None => (false, 1.0, Vec::new()),
    };
    Ok(BinHistogram {
        bin_size,
        systems: result.systems.clone(),
        bins,
        last_bin_extrapolated: extrapolated,
        extrapolation_factor: factor,
        extrapolated_last: scaled,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthRow {
    pub label: String,
    pub sentences: usize,
    pub tokens: usize,
    pub mean: f64,
}

/// Mean tokens per sentence for each labelled corpus, in input order.
pub fn length_table<'a>(corpora: impl IntoIterator<Item = (&'a str, &'a [Sentence])>) -> Result<Vec<LengthRow>> {
    corpora
        .into_iter()
        .map(|(label, doc)| {
            if doc.is_empty() {
                return Err(Error::EmptyCorpus(label.to_string()));
            }
            let tokens: usize = doc.iter().map(Sentence::len).sum();
            Ok(LengthRow {
                label: label.to_string(),
                sentences: doc.len(),
                tokens,
                mean: tokens as f64 / doc.len() as f64,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiversityRow {
    pub label: String,
    /// `None` when every type occurs once.
    pub yules_i_x100: Option<f64>,
    /// `None` when MTLD is undefined.
    pub mtld: Option<f64>,
    pub ttr_x100: f64,
}

/// Yule's I and TTR scaled by 100, and MTLD, for each labelled document.
pub fn diversity_table<'a>(docs: impl IntoIterator<Item = (&'a str, &'a [Sentence])>) -> Result<Vec<DiversityRow>> {
    docs.into_iter()
        .map(|(label, doc)| {
            let d = diversity(doc)?;
            Ok(DiversityRow {
                label: label.to_string(),
                yules_i_x100: d.yules_i.is_finite().then_some(d.yules_i * 100.0),
                mtld: d.mtld,
                ttr_x100: d.ttr * 100.0,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportBundle {
    pub histogram: BinHistogram,
    pub per_system_counts: Vec<(SystemId, usize)>,
    pub lengths: Vec<LengthRow>,
    pub diversity: Vec<DiversityRow>,
}

impl ReportBundle {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn opt2(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.2}"))
}

/// One row per bin: rank range, size, scale, raw counts per system, then
/// the counts multiplied by the scale (differs from raw only in a partial
/// last bin).
pub fn histogram_tsv(h: &BinHistogram) -> String {
    let mut out = String::from("bin\tfirst_rank\tlast_rank\tsize\tscale");
    for s in &h.systems {
        write!(out, "\t{s}").unwrap();
    }
    for s in &h.systems {
        write!(out, "\t{s}_scaled").unwrap();
    }
    out.push('\n');
    for (i, b) in h.bins.iter().enumerate() {
        let scale = if i + 1 == h.bins.len() { h.extrapolation_factor } else { 1.0 };
        write!(out, "{}\t{}\t{}\t{}\t{scale:.4}", i + 1, b.first_rank, b.first_rank + b.size - 1, b.size).unwrap();
        for c in &b.counts {
            write!(out, "\t{c}").unwrap();
        }
        for c in &b.counts {
            write!(out, "\t{:.2}", *c as f64 * scale).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Long format `bin,system,raw,scaled` for plotting tools.
pub fn histogram_csv(h: &BinHistogram) -> String {
    let mut out = String::from("bin,system,raw,scaled\n");
    for (i, b) in h.bins.iter().enumerate() {
        let scale = if i + 1 == h.bins.len() { h.extrapolation_factor } else { 1.0 };
        for (s, c) in h.systems.iter().zip(&b.counts) {
            writeln!(out, "{},{},{c},{:.2}", i + 1, csv_field(s.as_str()), *c as f64 * scale).unwrap();
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn lengths_tsv(rows: &[LengthRow]) -> String {
    let mut out = String::from("corpus\tsentences\ttokens\tmean_length\n");
    for r in rows {
        writeln!(out, "{}\t{}\t{}\t{:.2}", r.label, r.sentences, r.tokens, r.mean).unwrap();
    }
    out
}

pub fn diversity_tsv(rows: &[DiversityRow]) -> String {
    let mut out = String::from("corpus\tyules_i_x100\tmtld\tttr_x100\n");
    for r in rows {
        writeln!(out, "{}\t{}\t{}\t{:.2}", r.label, opt2(r.yules_i_x100), opt2(r.mtld), r.ttr_x100).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{TokenId, Vocab};

    fn result(systems: &[usize], n_systems: usize) -> SelectionResult {
        let names = (0..n_systems).map(|i| SystemId::new(format!("s{i}")).unwrap()).collect();
        let mut r = SelectionResult::empty(names);
        for (t, &s) in systems.iter().enumerate() {
            r.push(s, t, 1.0, false);
        }
        r
    }

    #[test]
    fn bins_with_partial_tail() {
        let sys: Vec<usize> = (0..250).map(|i| i % 2).collect();
        let h = selection_histogram(&result(&sys, 2), 100).unwrap();
        assert_eq!(h.bins.len(), 3);
        assert_eq!(h.bins[2].size, 50);
        assert_eq!(h.bins[2].first_rank, 201);
        assert!(h.last_bin_extrapolated);
        assert_eq!(h.extrapolation_factor, 2.0);
        assert_eq!(h.extrapolated_last, vec![50.0, 50.0]);
        assert_eq!(h.totals(), vec![125, 125]);
    }

    #[test]
    fn full_last_bin_and_empty() {
        let h = selection_histogram(&result(&[0; 200], 1), 100).unwrap();
        assert!(!h.last_bin_extrapolated);
        assert_eq!(h.extrapolation_factor, 1.0);
        let e = selection_histogram(&result(&[], 3), 100).unwrap();
        assert!(e.bins.is_empty());
        assert!(selection_histogram(&result(&[], 1), 0).is_err());
    }

    fn doc(v: &mut Vocab, lines: &[&str]) -> Vec<Sentence> {
        lines
            .iter()
            .enumerate()
            .map(|(i, l)| Sentence::new(v.encode(&l.split_whitespace().collect::<Vec<_>>()), i))
            .collect()
    }

    #[test]
    fn tables() {
        let mut v = Vocab::new();
        let x = doc(&mut v, &["a b", "a b c d"]);
        let y = doc(&mut v, &["a a b"]);
        let rows = length_table([("x", &x[..]), ("y", &y[..])]).unwrap();
        assert_eq!(rows[0].mean, 3.0);
        assert_eq!(lengths_tsv(&rows), "corpus\tsentences\ttokens\tmean_length\nx\t2\t6\t3.00\ny\t1\t3\t3.00\n");
        assert!(length_table([("e", &[][..])]).is_err());

        let d = diversity_table([("y", &y[..])]).unwrap();
        assert_eq!(diversity_tsv(&d), "corpus\tyules_i_x100\tmtld\tttr_x100\ny\t450.00\t3.00\t66.67\n");
        let hapax = [Sentence::new(vec![TokenId(0), TokenId(1)], 0)];
        let d = diversity_table([("h", &hapax[..])]).unwrap();
        assert_eq!(d[0].yules_i_x100, None);
        assert!(diversity_tsv(&d).contains("\tn/a\tn/a\t100.00"));
    }
}
