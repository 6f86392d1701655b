//! Translation edit rate with Tercom's greedy block shifts.
//!
//! Each round looks at every hypothesis block that matches a reference span,
//! is at least partly misaligned under the current minimum-edit alignment,
//! and would land next to the hypothesis position aligned with that span.
//! The shift that lowers the word-level edit distance most is applied (ties:
//! longer block, earlier block, earlier destination) and costs one edit.
//! Rounds stop when no shift lowers the distance. Block size, shift distance
//! and the number of evaluated candidates per sentence are capped as in
//! Tercom.

use super::{check_pairs, EvalPair};
use crate::error::Result;

const MAX_SHIFT_SIZE: usize = 10;
const MAX_SHIFT_DIST: usize = 50;
const MAX_SHIFT_CANDIDATES: usize = 1000;

/// Edit count and reference length of one sentence pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TerStats {
    pub edits: usize,
    pub ref_len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Match,
    Sub,
    /// Hypothesis word with no reference counterpart.
    HypOnly,
    /// Reference word with no hypothesis counterpart.
    RefOnly,
}

/// Word-level Levenshtein distance with unit costs.
pub fn edit_distance<T: Eq>(hyp: &[T], reference: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=reference.len()).collect();
    let mut cur = vec![0; reference.len() + 1];
    for (i, h) in hyp.iter().enumerate() {
        cur[0] = i + 1;
        for (j, r) in reference.iter().enumerate() {
            let diag = prev[j] + usize::from(h != r);
            cur[j + 1] = diag.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[reference.len()]
}

/// Edit distance and one optimal operation sequence. Ties prefer a
/// match/substitution, then skipping a hypothesis word, then skipping a
/// reference word.
fn edit_trace<T: Eq>(hyp: &[T], reference: &[T]) -> (usize, Vec<Op>) {
    let cols = reference.len() + 1;
    let mut dist = vec![0usize; (hyp.len() + 1) * cols];
    let mut ops = vec![Op::Match; (hyp.len() + 1) * cols];
    for j in 1..cols {
        dist[j] = j;
        ops[j] = Op::RefOnly;
    }
    for i in 1..=hyp.len() {
        dist[i * cols] = i;
        ops[i * cols] = Op::HypOnly;
        for j in 1..cols {
            let (mut best, mut op) = if hyp[i - 1] == reference[j - 1] {
                (dist[(i - 1) * cols + j - 1], Op::Match)
            } else {
                (dist[(i - 1) * cols + j - 1] + 1, Op::Sub)
            };
            if dist[(i - 1) * cols + j] + 1 < best {
                best = dist[(i - 1) * cols + j] + 1;
                op = Op::HypOnly;
            }
            if dist[i * cols + j - 1] + 1 < best {
                best = dist[i * cols + j - 1] + 1;
                op = Op::RefOnly;
            }
            dist[i * cols + j] = best;
            ops[i * cols + j] = op;
        }
    }
    let (mut i, mut j) = (hyp.len(), reference.len());
    let mut trace = Vec::with_capacity(i + j);
    while i > 0 || j > 0 {
        let op = ops[i * cols + j];
        trace.push(op);
        match op {
            Op::Match | Op::Sub => {
                i -= 1;
                j -= 1;
            }
            Op::HypOnly => i -= 1,
            Op::RefOnly => j -= 1,
        }
    }
    trace.reverse();
    (dist[hyp.len() * cols + reference.len()], trace)
}

struct Alignment {
    /// Hypothesis position aligned with each reference position (-1 before
    /// the first hypothesis word).
    hyp_of_ref: Vec<isize>,
    hyp_err: Vec<bool>,
    ref_err: Vec<bool>,
}

impl Alignment {
    fn from_trace(trace: &[Op]) -> Self {
        let mut a = Alignment {
            hyp_of_ref: Vec::new(),
            hyp_err: Vec::new(),
            ref_err: Vec::new(),
        };
        let mut pos_h: isize = -1;
        for &op in trace {
            match op {
                Op::Match | Op::Sub => {
                    pos_h += 1;
                    a.hyp_of_ref.push(pos_h);
                    a.hyp_err.push(op == Op::Sub);
                    a.ref_err.push(op == Op::Sub);
                }
                Op::HypOnly => {
                    pos_h += 1;
                    a.hyp_err.push(true);
                }
                Op::RefOnly => {
                    a.hyp_of_ref.push(pos_h);
                    a.ref_err.push(true);
                }
            }
        }
        a
    }
}

/// Moves `words[start..start + len]` so that it begins at `target` (positions
/// counted before removal when moving left).
fn perform_shift<T: Clone>(words: &[T], start: usize, len: usize, target: usize) -> Vec<T> {
    let n = words.len();
    let sl = |a: usize, b: usize| &words[a.min(n)..b.min(n).max(a.min(n))];
    let block = &words[start..start + len];
    let mut out = Vec::with_capacity(n);
    if target < start {
        out.extend_from_slice(sl(0, target));
        out.extend_from_slice(block);
        out.extend_from_slice(sl(target, start));
        out.extend_from_slice(sl(start + len, n));
    } else if target > start + len {
        out.extend_from_slice(sl(0, start));
        out.extend_from_slice(sl(start + len, target));
        out.extend_from_slice(block);
        out.extend_from_slice(sl(target, n));
    } else {
        out.extend_from_slice(sl(0, start));
        out.extend_from_slice(sl(start + len, len + target));
        out.extend_from_slice(block);
        out.extend_from_slice(sl(len + target, n));
    }
    out
}

struct Shift<T> {
    gain: isize,
    len: usize,
    start: usize,
    target: isize,
    words: Vec<T>,
}

impl<T> Shift<T> {
    fn beats(&self, other: &Shift<T>) -> bool {
        (self.gain, self.len, std::cmp::Reverse(self.start), std::cmp::Reverse(self.target))
            > (other.gain, other.len, std::cmp::Reverse(other.start), std::cmp::Reverse(other.target))
    }
}

fn best_shift<T: Eq + Clone>(hyp: &[T], reference: &[T], checked: &mut usize) -> Option<Shift<T>> {
    let (current, trace) = edit_trace(hyp, reference);
    let align = Alignment::from_trace(&trace);
    let mut best: Option<Shift<T>> = None;

    for start_h in 0..hyp.len() {
        for start_r in 0..reference.len() {
            if start_h.abs_diff(start_r) > MAX_SHIFT_DIST {
                continue;
            }
            let mut len = 0;
            while len < MAX_SHIFT_SIZE && hyp[start_h + len] == reference[start_r + len] {
                len += 1;
                if align.hyp_err[start_h..start_h + len].iter().any(|&e| e)
                    && align.ref_err[start_r..start_r + len].iter().any(|&e| e)
                {
                    let anchor = align.hyp_of_ref[start_r];
                    let inside = start_h as isize <= anchor && anchor < (start_h + len) as isize;
                    if !inside {
                        let mut prev_target = -1;
                        for offset in -1..len as isize {
                            let r = start_r as isize + offset;
                            let target = if r == -1 { 0 } else { align.hyp_of_ref[r as usize] + 1 };
                            if target == prev_target {
                                continue;
                            }
                            prev_target = target;
                            let words = perform_shift(hyp, start_h, len, target as usize);
                            let cand = Shift {
                                gain: current as isize - edit_distance(&words, reference) as isize,
                                len,
                                start: start_h,
                                target,
                                words,
                            };
                            *checked += 1;
                            if best.as_ref().is_none_or(|b| cand.beats(b)) {
                                best = Some(cand);
                            }
                        }
                        if *checked >= MAX_SHIFT_CANDIDATES {
                            return best;
                        }
                    }
                }
                if start_h + len == hyp.len() || start_r + len == reference.len() {
                    break;
                }
            }
        }
    }
    best
}

/// Minimum edits (greedy shifts plus Levenshtein operations) turning `hyp`
/// into `reference`.
pub fn translation_edits<T: Eq + Clone>(hyp: &[T], reference: &[T]) -> TerStats {
    if reference.is_empty() {
        return TerStats {
            edits: hyp.len(),
            ref_len: 0,
        };
    }
    let mut words = hyp.to_vec();
    let mut shifts = 0;
    let mut checked = 0;
    loop {
        let found = best_shift(&words, reference, &mut checked);
        if checked >= MAX_SHIFT_CANDIDATES {
            break;
        }
        match found {
            Some(shift) if shift.gain > 0 => {
                shifts += 1;
                words = shift.words;
            }
            _ => break,
        }
    }
    TerStats {
        edits: shifts + edit_distance(&words, reference),
        ref_len: reference.len(),
    }
}

/// Sentence TER as a percentage of the reference length.
pub fn sentence_ter<T: Eq + Clone>(hyp: &[T], reference: &[T]) -> f64 {
    let st = translation_edits(hyp, reference);
    if st.ref_len == 0 {
        return if st.edits == 0 { 0.0 } else { 100.0 };
    }
    100.0 * st.edits as f64 / st.ref_len as f64
}

/// Corpus TER: total edits over total reference words, as a percentage.
pub fn corpus_ter<T: Eq + Clone>(pairs: &[EvalPair<'_, T>]) -> Result<f64> {
    check_pairs(pairs)?;
    let (edits, ref_len) = pairs
        .iter()
        .map(|p| translation_edits(p.hypothesis, p.reference))
        .fold((0usize, 0usize), |(e, l), st| (e + st.edits, l + st.ref_len));
    Ok(100.0 * edits as f64 / ref_len as f64)
}
