//! Per-system rescoring factors.
//!
//! `phi = ln(BLEU · (100 − TER) · MTLD)` combines the devset quality of a
//! backtranslation system with the lexical diversity of its synthetic output.
//! Selection multiplies every candidate's score by its system's `phi`, so a
//! factor must be strictly positive: the product has to exceed 1.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{load_corpus, EmptyLinePolicy, LoadOptions, MultiSourcePool, Sentence, SystemId, Vocab};
use crate::diversity::{mtld, MTLD_THRESHOLD};
use crate::error::{Error, Result};
use crate::metrics::{corpus_bleu, corpus_ter, BleuSmoothing, EvalPair};

/// `ln(bleu · (100 − ter) · mtld)`; `system` names the offender in errors.
pub fn compute_phi_for(system: &str, bleu: f64, ter: f64, mtld: f64) -> Result<f64> {
    let fail = |reason: String| Error::Factor {
        system: system.to_string(),
        reason,
    };
    if !(bleu.is_finite() && ter.is_finite() && mtld.is_finite()) {
        return Err(fail(format!("non-finite input (bleu {bleu}, ter {ter}, mtld {mtld})")));
    }
    if bleu <= 0.0 {
        return Err(fail(format!("BLEU must be positive, got {bleu}")));
    }
    if ter >= 100.0 {
        return Err(fail(format!("TER must be below 100, got {ter}")));
    }
    if mtld <= 0.0 {
        return Err(fail(format!("MTLD must be positive, got {mtld}")));
    }
    let product = bleu * (100.0 - ter) * mtld;
    if product <= 1.0 {
        return Err(fail(format!(
            "BLEU·(100−TER)·MTLD = {product} is not above 1, so its logarithm is not positive"
        )));
    }
    Ok(product.ln())
}

pub fn compute_phi(bleu: f64, ter: f64, mtld: f64) -> Result<f64> {
    compute_phi_for("<unnamed>", bleu, ter, mtld)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Computed,
    #[default]
    Supplied,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bleu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ter: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mtld: Option<f64>,
    #[serde(default)]
    pub phi: f64,
    #[serde(default)]
    pub provenance: Provenance,
}

/// `{"systems": {"<name>": {"bleu": .., "ter": .., "mtld": .., "phi": ..}}}`
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SystemFactorTable {
    pub systems: BTreeMap<SystemId, FactorEntry>,
}

/// Raw values for one system in supplied mode. When `phi` is given it is
/// used as is (e.g. a factor built from metrics this crate does not
/// implement); otherwise it is derived from the three metrics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
pub struct SuppliedValues {
    pub bleu: Option<f64>,
    pub ter: Option<f64>,
    pub mtld: Option<f64>,
    pub phi: Option<f64>,
}

/// Files needed to compute one system's factor.
#[derive(Debug, Clone)]
pub struct SystemMeasurement {
    pub system: SystemId,
    /// The system's translation of the devset (same direction as the
    /// backtranslation).
    pub devset_hypothesis: PathBuf,
    /// The system's full backtranslated corpus, or `None` to take it from a
    /// pool.
    pub backtranslation: Option<PathBuf>,
}

impl SystemFactorTable {
    pub fn insert_computed(&mut self, system: SystemId, bleu: f64, ter: f64, mtld: f64) -> Result<()> {
        let phi = compute_phi_for(system.as_str(), bleu, ter, mtld)?;
        self.systems.insert(
            system,
            FactorEntry {
                bleu: Some(bleu),
                ter: Some(ter),
                mtld: Some(mtld),
                phi,
                provenance: Provenance::Computed,
            },
        );
        Ok(())
    }

    pub fn insert_supplied(&mut self, system: SystemId, values: SuppliedValues) -> Result<()> {
        let phi = match values.phi {
            Some(phi) => phi,
            None => match (values.bleu, values.ter, values.mtld) {
                (Some(b), Some(t), Some(m)) => compute_phi_for(system.as_str(), b, t, m)?,
                _ => {
                    return Err(Error::Factor {
                        system: system.to_string(),
                        reason: "needs either phi or all of bleu, ter and mtld".into(),
                    })
                }
            },
        };
        check_phi(system.as_str(), phi)?;
        if let Some(t) = values.ter {
            if t >= 100.0 {
                return Err(Error::Factor {
                    system: system.to_string(),
                    reason: format!("TER must be below 100, got {t}"),
                });
            }
        }
        self.systems.insert(
            system,
            FactorEntry {
                bleu: values.bleu,
                ter: values.ter,
                mtld: values.mtld,
                phi,
                provenance: Provenance::Supplied,
            },
        );
        Ok(())
    }

    /// Builds a table from supplied values, validating each entry.
    pub fn from_supplied(values: impl IntoIterator<Item = (SystemId, SuppliedValues)>) -> Result<Self> {
        let mut t = Self::default();
        for (sys, v) in values {
            t.insert_supplied(sys, v)?;
        }
        Ok(t)
    }

    /// Reads and validates a factor table file. Entries without a
    /// `provenance` field count as supplied.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = crate::corpus::read_utf8(path)?;
        #[derive(Deserialize)]
        struct Raw {
            systems: BTreeMap<String, SuppliedValues>,
        }
        let raw: Raw = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut table = Self::default();
        for (name, v) in raw.systems {
            table.insert_supplied(SystemId::new(name)?, v)?;
        }
        Ok(table)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("factor table serializes");
        s.push('\n');
        s
    }

    pub fn phi(&self, system: &str) -> Option<f64> {
        self.systems.iter().find(|(k, _)| k.as_str() == system).map(|(_, e)| e.phi)
    }

    /// Factors aligned with `systems`.
    pub fn factors_for(&self, systems: &[SystemId]) -> Result<Vec<f64>> {
        systems
            .iter()
            .map(|s| {
                let phi = self.phi(s.as_str()).ok_or_else(|| Error::Factor {
                    system: s.to_string(),
                    reason: "missing from factor table".into(),
                })?;
                check_phi(s.as_str(), phi)?;
                Ok(phi)
            })
            .collect()
    }
}

fn check_phi(system: &str, phi: f64) -> Result<()> {
    if phi.is_finite() && phi > 0.0 {
        Ok(())
    } else {
        Err(Error::Factor {
            system: system.to_string(),
            reason: format!("phi must be finite and positive, got {phi}"),
        })
    }
}

/// Computes BLEU and TER of each system's devset translation against the
/// shared reference and MTLD of its backtranslated corpus, then `phi`.
///
/// Corpora without an explicit path are taken from `pool`.
pub fn build_factor_table(
    reference: &Path,
    systems: &[SystemMeasurement],
    pool: Option<&MultiSourcePool>,
    lowercase: bool,
) -> Result<SystemFactorTable> {
    let keep = LoadOptions::new(EmptyLinePolicy::Keep, lowercase);
    let mut vocab = Vocab::new();
    let refs = load_corpus(reference, keep, &mut vocab)?;
    let mut table = SystemFactorTable::default();
    for m in systems {
        let hyps = load_corpus(&m.devset_hypothesis, keep, &mut vocab)?;
        if hyps.len() != refs.len() {
            return Err(Error::Misaligned {
                system: m.system.to_string(),
                file: m.devset_hypothesis.clone(),
                target: reference.to_path_buf(),
                expected: refs.len(),
                found: hyps.len(),
            });
        }
        let pairs: Vec<EvalPair<'_, _>> = hyps
            .iter()
            .zip(&refs)
            .map(|(h, r)| EvalPair::new(h.tokens.as_slice(), r.tokens.as_slice()))
            .collect();
        let bleu = corpus_bleu(&pairs, BleuSmoothing::None)?;
        let ter = corpus_ter(&pairs)?;

        let own;
        let corpus: &[Sentence] = match (&m.backtranslation, pool) {
            (Some(path), _) => {
                own = load_corpus(path, keep, &mut vocab)?;
                &own
            }
            (None, Some(pool)) => {
                let idx = pool
                    .system_index(m.system.as_str())
                    .ok_or_else(|| Error::UnknownSystem(m.system.to_string()))?;
                pool.sources(idx)
            }
            (None, None) => {
                return Err(Error::Factor {
                    system: m.system.to_string(),
                    reason: "no backtranslated corpus given".into(),
                })
            }
        };
        let mtld = mtld(corpus, MTLD_THRESHOLD)?.ok_or_else(|| Error::Factor {
            system: m.system.to_string(),
            reason: "MTLD is undefined for the backtranslated corpus".into(),
        })?;
        log::info!("{}: BLEU {bleu:.2}, TER {ter:.2}, MTLD {mtld:.2}", m.system);
        table.insert_computed(m.system.clone(), bleu, ter, mtld)?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_of_unit_product_is_rejected() {
        assert!(compute_phi(1.0, 99.0, 1.0).is_err());
        assert!(compute_phi(0.5, 0.0, 0.01).is_err());
    }

    #[test]
    fn phi_e_is_one() {
        let bleu = std::f64::consts::E / 100.0;
        let phi = compute_phi(bleu, 0.0, 1.0).unwrap();
        assert!((phi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phi_input_validation() {
        assert!(compute_phi(10.0, 100.0, 10.0).is_err());
        assert!(compute_phi(10.0, 120.0, 10.0).is_err());
        assert!(compute_phi(0.0, 10.0, 10.0).is_err());
        assert!(compute_phi(10.0, 10.0, 0.0).is_err());
        assert!(compute_phi(f64::NAN, 10.0, 10.0).is_err());
        let err = compute_phi_for("lstm", 10.0, 100.0, 10.0).unwrap_err();
        assert!(err.to_string().contains("lstm"));
    }

    #[test]
    fn supplied_phi_and_missing_system() {
        let a = SystemId::new("a").unwrap();
        let b = SystemId::new("b").unwrap();
        let table = SystemFactorTable::from_supplied([(
            a.clone(),
            SuppliedValues {
                phi: Some(2.5),
                ..Default::default()
            },
        )])
        .unwrap();
        assert_eq!(table.factors_for(std::slice::from_ref(&a)).unwrap(), vec![2.5]);
        assert!(table.factors_for(&[a.clone(), b.clone()]).is_err());
        let bad = SystemFactorTable::from_supplied([(
            b,
            SuppliedValues {
                phi: Some(-1.0),
                ..Default::default()
            },
        )]);
        assert!(bad.is_err());
        let incomplete = SystemFactorTable::from_supplied([(
            a,
            SuppliedValues {
                bleu: Some(10.0),
                ..Default::default()
            },
        )]);
        assert!(incomplete.is_err());
    }
}
