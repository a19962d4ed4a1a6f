//! CSV and JSON file formats.
//!
//! CSV files always start with a header row. Floats are written in the
//! shortest representation that parses back to the identical `f64`.
//!
//! | file        | columns                                                              |
//! |-------------|----------------------------------------------------------------------|
//! | constellation | `index,amplitude[,label]`                                          |
//! | mi / sweep  | `snr_db,mi,std_error,n_samples,seed,method`                          |
//! | curves      | `scheme,family,M,lambda,snr_db,mi,std_error,n_samples,seed,method`   |
//! | gap         | `scheme,family,M,lambda,target_rate,snr_at_rate_db,capacity_snr_db,gap_db` |
//! | compare     | `scheme,target_rate,log_best_M,log_snr_db,martinez_best_M,martinez_snr_db,delta_db` |

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::analysis::{FamilyComparison, GapReport, SweepResult, SweepRow};
use crate::constellation::Constellation;
use crate::error::{invalid, Result};
use crate::labeling::{parse_label, BitLabeling};

/// JSON document for a constellation and, optionally, its labeling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstellationRecord {
    #[serde(flatten)]
    pub constellation: Constellation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl ConstellationRecord {
    pub fn new(constellation: Constellation, labeling: Option<&BitLabeling>) -> Self {
        let labels = labeling.map(|l| (0..l.len()).map(|i| l.label_string(i)).collect());
        ConstellationRecord {
            constellation,
            labels,
        }
    }

    /// Parses the label strings back into a labeling.
    pub fn labeling(&self) -> Result<Option<BitLabeling>> {
        self.labels
            .as_deref()
            .map(labeling_from_strings)
            .transpose()
    }
}

fn labeling_from_strings(labels: &[String]) -> Result<BitLabeling> {
    let bits = labels.first().map(|s| s.len()).unwrap_or(0);
    let values = labels
        .iter()
        .map(|s| parse_label(s, bits))
        .collect::<Result<Vec<_>>>()?;
    BitLabeling::from_labels(bits, values)
}

#[derive(Serialize, Deserialize)]
struct SymbolRow {
    index: usize,
    amplitude: f64,
}

#[derive(Serialize, Deserialize)]
struct LabeledSymbolRow {
    index: usize,
    amplitude: f64,
    label: String,
}

/// Symbols and labels read back from a constellation CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolTable {
    pub symbols: Vec<f64>,
    pub labeling: Option<BitLabeling>,
}

pub fn write_constellation_csv<W: Write>(
    out: W,
    cons: &Constellation,
    labeling: Option<&BitLabeling>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    match labeling {
        Some(l) => {
            l.check_matches(cons.len())?;
            for (index, &amplitude) in cons.symbols().iter().enumerate() {
                w.serialize(LabeledSymbolRow {
                    index,
                    amplitude,
                    label: l.label_string(index),
                })?;
            }
        }
        None => {
            for (index, &amplitude) in cons.symbols().iter().enumerate() {
                w.serialize(SymbolRow { index, amplitude })?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_constellation_csv<R: Read>(input: R) -> Result<SymbolTable> {
    let mut r = csv::Reader::from_reader(input);
    let labeled = r.headers()?.iter().any(|h| h == "label");
    let mut symbols = Vec::new();
    let mut labels = Vec::new();
    if labeled {
        for row in r.deserialize::<LabeledSymbolRow>() {
            let row = row?;
            check_index(row.index, symbols.len())?;
            symbols.push(row.amplitude);
            labels.push(row.label);
        }
    } else {
        for row in r.deserialize::<SymbolRow>() {
            let row = row?;
            check_index(row.index, symbols.len())?;
            symbols.push(row.amplitude);
        }
    }
    let labeling = labeled
        .then(|| labeling_from_strings(&labels))
        .transpose()?;
    Ok(SymbolTable { symbols, labeling })
}

fn check_index(index: usize, expected: usize) -> Result<()> {
    if index != expected {
        return Err(invalid(format!(
            "constellation rows out of order: index {index}, expected {expected}"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct MiRow<'a> {
    snr_db: f64,
    mi: f64,
    std_error: f64,
    n_samples: u64,
    seed: u64,
    method: &'a str,
}

/// `snr_db,mi,std_error,n_samples,seed,method`, one line per row.
pub fn write_mi_rows_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(MiRow {
            snr_db: r.snr_db,
            mi: r.mi.value,
            std_error: r.mi.std_error,
            n_samples: r.mi.n_samples,
            seed: r.mi.seed,
            method: r.mi.method.as_str(),
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct CurveRow<'a> {
    scheme: &'a str,
    family: &'a str,
    #[serde(rename = "M")]
    m: Option<usize>,
    lambda: Option<f64>,
    snr_db: f64,
    mi: f64,
    std_error: f64,
    n_samples: u64,
    seed: u64,
    method: &'a str,
}

/// Several sweeps in one long-format table, curve after curve.
pub fn write_curves_csv<W: Write>(out: W, curves: &[SweepResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in curves {
        for r in &c.rows {
            w.serialize(CurveRow {
                scheme: c.scheme.as_str(),
                family: &c.curve.family,
                m: c.curve.m,
                lambda: c.curve.lambda,
                snr_db: r.snr_db,
                mi: r.mi.value,
                std_error: r.mi.std_error,
                n_samples: r.mi.n_samples,
                seed: r.mi.seed,
                method: r.mi.method.as_str(),
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct GapRow<'a> {
    scheme: &'a str,
    family: &'a str,
    #[serde(rename = "M")]
    m: Option<usize>,
    lambda: Option<f64>,
    target_rate: f64,
    snr_at_rate_db: f64,
    capacity_snr_db: f64,
    gap_db: f64,
}

pub fn write_gaps_csv<W: Write>(out: W, reports: &[GapReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for g in reports {
        w.serialize(GapRow {
            scheme: g.scheme.as_str(),
            family: &g.curve.family,
            m: g.curve.m,
            lambda: g.curve.lambda,
            target_rate: g.target_rate,
            snr_at_rate_db: g.snr_at_rate_db,
            capacity_snr_db: g.capacity_snr_db,
            gap_db: g.gap_db,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct CompareRow<'a> {
    scheme: &'a str,
    target_rate: f64,
    #[serde(rename = "log_best_M")]
    log_best_m: usize,
    log_snr_db: f64,
    #[serde(rename = "martinez_best_M")]
    martinez_best_m: usize,
    martinez_snr_db: f64,
    delta_db: f64,
}

pub fn write_comparison_csv<W: Write>(out: W, rows: &[FamilyComparison]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in rows {
        w.serialize(CompareRow {
            scheme: c.log.scheme.as_str(),
            target_rate: c.target_rate,
            log_best_m: c.log.best_m,
            log_snr_db: c.log.snr_db,
            martinez_best_m: c.martinez.best_m,
            martinez_snr_db: c.martinez.snr_db,
            delta_db: c.delta_db,
        })?;
    }
    w.flush()?;
    Ok(())
}
