//! Cross-algorithm reporting: curve dominance and the sampling-order
//! check, mapping-error metrics, and winner tables comparing sampled
//! against mapped-global hit ratios.

use serde::Serialize;

use crate::mapping::{evaluate_mapped_hr, MappingTable};
use crate::metrics::{expected_shr_curve, hr_curve, SamplingScheme};
use crate::profile::{histogram, CatalogSpec, HitRatioCurve, RankProfile};
use crate::{Error, Result};

/// Values closer than this are reported as ties.
const TIE_EPS: f64 = 1e-12;

/// Pointwise order of two curves over a shared cutoff range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dominance {
    /// Mutual dominance: the curves coincide everywhere.
    Tie,
    FirstDominates,
    SecondDominates,
    Incomparable,
}

/// `first` dominates when its value is at least `second`'s at every
/// cutoff (ties allowed); crossing curves are incomparable.
pub fn dominance(first: &HitRatioCurve, second: &HitRatioCurve) -> Result<Dominance> {
    if first.k_max() != second.k_max() {
        return Err(Error::Config(format!(
            "curves have different lengths: {} vs {}",
            first.k_max(),
            second.k_max()
        )));
    }
    let mut first_ge = true;
    let mut second_ge = true;
    for (a, b) in first.values().iter().zip(second.values()) {
        if a < b {
            first_ge = false;
        }
        if b < a {
            second_ge = false;
        }
    }
    Ok(match (first_ge, second_ge) {
        (true, true) => Dominance::Tie,
        (true, false) => Dominance::FirstDominates,
        (false, true) => Dominance::SecondDominates,
        (false, false) => Dominance::Incomparable,
    })
}

/// A cutoff where the dominated profile's expected sampled hit-ratio
/// exceeded the dominant one's.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremViolation {
    pub k: usize,
    pub dominant: f64,
    pub dominated: f64,
}

/// Outcome of the sampling-order check on a pair of profiles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremCheck {
    /// Whether the global curve of the first profile dominates the
    /// second's; without that the order statement is not asserted.
    pub hypothesis_met: bool,
    pub dominance: Dominance,
    pub violations: Vec<TheoremViolation>,
}

/// Verifies that global-curve dominance survives sampling in
/// expectation: if `HR_1@K >= HR_2@K` for all `K`, then
/// `E[SHR_1@k] >= E[SHR_2@k]` at every `k` (within 1e-12).
pub fn sampling_theorem_check(
    dominant: &RankProfile,
    dominated: &RankProfile,
    scheme: &SamplingScheme,
    catalog: &CatalogSpec,
) -> Result<TheoremCheck> {
    let order = dominance(&hr_curve(dominant), &hr_curve(dominated))?;
    let hypothesis_met = matches!(order, Dominance::FirstDominates | Dominance::Tie);
    if !hypothesis_met {
        return Ok(TheoremCheck {
            hypothesis_met,
            dominance: order,
            violations: Vec::new(),
        });
    }
    let first = expected_shr_curve(&histogram(dominant), scheme, catalog)?;
    let second = expected_shr_curve(&histogram(dominated), scheme, catalog)?;
    let mut violations = Vec::new();
    for k in 1..=catalog.sample_size() {
        let a = first.value_at(k);
        let b = second.value_at(k);
        if a < b - TIE_EPS {
            violations.push(TheoremViolation {
                k,
                dominant: a,
                dominated: b,
            });
        }
    }
    Ok(TheoremCheck {
        hypothesis_met,
        dominance: order,
        violations,
    })
}

/// Alignment errors between a sampled curve and the mapped global
/// curve. Relative fields are `None` whenever a contributing cutoff has
/// a zero sampled hit-ratio.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub abs: f64,
    pub rel: Option<f64>,
    pub abs_at_1: f64,
    pub rel_at_1: Option<f64>,
    pub abs_2_10: f64,
    pub rel_2_10: Option<f64>,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Compares `sampled[k]` against `global[floor(f(k))]` for `k = 1..=n`:
/// overall mean absolute and relative errors, the errors at `k = 1`,
/// and the means over `k = 2..=10`.
pub fn error_report(
    global: &HitRatioCurve,
    sampled: &HitRatioCurve,
    table: &MappingTable,
) -> Result<ErrorReport> {
    let n = table.catalog().sample_size();
    if sampled.k_max() != n {
        return Err(Error::Config(format!(
            "sampled curve has {} cutoffs but the catalog's sample size is {n}",
            sampled.k_max()
        )));
    }
    let mut abs_terms = Vec::with_capacity(n);
    let mut rel_terms: Vec<Option<f64>> = Vec::with_capacity(n);
    for k in 1..=n {
        let mapped = evaluate_mapped_hr(global, table, k)?;
        let shr = sampled.value_at(k);
        let diff = (mapped - shr).abs();
        abs_terms.push(diff);
        rel_terms.push(if shr > 0.0 { Some(diff / shr) } else { None });
    }
    let rel_over = |range: std::ops::RangeInclusive<usize>| -> Option<f64> {
        let terms: Option<Vec<f64>> = range.map(|k| rel_terms[k - 1]).collect();
        terms.map(|t| mean(&t))
    };
    let upper = 10.min(n);
    Ok(ErrorReport {
        abs: mean(&abs_terms),
        rel: rel_over(1..=n),
        abs_at_1: abs_terms[0],
        rel_at_1: rel_terms[0],
        abs_2_10: mean(&abs_terms[1..upper]),
        rel_2_10: rel_over(2..=upper),
    })
}

/// Per-mapping column of a winner row: mapped-global hit ratios in
/// algorithm order plus the winning label(s).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MappedColumn {
    pub mapping: String,
    pub hr: Vec<f64>,
    pub winner_by_hr: Vec<String>,
    pub tie: bool,
}

/// One cutoff of the winner table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WinnerRow {
    pub k: usize,
    pub shr: Vec<f64>,
    pub winner_by_shr: Vec<String>,
    pub shr_tie: bool,
    pub mapped: Vec<MappedColumn>,
}

/// Sampled and mapped-global hit ratios per algorithm and cutoff, with
/// the winner under each metric. Ties (values within 1e-12) are
/// reported, not broken.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WinnerTable {
    pub ks: Vec<usize>,
    pub algorithms: Vec<String>,
    pub mappings: Vec<String>,
    pub rows: Vec<WinnerRow>,
}

fn winners(labels: &[String], values: &[f64]) -> (Vec<String>, bool) {
    let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let picked: Vec<String> = labels
        .iter()
        .zip(values)
        .filter(|(_, &v)| v > best - TIE_EPS)
        .map(|(l, _)| l.clone())
        .collect();
    let tie = picked.len() > 1;
    (picked, tie)
}

/// Builds the winner table for a set of algorithms, each contributing a
/// global curve and a sampled curve, under one or more shared mapping
/// tables.
pub fn winner_table(
    curves: &[(String, HitRatioCurve, HitRatioCurve)],
    tables: &[(String, MappingTable)],
    ks: &[usize],
) -> Result<WinnerTable> {
    if curves.is_empty() {
        return Err(Error::Config("no algorithms to compare".into()));
    }
    if tables.is_empty() {
        return Err(Error::Config("no mapping tables to compare under".into()));
    }
    if ks.is_empty() {
        return Err(Error::Config("no cutoffs requested".into()));
    }
    let catalog = *tables[0].1.catalog();
    for (label, table) in tables {
        if table.catalog() != &catalog {
            return Err(Error::Config(format!(
                "mapping `{label}` uses a different catalog"
            )));
        }
    }
    let mut algorithms = Vec::with_capacity(curves.len());
    for (label, global, sampled) in curves {
        if algorithms.contains(label) {
            return Err(Error::Config(format!("duplicate algorithm label `{label}`")));
        }
        if global.k_max() != catalog.total_items() {
            return Err(Error::Config(format!(
                "global curve of `{label}` has {} cutoffs, expected {}",
                global.k_max(),
                catalog.total_items()
            )));
        }
        if sampled.k_max() != catalog.sample_size() {
            return Err(Error::Config(format!(
                "sampled curve of `{label}` has {} cutoffs, expected {}",
                sampled.k_max(),
                catalog.sample_size()
            )));
        }
        algorithms.push(label.clone());
    }
    let mut mapping_labels = Vec::with_capacity(tables.len());
    for (label, _) in tables {
        if mapping_labels.contains(label) {
            return Err(Error::Config(format!("duplicate mapping label `{label}`")));
        }
        mapping_labels.push(label.clone());
    }
    for &k in ks {
        if k < 1 || k > catalog.sample_size() {
            return Err(Error::Config(format!(
                "cutoff k={k} outside [1, {}]",
                catalog.sample_size()
            )));
        }
    }
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let shr: Vec<f64> = curves.iter().map(|(_, _, s)| s.value_at(k)).collect();
        let (winner_by_shr, shr_tie) = winners(&algorithms, &shr);
        let mut mapped = Vec::with_capacity(tables.len());
        for (label, table) in tables {
            let hr: Result<Vec<f64>> = curves
                .iter()
                .map(|(_, g, _)| evaluate_mapped_hr(g, table, k))
                .collect();
            let hr = hr?;
            let (winner_by_hr, tie) = winners(&algorithms, &hr);
            mapped.push(MappedColumn {
                mapping: label.clone(),
                hr,
                winner_by_hr,
                tie,
            });
        }
        rows.push(WinnerRow {
            k,
            shr,
            winner_by_shr,
            shr_tie,
            mapped,
        });
    }
    Ok(WinnerTable {
        ks: ks.to_vec(),
        algorithms,
        mappings: mapping_labels,
        rows,
    })
}
