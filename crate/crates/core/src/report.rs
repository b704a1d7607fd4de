//! Serializable report views and file writers. Every vertex label written
//! here is 1-based.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::config::{BasisSpec, StateSpec};
use crate::darkstate::PairPrediction;
use crate::entanglement::ConcurrenceMap;
use crate::error::Result;
use crate::hilbert::ExcitationBasis;
use crate::optimizer::ConjectureReport;
use crate::topology::{ResonanceReport, TopologyClass};

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(())
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    create_parent(path)?;
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    create_parent(path)?;
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> crate::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => std::io::Error::other(format!("{other:?}")).into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcurrenceRow {
    pub k: usize,
    pub j: usize,
    pub concurrence: f64,
}

pub fn concurrence_rows(map: &ConcurrenceMap) -> Vec<ConcurrenceRow> {
    map.iter().map(|((k, j), c)| ConcurrenceRow { k: k + 1, j: j + 1, concurrence: c }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionRow {
    pub k: usize,
    pub j: usize,
    pub sign: i8,
    pub concurrence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionReport {
    pub p: f64,
    pub n: usize,
    pub pairs: Vec<PredictionRow>,
}

impl PredictionReport {
    pub fn new(p: f64, n: usize, pairs: &[PairPrediction]) -> Self {
        let pairs = pairs
            .iter()
            .map(|x| PredictionRow { k: x.k + 1, j: x.j + 1, sign: x.sign, concurrence: x.concurrence })
            .collect();
        Self { p, n, pairs }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TopologyView {
    Bipartite,
    OddCycle { witness: Vec<usize> },
}

impl From<&TopologyClass> for TopologyView {
    fn from(t: &TopologyClass) -> Self {
        match t {
            TopologyClass::Bipartite => TopologyView::Bipartite,
            TopologyClass::OddCycle { witness } => TopologyView::OddCycle { witness: witness.iter().map(|v| v + 1).collect() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSummary {
    pub n: usize,
    pub edges: usize,
    pub topology: TopologyView,
    pub resonance: ResonanceReport,
}

pub fn basis_spec(b: &ExcitationBasis) -> BasisSpec {
    BasisSpec { n: b.n(), max_excitations: b.max_excitations() }
}

/// One trajectory snapshot. Pair concurrences follow in a fixed pair
/// order named by [`trajectory_header`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub trace: f64,
    pub excitation_number: f64,
    pub p_overlap: Option<f64>,
    pub purity: f64,
    pub concurrence: Vec<f64>,
}

pub fn trajectory_header(n: usize) -> Vec<String> {
    let mut h: Vec<String> = ["t", "trace", "excitation_number", "p_overlap", "purity"].map(String::from).to_vec();
    for k in 0..n {
        for j in k + 1..n {
            h.push(format!("c_{}_{}", k + 1, j + 1));
        }
    }
    h
}

pub fn write_trajectory_csv(path: &Path, n: usize, rows: &[TrajectoryRow]) -> Result<()> {
    create_parent(path)?;
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(trajectory_header(n)).map_err(csv_error)?;
    for r in rows {
        let mut rec = vec![
            r.t.to_string(),
            r.trace.to_string(),
            r.excitation_number.to_string(),
            r.p_overlap.map(|p| p.to_string()).unwrap_or_default(),
            r.purity.to_string(),
        ];
        rec.extend(r.concurrence.iter().map(f64::to_string));
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureRow {
    pub n: usize,
    #[serde(rename = "N")]
    pub max_excitations: usize,
    pub m: usize,
    pub support: Vec<usize>,
    pub best_value: f64,
    pub formula_value: f64,
    pub conjecture_holds: bool,
    pub converged: bool,
    pub restarts: usize,
    pub evaluations: usize,
    pub search_space: String,
    pub best_state: StateSpec,
}

impl From<&ConjectureReport> for ConjectureRow {
    fn from(r: &ConjectureReport) -> Self {
        Self {
            n: r.n,
            max_excitations: r.max_excitations,
            m: r.m,
            support: r.support.iter().map(|v| v + 1).collect(),
            best_value: r.best_value,
            formula_value: r.formula_value,
            conjecture_holds: r.conjecture_holds,
            converged: r.converged,
            restarts: r.restarts,
            evaluations: r.evaluations,
            search_space: r.search_space.clone(),
            best_state: StateSpec::from_state(&r.best_state),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureSummaryRow {
    pub n: usize,
    #[serde(rename = "N")]
    pub max_excitations: usize,
    pub m: usize,
    pub best_value: f64,
    pub formula_value: f64,
    pub holds: bool,
}

impl From<&ConjectureReport> for ConjectureSummaryRow {
    fn from(r: &ConjectureReport) -> Self {
        Self {
            n: r.n,
            max_excitations: r.max_excitations,
            m: r.m,
            best_value: r.best_value,
            formula_value: r.formula_value,
            holds: r.conjecture_holds,
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;

    #[test]
    fn csv_and_json_files() {
        let dir = tempfile::tempdir().unwrap();
        let map = ConcurrenceMap { entries: BTreeMap::from([((0, 1), 0.5), ((0, 2), 0.25)]) };
        let path = dir.path().join("sub/c.csv");
        write_csv(&path, &concurrence_rows(&map)).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "k,j,concurrence\n1,2,0.5\n1,3,0.25\n");

        let rows = vec![TrajectoryRow {
            t: 0.0,
            trace: 1.0,
            excitation_number: 1.0,
            p_overlap: None,
            purity: 1.0,
            concurrence: vec![0.0, 0.5, 1.0],
        }];
        let path = dir.path().join("t.csv");
        write_trajectory_csv(&path, 3, &rows).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "t,trace,excitation_number,p_overlap,purity,c_1_2,c_1_3,c_2_3\n0,1,1,,1,0,0.5,1\n");

        let path = dir.path().join("r.json");
        write_json(&path, &TopologyView::OddCycle { witness: vec![1, 2, 3] }).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"ODD_CYCLE\"") && text.ends_with("}\n"));
    }
}
