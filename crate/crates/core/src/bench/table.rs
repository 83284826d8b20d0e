//! Solver comparison in the usual orientation: metrics as rows, one column
//! per solver.

use std::fmt::Write as _;

use super::{display_name, BenchError, SolverReport};

pub const TABLE_ROWS: [&str; 5] = ["Access Level", "Time", "Steps (Epochs)", "Validity", "State Space"];

const NA: &str = "N/A";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub columns: Vec<String>,
    /// `(row label, one cell per column)`, in [`TABLE_ROWS`] order.
    pub rows: Vec<(String, Vec<String>)>,
}

fn steps_cell(reports: &[&SolverReport]) -> String {
    let steps: Option<Vec<u64>> = reports.iter().map(|r| r.steps_or_epochs).collect();
    match steps {
        Some(s) if !s.is_empty() => {
            let (lo, hi) = (*s.iter().min().unwrap(), *s.iter().max().unwrap());
            if lo == hi {
                lo.to_string()
            } else {
                format!("{lo}-{hi}")
            }
        }
        _ => NA.into(),
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Aggregates reports per solver, columns in order of first appearance.
/// Time is the mean wall time, validity the mean validity over runs.
pub fn render_table(reports: &[SolverReport]) -> Table {
    let mut order: Vec<&str> = Vec::new();
    for r in reports {
        if !order.contains(&r.solver.as_str()) {
            order.push(&r.solver);
        }
    }
    let mut cells: Vec<[String; 5]> = Vec::new();
    for name in &order {
        let group: Vec<&SolverReport> = reports.iter().filter(|r| r.solver == *name).collect();
        let ran: Vec<&SolverReport> = group.iter().copied().filter(|r| r.implemented).collect();
        let time = mean(&ran.iter().map(|r| r.wall_time_seconds).collect::<Vec<_>>())
            .map_or(NA.into(), |t| format!("{t:.3} s"));
        let steps = if ran.is_empty() { NA.into() } else { steps_cell(&ran) };
        let validity = mean(&group.iter().filter_map(|r| r.validity_percent).collect::<Vec<_>>())
            .map_or(NA.into(), |v| format!("{v:.1}%"));
        cells.push([
            group[0].access_level.short().into(),
            time,
            steps,
            validity,
            group[0].state_space.to_string(),
        ]);
    }
    Table {
        columns: order.iter().map(|n| display_name(n)).collect(),
        rows: TABLE_ROWS
            .iter()
            .enumerate()
            .map(|(i, label)| (label.to_string(), cells.iter().map(|c| c[i].clone()).collect()))
            .collect(),
    }
}

pub fn table_markdown(table: &Table) -> String {
    let mut out = String::from("| |");
    for c in &table.columns {
        let _ = write!(out, " {c} |");
    }
    out.push_str("\n|---|");
    for _ in &table.columns {
        out.push_str("---|");
    }
    out.push('\n');
    for (label, cells) in &table.rows {
        let _ = write!(out, "| **{label}** |");
        for c in cells {
            let _ = write!(out, " {c} |");
        }
        out.push('\n');
    }
    out
}

pub fn table_csv(table: &Table) -> Result<String, BenchError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(std::iter::once("metric").chain(table.columns.iter().map(String::as_str)))?;
    for (label, cells) in &table.rows {
        w.write_record(std::iter::once(label.as_str()).chain(cells.iter().map(String::as_str)))?;
    }
    let bytes = w.into_inner().map_err(|e| BenchError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("table cells are UTF-8"))
}

pub fn parse_table_csv(text: &str) -> Result<Table, BenchError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let columns = r.headers()?.iter().skip(1).map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let mut it = rec.iter().map(String::from);
        let label = it.next().unwrap_or_default();
        rows.push((label, it.collect()));
    }
    Ok(Table { columns, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{classify, AccessLevel, StateSpaceCategory};

    fn report(solver: &str, steps: Option<u64>, validity: Option<f64>, time: f64) -> SolverReport {
        let (access_level, state_space) = classify(solver).unwrap();
        SolverReport {
            solver: solver.into(),
            instance: "disks-2".into(),
            n_disks: 2,
            seed: 0,
            access_level,
            state_space,
            implemented: solver != "ncm",
            wall_time_seconds: time,
            steps_or_epochs: steps,
            validity_percent: validity,
            plan_length: None,
            optimal: None,
            error: None,
        }
    }

    #[test]
    fn two_solvers_five_rows() {
        let t = render_table(&[
            report("fbrl", Some(30000), Some(100.0), 2.0),
            report("neurosolver", Some(10000), Some(100.0), 1.0),
            report("fbrl", Some(30000), Some(0.0), 4.0),
        ]);
        assert_eq!(t.columns, vec!["FBRL", "Neurosolver"]);
        assert_eq!(t.rows.len(), 5);
        let labels: Vec<&str> = t.rows.iter().map(|(l, _)| l.as_str()).collect();
        assert_eq!(labels, TABLE_ROWS);
        assert_eq!(t.rows[0].1, vec!["Gen.", "Gen."]);
        assert_eq!(t.rows[1].1[0], "3.000 s");
        assert_eq!(t.rows[2].1, vec!["30000", "10000"]);
        assert_eq!(t.rows[3].1, vec!["50.0%", "100.0%"]);
        assert_eq!(t.rows[4].1, vec!["RSG", "CSF"]);
    }

    #[test]
    fn missing_values_render_na() {
        let t = render_table(&[report("exact", None, Some(100.0), 0.1), report("ncm", None, None, 0.0)]);
        assert_eq!(t.rows[2].1, vec!["N/A", "N/A"]);
        assert_eq!(t.rows[1].1[1], "N/A");
        assert_eq!(t.rows[3].1[1], "N/A");
        assert_eq!(t.rows[0].1[1], AccessLevel::Structured.short());
        assert_eq!(t.rows[4].1[1], StateSpaceCategory::RSG.to_string());
    }

    #[test]
    fn csv_round_trips() {
        let t = render_table(&[
            report("strips_learner", Some(486), Some(100.0), 0.5),
            report("ddqn", Some(1000), Some(100.0), 1.0),
            report("ddqn", Some(2000), Some(100.0), 1.0),
        ]);
        assert_eq!(t.rows[2].1[1], "1000-2000");
        let text = table_csv(&t).unwrap();
        assert_eq!(parse_table_csv(&text).unwrap(), t);
        let md = table_markdown(&t);
        assert_eq!(md.lines().count(), 7);
        assert!(md.contains("STRIPS learner (LNN proxy)"));
    }
}
