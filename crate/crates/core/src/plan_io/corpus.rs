//! Batch scoring of a directory of problems and candidate plans.
//!
//! Files pair up by stem: `<stem>.hanoi-problem` with `<stem>.hanoi-plan`,
//! plus an optional `<stem>.hanoi-ref` reference plan for the text metrics.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::format::{parse_plan, parse_problem, ProblemDocument};
use super::metrics::{bleu, rouge_l};
use super::validate::{validate_plan, ValidationVerdict};
use super::PlanIoError;
use crate::strips::{plan_forward, Facts};

pub const PROBLEM_EXT: &str = "hanoi-problem";
pub const PLAN_EXT: &str = "hanoi-plan";
pub const REFERENCE_EXT: &str = "hanoi-ref";

const BLEU_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusEntry {
    pub stem: String,
    pub plan_length: Option<usize>,
    pub optimal_length: Option<usize>,
    pub valid: bool,
    pub optimal: bool,
    pub failing_step: Option<usize>,
    pub reason: Option<String>,
    pub rouge_l: Option<f64>,
    pub bleu: Option<f64>,
    /// Set when a file could not be read or parsed; the entry then counts as
    /// invalid.
    pub error: Option<String>,
}

impl CorpusEntry {
    fn failed(stem: String, error: String) -> Self {
        Self {
            stem,
            plan_length: None,
            optimal_length: None,
            valid: false,
            optimal: false,
            failing_step: None,
            reason: None,
            rouge_l: None,
            bleu: None,
            error: Some(error),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusReport {
    pub entries: Vec<CorpusEntry>,
}

impl CorpusReport {
    pub fn total(&self) -> usize {
        self.entries.len()
    }

    pub fn errors(&self) -> usize {
        self.entries.iter().filter(|e| e.error.is_some()).count()
    }

    fn percent(&self, f: impl Fn(&CorpusEntry) -> bool) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        100.0 * self.entries.iter().filter(|e| f(e)).count() as f64 / self.entries.len() as f64
    }

    /// Share of all entries, errored ones included, whose plan is valid.
    pub fn validity_percent(&self) -> f64 {
        self.percent(|e| e.valid)
    }

    pub fn optimality_percent(&self) -> f64 {
        self.percent(|e| e.optimal)
    }

    fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
        let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
        (n > 0).then(|| sum / n as f64)
    }

    /// Mean over entries that have a reference plan.
    pub fn mean_rouge_l(&self) -> Option<f64> {
        Self::mean(self.entries.iter().filter_map(|e| e.rouge_l))
    }

    pub fn mean_bleu(&self) -> Option<f64> {
        Self::mean(self.entries.iter().filter_map(|e| e.bleu))
    }

    /// One row per entry followed by a `TOTAL` row with the aggregates.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), PlanIoError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "stem",
            "plan_length",
            "optimal_length",
            "valid",
            "optimal",
            "failing_step",
            "rouge_l",
            "bleu",
            "error",
        ])?;
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        let real = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for e in &self.entries {
            let error = e.error.clone().or_else(|| e.reason.clone()).unwrap_or_default();
            w.write_record([
                e.stem.clone(),
                opt(e.plan_length),
                opt(e.optimal_length),
                e.valid.to_string(),
                e.optimal.to_string(),
                opt(e.failing_step),
                real(e.rouge_l),
                real(e.bleu),
                error,
            ])?;
        }
        w.write_record([
            "TOTAL".to_string(),
            self.total().to_string(),
            String::new(),
            format!("{:.2}", self.validity_percent()),
            format!("{:.2}", self.optimality_percent()),
            String::new(),
            real(self.mean_rouge_l()),
            real(self.mean_bleu()),
            self.errors().to_string(),
        ])?;
        w.flush()?;
        Ok(())
    }
}

/// Shortest plan length for the document, found by forward search.
pub fn optimal_length(doc: &ProblemDocument) -> Result<usize, PlanIoError> {
    let domain = doc
        .actions
        .iter()
        .map(|a| a.to_operator())
        .collect::<Result<Vec<_>, _>>()?;
    let init: Facts = doc.init.iter().cloned().collect();
    Ok(plan_forward(&domain, &init, &doc.goal)?.len())
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn score_one(stem: String, problem: &Path, plan: &Path, reference: Option<&Path>) -> CorpusEntry {
    let scored = (|| -> Result<CorpusEntry, String> {
        let doc = parse_problem(&read(problem)?).map_err(|e| format!("{}: {e}", problem.display()))?;
        let candidate = parse_plan(&read(plan)?).map_err(|e| format!("{}: {e}", plan.display()))?;
        let reference = match reference {
            Some(p) => Some(parse_plan(&read(p)?).map_err(|e| format!("{}: {e}", p.display()))?),
            None => None,
        };
        let optimal = optimal_length(&doc).ok();
        let ValidationVerdict {
            valid,
            failing_step,
            optimal: is_optimal,
            ..
        } = validate_plan(&doc, &candidate, optimal);
        let (rouge, bl) = match &reference {
            Some(r) => {
                let (rt, ct) = (r.tokens(), candidate.tokens());
                (Some(rouge_l(&rt, &ct)), Some(bleu(&rt, &ct, BLEU_ORDER)))
            }
            None => (None, None),
        };
        Ok(CorpusEntry {
            stem: stem.clone(),
            plan_length: Some(candidate.steps.len()),
            optimal_length: optimal,
            valid,
            optimal: is_optimal,
            failing_step: failing_step.as_ref().map(|f| f.index),
            reason: failing_step.map(|f| f.reason),
            rouge_l: rouge,
            bleu: bl,
            error: None,
        })
    })();
    scored.unwrap_or_else(|e| CorpusEntry::failed(stem, e))
}

/// Scores every stem that has a problem or a plan file, in stem order. A
/// stem missing its partner file is reported as an error entry.
pub fn score_corpus(dir: &Path) -> Result<CorpusReport, PlanIoError> {
    let mut stems: Vec<String> = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let ext = path.extension().and_then(|e| e.to_str());
        if matches!(ext, Some(PROBLEM_EXT) | Some(PLAN_EXT)) {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                stems.push(stem.to_string());
            }
        }
    }
    stems.sort();
    stems.dedup();
    let path_for = |stem: &str, ext: &str| -> PathBuf { dir.join(format!("{stem}.{ext}")) };
    let entries = stems
        .into_par_iter()
        .map(|stem| {
            let problem = path_for(&stem, PROBLEM_EXT);
            let plan = path_for(&stem, PLAN_EXT);
            let reference = path_for(&stem, REFERENCE_EXT);
            for p in [&problem, &plan] {
                if !p.exists() {
                    return CorpusEntry::failed(stem, format!("missing {}", p.display()));
                }
            }
            let reference = reference.exists().then_some(reference.as_path());
            score_one(stem.clone(), &problem, &plan, reference)
        })
        .collect();
    Ok(CorpusReport { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::bfs_shortest_plan;
    use crate::hanoi::{HanoiMdp, RewardPreset};
    use crate::plan_io::{emit_plan, emit_problem, mdp_problem, plan_from_moves};
    use crate::strips::reference_move_operator;

    fn write_pair(dir: &Path, stem: &str, n: usize, mutate: bool) {
        let mdp = HanoiMdp::standard(n, RewardPreset::default());
        let doc = mdp_problem(&mdp, &reference_move_operator());
        let mut moves = bfs_shortest_plan(&mdp).unwrap();
        let reference = plan_from_moves(&mdp.initial_state(), &moves);
        if mutate {
            moves.swap(0, 1);
        }
        let plan = plan_from_moves(&mdp.initial_state(), &moves);
        fs::write(dir.join(format!("{stem}.{PROBLEM_EXT}")), emit_problem(&doc)).unwrap();
        fs::write(dir.join(format!("{stem}.{PLAN_EXT}")), emit_plan(&plan)).unwrap();
        fs::write(dir.join(format!("{stem}.{REFERENCE_EXT}")), emit_plan(&reference)).unwrap();
    }

    #[test]
    fn exact_corpus_scores_full_marks() {
        let dir = tempfile::tempdir().unwrap();
        for i in 0..10 {
            write_pair(dir.path(), &format!("p{i:02}"), 1 + i % 4, false);
        }
        let r = score_corpus(dir.path()).unwrap();
        assert_eq!(r.total(), 10);
        assert_eq!(r.validity_percent(), 100.0);
        assert_eq!(r.optimality_percent(), 100.0);
        assert_eq!(r.mean_rouge_l(), Some(1.0));
        assert_eq!(r.mean_bleu(), Some(1.0));
        let stems: Vec<&str> = r.entries.iter().map(|e| e.stem.as_str()).collect();
        assert_eq!(stems[0], "p00");
        assert_eq!(stems[9], "p09");
    }

    #[test]
    fn one_mutated_of_four_is_75_percent() {
        let dir = tempfile::tempdir().unwrap();
        for (i, mutate) in [false, true, false, false].into_iter().enumerate() {
            write_pair(dir.path(), &format!("q{i}"), 3, mutate);
        }
        let r = score_corpus(dir.path()).unwrap();
        assert_eq!(r.validity_percent(), 75.0);
        let bad = &r.entries[1];
        assert!(!bad.valid && bad.failing_step.is_some() && bad.reason.is_some());
        assert!(bad.rouge_l.unwrap() < 1.0);
    }

    #[test]
    fn empty_corpus_has_zero_counts() {
        let dir = tempfile::tempdir().unwrap();
        let r = score_corpus(dir.path()).unwrap();
        assert_eq!(r.total(), 0);
        assert_eq!(r.validity_percent(), 0.0);
        assert_eq!(r.mean_bleu(), None);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 2);
    }

    #[test]
    fn broken_files_become_entries() {
        let dir = tempfile::tempdir().unwrap();
        write_pair(dir.path(), "good", 2, false);
        fs::write(dir.path().join("bad.hanoi-problem"), "<INIT> on d1 peg1").unwrap();
        fs::write(dir.path().join("bad.hanoi-plan"), "").unwrap();
        fs::write(dir.path().join("lonely.hanoi-plan"), "move d1 peg1 peg2").unwrap();
        let r = score_corpus(dir.path()).unwrap();
        assert_eq!(r.total(), 3);
        assert_eq!(r.errors(), 2);
        assert!((r.validity_percent() - 100.0 / 3.0).abs() < 1e-9);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().last().unwrap().starts_with("TOTAL,3,"));
    }
}
