//! The ten-vertex worked example and cell-by-cell checks of its gain tables.
//!
//! ```text
//! v0 ─┬─ v1 ─┬─ v3 ─┬─ v6
//!     │      │      ├─ v7
//!     │      │      └─ v8
//!     │      ├─ v4
//!     │      └─ v5 ─── v9
//!     └─ v2
//! ```

use std::fmt;

use crate::dp::{kbm_dp_gain_all, DpTable};
use crate::error::Error;
use crate::gain::{best_row, GainRow};
use crate::hierarchy::{Hierarchy, VertexId};
use crate::oracle::{truthful_answer, TargetError, TargetSet};
use crate::penalty::set_penalty;
use crate::session::{Mode, SessionState};
use crate::single::dfs_gain_all;

pub const TOY10_EDGES: &str = "v0\tv1\nv0\tv2\nv1\tv3\nv1\tv4\nv1\tv5\nv3\tv6\nv3\tv7\nv3\tv8\nv5\tv9\n";

pub fn toy10() -> Hierarchy {
    Hierarchy::from_edge_list(TOY10_EDGES).expect("fixture edge list is valid")
}

const COLUMNS: [&str; 9] = ["v1", "v2", "v3", "v4", "v5", "v6", "v7", "v8", "v9"];

/// Single target `{v5}`, budget 2. Rows are gYes, gNo, pYes, pNo, Gain¹.
const SINGLE_ROUND1: [(&str, [&str; 9]); 5] = [
    ("gYes", ["9", "20", "17", "20", "19", "20", "20", "20", "20"]),
    ("gNo", ["19", "1", "11", "2", "5", "3", "3", "3", "3"]),
    ("pYes", ["0.8", "0.1", "0.4", "0.1", "0.2", "0.1", "0.1", "0.1", "0.1"]),
    ("pNo", ["0.2", "0.9", "0.6", "0.9", "0.8", "0.9", "0.9", "0.9", "0.9"]),
    ("Gain1", ["11", "2.9", "13.4", "3.8", "7.8", "4.7", "4.7", "4.7", "4.7"]),
];
const SINGLE_ROUND2: [(&str, &str); 5] = [("v1", "6"), ("v2", "2.33"), ("v4", "3.17"), ("v5", "6"), ("v9", "4")];

/// Targets `{v5, v8}`, `k = 2`, budget 2.
const MULTI_ROUND1: [(&str, [&str; 9]); 3] = [
    ("gYes", ["8", "1", "12", "9", "10", "12", "12", "12", "11"]),
    ("gNo", ["19", "1", "11", "2", "5", "3", "3", "3", "3"]),
    ("Gain1", ["9.85", "1", "11.59", "3.4", "6.8", "4.8", "4.8", "4.8", "4.6"]),
];
const MULTI_ROUND2_COLUMNS: [&str; 7] = ["v2", "v4", "v5", "v6", "v7", "v8", "v9"];
const MULTI_ROUND2: [(&str, [&str; 7]); 3] = [
    ("gYes", ["0", "0", "1", "0", "0", "0", "2"]),
    ("gNo", ["1", "1", "3", "1", "1", "1", "2"]),
    ("Gain2", ["0.75", "0.75", "2.12", "0.75", "0.75", "0.75", "2"]),
];

#[derive(Clone, Debug, Default)]
pub struct FixtureOptions {
    /// Replace the uniform starting prior, e.g. to check that a wrong prior
    /// is caught.
    pub prior: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellCheck {
    pub table: &'static str,
    pub row: String,
    pub column: String,
    pub expected: String,
    pub actual: String,
}

impl CellCheck {
    pub fn ok(&self) -> bool {
        self.expected == self.actual
    }
}

#[derive(Clone, Debug, Default)]
pub struct FixtureReport {
    pub cells: Vec<CellCheck>,
}

impl FixtureReport {
    pub fn passed(&self) -> bool {
        self.cells.iter().all(CellCheck::ok)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CellCheck> {
        self.cells.iter().filter(|c| !c.ok())
    }

    pub fn count(&self, table: &str) -> usize {
        self.cells.iter().filter(|c| c.table == table).count()
    }

    fn push(&mut self, table: &'static str, row: &str, column: &str, expected: &str, actual: String) {
        self.cells.push(CellCheck {
            table,
            row: row.to_string(),
            column: column.to_string(),
            expected: expected.to_string(),
            actual,
        });
    }
}

impl fmt::Display for FixtureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for table in ["single", "multi"] {
            let total = self.count(table);
            let bad = self.failures().filter(|c| c.table == table).count();
            writeln!(f, "{table}: {}/{total} cells match", total - bad)?;
        }
        for c in self.failures() {
            writeln!(
                f,
                "  mismatch {} {} {}: expected {} got {}",
                c.table, c.row, c.column, c.expected, c.actual
            )?;
        }
        Ok(())
    }
}

/// Render `actual` with as many decimals as `expected` prints. Integers are
/// shown exactly.
fn render_like(expected: &str, actual: f64) -> String {
    let decimals = expected.split_once('.').map_or(0, |(_, frac)| frac.len());
    format!("{actual:.decimals$}")
}

fn cell(row: &GainRow, name: &str) -> Cell {
    match name {
        "gYes" => Cell::Int(row.g_yes),
        "gNo" => Cell::Int(row.g_no),
        "pYes" => Cell::Real(row.p_yes),
        "pNo" => Cell::Real(row.p_no),
        _ => Cell::Real(row.gain),
    }
}

enum Cell {
    Int(i64),
    Real(f64),
}

impl Cell {
    fn render(&self, expected: &str) -> String {
        match *self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => render_like(expected, v),
        }
    }
}

fn id(h: &Hierarchy, name: &str) -> Result<VertexId, Error> {
    h.lookup(name)
        .ok_or_else(|| Error::Target(TargetError::UnknownLabel(name.to_string())))
}

fn find(rows: &[GainRow], v: VertexId) -> Option<&GainRow> {
    rows.iter().find(|r| r.vertex == v)
}

fn fresh(h: &Hierarchy, mode: Mode, k: usize, opts: &FixtureOptions) -> Result<SessionState, Error> {
    let mut s = SessionState::new(h, mode, 2, k)?;
    if let Some(p) = opts.prior {
        s.set_uniform_prior(p);
    }
    Ok(s)
}

/// Recompute both worked-example tables on `h` and compare every printed cell,
/// the question sequences and the final penalties.
pub fn verify_fixtures(h: &Hierarchy, opts: &FixtureOptions) -> Result<FixtureReport, Error> {
    let mut report = FixtureReport::default();
    let missing = || "missing".to_string();

    // single target
    let t = TargetSet::from_labels(h, &["v5"])?;
    let mut s = fresh(h, Mode::Single, 1, opts)?;
    let rows = dfs_gain_all(h, &s);
    for (name, values) in SINGLE_ROUND1 {
        for (col, expected) in COLUMNS.iter().zip(values) {
            let actual = find(&rows, id(h, col)?).map_or_else(missing, |r| cell(r, name).render(expected));
            report.push("single", name, col, expected, actual);
        }
    }
    let mut asked = Vec::new();
    let q1 = best_row(h, &rows).ok_or(crate::session::SessionError::EmptyPool)?;
    s.apply_answer(h, q1, truthful_answer(h, &t, q1))?;
    asked.push(q1);
    let rows = dfs_gain_all(h, &s);
    for (col, expected) in SINGLE_ROUND2 {
        let actual = find(&rows, id(h, col)?).map_or_else(missing, |r| render_like(expected, r.gain));
        report.push("single", "Gain2", col, expected, actual);
    }
    let q2 = best_row(h, &rows).ok_or(crate::session::SessionError::EmptyPool)?;
    s.apply_answer(h, q2, truthful_answer(h, &t, q2))?;
    asked.push(q2);
    report.push("single", "questions", "-", "v3,v5", keys(h, &asked));
    let sel = s.finalize_selection(h);
    report.push("single", "penalty", "-", "0", set_penalty(h, sel.members(), t.members()).to_string());

    // multiple targets
    let t = TargetSet::from_labels(h, &["v5", "v8"])?;
    let mut s = fresh(h, Mode::Multi, 2, opts)?;
    let rows = kbm_dp_gain_all(h, &s, &DpTable::build(h, &s));
    for (name, values) in MULTI_ROUND1 {
        for (col, expected) in COLUMNS.iter().zip(values) {
            let actual = find(&rows, id(h, col)?).map_or_else(missing, |r| cell(r, name).render(expected));
            report.push("multi", name, col, expected, actual);
        }
    }
    let mut asked = Vec::new();
    let q1 = best_row(h, &rows).ok_or(crate::session::SessionError::EmptyPool)?;
    s.apply_answer(h, q1, truthful_answer(h, &t, q1))?;
    asked.push(q1);
    let rows = kbm_dp_gain_all(h, &s, &DpTable::build(h, &s));
    for (name, values) in MULTI_ROUND2 {
        for (col, expected) in MULTI_ROUND2_COLUMNS.iter().zip(values) {
            let actual = find(&rows, id(h, col)?).map_or_else(missing, |r| cell(r, name).render(expected));
            report.push("multi", name, col, expected, actual);
        }
    }
    let q2 = best_row(h, &rows).ok_or(crate::session::SessionError::EmptyPool)?;
    s.apply_answer(h, q2, truthful_answer(h, &t, q2))?;
    asked.push(q2);
    report.push("multi", "questions", "-", "v3,v5", keys(h, &asked));
    let sel = s.finalize_selection(h);
    report.push("multi", "selection", "-", "v3,v5", keys(h, sel.members()));
    report.push("multi", "penalty", "-", "1", set_penalty(h, sel.members(), t.members()).to_string());
    Ok(report)
}

fn keys(h: &Hierarchy, vs: &[VertexId]) -> String {
    vs.iter().map(|&v| h.key(v)).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_matches_printed_cells() {
        assert_eq!(render_like("13.4", 13.4000000001), "13.4");
        assert_eq!(render_like("11", 11.0), "11");
        assert_eq!(render_like("2.12", 2.125), "2.12");
        assert_eq!(render_like("9.85", 0.8f64.powi(8) * 19.0 + (1.0 - 0.8f64.powi(8)) * 8.0), "9.85");
    }

    #[test]
    fn pristine_fixture_passes() {
        let report = verify_fixtures(&toy10(), &FixtureOptions::default()).unwrap();
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn perturbed_prior_is_flagged() {
        let report = verify_fixtures(&toy10(), &FixtureOptions { prior: Some(0.11) }).unwrap();
        assert!(!report.passed());
        assert!(report.failures().any(|c| c.row == "pYes"));
    }
}
