//! The check suite over a ball and the CAT(0) verdict for a parameter pair.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{
    complete_corner, cube_completion_check, find_1corners, find_3corners, find_k32,
    flag_link_survey, pool_completers, square_pattern_violations, Resolution, RootKind,
};
use crate::ball::Ball;
use crate::complex::{Complex, Family};
use crate::error::{Error, Result};
use crate::structure::Params;
use crate::witness::{counterexample_witness, Witness};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckName {
    Squares,
    K32,
    Corners,
    CubeCompletion,
    Frontier,
    FlagLinks,
}

impl CheckName {
    pub const ALL: [CheckName; 6] = [
        CheckName::Squares,
        CheckName::K32,
        CheckName::Corners,
        CheckName::CubeCompletion,
        CheckName::Frontier,
        CheckName::FlagLinks,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::Squares => "squares",
            CheckName::K32 => "k32",
            CheckName::Corners => "corners",
            CheckName::CubeCompletion => "cubecompletion",
            CheckName::Frontier => "frontier",
            CheckName::FlagLinks => "flaglinks",
        }
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CheckName::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown check {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Unknown,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: CheckName,
    pub status: Status,
    pub items: Vec<Value>,
}

impl CheckResult {
    fn from_items(name: CheckName, items: Vec<Value>) -> Self {
        let status = if items.is_empty() { Status::Pass } else { Status::Fail };
        CheckResult { name, status, items }
    }
}

fn squares(ball: &Ball) -> CheckResult {
    let mut items: Vec<Value> = find_1corners(ball)
        .into_iter()
        .map(|i| json!({"one_corner": i}))
        .collect();
    items.extend(square_pattern_violations(ball).into_iter().map(|s| json!({"pattern": s})));
    if ball.complex.family == Family::C {
        for (i, &h) in ball.heights.iter().enumerate() {
            if h < 1 {
                items.push(json!({"height_below_one": i}));
            }
        }
    }
    CheckResult::from_items(CheckName::Squares, items)
}

fn k32(ball: &Ball) -> CheckResult {
    let items = find_k32(ball).into_iter().map(|k| json!(k)).collect();
    CheckResult::from_items(CheckName::K32, items)
}

/// Smallest height an attracting corner may reach when the complex is CAT(0).
fn attracting_floor(cx: &Complex) -> Option<usize> {
    match cx.family {
        Family::D => Some(1),
        Family::C if cx.params.m <= cx.params.n + 1 => Some(2),
        Family::C => None,
    }
}

fn corners(ball: &Ball) -> CheckResult {
    let cx = &ball.complex;
    let found = find_3corners(ball);
    let resolved: Vec<Result<_>> = found.par_iter().map(|c| complete_corner(ball, c)).collect();
    let mut status = Status::Pass;
    let mut items = Vec::new();
    let bump = |s: Status, status: &mut Status| {
        if s == Status::Fail || (s == Status::Unknown && *status == Status::Pass) {
            *status = s;
        }
    };
    for r in resolved {
        let c = match r {
            Ok(c) => c,
            Err(e) => {
                bump(Status::Fail, &mut status);
                items.push(json!({"error": e.to_string()}));
                continue;
            }
        };
        let mut problems: Vec<String> = Vec::new();
        match &c.resolution {
            Resolution::Completed { .. } => {}
            Resolution::NotCompletable { .. } => problems.push("not completable".into()),
            Resolution::Unknown { .. } => bump(Status::Unknown, &mut status),
        }
        if c.root_kind == RootKind::Attracting {
            let min = ball.heights[c.root].saturating_sub(2);
            if let Some(floor) = attracting_floor(cx) {
                if min < floor {
                    problems.push(format!("attracting corner reaches height {min} < {floor}"));
                }
            }
            if let Some(d) = &c.disk {
                if !(d.arcs_in_sigma && d.arcs_avoid_h && d.block_size == d.expected_block_size) {
                    problems.push("disk arcs do not land in the frontier of the bottom surface".into());
                }
                if !d.frontier_inequality {
                    problems.push("frontier inequality fails".into());
                }
            }
        }
        let completers = pool_completers(ball, &c).len();
        if completers > 1 {
            problems.push(format!("{completers} distinct completing vertices"));
        }
        let mut item = json!(c);
        if !problems.is_empty() {
            bump(Status::Fail, &mut status);
            item["problems"] = json!(problems);
        }
        items.push(item);
    }
    CheckResult {
        name: CheckName::Corners,
        status,
        items,
    }
}

fn cubecompletion(ball: &Ball) -> CheckResult {
    let rep = cube_completion_check(ball);
    let items = rep.violations.into_iter().map(Value::String).collect();
    CheckResult::from_items(CheckName::CubeCompletion, items)
}

fn frontier(ball: &Ball) -> CheckResult {
    let p = &ball.complex.params;
    let mut items = Vec::new();
    for (i, v) in ball.vertices.iter().enumerate() {
        let walk = p.frontier(&v.surface).len();
        let formula = p.frontier_formula(&v.surface);
        let adj = p.adjacent_polygons(&v.surface);
        let mut distinct = adj.clone();
        distinct.sort();
        distinct.dedup();
        if walk != formula || distinct.len() != adj.len() || adj.iter().any(|h| v.surface.contains(h)) {
            items.push(json!({"vertex": i, "walk": walk, "formula": formula}));
        }
    }
    CheckResult::from_items(CheckName::Frontier, items)
}

fn flaglinks(ball: &Ball) -> CheckResult {
    let s = flag_link_survey(ball);
    let mut items: Vec<Value> = s.non_flag.iter().map(|v| json!({"non_flag": v})).collect();
    items.extend(s.mismatches.iter().map(|v| json!({"disagrees_with_corner_search": v})));
    let mut r = CheckResult::from_items(CheckName::FlagLinks, items);
    if s.checked == 0 {
        r.status = Status::Unknown;
    }
    r.items.insert(0, json!({"checked": s.checked, "boundary": s.boundary}));
    r
}

pub fn run_check(ball: &Ball, name: CheckName) -> CheckResult {
    match name {
        CheckName::Squares => squares(ball),
        CheckName::K32 => k32(ball),
        CheckName::Corners => corners(ball),
        CheckName::CubeCompletion => cubecompletion(ball),
        CheckName::Frontier => frontier(ball),
        CheckName::FlagLinks => flaglinks(ball),
    }
}

pub fn run_checks(ball: &Ball, names: &[CheckName]) -> Vec<CheckResult> {
    names.iter().map(|&n| run_check(ball, n)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Evidence {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckResult>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub family: Family,
    pub n: u32,
    pub m: u32,
    pub expected_cat0: bool,
    /// The complex `E(A_{n,m})` the group acts on: `D(n, m-n+1)` when
    /// `m > n+1`, otherwise `C(n, m)`.
    pub selector: String,
    pub evidence: Evidence,
}

pub fn selector(n: u32, m: u32) -> String {
    if m > n + 1 {
        format!("D({},{})", n, m - n + 1)
    } else {
        format!("C({n},{m})")
    }
}

pub fn cat0_verdict(family: Family, n: u32, m: u32, ball: Option<&Ball>) -> Result<Verdict> {
    Params::new(n, m, family.flavor())?;
    let expected_cat0 = family == Family::D || m <= n + 1;
    let note = (family == Family::D && n == 2 && m == 1).then(|| "empirical only for this parameter pair".to_string());
    let witness = if family == Family::C && m > n + 1 {
        Some(counterexample_witness(n, m)?)
    } else {
        None
    };
    let checks = match ball {
        Some(b) => {
            if b.complex.family != family || b.complex.params.n != n || b.complex.params.m != m {
                return Err(Error::InvalidParams(format!(
                    "ball is for {}({},{}), not {family}({n},{m})",
                    b.complex.family, b.complex.params.n, b.complex.params.m
                )));
            }
            run_checks(b, &CheckName::ALL)
        }
        None => Vec::new(),
    };
    Ok(Verdict {
        family,
        n,
        m,
        expected_cat0,
        selector: selector(n, m),
        evidence: Evidence { note, witness, checks },
    })
}

/// The report written by the check command.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub checks: Vec<CheckResult>,
    pub verdict: Verdict,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selector_values() {
        assert_eq!(selector(2, 4), "D(2,3)");
        assert_eq!(selector(2, 3), "C(2,3)");
        assert_eq!(selector(1, 5), "D(1,5)");
    }

    #[test]
    fn check_names_round_trip() {
        for c in CheckName::ALL {
            assert_eq!(c.as_str().parse::<CheckName>().unwrap(), c);
        }
        assert!("bogus".parse::<CheckName>().is_err());
    }

    #[test]
    fn small_verdicts() {
        let v = cat0_verdict(Family::C, 2, 4, None).unwrap();
        assert!(!v.expected_cat0);
        assert!(v.evidence.witness.as_ref().unwrap().verified);
        assert!(cat0_verdict(Family::C, 2, 3, None).unwrap().expected_cat0);
        let d = cat0_verdict(Family::D, 2, 1, None).unwrap();
        assert!(d.expected_cat0);
        assert_eq!(d.evidence.note.as_deref(), Some("empirical only for this parameter pair"));
        assert!(cat0_verdict(Family::D, 0, 1, None).is_err());
    }
}
