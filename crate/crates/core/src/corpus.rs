//! Bundled example files and the corpus runner.

use std::fmt;

use crate::diagram::{ComponentKind, KirbyDiagram, Side};
use crate::middle::{Refusal, RibbonDescriptor};
use crate::script::{asserted_homology, run_script};
use crate::simplifier::{stabilization_plan, verify_plan, Outcome, PlanError};
use crate::textio::{
    parse_diagram, parse_document, parse_middle, parse_script, parse_tree, serialize_diagram, serialize_middle,
    serialize_script, serialize_tree, Command, Document,
};
use crate::tree::SignedTree;

macro_rules! corpus_file {
    ($name:literal) => {
        ($name, include_str!(concat!("../corpus/", $name)))
    };
}

/// Every bundled file as `(file name, contents)`.
pub const FILES: &[(&str, &str)] = &[
    corpus_file!("chplus.tree"),
    corpus_file!("u1.tree"),
    corpus_file!("u2.tree"),
    corpus_file!("u3.tree"),
    corpus_file!("r0.middle"),
    corpus_file!("r1.middle"),
    corpus_file!("r2.middle"),
    corpus_file!("r3.middle"),
    corpus_file!("x2.diagram"),
    corpus_file!("x2-to-y0.script"),
    corpus_file!("y2.diagram"),
    corpus_file!("y2-into-c1.script"),
    corpus_file!("y2-dual.script"),
    corpus_file!("y2-m0.diagram"),
    corpus_file!("y2-into-m0.script"),
];

/// Script files and the diagram each one runs on.
pub const WALKTHROUGHS: &[(&str, &str)] = &[
    ("x2-to-y0.script", "x2.diagram"),
    ("y2-into-c1.script", "y2.diagram"),
    ("y2-dual.script", "y2.diagram"),
    ("y2-into-m0.script", "y2-m0.diagram"),
];

pub fn file(name: &str) -> Option<&'static str> {
    FILES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusRow {
    pub item: String,
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CorpusReport {
    pub rows: Vec<CorpusRow>,
}

impl CorpusReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CorpusRow> {
        self.rows.iter().filter(|r| !r.passed)
    }

    fn push(&mut self, item: &str, check: &str, outcome: Result<String, String>) {
        let (passed, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        self.rows.push(CorpusRow { item: item.into(), check: check.into(), passed, detail });
    }
}

impl fmt::Display for CorpusReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w_item = self.rows.iter().map(|r| r.item.len()).max().unwrap_or(4).max(4);
        let w_check = self.rows.iter().map(|r| r.check.len()).max().unwrap_or(5).max(5);
        writeln!(f, "{:<w_item$}  {:<w_check$}  {:<6}  detail", "item", "check", "result")?;
        for r in &self.rows {
            let res = if r.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{:<w_item$}  {:<w_check$}  {:<6}  {}", r.item, r.check, res, r.detail)?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed", self.rows.len(), failed)
    }
}

fn round_trip(text: &str) -> Result<String, String> {
    let doc = parse_document(text).map_err(|e| e.to_string())?;
    let again = match &doc {
        Document::Diagram(d) => serialize_diagram(d),
        Document::Tree(t) => serialize_tree(t),
        Document::Middle(r) => serialize_middle(r),
        Document::Script(s) => serialize_script(s),
    };
    let back = parse_document(&again).map_err(|e| format!("reparse: {e}"))?;
    if back != doc {
        return Err("value changed after serialize and parse".into());
    }
    let kind = match doc {
        Document::Diagram(_) => "diagram",
        Document::Tree(_) => "tree",
        Document::Middle(_) => "middle",
        Document::Script(_) => "script",
    };
    Ok(kind.into())
}

fn load_tree(name: &str) -> Result<SignedTree, String> {
    parse_tree(file(name).ok_or("missing file")?).map_err(|e| e.to_string())
}

fn load_middle(name: &str) -> Result<RibbonDescriptor, String> {
    let r = parse_middle(file(name).ok_or("missing file")?).map_err(|e| e.to_string())?;
    let v = r.validate();
    if v.is_empty() {
        Ok(r)
    } else {
        Err(v.join("; "))
    }
}

fn check_ch_plus() -> Result<String, String> {
    let t = load_tree("chplus.tree")?;
    let positive = t.is_positive().map_err(|e| e.to_string())?;
    if !positive || !t.is_strictly_positive() {
        return Err(format!("positive={positive} strict={}", t.is_strictly_positive()));
    }
    Ok("positive, strictly positive".into())
}

fn check_tower(k: u32) -> Result<String, String> {
    let t = load_tree(&format!("u{k}.tree"))?;
    let expected = load_tree("chplus.tree")?.truncate(k).map_err(|e| e.to_string())?;
    if t != expected {
        return Err(format!("differs from the first {k} levels of CH+"));
    }
    if !t.is_strictly_positive() {
        return Err("not strictly positive".into());
    }
    Ok(format!("first {k} levels of CH+, {} nodes", t.nodes.len()))
}

fn check_positive_descriptor(name: &str) -> Result<String, String> {
    let r = load_middle(name)?;
    let decision = r.is_positive_ribbon();
    let Some(w) = decision.witness else {
        return Err(format!("not positive: {:?}", decision.refusals));
    };
    let l = r.middle.accessory_loop(&w).ok_or("witness is not a loop")?;
    if let Some(refusal) = r.loop_refusal(l) {
        return Err(format!("witness `{w}` fails {refusal} on recheck"));
    }
    let plan = stabilization_plan(&r).map_err(|e| e.to_string())?;
    if plan.outcome != (Outcome::PositiveObstruction { witness: w.clone() }) {
        return Err(format!("planner returned {:?}", plan.outcome));
    }
    verify_plan(&r, &plan).map_err(|e| e.to_string())?;
    Ok(format!("positive, witness loop `{w}`"))
}

fn check_r0() -> Result<String, String> {
    let r = load_middle("r0.middle")?;
    let decision = r.is_positive_ribbon();
    if decision.is_positive() {
        return Err("decided positive although its accessory cap is standard".into());
    }
    if decision.refusals != vec![("a".to_string(), Refusal::AccessoryCap)] {
        return Err(format!("unexpected refusals {:?}", decision.refusals));
    }
    // The only refusal is the single-finger clause and the finger closes a
    // cycle on A1, so no planning step applies; the planner must name the loop.
    match stabilization_plan(&r) {
        Err(PlanError::InternalConsistency { loop_id, .. }) if loop_id == "a" => {
            Ok("not positive (accessory cap); planner flags loop `a` on the self-finger cycle".into())
        }
        other => Err(format!("planner returned {other:?}")),
    }
}

fn dots(d: &KirbyDiagram) -> usize {
    d.components().iter().filter(|c| c.kind == ComponentKind::Dotted).count()
}

fn check_walkthrough(script: &str, diagram: &str) -> Result<String, String> {
    let d = parse_diagram(file(diagram).ok_or("missing diagram")?).map_err(|e| e.to_string())?;
    let violations = d.validate();
    if !violations.is_empty() {
        return Err(format!("invalid diagram: {}", violations[0]));
    }
    let s = parse_script(file(script).ok_or("missing script")?).map_err(|e| e.to_string())?;
    let run = run_script(&d, &s, true).map_err(|e| e.to_string())?;
    if let Some(v) = run.diagram.validate().first() {
        return Err(format!("final diagram invalid: {v}"));
    }
    // H1 of the upper boundary must stay constant between dualizations, and
    // every dualization must turn the drawn 1-handles into 3-handles.
    let mut reference = asserted_homology(&d, Side::Plus).map_err(|e| e.to_string())?;
    let mut before = d.clone();
    let mut dualized = 0;
    for (report, cmd) in run.trace.iter().zip(&s.commands) {
        let after = crate::script::apply_command(&before, cmd).map_err(|e| e.to_string())?;
        if *cmd == Command::Dualize {
            dualized += 1;
            if after.three_handles != dots(&before) + before.hidden_one_handles {
                return Err(format!("step {}: dual has {} 3-handles", report.step, after.three_handles));
            }
            reference = report.h1_plus.clone();
        } else if report.h1_plus != reference {
            return Err(format!("step {}: H1 changed from {reference} to {}", report.step, report.h1_plus));
        }
        before = after;
    }
    Ok(format!(
        "{} steps, H1(upper) = {reference}, {dualized} dualization(s), final chi={} sigma={}",
        run.trace.len(),
        run.diagram.euler_char(),
        run.diagram.signature()
    ))
}

/// Runs every corpus check.
pub fn corpus_run() -> CorpusReport {
    let mut report = CorpusReport::default();
    for (name, text) in FILES {
        report.push(name, "round-trip", round_trip(text));
    }
    report.push("chplus.tree", "positivity", check_ch_plus());
    for k in 1..=3 {
        report.push(&format!("u{k}.tree"), "tower", check_tower(k));
    }
    for name in ["r1.middle", "r2.middle", "r3.middle"] {
        report.push(name, "positivity", check_positive_descriptor(name));
    }
    report.push("r0.middle", "positivity", check_r0());
    for (script, diagram) in WALKTHROUGHS {
        report.push(script, "walkthrough", check_walkthrough(script, diagram));
    }
    report
}
