//! Stabilization planning for non-positive ribbon descriptors.
//!
//! The planner blows up enough times to replace every non-positive Casson
//! cap by a standard 2-handle, uses the embedded caps to break accessory
//! loops and run Whitney tricks, removes every remaining finger with Norman
//! tricks in reverse topological order of the finger graph, and finally
//! cancels the now complementary 2-/3-handle pairs. The result is a list of
//! steps that [`verify_plan`] replays from scratch.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::middle::{Cap, MiddleLevelData, RibbonDescriptor};
use crate::tree::{PruneDepth, TreeError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    /// Blow up `cost` times and replace the non-positive cap of `id` by a
    /// standard 2-handle; `depth` is its prune depth.
    ReplaceCap { id: String, cost: u64, depth: u32 },
    /// A standard Whitney cap `via` lets the Whitney trick remove `finger`,
    /// which breaks `loop_id` along with any other loop through the finger.
    BreakLoop { loop_id: String, via: String, finger: String, killed_loops: Vec<String> },
    /// Whitney trick on a finger no accessory loop passes through.
    WhitneyTrick { finger: String, whitney: String },
    /// Norman trick on `finger` (from `A_from_a` through `B_through_b`);
    /// `delta` is the change of row `from_a` of the geometric matrix.
    NormanTrick {
        finger: String,
        from_a: usize,
        through_b: usize,
        delta: Vec<i64>,
        killed_loops: Vec<String>,
    },
    /// Cancel the complementary pair `A_pair`, `B_pair`.
    CancelPair { pair: usize },
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::ReplaceCap { id, cost, depth } => write!(f, "replace-cap {id} cost={cost} depth={depth}"),
            Step::BreakLoop { loop_id, via, finger, killed_loops } => {
                write!(f, "break-loop {loop_id} via={via} finger={finger}")?;
                if !killed_loops.is_empty() {
                    write!(f, " killed={}", killed_loops.join(","))?;
                }
                Ok(())
            }
            Step::WhitneyTrick { finger, whitney } => write!(f, "whitney-trick {finger} via={whitney}"),
            Step::NormanTrick { finger, from_a, through_b, delta, killed_loops } => {
                let d: Vec<String> = delta.iter().map(i64::to_string).collect();
                write!(f, "norman-trick {finger} A{from_a}->B{through_b} delta=[{}]", d.join(","))?;
                if !killed_loops.is_empty() {
                    write!(f, " killed={}", killed_loops.join(","))?;
                }
                Ok(())
            }
            Step::CancelPair { pair } => write!(f, "cancel-pair A{pair}/B{pair}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// All handle pairs cancel after the recorded blow-ups.
    Product,
    /// The descriptor is positive; `witness` is an accessory loop meeting
    /// every clause.
    PositiveObstruction { witness: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizationPlan {
    pub name: String,
    /// Number of tower levels that must be embedded.
    pub k: u32,
    pub blowups: u64,
    pub steps: Vec<Step>,
    pub outcome: Outcome,
}

impl StabilizationPlan {
    pub fn interpretation(&self) -> &'static str {
        match self.outcome {
            Outcome::Product => {
                "product structure after the recorded blow-ups; the cobordism is not stably non-product"
            }
            Outcome::PositiveObstruction { .. } => {
                "positive descriptor; no stabilization to a product is produced"
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("invalid descriptor: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("finger graph has a cycle through fingers {}", .fingers.join(","))]
    CycleDetected { fingers: Vec<String>, spheres: Vec<usize> },
    #[error("internal consistency error: accessory loop `{loop_id}` survives on the finger cycle {}", .fingers.join(","))]
    InternalConsistency { loop_id: String, fingers: Vec<String> },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapReplacement {
    pub descriptor: RibbonDescriptor,
    pub steps: Vec<Step>,
    pub blowups: u64,
    pub k: u32,
}

/// Replaces every non-positive Casson cap by a standard 2-handle.
pub fn replace_nonpositive_caps(r: &RibbonDescriptor) -> Result<CapReplacement, PlanError> {
    let mut out = r.clone();
    let mut steps = Vec::new();
    let mut blowups: u64 = 0;
    let mut k = 0;
    for (id, cap) in &r.caps {
        let Cap::Tree(name) = cap else { continue };
        let tree = r
            .trees
            .get(name)
            .ok_or_else(|| PlanError::Invalid(vec![format!("missing tree `{name}`")]))?;
        if tree.is_positive()? {
            continue;
        }
        let cost = tree.kuga_blowup_cost()?;
        let PruneDepth::Finite(depth) = tree.prune_depth() else {
            unreachable!("non-positive handles have finite prune depth")
        };
        blowups = blowups.checked_add(cost).ok_or(TreeError::Overflow)?;
        k = k.max(depth);
        out.caps.insert(id.clone(), Cap::Standard);
        steps.push(Step::ReplaceCap { id: id.clone(), cost, depth });
    }
    Ok(CapReplacement { descriptor: out, steps, blowups, k })
}

/// Removes a finger, its Whitney cap, and every loop through it (with their
/// caps). Returns the ids of the removed loops other than `except`.
fn remove_finger(r: &mut RibbonDescriptor, finger: &str, except: Option<&str>) -> Vec<String> {
    if let Some(pos) = r.middle.fingers.iter().position(|f| f.id == finger) {
        let f = r.middle.fingers.remove(pos);
        r.caps.remove(&f.whitney);
    }
    let mut killed = Vec::new();
    r.middle.loops.retain(|l| {
        if l.fingers.iter().any(|x| x == finger) {
            if Some(l.id.as_str()) != except {
                killed.push(l.id.clone());
            }
            false
        } else {
            true
        }
    });
    for id in &killed {
        r.caps.remove(id);
    }
    if let Some(e) = except {
        r.caps.remove(e);
    }
    killed
}

fn is_standard(r: &RibbonDescriptor, id: &str) -> bool {
    matches!(r.caps.get(id), Some(Cap::Standard))
}

/// Breaks every accessory loop whose Whitney set contains a standard cap,
/// then Whitney-tricks the remaining standard-capped fingers.
pub fn break_loops(r: &RibbonDescriptor) -> (RibbonDescriptor, Vec<Step>) {
    let mut out = r.clone();
    let mut steps = Vec::new();
    let loop_ids: Vec<String> = r.middle.loops.iter().map(|l| l.id.clone()).collect();
    for lid in loop_ids {
        let Some(l) = out.middle.accessory_loop(&lid).cloned() else { continue };
        let via = l.fingers.iter().find_map(|fid| {
            let f = out.middle.finger(fid)?;
            is_standard(&out, &f.whitney).then(|| (f.id.clone(), f.whitney.clone()))
        });
        if let Some((finger, whitney)) = via {
            let killed = remove_finger(&mut out, &finger, Some(&lid));
            steps.push(Step::BreakLoop { loop_id: lid, via: whitney, finger, killed_loops: killed });
        }
    }
    let standalone: Vec<(String, String)> = out
        .middle
        .fingers
        .iter()
        .filter(|f| is_standard(&out, &f.whitney))
        .filter(|f| !out.middle.loops.iter().any(|l| l.fingers.contains(&f.id)))
        .map(|f| (f.id.clone(), f.whitney.clone()))
        .collect();
    for (finger, whitney) in standalone {
        remove_finger(&mut out, &finger, None);
        steps.push(Step::WhitneyTrick { finger, whitney });
    }
    (out, steps)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormanError {
    #[error("finger graph has a cycle through fingers {}", .fingers.join(","))]
    CycleDetected { fingers: Vec<String>, spheres: Vec<usize> },
    #[error("unknown finger `{0}`")]
    UnknownFinger(String),
    #[error("finger `{0}` starts and ends on the same sphere pair")]
    SelfFinger(String),
}

/// Result of eliminating all fingers with Norman tricks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormanRun {
    pub steps: Vec<Step>,
    pub final_g: Vec<Vec<u64>>,
    pub remaining: MiddleLevelData,
}

fn row_is_clean(g: &[Vec<u64>], j: usize) -> bool {
    g[j].iter().enumerate().all(|(t, &x)| x == u64::from(t == j))
}

/// Change of row `i` when tubing both intersection points of a finger
/// `A_i -> B_j` with parallel copies of `A_j`:
/// `G[i][t] += 2 (G[j][t] - delta_jt)` and then `G[i][j] -= 2`.
pub fn norman_delta(g: &[Vec<u64>], j: usize) -> Vec<i64> {
    (0..g.len())
        .map(|t| {
            let base = 2 * (g[j][t] as i64 - i64::from(t == j));
            if t == j {
                base - 2
            } else {
                base
            }
        })
        .collect()
}

fn apply_delta(g: &mut [Vec<u64>], i: usize, delta: &[i64]) {
    for (cell, d) in g[i].iter_mut().zip(delta) {
        *cell = (*cell as i64 + d) as u64;
    }
}

/// A directed cycle among the fingers of `m`, if any, following the first
/// outgoing finger at each sphere.
fn finger_cycle(m: &MiddleLevelData) -> Option<(Vec<String>, Vec<usize>)> {
    let graph = m.finger_graph();
    let cycle = graph.cycles().into_iter().next()?;
    let fingers = cycle
        .iter()
        .enumerate()
        .map(|(pos, &a)| {
            let b = cycle[(pos + 1) % cycle.len()];
            m.fingers.iter().find(|f| f.from_a == a && f.through_b == b).unwrap().id.clone()
        })
        .collect();
    Some((fingers, cycle))
}

/// Removes every finger by Norman tricks whose target row is clean,
/// processing the finger graph in reverse topological order. Loops through
/// a removed finger disappear with it.
pub fn norman_eliminate(m: &MiddleLevelData) -> Result<NormanRun, NormanError> {
    let mut m = m.clone();
    let mut g = m.geometric_matrix();
    let mut steps = Vec::new();
    while !m.fingers.is_empty() {
        let pick = m.fingers.iter().find(|f| {
            f.from_a != f.through_b && row_is_clean(&g, f.through_b - 1)
        });
        let Some(f) = pick.cloned() else {
            let (fingers, spheres) = finger_cycle(&m).expect("stuck worklist implies a cycle");
            return Err(NormanError::CycleDetected { fingers, spheres });
        };
        let (i, j) = (f.from_a - 1, f.through_b - 1);
        let delta = norman_delta(&g, j);
        apply_delta(&mut g, i, &delta);
        m.fingers.retain(|x| x.id != f.id);
        let mut killed = Vec::new();
        m.loops.retain(|l| {
            let hit = l.fingers.contains(&f.id);
            if hit {
                killed.push(l.id.clone());
            }
            !hit
        });
        steps.push(Step::NormanTrick {
            finger: f.id.clone(),
            from_a: f.from_a,
            through_b: f.through_b,
            delta,
            killed_loops: killed,
        });
    }
    Ok(NormanRun { steps, final_g: g, remaining: m })
}

/// One Norman trick of the cascade: the finger `A_i -> B_j` is removed and
/// `A_i` inherits two copies of every finger of `A_j`, with Whitney ids
/// suffixed `.1` and `.2`. Returns the row delta.
pub fn norman_trick(
    m: &mut MiddleLevelData,
    g: &mut [Vec<u64>],
    finger: &str,
) -> Result<Vec<i64>, NormanError> {
    let pos = m
        .fingers
        .iter()
        .position(|f| f.id == finger)
        .ok_or_else(|| NormanError::UnknownFinger(finger.to_string()))?;
    let f = m.fingers[pos].clone();
    if f.from_a == f.through_b {
        return Err(NormanError::SelfFinger(f.id));
    }
    let (i, j) = (f.from_a - 1, f.through_b - 1);
    let delta = norman_delta(g, j);
    apply_delta(g, i, &delta);
    m.fingers.remove(pos);
    let inherited: Vec<_> = m.fingers.iter().filter(|x| x.from_a == f.through_b).cloned().collect();
    for copy in 1..=2 {
        for x in &inherited {
            m.fingers.push(crate::middle::Finger {
                id: format!("{}/{}.{copy}", f.id, x.id),
                from_a: f.from_a,
                through_b: x.through_b,
                whitney: format!("{}/{}.{copy}", f.whitney, x.whitney),
            });
        }
    }
    m.loops.retain(|l| !l.fingers.contains(&f.id));
    Ok(delta)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CascadeTrick {
    pub finger: String,
    pub from_a: usize,
    pub through_b: usize,
    pub delta: Vec<i64>,
}

/// Norman tricks in source-first order: each trick pushes the finger's
/// intersections one level down the finger graph until they land on
/// spheres with clean rows.
pub fn norman_cascade(m: &MiddleLevelData) -> Result<(Vec<CascadeTrick>, Vec<Vec<u64>>), NormanError> {
    if let Some((fingers, spheres)) = finger_cycle(m) {
        return Err(NormanError::CycleDetected { fingers, spheres });
    }
    let mut m = m.clone();
    let mut g = m.geometric_matrix();
    let mut tricks = Vec::new();
    while let Some(f) = m.fingers.first().cloned() {
        let delta = norman_trick(&mut m, &mut g, &f.id)?;
        tricks.push(CascadeTrick { finger: f.id, from_a: f.from_a, through_b: f.through_b, delta });
    }
    Ok((tricks, g))
}

/// Plans a stabilization of a non-positive descriptor, or reports the
/// positivity witness.
pub fn stabilization_plan(r: &RibbonDescriptor) -> Result<StabilizationPlan, PlanError> {
    let violations = r.validate();
    if !violations.is_empty() {
        return Err(PlanError::Invalid(violations));
    }
    let name = r.middle.name.clone();
    if let Some(witness) = r.is_positive_ribbon().witness {
        return Ok(StabilizationPlan {
            name,
            k: 0,
            blowups: 0,
            steps: Vec::new(),
            outcome: Outcome::PositiveObstruction { witness },
        });
    }
    let replaced = replace_nonpositive_caps(r)?;
    let mut steps = replaced.steps;
    let (broken, break_steps) = break_loops(&replaced.descriptor);
    steps.extend(break_steps);
    let run = norman_eliminate(&broken.middle).map_err(|e| match e {
        NormanError::CycleDetected { fingers, spheres } => {
            let blocker = broken
                .middle
                .loops
                .iter()
                .find(|l| l.fingers.iter().any(|f| fingers.contains(f)));
            match blocker {
                Some(l) => PlanError::InternalConsistency { loop_id: l.id.clone(), fingers },
                None => PlanError::CycleDetected { fingers, spheres },
            }
        }
        other => unreachable!("clean-row elimination cannot fail with {other}"),
    })?;
    steps.extend(run.steps);
    steps.extend((1..=r.middle.pairs).map(|pair| Step::CancelPair { pair }));
    Ok(StabilizationPlan {
        name,
        k: replaced.k,
        blowups: replaced.blowups,
        steps,
        outcome: Outcome::Product,
    })
}

/// Where and why a plan failed to replay.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}: {reason}", match .step { Some(i) => format!("step {i}"), None => "plan".to_string() })]
pub struct VerifyFailure {
    /// Index of the first failing step, `None` for totals and outcome checks.
    pub step: Option<usize>,
    pub reason: String,
}

struct Replay {
    r: RibbonDescriptor,
    g: Vec<Vec<u64>>,
    cancelled: Vec<bool>,
    blowups: u64,
    k: u32,
}

impl Replay {
    fn take_finger(&mut self, finger: &str, except: Option<&str>) -> Vec<String> {
        if let Some(f) = self.r.middle.finger(finger) {
            let (i, j) = (f.from_a - 1, f.through_b - 1);
            self.g[i][j] -= 2;
        }
        remove_finger(&mut self.r, finger, except)
    }

    fn loops_through(&self, finger: &str, except: Option<&str>) -> Vec<String> {
        self.r
            .middle
            .loops
            .iter()
            .filter(|l| Some(l.id.as_str()) != except && l.fingers.iter().any(|x| x == finger))
            .map(|l| l.id.clone())
            .collect()
    }

    fn step(&mut self, step: &Step) -> Result<(), String> {
        match step {
            Step::ReplaceCap { id, cost, depth } => {
                let Some(Cap::Tree(name)) = self.r.caps.get(id) else {
                    return Err(format!("`{id}` is not capped by a Casson handle"));
                };
                let tree = self.r.trees.get(name).ok_or(format!("missing tree `{name}`"))?;
                if tree.is_positive().map_err(|e| e.to_string())? {
                    return Err(format!("cap of `{id}` is positive"));
                }
                let actual = tree.kuga_blowup_cost().map_err(|e| e.to_string())?;
                if actual != *cost {
                    return Err(format!("cost {cost} recorded, {actual} required"));
                }
                if tree.prune_depth() != PruneDepth::Finite(*depth) {
                    return Err(format!("depth {depth} recorded, {} required", tree.prune_depth()));
                }
                self.blowups = self.blowups.saturating_add(*cost);
                self.k = self.k.max(*depth);
                self.r.caps.insert(id.clone(), Cap::Standard);
            }
            Step::BreakLoop { loop_id, via, finger, killed_loops } => {
                let l = self.r.middle.accessory_loop(loop_id).ok_or(format!("no loop `{loop_id}`"))?;
                if !l.fingers.contains(finger) {
                    return Err(format!("loop `{loop_id}` does not pass through `{finger}`"));
                }
                let f = self.r.middle.finger(finger).ok_or(format!("no finger `{finger}`"))?;
                if &f.whitney != via {
                    return Err(format!("finger `{finger}` has Whitney loop `{}`", f.whitney));
                }
                if !is_standard(&self.r, via) {
                    return Err(format!("Whitney loop `{via}` is not capped by a standard 2-handle"));
                }
                let expected = self.loops_through(finger, Some(loop_id));
                if &expected != killed_loops {
                    return Err(format!("killed loops {killed_loops:?} recorded, {expected:?} required"));
                }
                self.take_finger(finger, Some(loop_id));
            }
            Step::WhitneyTrick { finger, whitney } => {
                let f = self.r.middle.finger(finger).ok_or(format!("no finger `{finger}`"))?;
                if &f.whitney != whitney {
                    return Err(format!("finger `{finger}` has Whitney loop `{}`", f.whitney));
                }
                if !is_standard(&self.r, whitney) {
                    return Err(format!("Whitney loop `{whitney}` is not capped by a standard 2-handle"));
                }
                if let Some(l) = self.loops_through(finger, None).first() {
                    return Err(format!("accessory loop `{l}` passes through `{finger}`"));
                }
                self.take_finger(finger, None);
            }
            Step::NormanTrick { finger, from_a, through_b, delta, killed_loops } => {
                let f = self.r.middle.finger(finger).ok_or(format!("no finger `{finger}`"))?;
                if (f.from_a, f.through_b) != (*from_a, *through_b) {
                    return Err(format!("finger `{finger}` runs A{}->B{}", f.from_a, f.through_b));
                }
                if from_a == through_b {
                    return Err(format!("finger `{finger}` returns to its own pair"));
                }
                let (i, j) = (from_a - 1, through_b - 1);
                if !row_is_clean(&self.g, j) {
                    return Err(format!("row {through_b} is not clean"));
                }
                let expected = norman_delta(&self.g, j);
                if &expected != delta {
                    return Err(format!("delta {delta:?} recorded, {expected:?} required"));
                }
                let killed = self.loops_through(finger, None);
                if &killed != killed_loops {
                    return Err(format!("killed loops {killed_loops:?} recorded, {killed:?} required"));
                }
                apply_delta(&mut self.g, i, delta);
                remove_finger(&mut self.r, finger, None);
            }
            Step::CancelPair { pair } => {
                if *pair == 0 || *pair > self.cancelled.len() {
                    return Err(format!("no sphere pair {pair}"));
                }
                let p = pair - 1;
                if self.cancelled[p] {
                    return Err(format!("pair {pair} already cancelled"));
                }
                let clean_col = (0..self.g.len()).all(|t| self.g[t][p] == u64::from(t == p));
                if !row_is_clean(&self.g, p) || !clean_col {
                    return Err(format!("A{pair} and B{pair} still meet extra spheres"));
                }
                self.cancelled[p] = true;
            }
        }
        Ok(())
    }
}

/// Replays `p` against `r`, checking every step's precondition, the
/// recorded totals, and the terminal state.
pub fn verify_plan(r: &RibbonDescriptor, p: &StabilizationPlan) -> Result<(), VerifyFailure> {
    let fail = |step: Option<usize>, reason: String| Err(VerifyFailure { step, reason });
    let violations = r.validate();
    if !violations.is_empty() {
        return fail(None, format!("invalid descriptor: {}", violations.join("; ")));
    }
    match &p.outcome {
        Outcome::PositiveObstruction { witness } => {
            let Some(l) = r.middle.accessory_loop(witness) else {
                return fail(None, format!("witness `{witness}` is not an accessory loop"));
            };
            if let Some(refusal) = r.loop_refusal(l) {
                return fail(None, format!("witness `{witness}` fails clause {refusal}"));
            }
            if !p.steps.is_empty() || p.blowups != 0 || p.k != 0 {
                return fail(None, "a positive obstruction carries no steps".into());
            }
            Ok(())
        }
        Outcome::Product => {
            if let Some(w) = r.is_positive_ribbon().witness {
                return fail(None, format!("descriptor is positive (loop `{w}`) but a product was claimed"));
            }
            let mut replay = Replay {
                g: r.middle.geometric_matrix(),
                cancelled: vec![false; r.middle.pairs],
                r: r.clone(),
                blowups: 0,
                k: 0,
            };
            for (i, step) in p.steps.iter().enumerate() {
                if let Err(reason) = replay.step(step) {
                    return fail(Some(i), reason);
                }
            }
            if replay.blowups != p.blowups {
                return fail(None, format!("blow-up total {} recorded, {} replayed", p.blowups, replay.blowups));
            }
            if replay.k != p.k {
                return fail(None, format!("level bound {} recorded, {} replayed", p.k, replay.k));
            }
            let state = &replay.r;
            if !state.middle.fingers.is_empty() {
                return fail(None, format!("{} fingers remain", state.middle.fingers.len()));
            }
            if !state.middle.loops.is_empty() {
                return fail(None, format!("{} accessory loops remain", state.middle.loops.len()));
            }
            if let Some((id, _)) = state.caps.iter().find(|(_, c)| **c != Cap::Standard) {
                return fail(None, format!("cap `{id}` is not standard"));
            }
            if let Some(p) = replay.cancelled.iter().position(|c| !c) {
                return fail(None, format!("pair {} was not cancelled", p + 1));
            }
            Ok(())
        }
    }
}

/// Per-cap blow-up costs of every non-positive Casson cap, by id.
pub fn cap_costs(r: &RibbonDescriptor) -> Result<BTreeMap<String, u64>, PlanError> {
    let replaced = replace_nonpositive_caps(r)?;
    Ok(replaced
        .steps
        .into_iter()
        .filter_map(|s| match s {
            Step::ReplaceCap { id, cost, .. } => Some((id, cost)),
            _ => None,
        })
        .collect())
}
