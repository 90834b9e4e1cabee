//! Middle-level intersection data of an h-cobordism and ribbon descriptors.
//!
//! Spheres `A_1..A_k` and `B_1..B_k` meet once in matching pairs; every
//! finger move of `A_a` through `B_b` adds a cancelling pair of extra
//! intersections, a Whitney loop, and a designated point that accessory
//! loops may thread. Accessory loops are recorded as the ordered list of
//! fingers whose designated points they pass through.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::tree::SignedTree;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finger {
    pub id: String,
    /// Source sphere `A_from_a` (1-based).
    pub from_a: usize,
    /// Pierced sphere `B_through_b` (1-based).
    pub through_b: usize,
    pub whitney: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessoryLoop {
    pub id: String,
    pub fingers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MiddleLevelData {
    pub name: String,
    pub pairs: usize,
    pub fingers: Vec<Finger>,
    pub loops: Vec<AccessoryLoop>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MiddleError {
    #[error("unknown accessory loop `{0}`")]
    UnknownLoop(String),
    #[error("unknown finger `{0}`")]
    UnknownFinger(String),
    #[error("invalid middle-level data: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

impl MiddleLevelData {
    pub fn new(name: impl Into<String>, pairs: usize) -> Self {
        MiddleLevelData { name: name.into(), pairs, fingers: Vec::new(), loops: Vec::new() }
    }

    pub fn finger(&self, id: &str) -> Option<&Finger> {
        self.fingers.iter().find(|f| f.id == id)
    }

    pub fn accessory_loop(&self, id: &str) -> Option<&AccessoryLoop> {
        self.loops.iter().find(|l| l.id == id)
    }

    /// `G[i][j] = delta_ij + 2 * #{fingers from A_i through B_j}`, 0-based.
    pub fn geometric_matrix(&self) -> Vec<Vec<u64>> {
        let k = self.pairs;
        let mut g = vec![vec![0u64; k]; k];
        for (i, row) in g.iter_mut().enumerate() {
            row[i] = 1;
        }
        for f in &self.fingers {
            if (1..=k).contains(&f.from_a) && (1..=k).contains(&f.through_b) {
                g[f.from_a - 1][f.through_b - 1] += 2;
            }
        }
        g
    }

    /// Signed intersection count: each finger contributes `+1` and `-1`.
    pub fn algebraic_matrix(&self) -> Vec<Vec<i64>> {
        let k = self.pairs;
        let mut a = vec![vec![0i64; k]; k];
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = 1;
        }
        for f in &self.fingers {
            if (1..=k).contains(&f.from_a) && (1..=k).contains(&f.through_b) {
                let cell = &mut a[f.from_a - 1][f.through_b - 1];
                *cell += 1;
                *cell -= 1;
            }
        }
        a
    }

    /// Whitney ids of the fingers traversed by loop `l`.
    pub fn whitney_set(&self, l: &str) -> Result<BTreeSet<String>, MiddleError> {
        let lp = self.accessory_loop(l).ok_or_else(|| MiddleError::UnknownLoop(l.to_string()))?;
        lp.fingers
            .iter()
            .map(|fid| {
                self.finger(fid)
                    .map(|f| f.whitney.clone())
                    .ok_or_else(|| MiddleError::UnknownFinger(fid.clone()))
            })
            .collect()
    }

    /// Violations of the structural invariants (empty = valid).
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut ids = BTreeSet::new();
        let mut whitney = BTreeSet::new();
        for f in &self.fingers {
            if !ids.insert(f.id.as_str()) {
                out.push(format!("duplicate finger id `{}`", f.id));
            }
            if !whitney.insert(f.whitney.as_str()) {
                out.push(format!("duplicate whitney id `{}`", f.whitney));
            }
            for (what, s) in [("A", f.from_a), ("B", f.through_b)] {
                if !(1..=self.pairs).contains(&s) {
                    out.push(format!("finger `{}`: sphere {what}{s} out of range 1..={}", f.id, self.pairs));
                }
            }
        }
        let mut loop_ids = BTreeSet::new();
        for l in &self.loops {
            if !loop_ids.insert(l.id.as_str()) {
                out.push(format!("duplicate loop id `{}`", l.id));
            }
            if whitney.contains(l.id.as_str()) {
                out.push(format!("loop id `{}` collides with a whitney id", l.id));
            }
            if l.fingers.is_empty() {
                out.push(format!("loop `{}` traverses no finger", l.id));
            }
            for fid in &l.fingers {
                if self.finger(fid).is_none() {
                    out.push(format!("loop `{}` references missing finger `{fid}`", l.id));
                }
            }
        }
        out
    }

    /// One directed edge `a -> b` per finger.
    pub fn finger_graph(&self) -> FingerGraph {
        FingerGraph {
            vertices: self.pairs,
            edges: self.fingers.iter().map(|f| (f.from_a, f.through_b, f.id.clone())).collect(),
        }
    }

    /// Applies a permutation of sphere indices (`perm[i-1]` is the new index
    /// of sphere `i`).
    pub fn permuted(&self, perm: &[usize]) -> MiddleLevelData {
        let mut m = self.clone();
        for f in &mut m.fingers {
            f.from_a = perm[f.from_a - 1];
            f.through_b = perm[f.through_b - 1];
        }
        m
    }
}

/// Directed multigraph on sphere indices `1..=vertices`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FingerGraph {
    pub vertices: usize,
    /// `(from_a, through_b, finger id)`
    pub edges: Vec<(usize, usize, String)>,
}

impl FingerGraph {
    fn successors(&self) -> Vec<BTreeSet<usize>> {
        let mut succ = vec![BTreeSet::new(); self.vertices + 1];
        for &(a, b, _) in &self.edges {
            succ[a].insert(b);
        }
        succ
    }

    /// All elementary directed cycles, each as a vertex sequence starting at
    /// its smallest vertex, sorted.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let succ = self.successors();
        let mut out = Vec::new();
        for start in 1..=self.vertices {
            // Cycles whose minimum vertex is `start`.
            let mut path = vec![start];
            let mut on_path = vec![false; self.vertices + 1];
            on_path[start] = true;
            self.extend_cycles(start, &succ, &mut path, &mut on_path, &mut out);
        }
        out.sort();
        out
    }

    fn extend_cycles(
        &self,
        start: usize,
        succ: &[BTreeSet<usize>],
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        let v = *path.last().unwrap();
        for &w in &succ[v] {
            if w == start {
                out.push(path.clone());
            } else if w > start && !on_path[w] {
                on_path[w] = true;
                path.push(w);
                self.extend_cycles(start, succ, path, on_path, out);
                path.pop();
                on_path[w] = false;
            }
        }
    }

    /// Cycles passing through a vertex reachable from the targets of the
    /// given fingers.
    pub fn cycles_reachable_from(&self, fingers: &[String]) -> Vec<Vec<usize>> {
        let succ = self.successors();
        let mut reach = vec![false; self.vertices + 1];
        let mut stack: Vec<usize> = self
            .edges
            .iter()
            .filter(|(_, _, id)| fingers.contains(id))
            .flat_map(|&(a, b, _)| [a, b])
            .collect();
        while let Some(v) = stack.pop() {
            if !reach[v] {
                reach[v] = true;
                stack.extend(succ[v].iter().copied());
            }
        }
        self.cycles().into_iter().filter(|c| c.iter().any(|&v| reach[v])).collect()
    }

    pub fn is_acyclic(&self) -> bool {
        self.cycles().is_empty()
    }
}

/// What caps a Whitney or accessory loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cap {
    Standard,
    /// A Casson handle, by tree name.
    Tree(String),
}

impl fmt::Display for Cap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cap::Standard => f.write_str("standard"),
            Cap::Tree(t) => write!(f, "tree {t}"),
        }
    }
}

/// Middle-level data plus a cap for every Whitney and accessory loop.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RibbonDescriptor {
    pub middle: MiddleLevelData,
    pub caps: BTreeMap<String, Cap>,
    pub trees: BTreeMap<String, SignedTree>,
}

/// Why an accessory loop fails the positivity clauses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Refusal {
    /// A Whitney loop of the set is not capped by a positive Casson handle.
    WhitneyCap { whitney: String },
    /// Single-element Whitney set and the loop itself is not capped by a
    /// positive Casson handle.
    AccessoryCap,
    /// The loop runs over two fingers from the same `A` sphere.
    RepeatedSource { sphere: usize },
}

impl fmt::Display for Refusal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Refusal::WhitneyCap { whitney } => write!(f, "whitney-cap:{whitney}"),
            Refusal::AccessoryCap => f.write_str("accessory-cap"),
            Refusal::RepeatedSource { sphere } => write!(f, "repeated-source:A{sphere}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RibbonDecision {
    /// The first accessory loop meeting every clause, if any.
    pub witness: Option<String>,
    /// First failed clause of each loop that was checked and refused.
    pub refusals: Vec<(String, Refusal)>,
}

impl RibbonDecision {
    pub fn is_positive(&self) -> bool {
        self.witness.is_some()
    }
}

impl RibbonDescriptor {
    pub fn new(middle: MiddleLevelData) -> Self {
        RibbonDescriptor { middle, caps: BTreeMap::new(), trees: BTreeMap::new() }
    }

    /// Ids that need a cap: every Whitney id and every accessory loop id.
    pub fn cap_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.middle.fingers.iter().map(|f| f.whitney.clone()).collect();
        ids.extend(self.middle.loops.iter().map(|l| l.id.clone()));
        ids
    }

    pub fn validate(&self) -> Vec<String> {
        let mut out = self.middle.validate();
        let needed: BTreeSet<String> = self.cap_ids().into_iter().collect();
        for id in &needed {
            if !self.caps.contains_key(id) {
                out.push(format!("no cap for `{id}`"));
            }
        }
        for (id, cap) in &self.caps {
            if !needed.contains(id) {
                out.push(format!("cap for unknown loop `{id}`"));
            }
            if let Cap::Tree(t) = cap {
                match self.trees.get(t) {
                    None => out.push(format!("cap `{id}` references missing tree `{t}`")),
                    Some(tree) if tree.finite => {
                        out.push(format!("cap `{id}` references tower `{t}`; caps must be handles"))
                    }
                    Some(_) => {}
                }
            }
        }
        for (name, t) in &self.trees {
            for v in t.validate() {
                out.push(format!("tree `{name}`: {v}"));
            }
        }
        out
    }

    /// Is the cap of `id` a positive Casson handle?
    pub fn cap_is_positive(&self, id: &str) -> bool {
        match self.caps.get(id) {
            Some(Cap::Tree(t)) => self
                .trees
                .get(t)
                .is_some_and(|tree| tree.is_positive().unwrap_or(false)),
            _ => false,
        }
    }

    /// The first clause loop `l` fails, or `None` if it meets all three.
    pub fn loop_refusal(&self, l: &AccessoryLoop) -> Option<Refusal> {
        let wset: BTreeSet<&str> = l
            .fingers
            .iter()
            .filter_map(|fid| self.middle.finger(fid))
            .map(|f| f.whitney.as_str())
            .collect();
        if let Some(w) = wset.iter().find(|w| !self.cap_is_positive(w)) {
            return Some(Refusal::WhitneyCap { whitney: w.to_string() });
        }
        if wset.len() == 1 && !self.cap_is_positive(&l.id) {
            return Some(Refusal::AccessoryCap);
        }
        if wset.len() > 1 {
            let mut per_source: BTreeMap<usize, BTreeSet<&str>> = BTreeMap::new();
            for fid in &l.fingers {
                if let Some(f) = self.middle.finger(fid) {
                    per_source.entry(f.from_a).or_default().insert(f.id.as_str());
                }
            }
            if let Some((&a, _)) = per_source.iter().find(|(_, fs)| fs.len() > 1) {
                return Some(Refusal::RepeatedSource { sphere: a });
            }
        }
        None
    }

    /// The positivity decision for ribbon descriptors.
    pub fn is_positive_ribbon(&self) -> RibbonDecision {
        let mut refusals = Vec::new();
        for l in &self.middle.loops {
            match self.loop_refusal(l) {
                None => return RibbonDecision { witness: Some(l.id.clone()), refusals },
                Some(r) => refusals.push((l.id.clone(), r)),
            }
        }
        RibbonDecision { witness: None, refusals }
    }
}
