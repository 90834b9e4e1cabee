//! Signed rooted trees for Casson handles and towers.
//!
//! A Casson handle is encoded by a finitely presented graph: nodes, a root,
//! and signed edges. The first edge entering a non-root node is its tree
//! edge; every other edge (including any edge into the root) is a
//! back-edge. The infinite tree is the unfolding of this graph from the
//! root, where every edge, tree or back, spawns a child. A tower (`finite`)
//! has no back-edges and is its own unfolding.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::Sign;

/// Default node budget for [`SignedTree::truncate`].
pub const DEFAULT_NODE_BUDGET: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub parent: usize,
    pub child: usize,
    pub sign: Sign,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedTree {
    pub name: String,
    pub nodes: Vec<String>,
    pub root: usize,
    pub edges: Vec<Edge>,
    pub finite: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("tree `{0}` is a tower; use the tower predicates")]
    IsTower(String),
    #[error("tree `{0}` is not a tower")]
    NotTower(String),
    #[error("tree `{0}` has a positive branch")]
    Positive(String),
    #[error("tree `{0}` has no positive branch")]
    NotPositive(String),
    #[error("unrolling exceeds the node budget of {budget}")]
    SizeLimit { budget: usize },
    #[error("blow-up count overflows")]
    Overflow,
    #[error("truncation depth must be at least 1")]
    ZeroDepth,
    #[error("invalid tree: {0}")]
    Invalid(String),
}

type Result<T> = std::result::Result<T, TreeError>;

/// Minimal number of levels after which every branch has met a negative kink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PruneDepth {
    Finite(u32),
    Infinite,
}

impl fmt::Display for PruneDepth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PruneDepth::Finite(k) => write!(f, "{k}"),
            PruneDepth::Infinite => f.write_str("infinite"),
        }
    }
}

/// An all-positive infinite branch: a path from the root followed by a
/// cycle that repeats forever. Both are lists of edge indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositiveBranch {
    pub prefix: Vec<usize>,
    pub cycle: Vec<usize>,
}

impl PositiveBranch {
    /// Rechecks the witness edge by edge against `t`.
    pub fn verify(&self, t: &SignedTree) -> bool {
        if self.cycle.is_empty() {
            return false;
        }
        let all = self.prefix.iter().chain(&self.cycle);
        let mut at = t.root;
        for &e in all {
            let Some(edge) = t.edges.get(e) else { return false };
            if edge.parent != at || !edge.sign.is_positive() {
                return false;
            }
            at = edge.child;
        }
        let start = self.prefix.last().map_or(t.root, |&e| t.edges[e].child);
        at == start
    }

    pub fn describe(&self, t: &SignedTree) -> String {
        let path = |es: &[usize]| {
            let mut s = String::new();
            for &e in es {
                let edge = &t.edges[e];
                if s.is_empty() {
                    s.push_str(&t.nodes[edge.parent]);
                }
                s.push_str(&format!(" +> {}", t.nodes[edge.child]));
            }
            s
        };
        format!("prefix [{}] cycle [{}]", path(&self.prefix), path(&self.cycle))
    }
}

impl SignedTree {
    /// The Casson handle with a single positive kink at every level.
    pub fn ch_plus() -> Self {
        SignedTree {
            name: "chplus".into(),
            nodes: vec!["r".into()],
            root: 0,
            edges: vec![Edge { parent: 0, child: 0, sign: Sign::Plus }],
            finite: false,
        }
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == id)
    }

    /// Out-edge indices of each node, in edge order.
    pub fn out_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for (i, e) in self.edges.iter().enumerate() {
            out[e.parent].push(i);
        }
        out
    }

    /// For every non-root node, the index of its tree edge.
    fn tree_edges(&self) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.nodes.len()];
        for (i, e) in self.edges.iter().enumerate() {
            if e.child != self.root && parent[e.child].is_none() {
                parent[e.child] = Some(i);
            }
        }
        parent
    }

    pub fn is_back_edge(&self, edge: usize) -> bool {
        let e = &self.edges[edge];
        e.child == self.root || self.tree_edges()[e.child] != Some(edge)
    }

    pub fn has_back_edges(&self) -> bool {
        let tree = self.tree_edges();
        self.edges
            .iter()
            .enumerate()
            .any(|(i, e)| e.child == self.root || tree[e.child] != Some(i))
    }

    /// Structural violations: dangling indices, duplicate node ids, nodes not
    /// reachable from the root through tree edges, back-edges in a tower.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.nodes.len();
        if self.root >= n {
            out.push("root is not a node".to_string());
            return out;
        }
        for (i, id) in self.nodes.iter().enumerate() {
            if self.nodes[..i].contains(id) {
                out.push(format!("duplicate node id `{id}`"));
            }
        }
        for e in &self.edges {
            if e.parent >= n || e.child >= n {
                out.push("edge refers to a missing node".to_string());
                return out;
            }
        }
        let tree = self.tree_edges();
        for v in 0..n {
            if v == self.root {
                continue;
            }
            // Walk tree parents up to the root; a repeat means a tree cycle.
            let mut at = v;
            let mut steps = 0;
            let ok = loop {
                if at == self.root {
                    break true;
                }
                match tree[at] {
                    None => break false,
                    Some(e) => at = self.edges[e].parent,
                }
                steps += 1;
                if steps > n {
                    break false;
                }
            };
            if !ok {
                out.push(format!("node `{}` is not reachable from the root by tree edges", self.nodes[v]));
            }
        }
        if self.finite && self.has_back_edges() {
            out.push("a tower cannot have back-edges".to_string());
        }
        out
    }

    fn require_handle(&self) -> Result<()> {
        if self.finite {
            Err(TreeError::IsTower(self.name.clone()))
        } else {
            Ok(())
        }
    }

    fn require_tower(&self) -> Result<()> {
        if self.finite {
            Ok(())
        } else {
            Err(TreeError::NotTower(self.name.clone()))
        }
    }

    /// Finds a cycle of positive edges reachable from the root along
    /// positive edges, returned as a branch witness.
    fn positive_cycle(&self) -> Option<PositiveBranch> {
        let out = self.out_edges();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.nodes.len()];
        let mut path_edges: Vec<usize> = Vec::new();
        let mut stack: Vec<(usize, usize)> = vec![(self.root, 0)];
        state[self.root] = 1;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            let pos_edges = &out[v];
            if let Some(&e) = pos_edges.get(*next) {
                *next += 1;
                let edge = &self.edges[e];
                if !edge.sign.is_positive() {
                    continue;
                }
                match state[edge.child] {
                    0 => {
                        state[edge.child] = 1;
                        path_edges.push(e);
                        stack.push((edge.child, 0));
                    }
                    1 => {
                        // Cycle closes at edge.child; split the path there.
                        let w = edge.child;
                        let split = if w == self.root {
                            0
                        } else {
                            path_edges.iter().position(|&pe| self.edges[pe].child == w).unwrap() + 1
                        };
                        let prefix = path_edges[..split].to_vec();
                        let mut cycle = path_edges[split..].to_vec();
                        cycle.push(e);
                        return Some(PositiveBranch { prefix, cycle });
                    }
                    _ => {}
                }
            } else {
                state[v] = 2;
                stack.pop();
                path_edges.pop();
            }
        }
        None
    }

    /// Witness of a positive branch, if the handle has one.
    pub fn positive_branch(&self) -> Result<Option<PositiveBranch>> {
        self.require_handle()?;
        Ok(self.positive_cycle())
    }

    pub fn is_positive(&self) -> Result<bool> {
        Ok(self.positive_branch()?.is_some())
    }

    /// More positive than negative edges leave every node. In a tower,
    /// leaves at maximal depth are exempt.
    pub fn is_strictly_positive(&self) -> bool {
        let out = self.out_edges();
        let depth = if self.finite { Some(self.depths()) } else { None };
        let max_depth = depth.as_ref().map(|d| d.iter().copied().max().unwrap_or(0));
        (0..self.nodes.len()).all(|v| {
            let plus = out[v].iter().filter(|&&e| self.edges[e].sign.is_positive()).count();
            let minus = out[v].len() - plus;
            if let (Some(d), Some(max)) = (&depth, max_depth) {
                if out[v].is_empty() && d[v] == max {
                    return true;
                }
            }
            plus > minus
        })
    }

    /// Depth of each node along tree edges.
    fn depths(&self) -> Vec<u32> {
        let out = self.out_edges();
        let mut depth = vec![0u32; self.nodes.len()];
        let mut queue = VecDeque::from([self.root]);
        let mut seen = vec![false; self.nodes.len()];
        seen[self.root] = true;
        while let Some(v) = queue.pop_front() {
            for &e in &out[v] {
                let c = self.edges[e].child;
                if !seen[c] {
                    seen[c] = true;
                    depth[c] = depth[v] + 1;
                    queue.push_back(c);
                }
            }
        }
        depth
    }

    /// The first `n` levels of the unfolding, as a tower. Node `k` of the
    /// result is named `<original id>.<k>` in breadth-first order.
    pub fn truncate(&self, n: u32) -> Result<SignedTree> {
        self.truncate_with_budget(n, DEFAULT_NODE_BUDGET)
    }

    pub fn truncate_with_budget(&self, n: u32, budget: usize) -> Result<SignedTree> {
        if n == 0 {
            return Err(TreeError::ZeroDepth);
        }
        let out = self.out_edges();
        let mut nodes = vec![format!("{}.0", self.nodes[self.root])];
        let mut edges = Vec::new();
        // (new index, original node, depth)
        let mut queue = VecDeque::from([(0usize, self.root, 0u32)]);
        while let Some((at, orig, depth)) = queue.pop_front() {
            if depth == n {
                continue;
            }
            for &e in &out[orig] {
                let edge = &self.edges[e];
                if nodes.len() >= budget {
                    return Err(TreeError::SizeLimit { budget });
                }
                let idx = nodes.len();
                nodes.push(format!("{}.{}", self.nodes[edge.child], idx));
                edges.push(Edge { parent: at, child: idx, sign: edge.sign });
                queue.push_back((idx, edge.child, depth + 1));
            }
        }
        Ok(SignedTree { name: format!("{}^{}", self.name, n), nodes, root: 0, edges, finite: true })
    }

    /// Positive edges reachable from the root through positive edges, in a
    /// topological order of their target nodes. `None` if they contain a
    /// cycle.
    fn positive_topo(&self) -> Option<Vec<usize>> {
        let out = self.out_edges();
        let n = self.nodes.len();
        let mut reach = vec![false; n];
        reach[self.root] = true;
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            for &e in &out[v] {
                let edge = &self.edges[e];
                if edge.sign.is_positive() && !reach[edge.child] {
                    reach[edge.child] = true;
                    stack.push(edge.child);
                }
            }
        }
        let mut indeg = vec![0usize; n];
        for e in &self.edges {
            if e.sign.is_positive() && reach[e.parent] {
                indeg[e.child] += 1;
            }
        }
        let mut order = Vec::new();
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| reach[v] && indeg[v] == 0).collect();
        let mut visited = 0;
        while let Some(v) = queue.pop_front() {
            visited += 1;
            order.push(v);
            for &e in &out[v] {
                let edge = &self.edges[e];
                if edge.sign.is_positive() {
                    indeg[edge.child] -= 1;
                    if indeg[edge.child] == 0 {
                        queue.push_back(edge.child);
                    }
                }
            }
        }
        (visited == reach.iter().filter(|&&r| r).count()).then_some(order)
    }

    /// Length of the longest all-positive rooted path, or `None` if such
    /// paths are unbounded.
    fn longest_positive_path(&self) -> Option<u32> {
        let order = self.positive_topo()?;
        let out = self.out_edges();
        let mut best = vec![None::<u32>; self.nodes.len()];
        best[self.root] = Some(0);
        let mut longest = 0;
        for v in order {
            let Some(d) = best[v] else { continue };
            longest = longest.max(d);
            for &e in &out[v] {
                let edge = &self.edges[e];
                if edge.sign.is_positive() {
                    let c = &mut best[edge.child];
                    *c = Some(c.map_or(d + 1, |x| x.max(d + 1)));
                }
            }
        }
        Some(longest)
    }

    /// Does some root-to-leaf path of a tower use only positive edges?
    fn has_positive_maximal_path(&self) -> bool {
        let out = self.out_edges();
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            if out[v].is_empty() {
                return true;
            }
            for &e in &out[v] {
                if self.edges[e].sign.is_positive() {
                    stack.push(self.edges[e].child);
                }
            }
        }
        false
    }

    /// One more than the longest all-positive rooted path.
    pub fn prune_depth(&self) -> PruneDepth {
        if self.finite {
            if self.has_positive_maximal_path() {
                return PruneDepth::Infinite;
            }
        }
        match self.longest_positive_path() {
            Some(l) => PruneDepth::Finite(l + 1),
            None => PruneDepth::Infinite,
        }
    }

    /// Number of negative edges of the unfolding whose rooted path is
    /// otherwise positive; each costs one blow-up.
    pub fn kuga_blowup_cost(&self) -> Result<u64> {
        if self.prune_depth() == PruneDepth::Infinite {
            return Err(TreeError::Positive(self.name.clone()));
        }
        let order = self.positive_topo().expect("finite prune depth means no positive cycle");
        let out = self.out_edges();
        // Number of all-positive rooted paths ending at each node.
        let mut paths = vec![0u64; self.nodes.len()];
        paths[self.root] = 1;
        let mut cost: u64 = 0;
        for v in order {
            let p = paths[v];
            if p == 0 {
                continue;
            }
            for &e in &out[v] {
                let edge = &self.edges[e];
                if edge.sign.is_positive() {
                    paths[edge.child] = paths[edge.child].checked_add(p).ok_or(TreeError::Overflow)?;
                } else {
                    cost = cost.checked_add(p).ok_or(TreeError::Overflow)?;
                }
            }
        }
        Ok(cost)
    }

    /// Every tower embeds in the standard 2-handle.
    pub fn tower_embeds_into_standard(&self) -> Result<bool> {
        self.require_tower()?;
        Ok(true)
    }

    /// The positive branch along which a positive handle maps into CH+.
    pub fn positive_embeds_into_ch_plus(&self) -> Result<PositiveBranch> {
        self.positive_branch()?.ok_or_else(|| TreeError::NotPositive(self.name.clone()))
    }

    /// Copy with node ids replaced by `rename(old)`.
    pub fn renamed(&self, rename: impl Fn(&str) -> String) -> SignedTree {
        SignedTree { nodes: self.nodes.iter().map(|n| rename(n)).collect(), ..self.clone() }
    }
}
