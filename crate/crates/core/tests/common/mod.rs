//! Seeded random generators and independent oracles shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use handlecalc::diagram::{Component, ComponentKind, KirbyDiagram, PairKind, Side};
use handlecalc::homology::AbelianGroup;
use handlecalc::middle::{AccessoryLoop, Cap, Finger, MiddleLevelData, RibbonDescriptor};
use handlecalc::textio::{Command, CountKind, MoveScript};
use handlecalc::tree::{Edge, SignedTree};
use handlecalc::Sign;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;

use rand_chacha::ChaCha8Rng;

pub use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sign(rng: &mut impl Rng) -> Sign {
    if rng.gen_bool(0.5) {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

// -------------------------------------------------------------------------
// Diagrams

/// A valid non-dual diagram: up to `max` components, framings and
/// algebraic linking in `[-3, 3]`, geometric linking `|alg|` or `|alg| + 2`.
pub fn random_diagram(rng: &mut impl Rng, max: usize) -> KirbyDiagram {
    let n = rng.gen_range(0..=max);
    let mut d = KirbyDiagram::new(format!("rand{}", rng.gen::<u16>()));
    for i in 0..n {
        let kind = if rng.gen_bool(0.3) { ComponentKind::Dotted } else { ComponentKind::Framed(rng.gen_range(-3..=3)) };
        d.push_component(Component::new(format!("k{i}"), kind)).unwrap();
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if !rng.gen_bool(0.4) {
                continue;
            }
            let both_dotted = d.components()[i].kind.is_dotted() && d.components()[j].kind.is_dotted();
            let alg: i64 = if both_dotted { 0 } else { rng.gen_range(-3..=3) };
            let geom = alg.abs() + if rng.gen_bool(0.3) { 2 } else { 0 };
            d.set_linking(i, j, alg, geom);
        }
    }
    if rng.gen_bool(0.2) {
        d.three_handles = rng.gen_range(0..=2);
    }
    assert!(d.validate().is_empty(), "generator produced an invalid diagram");
    d
}

/// Any diagram the text format can hold, including dual ones and odd names.
pub fn random_any_diagram(rng: &mut impl Rng) -> KirbyDiagram {
    let mut d = random_diagram(rng, 6);
    d.name = random_text(rng);
    if rng.gen_bool(0.3) {
        d.dual = true;
        let n = d.len();
        for i in 0..n {
            if rng.gen_bool(0.4) {
                d.set_kind(i, ComponentKind::ParenFramed(rng.gen_range(-4..=4)));
            }
        }
    }
    let ids: Vec<String> = d.components().iter().map(|c| c.id.clone()).collect();
    let mut out = KirbyDiagram::new(d.name.clone());
    out.dual = d.dual;
    for (i, c) in d.components().iter().enumerate() {
        let label = rng.gen_bool(0.3).then(|| random_text(rng));
        let id = if rng.gen_bool(0.2) { format!("{} {}", ids[i], i) } else { ids[i].clone() };
        out.push_component(Component { id, kind: c.kind, label }).unwrap();
    }
    for i in 0..d.len() {
        for j in (i + 1)..d.len() {
            out.set_linking(i, j, d.alg(i, j), d.geom(i, j));
        }
    }
    out.three_handles = rng.gen_range(0..3);
    out.four_handles = rng.gen_range(0..2);
    out.hidden_one_handles = rng.gen_range(0..2);
    for _ in 0..rng.gen_range(0..3) {
        out.notes.push(random_text(rng));
    }
    out
}

/// Short strings that exercise quoting: spaces, `#`, quotes, backslashes.
pub fn random_text(rng: &mut impl Rng) -> String {
    const ALPHABET: &[char] = &['a', 'b', 'Z', '0', '7', '_', '-', '.', ' ', '#', '"', '\\', '^', '/', '\'', '\t', '(', 'é'];
    let n = rng.gen_range(0..8);
    (0..n).map(|_| *ALPHABET.choose(rng).unwrap()).collect()
}

/// Diagram plus a record of what a move should do to (chi, sigma).
pub struct AppliedMove {
    pub name: &'static str,
    pub diagram: KirbyDiagram,
    /// Expected change of Euler characteristic and, when the move has a
    /// signature contract, of the signature.
    pub d_chi: i64,
    pub d_sigma: Option<i64>,
}

fn framed_ids(d: &KirbyDiagram) -> Vec<String> {
    d.components().iter().filter(|c| c.kind.is_framed()).map(|c| c.id.clone()).collect()
}

fn dotted_ids(d: &KirbyDiagram) -> Vec<String> {
    d.components().iter().filter(|c| c.kind.is_dotted()).map(|c| c.id.clone()).collect()
}

fn unlinked(d: &KirbyDiagram, i: usize) -> bool {
    (0..d.len()).all(|k| k == i || d.geom(i, k) == 0)
}

/// A random legal move, or `None` if the sampled move does not apply.
pub fn random_move(rng: &mut impl Rng, d: &KirbyDiagram) -> Option<AppliedMove> {
    let n = d.len();
    let pick = rng.gen_range(0..9);
    let ok = |name, diagram, d_chi, d_sigma| Some(AppliedMove { name, diagram, d_chi, d_sigma });
    match pick {
        0 | 1 => {
            if n < 2 {
                return None;
            }
            let m = rng.gen_range(0..n);
            let o = rng.gen_range(0..n);
            let (cm, co) = (&d.components()[m], &d.components()[o]);
            if m == o || (cm.kind.is_dotted() && !co.kind.is_dotted()) {
                return None;
            }
            let out = d.handle_slide(&cm.id, &co.id, sign(rng)).expect("legal slide");
            ok("slide", out, 0, Some(0))
        }
        2 => {
            let s = sign(rng);
            ok("blowup", d.blow_up(s), 1, Some(s.value()))
        }
        3 => {
            let cands: Vec<&Component> = d
                .components()
                .iter()
                .enumerate()
                .filter(|(i, c)| matches!(c.kind, ComponentKind::Framed(1) | ComponentKind::Framed(-1)) && unlinked(d, *i))
                .map(|(_, c)| c)
                .collect();
            let c = cands.choose(rng)?;
            let s = c.kind.framing();
            ok("blowdown", d.blow_down(&c.id).expect("legal blow-down"), -1, Some(-s))
        }
        4 => {
            let pool: Vec<String> =
                d.components().iter().filter(|c| c.kind.is_framed()).map(|c| c.id.clone()).collect();
            if pool.is_empty() {
                return None;
            }
            let k = rng.gen_range(1..=pool.len().min(3));
            let chosen: Vec<String> = pool.choose_multiple(rng, k).cloned().collect();
            let strands: Vec<(&str, i64)> =
                chosen.iter().map(|c| (c.as_str(), rng.gen_range(-2..=2))).collect();
            if strands.iter().all(|(_, m)| *m == 0) {
                return None;
            }
            let t = sign(rng);
            let out = d.twist_blow_up(t, &strands).expect("legal twist blow-up");
            ok("twistblowup", out, 1, Some(-t.value()))
        }
        5 => {
            let zero: Vec<usize> = (0..n)
                .filter(|&i| {
                    let c = &d.components()[i];
                    match c.kind {
                        ComponentKind::Dotted => true,
                        ComponentKind::Framed(0) => {
                            (0..n).all(|k| !d.components()[k].kind.is_dotted() || d.alg(i, k) == 0)
                        }
                        _ => false,
                    }
                })
                .collect();
            let &i = zero.choose(rng)?;
            let to_dot = !d.components()[i].kind.is_dotted();
            let out = d.zero_dot_swap(&d.components()[i].id).expect("legal swap");
            ok("swap", out, if to_dot { -2 } else { 2 }, None)
        }
        6 => {
            let kind = if rng.gen_bool(0.5) { PairKind::OneTwo } else { PairKind::TwoThree };
            ok("addpair", d.add_cancelling_pair(kind), 0, Some(0))
        }
        _ => {
            // Any cancellable pair present.
            for b in 0..n {
                let cb = &d.components()[b];
                if cb.kind == ComponentKind::Framed(0) && d.three_handles > 0 && unlinked(d, b) {
                    return ok("cancel", d.cancel_pair(None, &cb.id).expect("legal 2-3 cancel"), 0, Some(0));
                }
                for a in 0..n {
                    let ca = &d.components()[a];
                    if ca.kind.is_dotted()
                        && cb.kind.is_framed()
                        && d.alg(a, b).abs() == 1
                        && d.geom(a, b) == 1
                        && (0..n).all(|k| k == a || k == b || (d.geom(a, k) == 0 && d.geom(b, k) == 0))
                    {
                        return ok("cancel", d.cancel_pair(Some(&ca.id), &cb.id).expect("legal 1-2 cancel"), 0, Some(0));
                    }
                }
            }
            None
        }
    }
}

// -------------------------------------------------------------------------
// Independent Smith-form oracle (extended-gcd Hermite passes)

fn hermite_rows(m: &mut [Vec<BigInt>], r0: usize, c: usize) -> bool {
    // Makes column `c` zero below row `r0` using Bezout row combinations.
    let rows = m.len();
    let mut changed = false;
    for r in (r0 + 1)..rows {
        if m[r][c].is_zero() {
            continue;
        }
        let (a, b) = (m[r0][c].clone(), m[r][c].clone());
        if !a.is_zero() && b.is_multiple_of(&a) {
            let q = &b / &a;
            for k in 0..m[0].len() {
                let v = &q * &m[r0][k];
                m[r][k] -= v;
            }
            changed = true;
            continue;
        }
        let e = a.extended_gcd(&b);
        let (g, x, y) = (e.gcd, e.x, e.y);
        let (p, q) = (&a / &g, &b / &g);
        for k in 0..m[0].len() {
            let top = &x * &m[r0][k] + &y * &m[r][k];
            let bot = &p * &m[r][k] - &q * &m[r0][k];
            m[r0][k] = top;
            m[r][k] = bot;
        }
        changed = true;
    }
    changed
}

fn transpose(m: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len()).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect()
}

/// Invariant factors (including zeros) of a square integer matrix, by
/// alternating row and column Hermite passes and a gcd/lcm fix-up.
pub fn oracle_diagonal(input: &[Vec<i64>]) -> Vec<BigInt> {
    let n = input.len();
    let mut m: Vec<Vec<BigInt>> = input.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut diag = Vec::new();
    let mut t = 0;
    while t < n {
        // Bring a nonzero entry of the trailing block to (t, t).
        let pos = (t..n).flat_map(|i| (t..n).map(move |j| (i, j))).find(|&(i, j)| !m[i][j].is_zero());
        let Some((i, j)) = pos else { break };
        m.swap(t, i);
        for row in m.iter_mut() {
            row.swap(t, j);
        }
        loop {
            let a = hermite_rows(&mut m, t, t);
            let mut tr = transpose(&m);
            let b = hermite_rows(&mut tr, t, t);
            m = transpose(&tr);
            if !a && !b {
                break;
            }
        }
        diag.push(m[t][t].abs());
        t += 1;
    }
    diag.resize(n, BigInt::zero());
    // Normalize to a divisibility chain.
    for i in 0..diag.len() {
        for j in (i + 1)..diag.len() {
            let (a, b) = (diag[i].clone(), diag[j].clone());
            if a.is_zero() || b.is_zero() {
                if a.is_zero() && !b.is_zero() {
                    diag.swap(i, j);
                }
                continue;
            }
            diag[i] = a.gcd(&b);
            diag[j] = a.lcm(&b);
        }
    }
    diag
}

/// Cokernel of a square matrix plus `extra_free` free summands, minus
/// `drop_free` free summands, as computed by the oracle.
pub fn oracle_group(m: &[Vec<i64>], extra_free: usize, drop_free: usize) -> AbelianGroup {
    let diag = oracle_diagonal(m);
    let free = diag.iter().filter(|d| d.is_zero()).count() + extra_free;
    let torsion: Vec<BigUint> =
        diag.iter().filter(|d| !d.is_zero() && !d.is_one()).map(|d| d.to_biguint().unwrap()).collect();
    AbelianGroup { free_rank: free.saturating_sub(drop_free), torsion }
}

/// Linking matrix on the given component indices, framings on the diagonal.
pub fn linking(d: &KirbyDiagram, idx: &[usize]) -> Vec<Vec<i64>> {
    idx.iter().map(|&i| idx.iter().map(|&j| d.alg(i, j)).collect()).collect()
}

pub fn oracle_h1_plus(d: &KirbyDiagram) -> AbelianGroup {
    let all: Vec<usize> = (0..d.len()).collect();
    oracle_group(&linking(d, &all), d.hidden_one_handles, d.three_handles)
}

pub fn oracle_h1_minus(d: &KirbyDiagram) -> AbelianGroup {
    let paren: Vec<usize> = (0..d.len()).filter(|&i| d.components()[i].kind.is_paren()).collect();
    oracle_group(&linking(d, &paren), d.hidden_one_handles, 0)
}

pub fn h1(d: &KirbyDiagram, side: Side) -> AbelianGroup {
    handlecalc::script::asserted_homology(d, side).unwrap()
}

/// Determinantal-divisor oracle for small matrices: d_k = gcd of all k x k
/// minors, invariant factors d_k / d_(k-1).
pub fn determinantal_factors(m: &[Vec<i64>]) -> Vec<BigInt> {
    fn det(m: &[Vec<i64>], rows: &[usize], cols: &[usize]) -> BigInt {
        if rows.is_empty() {
            return BigInt::one();
        }
        let mut acc = BigInt::zero();
        for (k, &c) in cols.iter().enumerate() {
            let v = m[rows[0]][c];
            if v == 0 {
                continue;
            }
            let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let term = BigInt::from(v) * det(m, &rows[1..], &rest);
            if k % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }
    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![Vec::new()];
        }
        if n < k {
            return Vec::new();
        }
        let mut out = subsets(n - 1, k);
        for mut s in subsets(n - 1, k - 1) {
            s.push(n - 1);
            out.push(s);
        }
        out
    }
    let n = m.len();
    let mut prev = BigInt::one();
    let mut factors = Vec::new();
    for k in 1..=n {
        let mut g = BigInt::zero();
        for r in subsets(n, k) {
            for c in subsets(n, k) {
                g = g.gcd(&det(m, &r, &c));
            }
        }
        if g.is_zero() {
            factors.extend(std::iter::repeat(BigInt::zero()).take(n - k + 1));
            break;
        }
        factors.push(&g / &prev);
        prev = g;
    }
    factors
}

/// Signature by floating-point eigenvalues.
pub fn eigen_signature(q: &[Vec<i64>]) -> i64 {
    let n = q.len();
    if n == 0 {
        return 0;
    }
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| q[i][j] as f64);
    let e = m.symmetric_eigen();
    e.eigenvalues.iter().map(|&x| if x > 1e-7 { 1 } else if x < -1e-7 { -1 } else { 0 }).sum()
}

// -------------------------------------------------------------------------
// Trees

/// A rational tree with `1..=max_nodes` nodes: node `v > 0` gets a tree
/// edge from an earlier node, then a few random back-edges are added.
pub fn random_tree(rng: &mut impl Rng, max_nodes: usize, p_plus: f64, finite: bool) -> SignedTree {
    let n = rng.gen_range(1..=max_nodes);
    let mut edges = Vec::new();
    let s = |rng: &mut _| if Rng::gen_bool(rng, p_plus) { Sign::Plus } else { Sign::Minus };
    for v in 1..n {
        let parent = rng.gen_range(0..v);
        edges.push(Edge { parent, child: v, sign: s(rng) });
    }
    if !finite {
        for _ in 0..rng.gen_range(0..=n.min(4)) {
            let parent = rng.gen_range(0..n);
            let child = rng.gen_range(0..n);
            // Child must already have its tree edge (or be the root).
            let pos = rng.gen_range(0..=edges.len());
            let first_in = edges.iter().position(|e: &Edge| e.child == child);
            let pos = match first_in {
                Some(f) if child != 0 => pos.max(f + 1),
                _ => pos,
            };
            edges.insert(pos, Edge { parent, child, sign: s(rng) });
        }
    }
    let t = SignedTree {
        name: format!("t{}", rng.gen::<u16>()),
        nodes: (0..n).map(|i| format!("v{i}")).collect(),
        root: 0,
        edges,
        finite,
    };
    assert!(t.validate().is_empty(), "generator produced an invalid tree: {:?}", t.validate());
    t
}

/// Level-by-level unfolding along positive edges, with multiplicities:
/// `levels[d][v]` is the number of all-positive rooted paths of length `d`
/// ending at `v`.
pub fn positive_levels(t: &SignedTree, depth: usize) -> Vec<Vec<u128>> {
    let n = t.nodes.len();
    let mut levels = vec![vec![0u128; n]];
    levels[0][t.root] = 1;
    for d in 0..depth {
        let mut next = vec![0u128; n];
        for e in &t.edges {
            if e.sign == Sign::Plus {
                next[e.child] = next[e.child].saturating_add(levels[d][e.parent]);
            }
        }
        levels.push(next);
    }
    levels
}

pub fn oracle_positive(t: &SignedTree) -> bool {
    let n = t.nodes.len();
    positive_levels(t, n + 1)[n + 1].iter().any(|&c| c > 0)
}

/// First level of the positive unfolding that is empty.
pub fn oracle_prune_depth(t: &SignedTree) -> Option<u32> {
    let n = t.nodes.len();
    let levels = positive_levels(t, n + 1);
    levels.iter().position(|l| l.iter().all(|&c| c == 0)).map(|d| d as u32)
}

/// Negative edges hanging off the positive unfolding.
pub fn oracle_frontier(t: &SignedTree) -> u128 {
    let n = t.nodes.len();
    let levels = positive_levels(t, n + 1);
    let neg_out: Vec<u128> =
        (0..n).map(|v| t.edges.iter().filter(|e| e.parent == v && e.sign == Sign::Minus).count() as u128).collect();
    levels.iter().map(|l| l.iter().zip(&neg_out).map(|(c, k)| c * k).sum::<u128>()).sum()
}

/// Number of nodes of the full unfolding up to depth `k`.
pub fn oracle_unfolding_size(t: &SignedTree, k: usize) -> u128 {
    let n = t.nodes.len();
    let mut level = vec![0u128; n];
    level[t.root] = 1;
    let mut total = 1u128;
    for _ in 0..k {
        let mut next = vec![0u128; n];
        for e in &t.edges {
            next[e.child] += level[e.parent];
        }
        total += next.iter().sum::<u128>();
        level = next;
    }
    total
}

// -------------------------------------------------------------------------
// Middle levels and descriptors

/// Fingers forming a DAG on the spheres (every finger goes from a lower to
/// a higher index under a random relabelling), optionally with a cycle.
pub fn random_middle(rng: &mut impl Rng, max_pairs: usize, max_fingers: usize, cyclic: bool) -> MiddleLevelData {
    let k = rng.gen_range(if cyclic { 2 } else { 1 }..=max_pairs);
    let mut perm: Vec<usize> = (1..=k).collect();
    perm.shuffle(rng);
    let mut m = MiddleLevelData::new(format!("m{}", rng.gen::<u16>()), k);
    let nf = rng.gen_range(0..=max_fingers);
    if k >= 2 {
        for i in 0..nf {
            let a = rng.gen_range(0..k - 1);
            let b = rng.gen_range(a + 1..k);
            m.fingers.push(Finger { id: format!("f{i}"), from_a: perm[a], through_b: perm[b], whitney: format!("w{i}") });
        }
    }
    if cyclic {
        // Close a cycle from a higher back to a lower sphere.
        let len = rng.gen_range(2..=k.min(4));
        let mut chain: Vec<usize> = (0..k).collect();
        chain.shuffle(rng);
        chain.truncate(len);
        for (i, w) in chain.windows(2).enumerate() {
            m.fingers.push(Finger {
                id: format!("c{i}"),
                from_a: perm[w[0]],
                through_b: perm[w[1]],
                whitney: format!("cw{i}"),
            });
        }
        m.fingers.push(Finger {
            id: "cz".into(),
            from_a: perm[chain[len - 1]],
            through_b: perm[chain[0]],
            whitney: "cwz".into(),
        });
        m.fingers.shuffle(rng);
    }
    let nl = if m.fingers.is_empty() { 0 } else { rng.gen_range(0..=3) };
    for i in 0..nl {
        let len = rng.gen_range(1..=m.fingers.len().min(4));
        let fingers: Vec<String> = m.fingers.choose_multiple(rng, len).map(|f| f.id.clone()).collect();
        m.loops.push(AccessoryLoop { id: format!("a{i}"), fingers });
    }
    m
}

/// Caps every loop of an acyclic middle level: standard, a random handle,
/// or CH+. `p_positive_tree` biases towards positive caps.
pub fn random_descriptor(rng: &mut impl Rng, max_pairs: usize, max_fingers: usize, p_positive: f64) -> RibbonDescriptor {
    let m = random_middle(rng, max_pairs, max_fingers, false);
    let mut r = RibbonDescriptor::new(m);
    let mut trees: BTreeMap<String, SignedTree> = BTreeMap::new();
    for (i, id) in r.cap_ids().into_iter().enumerate() {
        let cap = match rng.gen_range(0..10) {
            0 | 1 => Cap::Standard,
            _ if rng.gen_bool(p_positive) => {
                let t = SignedTree::ch_plus();
                trees.insert(t.name.clone(), t.clone());
                Cap::Tree(t.name)
            }
            _ => {
                let mut t = random_tree(rng, 12, 0.6, false);
                t.name = format!("tree{i}");
                trees.insert(t.name.clone(), t.clone());
                Cap::Tree(t.name)
            }
        };
        r.caps.insert(id, cap);
    }
    r.trees = trees;
    assert!(r.validate().is_empty(), "{:?}", r.validate());
    r
}

/// The cyclic descriptors R_n: `n` pairs, finger i from A_i through
/// B_(i+1 mod n), all Whitney loops capped by CH+, one accessory loop over
/// every finger (capped by CH+ when n = 1).
pub fn r_n(n: usize) -> RibbonDescriptor {
    let mut m = MiddleLevelData::new(format!("r{n}"), n);
    for i in 1..=n {
        let (id, whitney) = if n == 1 { ("f".into(), "w".into()) } else { (format!("f{i}"), format!("w{i}")) };
        m.fingers.push(Finger { id, from_a: i, through_b: i % n + 1, whitney });
    }
    m.loops.push(AccessoryLoop { id: "a".into(), fingers: m.fingers.iter().map(|f| f.id.clone()).collect() });
    let mut r = RibbonDescriptor::new(m);
    r.trees.insert("chplus".into(), SignedTree::ch_plus());
    for id in r.cap_ids() {
        r.caps.insert(id, Cap::Tree("chplus".into()));
    }
    if n > 1 {
        r.caps.insert("a".into(), Cap::Standard);
    }
    r
}

/// DFS cycle detection on the finger graph.
pub fn dfs_has_cycle(m: &MiddleLevelData) -> bool {
    fn visit(v: usize, m: &MiddleLevelData, state: &mut [u8]) -> bool {
        state[v] = 1;
        for f in m.fingers.iter().filter(|f| f.from_a == v) {
            let seen = state[f.through_b];
            if seen == 1 || (seen == 0 && visit(f.through_b, m, state)) {
                return true;
            }
        }
        state[v] = 2;
        false
    }
    let mut state = vec![0u8; m.pairs + 1];
    (1..=m.pairs).any(|v| state[v] == 0 && visit(v, m, &mut state))
}

// -------------------------------------------------------------------------
// Scripts

pub fn random_script(rng: &mut impl Rng) -> MoveScript {
    let id = |rng: &mut ChaCha8Rng| format!("c{}", rng.gen_range(0..5));
    let mut r = self::rng(rng.gen());
    let n = r.gen_range(0..12);
    let mut commands = Vec::new();
    for _ in 0..n {
        let maybe_id = |r: &mut ChaCha8Rng| r.gen_bool(0.5).then(|| id(r));
        let c = match r.gen_range(0..13) {
            0 => Command::Slide { moving: id(&mut r), over: id(&mut r), sign: sign(&mut r) },
            1 => Command::BlowUp { sign: sign(&mut r), id: maybe_id(&mut r) },
            2 => Command::TwistBlowUp {
                sign: sign(&mut r),
                strands: (0..r.gen_range(1..3)).map(|_| (id(&mut r), r.gen_range(-3..=3))).collect(),
                id: maybe_id(&mut r),
            },
            3 => Command::BlowDown { id: id(&mut r) },
            4 => Command::Swap { id: random_text(&mut r) + "x" },
            5 => {
                if r.gen_bool(0.5) {
                    Command::AddPair { kind: PairKind::OneTwo, ids: r.gen_bool(0.5).then(|| vec![id(&mut r), id(&mut r)]) }
                } else {
                    Command::AddPair { kind: PairKind::TwoThree, ids: r.gen_bool(0.5).then(|| vec![id(&mut r)]) }
                }
            }
            6 => Command::Cancel { dotted: maybe_id(&mut r), framed: id(&mut r) },
            7 => Command::Dualize,
            8 => Command::AssertHomology {
                side: if r.gen_bool(0.5) { Side::Plus } else { Side::Minus },
                group: AbelianGroup::from_cyclic_orders(
                    (0..r.gen_range(0..4)).map(|_| BigUint::from(r.gen_range(0u32..7))),
                ),
            },
            9 => Command::AssertEuler(r.gen_range(-5..=5)),
            10 => Command::AssertSignature(r.gen_range(-5..=5)),
            11 => Command::AssertGeom {
                a: id(&mut r),
                b: id(&mut r),
                geom: r.gen_range(0..4),
                note: r.gen_bool(0.5).then(|| random_text(&mut r)),
            },
            _ => Command::AssertCount {
                what: *[CountKind::Components, CountKind::Three, CountKind::Four, CountKind::Hidden1].choose(&mut r).unwrap(),
                n: r.gen_range(0..5),
            },
        };
        commands.push(c);
    }
    MoveScript { name: r.gen_bool(0.5).then(|| random_text(&mut r) + "s"), commands }
}
