//! Smith normal form over the integers and finitely generated abelian groups.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// A finitely generated abelian group `Z^r + Z/d1 + ... + Z/dm` in invariant
/// factor form: every `d` is at least 2 and each divides the next.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct AbelianGroup {
    pub free_rank: usize,
    pub torsion: Vec<BigUint>,
}

impl AbelianGroup {
    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn free(rank: usize) -> Self {
        AbelianGroup { free_rank: rank, torsion: Vec::new() }
    }

    /// Builds the canonical form from an arbitrary list of cyclic orders
    /// (`0` meaning a free summand, `1` the trivial group).
    pub fn from_cyclic_orders<I>(orders: I) -> Self
    where
        I: IntoIterator<Item = BigUint>,
    {
        let mut free_rank = 0;
        let mut factors = Vec::new();
        for d in orders {
            if d.is_zero() {
                free_rank += 1;
            } else if !d.is_one() {
                factors.push(d);
            }
        }
        AbelianGroup { free_rank, torsion: invariant_factors(factors) }
    }

    /// Cokernel of the integer matrix `m`, viewed as a map `Z^cols -> Z^rows`.
    pub fn cokernel(m: &IntMatrix) -> Self {
        let diag = smith_diagonal(m);
        let nonzero = diag.iter().filter(|d| !d.is_zero()).count();
        let mut group = AbelianGroup::from_cyclic_orders(
            diag.into_iter().filter(|d| !d.is_zero()).map(|d| d.magnitude().clone()),
        );
        group.free_rank = m.rows() - nonzero;
        group
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    /// Direct sum with `Z^n`.
    pub fn with_free(mut self, n: usize) -> Self {
        self.free_rank += n;
        self
    }

    /// Drops up to `n` free summands.
    pub fn without_free(mut self, n: usize) -> Self {
        self.free_rank = self.free_rank.saturating_sub(n);
        self
    }

    pub fn direct_sum(&self, other: &AbelianGroup) -> AbelianGroup {
        let mut factors = self.torsion.clone();
        factors.extend(other.torsion.iter().cloned());
        AbelianGroup { free_rank: self.free_rank + other.free_rank, torsion: invariant_factors(factors) }
    }

    /// Order of the torsion subgroup.
    pub fn torsion_order(&self) -> BigUint {
        self.torsion.iter().fold(BigUint::one(), |acc, d| acc * d)
    }
}

/// Recombines a list of cyclic orders (each >= 2) into invariant factors via
/// prime-power splitting.
fn invariant_factors(orders: Vec<BigUint>) -> Vec<BigUint> {
    if orders.is_empty() {
        return orders;
    }
    // Repeatedly replace (a, b) by (gcd, lcm) until the chain divides.
    let mut v = orders;
    let n = v.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let g = v[i].gcd(&v[j]);
            let l = &v[i] / &g * &v[j];
            v[i] = g;
            v[j] = l;
        }
    }
    v.retain(|d| !d.is_one());
    v
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return f.write_str("0");
        }
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for d in &self.torsion {
            parts.push(format!("Z/{d}"));
        }
        f.write_str(&parts.join(" + "))
    }
}

impl FromStr for AbelianGroup {
    type Err = String;

    /// Accepts `0`, `Z`, `Z^3`, `Z/4`, and `+`-separated sums of these.
    /// Non-canonical input (e.g. `Z/2 + Z/3`) is normalized.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "0" {
            return Ok(AbelianGroup::trivial());
        }
        if s.is_empty() {
            return Err("empty group expression".into());
        }
        let mut orders = Vec::new();
        for term in s.split('+') {
            let term = term.trim();
            if term == "Z" {
                orders.push(BigUint::zero());
            } else if let Some(exp) = term.strip_prefix("Z^") {
                let r: usize = exp.parse().map_err(|_| format!("bad free rank in `{term}`"))?;
                orders.extend(std::iter::repeat_n(BigUint::zero(), r));
            } else if let Some(order) = term.strip_prefix("Z/") {
                let d: BigUint = order.parse().map_err(|_| format!("bad cyclic order in `{term}`"))?;
                if d.is_zero() {
                    return Err(format!("cyclic order must be positive in `{term}`"));
                }
                orders.push(d);
            } else {
                return Err(format!("unrecognized group term `{term}`"));
            }
        }
        Ok(AbelianGroup::from_cyclic_orders(orders))
    }
}

/// Boundary first homology as computed from a linking matrix, together with
/// the 3-handle caveat: when `caveat` is set the group is the boundary before
/// the 3-handles are attached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryHomology {
    pub group: AbelianGroup,
    pub caveat: bool,
    pub three_handles: usize,
}

impl BoundaryHomology {
    /// The group after each 3-handle removes one free summand, which is what a
    /// 3-handle attached along a nonseparating sphere does.
    pub fn capped(&self) -> AbelianGroup {
        self.group.clone().without_free(self.three_handles)
    }
}

/// Dense integer matrix with arbitrary-precision entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn from_rows<T: Into<BigInt> + Copy>(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = IntMatrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            for (j, &x) in row.iter().enumerate() {
                m.set(i, j, x.into());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] -= q * row[src]
    fn sub_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        for j in 0..self.cols {
            let v = self.get(src, j) * q;
            let idx = dst * self.cols + j;
            self.data[idx] -= v;
        }
    }

    /// col[dst] -= q * col[src]
    fn sub_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        for i in 0..self.rows {
            let v = self.get(i, src) * q;
            let idx = i * self.cols + dst;
            self.data[idx] -= v;
        }
    }

    fn add_row(&mut self, dst: usize, src: usize) {
        self.sub_row(dst, src, &BigInt::from(-1));
    }
}

/// Diagonal of the Smith normal form of `m`: `min(rows, cols)` entries,
/// nonnegative, with the nonzero ones forming a divisibility chain followed
/// by zeros.
pub fn smith_diagonal(m: &IntMatrix) -> Vec<BigInt> {
    let mut a = m.clone();
    let n = a.rows.min(a.cols);
    for t in 0..n {
        // Pivot: smallest nonzero magnitude in the trailing block.
        let Some((pi, pj)) = smallest_entry(&a, t) else {
            break;
        };
        a.swap_rows(t, pi);
        a.swap_cols(t, pj);
        loop {
            let mut changed = false;
            for i in (t + 1)..a.rows {
                if !a.get(i, t).is_zero() {
                    let q = a.get(i, t).div_floor(a.get(t, t));
                    a.sub_row(i, t, &q);
                    if !a.get(i, t).is_zero() {
                        changed = true;
                    }
                }
            }
            for j in (t + 1)..a.cols {
                if !a.get(t, j).is_zero() {
                    let q = a.get(t, j).div_floor(a.get(t, t));
                    a.sub_col(j, t, &q);
                    if !a.get(t, j).is_zero() {
                        changed = true;
                    }
                }
            }
            if changed {
                // A remainder survived: move the smaller entry into the pivot.
                let (pi, pj) = smallest_in_cross(&a, t);
                a.swap_rows(t, pi);
                a.swap_cols(t, pj);
                continue;
            }
            // Row and column cleared; enforce divisibility on the block.
            let pivot = a.get(t, t).clone();
            let offender = ((t + 1)..a.rows)
                .find(|&i| ((t + 1)..a.cols).any(|j| !a.get(i, j).is_multiple_of(&pivot)));
            match offender {
                Some(i) => a.add_row(t, i),
                None => break,
            }
        }
    }
    (0..n).map(|i| a.get(i, i).abs()).collect()
}

fn smallest_entry(a: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..a.rows {
        for j in t..a.cols {
            let v = a.get(i, j);
            if v.is_zero() {
                continue;
            }
            match best {
                Some((bi, bj)) if a.get(bi, bj).abs() <= v.abs() => {}
                _ => best = Some((i, j)),
            }
        }
    }
    best
}

fn smallest_in_cross(a: &IntMatrix, t: usize) -> (usize, usize) {
    let mut best = (t, t);
    let mut best_val = a.get(t, t).abs();
    let mut consider = |i: usize, j: usize, best: &mut (usize, usize)| {
        let v = a.get(i, j).abs();
        if !v.is_zero() && (best_val.is_zero() || v < best_val) {
            best_val = v;
            *best = (i, j);
        }
    };
    for i in (t + 1)..a.rows {
        consider(i, t, &mut best);
    }
    for j in (t + 1)..a.cols {
        consider(t, j, &mut best);
    }
    best
}
