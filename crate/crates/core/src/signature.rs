//! Exact signature of integer symmetric forms.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// (positive, negative, null) inertia of a symmetric rational matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub null: usize,
}

impl Inertia {
    pub fn signature(&self) -> i64 {
        self.positive as i64 - self.negative as i64
    }
}

/// Inertia by symmetric Gaussian elimination (congruence diagonalization).
pub fn inertia(mut m: Vec<Vec<BigRational>>) -> Inertia {
    let n = m.len();
    let mut out = Inertia { positive: 0, negative: 0, null: 0 };
    let mut alive: Vec<usize> = (0..n).collect();
    while !alive.is_empty() {
        // Prefer a nonzero diagonal pivot.
        let pivot = alive.iter().copied().find(|&i| !m[i][i].is_zero());
        let p = match pivot {
            Some(p) => p,
            None => {
                // Zero diagonal: find an off-diagonal entry and fold it in.
                let pair = alive.iter().copied().find_map(|i| {
                    alive.iter().copied().find(|&j| j != i && !m[i][j].is_zero()).map(|j| (i, j))
                });
                match pair {
                    None => {
                        out.null += alive.len();
                        break;
                    }
                    Some((i, j)) => {
                        // e_i <- e_i + e_j gives m[i][i] = 2 m[i][j] != 0.
                        for k in 0..n {
                            let v = m[j][k].clone();
                            m[i][k] += v;
                        }
                        for k in 0..n {
                            let v = m[k][j].clone();
                            m[k][i] += v;
                        }
                        i
                    }
                }
            }
        };
        let d = m[p][p].clone();
        if d.is_positive() {
            out.positive += 1;
        } else {
            out.negative += 1;
        }
        alive.retain(|&i| i != p);
        for &i in &alive {
            if m[i][p].is_zero() {
                continue;
            }
            let f = &m[i][p] / &d;
            for &k in &alive {
                let v = &f * &m[p][k];
                m[i][k] -= v;
            }
        }
        for &i in &alive {
            m[i][p] = BigRational::zero();
            m[p][i] = BigRational::zero();
        }
    }
    out
}

/// Rational basis (as columns) of the null space of the `rows x cols`
/// integer matrix `c`.
pub fn null_space(c: &[Vec<i64>], cols: usize) -> Vec<Vec<BigRational>> {
    let mut a: Vec<Vec<BigRational>> = c
        .iter()
        .map(|row| row.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..cols {
        let Some(pr) = (r..a.len()).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(r, pr);
        let lead = a[r][col].clone();
        for x in a[r].iter_mut() {
            *x /= lead.clone();
        }
        for i in 0..a.len() {
            if i != r && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for k in 0..cols {
                    let v = &f * &a[r][k];
                    a[i][k] -= v;
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == a.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![BigRational::zero(); cols];
            v[fc] = BigRational::from_integer(BigInt::from(1));
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[row][fc].clone();
            }
            v
        })
        .collect()
}

/// Signature of the integer symmetric form `q` restricted to the kernel of
/// `constraints` (each constraint row has `q.len()` entries).
pub fn restricted_signature(q: &[Vec<i64>], constraints: &[Vec<i64>]) -> i64 {
    let n = q.len();
    let to_q = |x: i64| BigRational::from_integer(BigInt::from(x));
    if constraints.iter().all(|row| row.iter().all(|&x| x == 0)) {
        let m = q.iter().map(|row| row.iter().map(|&x| to_q(x)).collect()).collect();
        return inertia(m).signature();
    }
    let basis = null_space(constraints, n);
    let r = basis.len();
    let mut m = vec![vec![BigRational::zero(); r]; r];
    for a in 0..r {
        for b in a..r {
            let mut acc = BigRational::zero();
            for i in 0..n {
                if basis[a][i].is_zero() {
                    continue;
                }
                for j in 0..n {
                    if q[i][j] != 0 && !basis[b][j].is_zero() {
                        acc += &basis[a][i] * to_q(q[i][j]) * &basis[b][j];
                    }
                }
            }
            m[a][b] = acc.clone();
            m[b][a] = acc;
        }
    }
    inertia(m).signature()
}
