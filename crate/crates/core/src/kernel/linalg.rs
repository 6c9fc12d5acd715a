//! Dense exact linear algebra on row-major rational matrices.

use super::rational::{dot, Vector, Q};
use num_traits::{One, Zero};

pub type Matrix = Vec<Vec<Q>>;

/// Reduced row echelon form; returns the pivot column of each nonzero row.
pub fn rref(m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Q::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    pivots
}

pub fn rank(vectors: &[Vector]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let mut m = vectors.to_vec();
    rref(&mut m).len()
}

/// Basis of `{x : row·x = 0 for every row}` in ambient dimension `n`.
pub fn nullspace(rows: &[Vector], n: usize) -> Vec<Vector> {
    let mut m: Matrix = rows.to_vec();
    let pivots = if m.is_empty() { Vec::new() } else { rref(&mut m) };
    let mut basis = Vec::new();
    for free in (0..n).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Q::zero(); n];
        v[free] = Q::one();
        for (row, &pc) in m.iter().zip(&pivots) {
            v[pc] = -row[free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Greedy maximal independent subset, returned as indices.
pub fn independent_subset(vectors: &[Vector]) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut echelon: Matrix = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        let mut trial = echelon.clone();
        trial.push(v.clone());
        if rref(&mut trial).len() > echelon.len() {
            echelon = trial;
            chosen.push(i);
        }
    }
    chosen
}

/// Solves the square system `a x = b`; `None` when singular.
pub fn solve(a: &[Vector], b: &[Q]) -> Option<Vector> {
    let n = a.len();
    let mut m: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut m);
    if pivots.len() < n || pivots.iter().enumerate().any(|(i, &c)| c != i) {
        return None;
    }
    Some(m.iter().map(|r| r[n].clone()).collect())
}

pub fn inverse(a: &[Vector]) -> Option<Matrix> {
    let n = a.len();
    let mut m: Matrix = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut m);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn transpose(m: &[Vector], cols: usize) -> Matrix {
    (0..cols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn mat_vec(m: &[Vector], v: &[Q]) -> Vector {
    m.iter().map(|r| dot(r, v)).collect()
}

/// `v^T m`, i.e. the row vector `v` pulled through `m`.
pub fn vec_mat(v: &[Q], m: &[Vector], cols: usize) -> Vector {
    let mut out = vec![Q::zero(); cols];
    for (vi, row) in v.iter().zip(m) {
        if vi.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(row) {
            *o += vi * x;
        }
    }
    out
}

pub fn mat_mul(a: &[Vector], b: &[Vector], b_cols: usize) -> Matrix {
    a.iter().map(|r| vec_mat(r, b, b_cols)).collect()
}

pub fn identity(n: usize) -> Matrix {
    (0..n).map(|i| super::rational::unit(n, i)).collect()
}
