//! Exact linear programming over free variables.
//!
//! Problems have the shape `maximize c·x` subject to `a_i·x ≤ b_i` and
//! `a_j·x = b_j`. The solver walks vertices of the feasible region, keeping a
//! basis of `n` tight rows, with Bland's rule on both the leaving and the
//! entering row. It is aimed at problems with few variables and many rows,
//! which is the shape of every gauge, conjugate and distance computation here.

use super::linalg::{independent_subset, inverse, nullspace};
use super::rational::{dot, zeros, Vector, Q};
use num_traits::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vector,
    pub rel: Relation,
    pub rhs: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("feasible region is empty")]
    Infeasible,
    #[error("objective is unbounded")]
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct Lp {
    pub nvars: usize,
    pub objective: Vector,
    pub rows: Vec<Row>,
}

/// Optimum with a primal vertex and a dual certificate.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub value: Q,
    pub point: Vector,
    /// Indices of rows tight at `point`.
    pub active: Vec<usize>,
    /// Dual multipliers `(row, y)`; `Σ y·a = c` and `Σ y·b = value`.
    pub multipliers: Vec<(usize, Q)>,
}

impl Lp {
    pub fn new(nvars: usize) -> Self {
        Lp { nvars, objective: zeros(nvars), rows: Vec::new() }
    }

    pub fn maximize(mut self, c: Vector) -> Self {
        assert_eq!(c.len(), self.nvars);
        self.objective = c;
        self
    }

    pub fn le(&mut self, coeffs: Vector, rhs: Q) -> usize {
        assert_eq!(coeffs.len(), self.nvars);
        self.rows.push(Row { coeffs, rel: Relation::Le, rhs });
        self.rows.len() - 1
    }

    pub fn ge(&mut self, coeffs: Vector, rhs: Q) -> usize {
        self.le(coeffs.into_iter().map(|x| -x).collect(), -rhs)
    }

    pub fn eq(&mut self, coeffs: Vector, rhs: Q) -> usize {
        assert_eq!(coeffs.len(), self.nvars);
        self.rows.push(Row { coeffs, rel: Relation::Eq, rhs });
        self.rows.len() - 1
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        let n = self.nvars;
        let start = self.feasible_point()?;
        let rows: Vec<(Vector, Q, bool)> = self
            .rows
            .iter()
            .map(|r| (r.coeffs.clone(), r.rhs.clone(), r.rel == Relation::Eq))
            .collect();
        let (x, basis, y) = optimize(n, &self.objective, &rows, start)?;
        let value = dot(&self.objective, &x);
        let active = (0..self.rows.len())
            .filter(|&i| dot(&self.rows[i].coeffs, &x) == self.rows[i].rhs)
            .collect();
        let multipliers = basis
            .iter()
            .zip(y)
            .filter(|(&i, yi)| i < self.rows.len() && !yi.is_zero())
            .map(|(&i, yi)| (i, yi))
            .collect();
        Ok(LpSolution { value, point: x, active, multipliers })
    }

    /// Checks the dual certificate of a solution exactly.
    pub fn certifies(&self, sol: &LpSolution) -> bool {
        let mut combo = zeros(self.nvars);
        let mut bound = Q::zero();
        for (i, y) in &sol.multipliers {
            let row = &self.rows[*i];
            if row.rel == Relation::Le && y.is_negative() {
                return false;
            }
            for (c, a) in combo.iter_mut().zip(&row.coeffs) {
                *c += y * a;
            }
            bound += y * &row.rhs;
        }
        combo == self.objective && bound == sol.value
    }

    fn feasible_point(&self) -> Result<Vector, LpError> {
        let n = self.nvars;
        let mut aux: Vec<(Vector, Q, bool)> = Vec::new();
        let mut s0 = Q::zero();
        for r in &self.rows {
            let mut up = r.coeffs.clone();
            up.push(Q::from_integer((-1).into()));
            aux.push((up, r.rhs.clone(), false));
            if -&r.rhs > s0 {
                s0 = -&r.rhs;
            }
            if r.rel == Relation::Eq {
                let mut down: Vector = r.coeffs.iter().map(|x| -x).collect();
                down.push(Q::from_integer((-1).into()));
                aux.push((down, -&r.rhs, false));
                if r.rhs > s0 {
                    s0 = r.rhs.clone();
                }
            }
        }
        if s0.is_zero() {
            return Ok(zeros(n));
        }
        let mut floor = zeros(n + 1);
        floor[n] = Q::from_integer((-1).into());
        aux.push((floor, Q::zero(), false));
        let mut c = zeros(n + 1);
        c[n] = Q::from_integer((-1).into());
        let mut start = zeros(n + 1);
        start[n] = s0;
        let (x, _, _) = optimize(n + 1, &c, &aux, start).map_err(|_| LpError::Infeasible)?;
        if !x[n].is_zero() {
            return Err(LpError::Infeasible);
        }
        Ok(x[..n].to_vec())
    }
}

/// Basis matrix inverse for the chosen rows, plus pinned artificial rows.
fn basis_rows<'a>(rows: &'a [(Vector, Q, bool)], extra: &'a [Vector], basis: &[usize]) -> Vec<&'a Vector> {
    basis
        .iter()
        .map(|&i| if i < rows.len() { &rows[i].0 } else { &extra[i - rows.len()] })
        .collect()
}

/// Vertex simplex from a feasible start. Rows flagged `true` are equalities
/// and never leave the basis. Returns point, basis and basis multipliers.
fn optimize(
    n: usize,
    c: &[Q],
    rows: &[(Vector, Q, bool)],
    mut x: Vector,
) -> Result<(Vector, Vec<usize>, Vec<Q>), LpError> {
    if n == 0 {
        return Ok((x, Vec::new(), Vec::new()));
    }
    let m = rows.len();
    // artificial rows pin lineality directions orthogonal to c
    let mut extra: Vec<Vector> = Vec::new();
    let slack = |i: usize, x: &Vector| &rows[i].1 - dot(&rows[i].0, x);

    let mut basis: Vec<usize> = {
        let mut order: Vec<usize> = (0..m).filter(|&i| rows[i].2).collect();
        order.extend((0..m).filter(|&i| !rows[i].2 && slack(i, &x).is_zero()));
        let vecs: Vec<Vector> = order.iter().map(|&i| rows[i].0.clone()).collect();
        independent_subset(&vecs).into_iter().map(|k| order[k]).collect()
    };

    while basis.len() < n {
        let current: Vec<Vector> = basis_rows(rows, &extra, &basis).into_iter().cloned().collect();
        let mut d = nullspace(&current, n).swap_remove(0);
        if dot(c, &d).is_negative() {
            d = d.iter().map(|v| -v).collect();
        }
        match ratio_test(rows, &basis, &x, &d) {
            Some((t, i)) => {
                x = x.iter().zip(&d).map(|(xi, di)| xi + &t * di).collect();
                basis.push(i);
            }
            None if dot(c, &d).is_positive() => return Err(LpError::Unbounded),
            None => {
                let back: Vector = d.iter().map(|v| -v).collect();
                match ratio_test(rows, &basis, &x, &back) {
                    Some((t, i)) => {
                        x = x.iter().zip(&back).map(|(xi, di)| xi + &t * di).collect();
                        basis.push(i);
                    }
                    None => {
                        extra.push(d);
                        basis.push(m + extra.len() - 1);
                    }
                }
            }
        }
    }

    loop {
        let mat: Vec<Vector> = basis_rows(rows, &extra, &basis).into_iter().cloned().collect();
        let inv = inverse(&mat).expect("basis rows are independent");
        // y^T = c^T inv
        let y: Vec<Q> = (0..n).map(|k| (0..n).map(|j| &c[j] * &inv[j][k]).sum()).collect();
        let leaving = basis
            .iter()
            .enumerate()
            .filter(|(k, &i)| i < m && !rows[i].2 && y[*k].is_negative())
            .min_by_key(|(_, &i)| i)
            .map(|(k, _)| k);
        let Some(k) = leaving else {
            return Ok((x, basis, y));
        };
        let d: Vector = (0..n).map(|j| -&inv[j][k]).collect();
        match ratio_test(rows, &basis, &x, &d) {
            Some((t, i)) => {
                if !t.is_zero() {
                    x = x.iter().zip(&d).map(|(xi, di)| xi + &t * di).collect();
                }
                basis[k] = i;
            }
            None => return Err(LpError::Unbounded),
        }
    }
}

/// Largest step along `d` keeping all rows feasible; ties go to the smallest row.
fn ratio_test(rows: &[(Vector, Q, bool)], basis: &[usize], x: &[Q], d: &[Q]) -> Option<(Q, usize)> {
    let mut best: Option<(Q, usize)> = None;
    for (i, (a, b, _)) in rows.iter().enumerate() {
        if basis.contains(&i) {
            continue;
        }
        let ad = dot(a, d);
        if !ad.is_positive() {
            continue;
        }
        let t = (b - dot(a, x)) / ad;
        if best.as_ref().map_or(true, |(bt, _)| t < *bt) {
            best = Some((t, i));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::rational::{q, qvec};

    #[test]
    fn one_dimensional_box() {
        let mut lp = Lp::new(1).maximize(qvec(&[1]));
        lp.le(qvec(&[1]), q(1));
        lp.le(qvec(&[-1]), q(1));
        let s = lp.solve().unwrap();
        assert_eq!(s.value, q(1));
        assert_eq!(s.point, qvec(&[1]));
        assert!(lp.certifies(&s));
    }

    #[test]
    fn box_corner() {
        let mut lp = Lp::new(2).maximize(qvec(&[1, 1]));
        for (a, b) in [([1, 0], 1), ([-1, 0], 1), ([0, 1], 1), ([0, -1], 1)] {
            lp.le(qvec(&a), q(b));
        }
        let s = lp.solve().unwrap();
        assert_eq!(s.value, q(2));
        assert_eq!(s.point, qvec(&[1, 1]));
        assert_eq!(s.active, vec![0, 2]);
        assert!(lp.certifies(&s));
    }

    #[test]
    fn unbounded_and_infeasible() {
        let mut lp = Lp::new(1).maximize(qvec(&[1]));
        lp.ge(qvec(&[1]), q(0));
        assert_eq!(lp.solve().unwrap_err(), LpError::Unbounded);

        let mut lp = Lp::new(1).maximize(qvec(&[1]));
        lp.le(qvec(&[1]), q(-1));
        lp.ge(qvec(&[1]), q(1));
        assert_eq!(lp.solve().unwrap_err(), LpError::Infeasible);
    }

    #[test]
    fn equalities_and_lineality() {
        // maximize x subject to x + y = 1, x ≤ 3; z is free and absent from everything
        let mut lp = Lp::new(3).maximize(qvec(&[1, 0, 0]));
        lp.eq(qvec(&[1, 1, 0]), q(1));
        lp.le(qvec(&[1, 0, 0]), q(3));
        let s = lp.solve().unwrap();
        assert_eq!(s.value, q(3));
        assert!(lp.certifies(&s));
    }

    #[test]
    fn degenerate_vertex() {
        // many rows through the optimum
        let mut lp = Lp::new(2).maximize(qvec(&[1, 1]));
        for (a, b) in [([1, 0], 1), ([0, 1], 1), ([1, 1], 2), ([2, 1], 3), ([1, 2], 3), ([-1, 0], 5), ([0, -1], 5)] {
            lp.le(qvec(&a), q(b));
        }
        let s = lp.solve().unwrap();
        assert_eq!(s.value, q(2));
        assert!(lp.certifies(&s));
    }
}
