//! Amalgamation over a common subspace and joins with per-pair tolerances.

use crate::error::{Error, Result};
use crate::kernel::linalg::{independent_subset, inverse, Matrix};
use crate::kernel::rational::{dot, neg, q, scale, zeros, Vector, Q};
use crate::kernel::{Lp, LpError};
use crate::space::{LinMap, Space};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AmalgamOut {
    pub result: Space,
    pub g0: LinMap,
    pub g1: LinMap,
    /// Dimension of the seminorm's kernel on the direct sum.
    pub kernel_dim: usize,
}

/// Coordinates on `R^n / span(kernel)`.
///
/// The kept coordinates are the standard basis vectors that, taken in index
/// order, complete a basis of the kernel; `proj` maps `R^n` onto them and is
/// the identity on each kept coordinate.
#[derive(Clone, Debug)]
pub(crate) struct Quotient {
    pub proj: Matrix,
    pub kept: Vec<usize>,
    pub kernel_dim: usize,
}

impl Quotient {
    pub fn new(kernel: &[Vector], n: usize) -> Quotient {
        let kb: Vec<Vector> = independent_subset(kernel).into_iter().map(|i| kernel[i].clone()).collect();
        let k = kb.len();
        let mut cols = kb.clone();
        let mut kept = Vec::new();
        for j in 0..n {
            if cols.len() == n {
                break;
            }
            let mut trial = cols.clone();
            trial.push(crate::kernel::rational::unit(n, j));
            if independent_subset(&trial).len() == trial.len() {
                cols = trial;
                kept.push(j);
            }
        }
        // M has the chosen vectors as columns
        let m: Matrix = (0..n).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect();
        let minv = if n == 0 { Vec::new() } else { inverse(&m).expect("completed basis") };
        Quotient { proj: minv[k..].to_vec(), kept, kernel_dim: k }
    }

    pub fn dim(&self) -> usize {
        self.proj.len()
    }

    pub fn apply(&self, v: &[Q]) -> Vector {
        self.proj.iter().map(|r| dot(r, v)).collect()
    }
}

fn concat(a: &[Q], b: &[Q]) -> Vector {
    let mut v = a.to_vec();
    v.extend_from_slice(b);
    v
}

/// Pushout of `f0: E → F0` and `f1: E → F1`: the ball is the convex hull of
/// the two unit balls in `(F0 ⊕ F1) / {(f0 w, −f1 w)}`. Coordinates of `F0`
/// are kept, so `g0` is the inclusion of the first `dim F0` coordinates.
pub fn amalgamate(e: &Space, f0: &LinMap, f1: &LinMap) -> Result<AmalgamOut> {
    let f0 = f0.clone().require_isometric()?;
    let f1 = f1.clone().require_isometric()?;
    if f0.source.dim != e.dim || f1.source.dim != e.dim {
        return Err(Error::DimensionMismatch { expected: e.dim, got: f0.source.dim.max(f1.source.dim) });
    }
    let (n0, n1) = (f0.target.dim, f1.target.dim);
    let kernel: Vec<Vector> = f0.cols.iter().zip(&f1.cols).map(|(a, b)| concat(a, &neg(b))).collect();
    let quot = Quotient::new(&kernel, n0 + n1);
    let left = |w: &[Q]| quot.apply(&concat(w, &zeros(n1)));
    let right = |w: &[Q]| quot.apply(&concat(&zeros(n0), w));
    let mut verts: Vec<Vector> = f0.target.vertices().iter().map(|w| left(w)).collect();
    verts.extend(f1.target.vertices().iter().map(|w| right(w)));
    let result = glue(quot.dim(), verts)?;
    let g0 = LinMap::new(f0.target.clone(), result.clone(), (0..n0).map(|i| left(&crate::kernel::rational::unit(n0, i))).collect())?;
    let g1 = LinMap::new(f1.target.clone(), result.clone(), (0..n1).map(|i| right(&crate::kernel::rational::unit(n1, i))).collect())?;
    Ok(AmalgamOut {
        result,
        g0: g0.require_isometric()?,
        g1: g1.require_isometric()?,
        kernel_dim: quot.kernel_dim,
    })
}

fn glue(dim: usize, verts: Vec<Vector>) -> Result<Space> {
    if dim == 0 {
        return Ok(Space::trivial());
    }
    Space::from_vertices(dim, verts)
}

/// Smallest positive tolerance accepted by [`approx_join`].
pub fn min_tolerance() -> Q {
    Q::new(1.into(), num_traits::pow(num_bigint::BigInt::from(2), 20))
}

fn check_tuples(e: &Space, f: &Space, a: &[Vector], b: &[Vector], eps: &[Q]) -> Result<()> {
    if a.len() != b.len() || a.len() != eps.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len().max(eps.len()) });
    }
    for v in a {
        if v.len() != e.dim {
            return Err(Error::DimensionMismatch { expected: e.dim, got: v.len() });
        }
    }
    for v in b {
        if v.len() != f.dim {
            return Err(Error::DimensionMismatch { expected: f.dim, got: v.len() });
        }
    }
    for x in eps {
        if x.is_negative() {
            return Err(Error::Invalid("negative tolerance".into()));
        }
        if x.is_positive() && *x < min_tolerance() {
            return Err(Error::SmallToleranceCapped(x.clone()));
        }
    }
    Ok(())
}

/// Builds the joined ball `conv(B_E ∪ B_F ∪ {±(a_i ⊕ −b_i)/ε_i})`, quotienting
/// the directions with `ε_i = 0`. The maps are checked, not required, to be
/// isometric; see [`approx_join`] for the guarded version.
pub fn build_join(e: &Space, f: &Space, a: &[Vector], b: &[Vector], eps: &[Q]) -> Result<AmalgamOut> {
    check_tuples(e, f, a, b, eps)?;
    let (ne, nf) = (e.dim, f.dim);
    let diffs: Vec<Vector> = a.iter().zip(b).map(|(x, y)| concat(x, &neg(y))).collect();
    let kernel: Vec<Vector> = diffs
        .iter()
        .zip(eps)
        .filter(|(d, t)| t.is_zero() && d.iter().any(|x| !x.is_zero()))
        .map(|(d, _)| d.clone())
        .collect();
    let quot = Quotient::new(&kernel, ne + nf);
    let left = |w: &[Q]| quot.apply(&concat(w, &zeros(nf)));
    let right = |w: &[Q]| quot.apply(&concat(&zeros(ne), w));
    let mut verts: Vec<Vector> = e.vertices().iter().map(|w| left(w)).collect();
    verts.extend(f.vertices().iter().map(|w| right(w)));
    for (d, t) in diffs.iter().zip(eps) {
        if t.is_positive() && d.iter().any(|x| !x.is_zero()) {
            verts.push(scale(&(Q::one() / t), &quot.apply(d)));
        }
    }
    let result = glue(quot.dim(), verts)?;
    let ge = LinMap::new(e.clone(), result.clone(), (0..ne).map(|i| left(&crate::kernel::rational::unit(ne, i))).collect())?;
    let gf = LinMap::new(f.clone(), result.clone(), (0..nf).map(|i| right(&crate::kernel::rational::unit(nf, i))).collect())?;
    Ok(AmalgamOut { result, g0: ge.check_isometry(), g1: gf.check_isometry(), kernel_dim: quot.kernel_dim })
}

/// Joins `E` and `F` so that `‖g_E a_i − g_F b_i‖ ≤ ε_i`, after checking
/// that the tolerances are compatible with both norms.
pub fn approx_join(e: &Space, f: &Space, a: &[Vector], b: &[Vector], eps: &[Q]) -> Result<AmalgamOut> {
    let report = condition_check(e, f, a, b, eps)?;
    if let Some(r) = report.witness {
        return Err(Error::ConditionViolated(r));
    }
    let out = build_join(e, f, a, b, eps)?;
    let g0 = out.g0.require_isometric()?;
    let g1 = out.g1.require_isometric()?;
    Ok(AmalgamOut { g0, g1, ..out })
}

#[derive(Clone, Debug)]
pub struct ConditionReport {
    pub holds: bool,
    /// Largest value of `|‖Σr a‖ − ‖Σr b‖| − Σ|r|ε` over `Σ|r| = 1`.
    pub worst: Q,
    pub witness: Option<Vector>,
}

/// Decides `|‖Σ r_i a_i‖ − ‖Σ r_i b_i‖| ≤ Σ |r_i| ε_i` for all real `r`.
///
/// Both sides are homogeneous, so `r` ranges over `Σ|r_i| = 1`. For each sign
/// pattern and each linearity region of the subtracted norm the difference is
/// convex, and its maximum over the region is an LP per facet of the other norm.
pub fn condition_check(e: &Space, f: &Space, a: &[Vector], b: &[Vector], eps: &[Q]) -> Result<ConditionReport> {
    check_tuples(e, f, a, b, eps)?;
    let n = a.len();
    let mut worst: Option<(Q, Vector)> = None;
    if n == 0 {
        return Ok(ConditionReport { holds: true, worst: Q::zero(), witness: None });
    }
    for mask in 0..(1u32 << n) {
        let sign: Vec<Q> = (0..n).map(|i| if mask >> i & 1 == 1 { -Q::one() } else { Q::one() }).collect();
        let sa: Vec<Vector> = a.iter().zip(&sign).map(|(v, s)| scale(s, v)).collect();
        let sb: Vec<Vector> = b.iter().zip(&sign).map(|(v, s)| scale(s, v)).collect();
        for (sp, sq, p, qq) in [(e, f, &sa, &sb), (f, e, &sb, &sa)] {
            if let Some((val, t)) = max_difference(sp, sq, p, qq, eps) {
                if worst.as_ref().map_or(true, |(w, _)| val > *w) {
                    let r = t.iter().zip(&sign).map(|(x, s)| x * s).collect();
                    worst = Some((val, r));
                }
            }
        }
    }
    let (val, r) = worst.expect("at least one sign pattern");
    let holds = !val.is_positive();
    Ok(ConditionReport { holds, worst: val, witness: if holds { None } else { Some(r) } })
}

/// `max over the simplex of ‖Σ t_i p_i‖ − ‖Σ t_i q_i‖ − Σ t_i ε_i`.
fn max_difference(sp: &Space, sq: &Space, p: &[Vector], qv: &[Vector], eps: &[Q]) -> Option<(Q, Vector)> {
    let n = p.len();
    let coeffs = |lam: &[Q], vs: &[Vector]| -> Vector { vs.iter().map(|v| dot(lam, v)).collect() };
    let zero_fn = vec![vec![]];
    let p_fns: Vec<Vector> = if sp.dim == 0 { zero_fn.clone() } else { sp.dual_vertices().to_vec() };
    let q_fns: Vec<Vector> = if sq.dim == 0 { zero_fn } else { sq.dual_vertices().to_vec() };
    let p_rows: Vec<Vector> = p_fns.iter().map(|l| if l.is_empty() { zeros(n) } else { coeffs(l, p) }).collect();
    let q_rows: Vec<Vector> = q_fns.iter().map(|l| if l.is_empty() { zeros(n) } else { coeffs(l, qv) }).collect();
    let mut best: Option<(Q, Vector)> = None;
    for (k, qr) in q_rows.iter().enumerate() {
        for pr in &p_rows {
            let obj: Vector = (0..n).map(|i| &pr[i] - &qr[i] - &eps[i]).collect();
            let mut lp = Lp::new(n).maximize(obj);
            for i in 0..n {
                let mut r = zeros(n);
                r[i] = q(-1);
                lp.le(r, Q::zero());
            }
            lp.eq(vec![Q::one(); n], Q::one());
            for (j, other) in q_rows.iter().enumerate() {
                if j != k {
                    lp.le((0..n).map(|i| &other[i] - &qr[i]).collect(), Q::zero());
                }
            }
            match lp.solve() {
                Ok(sol) => {
                    if best.as_ref().map_or(true, |(b, _)| sol.value > *b) {
                        best = Some((sol.value, sol.point));
                    }
                }
                Err(LpError::Infeasible) => {}
                Err(LpError::Unbounded) => unreachable!("simplex is bounded"),
            }
        }
    }
    best
}
