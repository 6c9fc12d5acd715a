//! Polyhedral normed spaces, linear maps between them and norming functionals.

use crate::error::{Error, Result};
use crate::kernel::linalg::{inverse, mat_vec, nullspace, rank, transpose, vec_mat, Matrix};
use crate::kernel::rational::{dot, neg, q, serde_mat, serde_vec, sub, unit, Vector, Q};
use crate::kernel::{Lp, LpError, PolyBall};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Space {
    pub dim: usize,
    pub ball: PolyBall,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Space {
    pub fn new(ball: PolyBall) -> Result<Self> {
        let ball = ball.complete()?;
        Ok(Space { dim: ball.dim, ball, label: None })
    }

    pub fn trivial() -> Self {
        Space { dim: 0, ball: PolyBall::trivial(), label: Some("0".into()) }
    }

    pub fn from_facets(dim: usize, facets: Vec<Vector>) -> Result<Self> {
        Ok(Space { dim, ball: PolyBall::from_facets(dim, facets)?, label: None })
    }

    pub fn from_vertices(dim: usize, vertices: Vec<Vector>) -> Result<Self> {
        Ok(Space { dim, ball: PolyBall::from_vertices(dim, vertices)?, label: None })
    }

    pub fn ell_inf(n: usize) -> Self {
        if n == 0 {
            return Space::trivial();
        }
        let mut s = Space::from_facets(n, (0..n).map(|i| unit(n, i)).collect()).expect("cube");
        s.label = Some(format!("linf{n}"));
        s
    }

    pub fn ell_1(n: usize) -> Self {
        if n == 0 {
            return Space::trivial();
        }
        let mut s = Space::from_vertices(n, (0..n).map(|i| unit(n, i)).collect()).expect("cross-polytope");
        s.label = Some(format!("l1{n}"));
        s
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = Some(label.into());
        self
    }

    fn check(&self, v: &[Q]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.len() });
        }
        Ok(())
    }

    pub fn norm(&self, v: &[Q]) -> Result<Q> {
        self.check(v)?;
        Ok(self.ball.gauge(v))
    }

    /// Norm without the dimension check, for internal hot loops.
    pub(crate) fn n(&self, v: &[Q]) -> Q {
        self.ball.gauge(v)
    }

    pub fn dual_norm(&self, lambda: &[Q]) -> Result<Q> {
        self.check(lambda)?;
        Ok(self.ball.dual_gauge(lambda))
    }

    pub fn dual_space(&self) -> Result<Space> {
        Ok(Space {
            dim: self.dim,
            ball: self.ball.polar()?,
            label: self.label.as_ref().map(|l| format!("{l}*")),
        })
    }

    /// Vertices of the dual ball, i.e. the facet functionals of this ball.
    pub fn dual_vertices(&self) -> &[Vector] {
        self.ball.facets()
    }

    pub fn vertices(&self) -> &[Vector] {
        self.ball.vertices()
    }

    pub fn norming_functionals(&self, v: &[Q]) -> Result<Face> {
        self.check(v)?;
        if v.iter().all(Zero::is_zero) {
            return Err(Error::ZeroVector);
        }
        let nv = self.n(v);
        let generators: Vec<Vector> = self.dual_vertices().iter().filter(|l| dot(l, v) == nv).cloned().collect();
        let diffs: Vec<Vector> = generators.iter().skip(1).map(|g| sub(g, &generators[0])).collect();
        Ok(Face { affine_dim: rank(&diffs), generators })
    }

    pub fn is_smooth(&self, v: &[Q]) -> Result<bool> {
        Ok(self.norming_functionals(v)?.affine_dim == 0)
    }

    /// The subspace spanned by `basis`, with its induced norm, and the inclusion.
    pub fn subspace(&self, basis: &[Vector]) -> Result<(Space, LinMap)> {
        for b in basis {
            self.check(b)?;
        }
        if rank(basis) < basis.len() {
            return Err(Error::NotABasis);
        }
        let k = basis.len();
        let sub_space = if k == 0 {
            Space::trivial()
        } else {
            let facets: Vec<Vector> = self
                .dual_vertices()
                .iter()
                .map(|l| basis.iter().map(|b| dot(l, b)).collect())
                .collect();
            Space::from_facets(k, facets)?
        };
        let mut incl = LinMap::new(sub_space.clone(), self.clone(), basis.to_vec())?;
        incl.isometry = Isometry::Isometric;
        Ok((sub_space, incl))
    }
}

/// A face of the dual ball, given by its vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Face {
    #[serde(with = "serde_mat")]
    pub generators: Vec<Vector>,
    pub affine_dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Isometry {
    #[default]
    Unchecked,
    Isometric,
    NotIsometric(#[serde(with = "serde_vec")] Vector),
}

/// A linear map; `cols[j]` is the image of the `j`-th basis vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinMap {
    pub source: Space,
    pub target: Space,
    #[serde(with = "serde_mat")]
    pub cols: Vec<Vector>,
    #[serde(default)]
    pub isometry: Isometry,
}

impl LinMap {
    pub fn new(source: Space, target: Space, cols: Vec<Vector>) -> Result<Self> {
        if cols.len() != source.dim {
            return Err(Error::DimensionMismatch { expected: source.dim, got: cols.len() });
        }
        for c in &cols {
            if c.len() != target.dim {
                return Err(Error::DimensionMismatch { expected: target.dim, got: c.len() });
            }
        }
        Ok(LinMap { source, target, cols, isometry: Isometry::Unchecked })
    }

    pub fn identity(s: &Space) -> Self {
        let cols = (0..s.dim).map(|i| unit(s.dim, i)).collect();
        LinMap { source: s.clone(), target: s.clone(), cols, isometry: Isometry::Isometric }
    }

    pub fn apply(&self, v: &[Q]) -> Vector {
        let mut out = vec![Q::zero(); self.target.dim];
        for (x, c) in v.iter().zip(&self.cols) {
            if x.is_zero() {
                continue;
            }
            for (o, y) in out.iter_mut().zip(c) {
                *o += x * y;
            }
        }
        out
    }

    /// Row-major matrix, `target.dim × source.dim`.
    pub fn rows(&self) -> Matrix {
        transpose(&self.cols, self.target.dim)
    }

    /// Pulls a functional on the target back to the source.
    pub fn pull(&self, lambda: &[Q]) -> Vector {
        self.cols.iter().map(|c| dot(c, lambda)).collect()
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &LinMap) -> Result<LinMap> {
        if self.target.dim != other.source.dim {
            return Err(Error::DimensionMismatch { expected: other.source.dim, got: self.target.dim });
        }
        let cols = self.cols.iter().map(|c| other.apply(c)).collect();
        let mut m = LinMap::new(self.source.clone(), other.target.clone(), cols)?;
        if self.isometry == Isometry::Isometric && other.isometry == Isometry::Isometric {
            m.isometry = Isometry::Isometric;
        }
        Ok(m)
    }

    pub fn is_isometric(&self) -> bool {
        self.isometry == Isometry::Isometric
    }

    /// Decides whether the map preserves norms, exactly.
    pub fn check_isometry(mut self) -> Self {
        self.isometry = match self.distortion_witness() {
            None => Isometry::Isometric,
            Some(w) => Isometry::NotIsometric(w),
        };
        self
    }

    pub fn require_isometric(self) -> Result<Self> {
        let m = if self.isometry == Isometry::Unchecked { self.check_isometry() } else { self };
        match &m.isometry {
            Isometry::NotIsometric(w) => Err(Error::NotIsometric(w.clone())),
            _ => Ok(m),
        }
    }

    fn distortion_witness(&self) -> Option<Vector> {
        let (s, t) = (&self.source, &self.target);
        if s.dim == 0 {
            return None;
        }
        let differs = |v: &Vector| t.n(&self.apply(v)) != s.n(v);
        if let Some(e) = (0..s.dim).map(|i| unit(s.dim, i)).find(differs) {
            return Some(e);
        }
        if let Some(w) = s.vertices().iter().find(|w| t.n(&self.apply(w)) != Q::one()) {
            return Some(w.clone());
        }
        // every vertex maps into the target sphere, so the map is contractive;
        // it is isometric iff the pulled-back ball sits inside the source ball
        let pulled: Vec<Vector> = t.dual_vertices().iter().map(|l| self.pull(l)).collect();
        if rank(&pulled) < s.dim {
            return nullspace(&self.rows(), s.dim).into_iter().next();
        }
        for mu in s.dual_vertices() {
            let mut lp = Lp::new(s.dim).maximize(mu.clone());
            for p in &pulled {
                lp.le(p.clone(), Q::one());
            }
            match lp.solve() {
                Ok(sol) if sol.value > Q::one() => return Some(sol.point),
                Ok(_) => {}
                Err(LpError::Unbounded) | Err(LpError::Infeasible) => unreachable!("pulled-back ball is bounded"),
            }
        }
        None
    }
}

/// Searches for a linear isometry between two spaces of equal dimension by
/// matching a basis of source vertices against target vertices.
pub fn find_isometry(a: &Space, b: &Space) -> Option<LinMap> {
    if a.dim != b.dim {
        return None;
    }
    if a.dim == 0 {
        return Some(LinMap::identity(a));
    }
    let va = a.vertices();
    let vb = b.vertices();
    if va.len() != vb.len() || a.dual_vertices().len() != b.dual_vertices().len() {
        return None;
    }
    let basis_idx = crate::kernel::linalg::independent_subset(va);
    let basis: Vec<Vector> = basis_idx.iter().map(|&i| va[i].clone()).collect();
    let inv = inverse(&basis)?; // rows of `basis` are vertices
    let d = a.dim;
    let mut choice = vec![0usize; d];
    let mut target_set: Vec<Vector> = vb.to_vec();
    target_set.sort();
    loop {
        let images: Vec<Vector> = choice.iter().map(|&k| vb[k].clone()).collect();
        if rank(&images) == d {
            // M basis_i = images_i  =>  M = images^T * (basis^T)^{-1}
            let binv_t = transpose(&inv, d);
            let m_rows: Matrix = (0..d)
                .map(|r| {
                    let img_row: Vector = images.iter().map(|im| im[r].clone()).collect();
                    vec_mat(&img_row, &binv_t, d)
                })
                .collect();
            let mut mapped: Vec<Vector> = va.iter().map(|v| mat_vec(&m_rows, v)).collect();
            mapped.sort();
            if mapped == target_set {
                let cols = transpose(&m_rows, d);
                let mut m = LinMap::new(a.clone(), b.clone(), cols).ok()?;
                m.isometry = Isometry::Isometric;
                return Some(m);
            }
        }
        let mut i = 0;
        loop {
            if i == d {
                return None;
            }
            choice[i] += 1;
            if choice[i] < vb.len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// `(min, max)` of `‖map x‖` over the unit sphere of the source: the max over
/// source vertices, the min by one LP per source facet.
pub fn distortion(map: &LinMap) -> Result<(Q, Q)> {
    let (s, t) = (&map.source, &map.target);
    if s.dim == 0 {
        return Ok((Q::one(), Q::one()));
    }
    let upper = s.vertices().iter().map(|w| t.n(&map.apply(w))).max().expect("vertices");
    let pulled: Vec<Vector> = t.dual_vertices().iter().map(|l| map.pull(l)).collect();
    let mut lower: Option<Q> = None;
    for lam in s.dual_vertices() {
        // variables (x, s); maximize −s with s ≥ p·x on the facet λ·x = 1
        let mut obj = vec![Q::zero(); s.dim + 1];
        obj[s.dim] = -Q::one();
        let mut lp = Lp::new(s.dim + 1).maximize(obj);
        for p in &pulled {
            let mut r = p.clone();
            r.push(-Q::one());
            lp.le(r, Q::zero());
        }
        for other in s.dual_vertices() {
            let mut r = other.clone();
            r.push(Q::zero());
            lp.le(r, Q::one());
        }
        let mut face = lam.clone();
        face.push(Q::zero());
        lp.eq(face, Q::one());
        let v = -lp.solve()?.value;
        if lower.as_ref().map_or(true, |l| v < *l) {
            lower = Some(v);
        }
    }
    Ok((lower.expect("facets"), upper))
}

/// Scales `v` to have norm one.
pub fn normalize(s: &Space, v: &[Q]) -> Result<Vector> {
    let n = s.norm(v)?;
    if n.is_zero() {
        return Err(Error::ZeroVector);
    }
    Ok(v.iter().map(|x| x / &n).collect())
}

pub fn hexagon() -> Space {
    Space::from_vertices(2, vec![vec![q(1), q(0)], vec![q(0), q(1)], vec![q(1), q(1)]])
        .expect("hexagon")
        .with_label("hexagon")
}

/// Regular-ish polygon ball with vertices rounded to the given denominator.
pub fn rounded_polygon(sides: usize, denom: i64) -> Result<Space> {
    use crate::kernel::rational::round_to;
    let verts: Vec<Vector> = (0..sides)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / sides as f64;
            vec![round_to(t.cos(), denom), round_to(t.sin(), denom)]
        })
        .collect();
    Ok(Space::from_vertices(2, verts)?.with_label(&format!("polygon{sides}")))
}

pub fn neg_face(f: &Face) -> Face {
    Face { generators: f.generators.iter().map(|g| neg(g)).collect(), affine_dim: f.affine_dim }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::rational::{frac, qvec};

    #[test]
    fn norms() {
        assert_eq!(Space::ell_inf(2).norm(&qvec(&[3, -1])).unwrap(), q(3));
        assert_eq!(Space::ell_1(2).norm(&qvec(&[1, 2])).unwrap(), q(3));
        assert_eq!(hexagon().norm(&qvec(&[1, 1])).unwrap(), q(1));
        assert!(matches!(Space::ell_1(2).norm(&qvec(&[1])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn distortion_of_diagonal() {
        let s = Space::ell_inf(2);
        let m = LinMap::new(s.clone(), s.clone(), vec![qvec(&[2, 0]), qvec(&[0, 1])]).unwrap();
        assert_eq!(distortion(&m).unwrap(), (q(1), q(2)));
        let id = LinMap::identity(&hexagon());
        assert_eq!(distortion(&id).unwrap(), (q(1), q(1)));
    }

    #[test]
    fn duals_swap() {
        assert_eq!(Space::ell_1(2).dual_space().unwrap().ball, Space::ell_inf(2).ball);
        assert_eq!(Space::ell_inf(2).dual_space().unwrap().ball, Space::ell_1(2).ball);
    }

    #[test]
    fn faces() {
        let f = Space::ell_1(2).norming_functionals(&qvec(&[1, 0])).unwrap();
        assert_eq!(f.affine_dim, 1);
        assert_eq!(f.generators.len(), 2);
        let g = Space::ell_inf(2).norming_functionals(&[q(1), frac(1, 2)]).unwrap();
        assert_eq!(g.generators, vec![qvec(&[1, 0])]);
        assert_eq!(g.affine_dim, 0);
        let h = Space::ell_inf(2).norming_functionals(&qvec(&[1, 1])).unwrap();
        assert_eq!(h.affine_dim, 1);
        assert_eq!(Space::ell_1(2).norming_functionals(&qvec(&[0, 0])).unwrap_err(), Error::ZeroVector);
    }

    #[test]
    fn isometry_checks() {
        let s = Space::ell_inf(2);
        let diag = LinMap::new(s.clone(), s.clone(), vec![qvec(&[2, 0]), qvec(&[0, 1])]).unwrap();
        assert_eq!(diag.check_isometry().isometry, Isometry::NotIsometric(qvec(&[1, 0])));
        let rot = LinMap::new(s.clone(), s.clone(), vec![qvec(&[0, 1]), qvec(&[-1, 0])]).unwrap();
        assert!(rot.check_isometry().is_isometric());
        // contractive but not isometric: (x,y) -> (x+y)/2 twice
        let squash = LinMap::new(s.clone(), s.clone(), vec![vec![frac(1, 2), frac(1, 2)], vec![frac(1, 2), frac(1, 2)]]).unwrap();
        assert!(!squash.check_isometry().is_isometric());
    }

    #[test]
    fn l1_is_rotated_linf() {
        assert!(find_isometry(&Space::ell_1(2), &Space::ell_inf(2)).is_some());
        assert!(find_isometry(&hexagon(), &Space::ell_inf(2)).is_none());
    }
}
