//! Centrally symmetric polytopes containing the origin in their interior.

use super::dd::polyhedron_generators;
use super::linalg::rank;
use super::lp::Lp;
use super::rational::{dot, leading_sign, neg, serde_opt_mat, Vector, Q};
use crate::error::{Error, Result};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// Largest dimension for which vertex/facet enumeration is attempted.
pub const MAX_DIM: usize = 6;

/// A unit ball. Facets `λ` describe `{v : λ·v ≤ 1}`; vertices describe the
/// convex hull. Either list may be absent until [`PolyBall::complete`] runs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyBall {
    pub dim: usize,
    #[serde(with = "serde_opt_mat", default, skip_serializing_if = "Option::is_none")]
    pub facets: Option<Vec<Vector>>,
    #[serde(with = "serde_opt_mat", default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vector>>,
}

/// Orders a symmetric point list: each `±p` pair sorted by the member whose
/// first nonzero entry is positive, that member first.
pub fn canonical_order(points: &[Vector]) -> Vec<Vector> {
    let mut reps: Vec<Vector> = points
        .iter()
        .filter(|p| leading_sign(p) != Ordering::Equal)
        .map(|p| if leading_sign(p) == Ordering::Less { neg(p) } else { p.clone() })
        .collect();
    reps.sort();
    reps.dedup();
    let mut out = Vec::with_capacity(2 * reps.len());
    for r in reps {
        let n = neg(&r);
        out.push(r);
        out.push(n);
    }
    out
}

fn check_dims(dim: usize, pts: &[Vector]) -> Result<()> {
    for p in pts {
        if p.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
        }
    }
    Ok(())
}

/// Points `p` among `cands` whose tight set against `others` (`p·o = 1`) spans `R^dim`.
fn irredundant(cands: &[Vector], others: &[Vector], dim: usize) -> Vec<Vector> {
    cands
        .iter()
        .filter(|p| {
            let tight: Vec<Vector> = others.iter().filter(|o| dot(p, o) == Q::one()).cloned().collect();
            rank(&tight) == dim
        })
        .cloned()
        .collect()
}

impl PolyBall {
    pub fn trivial() -> Self {
        PolyBall { dim: 0, facets: Some(Vec::new()), vertices: Some(Vec::new()) }
    }

    pub fn from_facets(dim: usize, facets: Vec<Vector>) -> Result<Self> {
        check_dims(dim, &facets)?;
        PolyBall { dim, facets: Some(canonical_order(&facets)), vertices: None }.complete()
    }

    pub fn from_vertices(dim: usize, vertices: Vec<Vector>) -> Result<Self> {
        check_dims(dim, &vertices)?;
        PolyBall { dim, facets: None, vertices: Some(canonical_order(&vertices)) }.complete()
    }

    /// Fills in the missing representation and strips redundancy from both.
    pub fn complete(self) -> Result<Self> {
        let dim = self.dim;
        if dim == 0 {
            return Ok(PolyBall::trivial());
        }
        if dim > MAX_DIM {
            return Err(Error::DimensionTooLarge { got: dim, cap: MAX_DIM });
        }
        match (&self.facets, &self.vertices) {
            (Some(f), _) => {
                check_dims(dim, f)?;
                let f = canonical_order(f);
                if rank(&f) < dim {
                    return Err(Error::UnboundedBall);
                }
                let verts = enumerate(&f, dim)?;
                let facets = irredundant(&f, &verts, dim);
                Ok(PolyBall { dim, facets: Some(canonical_order(&facets)), vertices: Some(canonical_order(&verts)) })
            }
            (None, Some(v)) => {
                check_dims(dim, v)?;
                let v = canonical_order(v);
                if rank(&v) < dim {
                    return Err(Error::DegenerateBall);
                }
                let facets = enumerate(&v, dim)?;
                let verts = irredundant(&v, &facets, dim);
                Ok(PolyBall { dim, facets: Some(canonical_order(&facets)), vertices: Some(canonical_order(&verts)) })
            }
            (None, None) => Err(Error::Invalid("ball has neither facets nor vertices".into())),
        }
    }

    /// The polar ball: facets and vertices trade places.
    pub fn polar(&self) -> Result<Self> {
        if self.facets.is_none() && self.vertices.is_none() {
            return Err(Error::Invalid("ball has neither facets nor vertices".into()));
        }
        if let Some(v) = &self.vertices {
            if self.dim > 0 && rank(v) < self.dim {
                return Err(Error::DegenerateBall);
            }
        }
        Ok(PolyBall {
            dim: self.dim,
            facets: self.vertices.as_ref().map(|v| canonical_order(v)),
            vertices: self.facets.as_ref().map(|f| canonical_order(f)),
        })
    }

    pub fn facets(&self) -> &[Vector] {
        self.facets.as_deref().expect("facet representation present")
    }

    pub fn vertices(&self) -> &[Vector] {
        self.vertices.as_deref().expect("vertex representation present")
    }

    /// Minkowski gauge, `max_λ λ·v` over facets.
    pub fn gauge(&self, v: &[Q]) -> Q {
        self.facets().iter().map(|f| dot(f, v)).max().unwrap_or_else(Q::zero).max(Q::zero())
    }

    /// Gauge of the polar ball, `max_w w·λ` over vertices.
    pub fn dual_gauge(&self, lambda: &[Q]) -> Q {
        self.vertices().iter().map(|w| dot(w, lambda)).max().unwrap_or_else(Q::zero).max(Q::zero())
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        self.gauge(v) <= Q::one()
    }

    /// Both representations present and describing the same set.
    pub fn is_consistent(&self) -> bool {
        let (Some(f), Some(v)) = (&self.facets, &self.vertices) else {
            return true;
        };
        v.iter().all(|w| f.iter().all(|l| dot(l, w) <= Q::one()))
            && f.iter().all(|l| v.iter().any(|w| dot(l, w) == Q::one()))
            && irredundant(f, v, self.dim).len() == f.len()
            && irredundant(v, f, self.dim).len() == v.len()
    }

    /// Reflection through the origin; a symmetric ball maps to itself.
    pub fn negate(&self) -> Self {
        PolyBall {
            dim: self.dim,
            facets: self.facets.as_ref().map(|f| canonical_order(&f.iter().map(|x| neg(x)).collect::<Vec<_>>())),
            vertices: self.vertices.as_ref().map(|v| canonical_order(&v.iter().map(|x| neg(x)).collect::<Vec<_>>())),
        }
    }
}

/// The points of a finite set that are vertices of its convex hull, deduplicated
/// and in input order. The set need not span.
pub fn extreme_points(points: &[Vector]) -> Vec<Vector> {
    let mut pts: Vec<Vector> = Vec::new();
    for p in points {
        if !pts.contains(p) {
            pts.push(p.clone());
        }
    }
    let Some(d) = pts.first().map(Vec::len) else {
        return pts;
    };
    if pts.len() == 1 {
        return pts;
    }
    // a point is a vertex when the facets of the polar cone through it meet in a ray
    let lifted: Vec<Vector> = pts
        .iter()
        .map(|p| {
            let mut r = p.clone();
            r.push(Q::one());
            r
        })
        .collect();
    if let Some(rays) = super::dd::extreme_rays(&lifted, d + 1) {
        return lifted
            .iter()
            .zip(&pts)
            .filter(|(l, _)| {
                let tight: Vec<Vector> = rays.iter().filter(|r| dot(l, r).is_zero()).cloned().collect();
                rank(&tight) == d
            })
            .map(|(_, p)| p.clone())
            .collect();
    }
    (0..pts.len())
        .filter(|&i| {
            // a vertex is strictly separated from the rest by some c in the unit cube
            let mut lp = Lp::new(d + 1).maximize(super::rational::unit(d + 1, d));
            for (j, o) in pts.iter().enumerate() {
                if j != i {
                    let mut row: Vector = o.iter().zip(&pts[i]).map(|(a, b)| a - b).collect();
                    row.push(Q::one());
                    lp.le(row, Q::zero());
                }
            }
            for k in 0..=d {
                let e = super::rational::unit(d + 1, k);
                lp.le(e.clone(), Q::one());
                if k < d {
                    lp.le(neg(&e), Q::one());
                }
            }
            lp.solve().map_or(false, |s| s.value.is_positive())
        })
        .map(|i| pts[i].clone())
        .collect()
}

/// Vertices of `{x : p·x ≤ 1 ∀p}` for a spanning symmetric set `p`.
fn enumerate(rows: &[Vector], dim: usize) -> Result<Vec<Vector>> {
    let h: Vec<(Vector, Q)> = rows.iter().map(|r| (r.clone(), Q::one())).collect();
    let (verts, dirs) = polyhedron_generators(&h, dim).ok_or(Error::UnboundedBall)?;
    if !dirs.is_empty() {
        return Err(Error::UnboundedBall);
    }
    Ok(verts)
}
