//! Double description: extreme rays of a pointed polyhedral cone `{y : A y ≤ 0}`.

use super::linalg::{independent_subset, inverse};
use super::rational::{dot, primitive, Vector};
use num_traits::{Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Bits(Vec<u64>);

impl Bits {
    pub fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64).max(1)])
    }
    pub fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    pub fn and(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }
    pub fn contains_all(&self, o: &Bits) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a & b == *b)
    }
    pub fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}

#[derive(Clone, Debug)]
struct Ray {
    dir: Vector,
    tight: Bits,
}

/// Extreme rays of `{y ∈ R^dim : row·y ≤ 0 ∀ row}`, as primitive integer
/// vectors. `None` when the cone is not pointed (rows do not span `R^dim`).
pub fn extreme_rays(rows: &[Vector], dim: usize) -> Option<Vec<Vector>> {
    let basis = independent_subset(rows);
    if basis.len() < dim {
        return None;
    }
    let m = rows.len();
    let bmat: Vec<Vector> = basis.iter().map(|&i| rows[i].clone()).collect();
    let inv = inverse(&bmat)?;
    let mut rays: Vec<Ray> = (0..dim)
        .map(|j| {
            let dir: Vector = (0..dim).map(|i| -&inv[i][j]).collect();
            let mut tight = Bits::new(m);
            for (k, &bi) in basis.iter().enumerate() {
                if k != j {
                    tight.set(bi);
                }
            }
            Ray { dir: primitive(&dir), tight }
        })
        .collect();

    for (h, row) in rows.iter().enumerate() {
        if basis.contains(&h) {
            continue;
        }
        let vals: Vec<_> = rays.iter().map(|r| dot(row, &r.dir)).collect();
        let plus: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        if plus.is_empty() {
            for (r, v) in rays.iter_mut().zip(&vals) {
                if v.is_zero() {
                    r.tight.set(h);
                }
            }
            continue;
        }
        let minus: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        let mut fresh = Vec::new();
        for &p in &plus {
            for &q in &minus {
                let common = rays[p].tight.and(&rays[q].tight);
                if common.count() + 2 < dim {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(k, r)| k == p || k == q || !r.tight.contains_all(&common));
                if !adjacent {
                    continue;
                }
                let dir: Vector = rays[q]
                    .dir
                    .iter()
                    .zip(&rays[p].dir)
                    .map(|(a, b)| &vals[p] * a - &vals[q] * b)
                    .collect();
                let mut tight = common;
                tight.set(h);
                fresh.push(Ray { dir: primitive(&dir), tight });
            }
        }
        let mut next: Vec<Ray> = Vec::with_capacity(rays.len() + fresh.len());
        for (i, mut r) in rays.into_iter().enumerate() {
            if vals[i].is_zero() {
                r.tight.set(h);
                next.push(r);
            } else if vals[i].is_negative() {
                next.push(r);
            }
        }
        next.extend(fresh);
        rays = next;
    }
    Some(rays.into_iter().map(|r| r.dir).collect())
}

/// Vertices and extreme recession directions of `{x : a_i·x ≤ b_i}`.
/// `None` if the polyhedron has a line in it.
pub fn polyhedron_generators(rows: &[(Vector, super::rational::Q)], dim: usize) -> Option<(Vec<Vector>, Vec<Vector>)> {
    use super::rational::{q, zeros};
    let mut cone: Vec<Vector> = rows
        .iter()
        .map(|(a, b)| {
            let mut r = a.clone();
            r.push(-b.clone());
            r
        })
        .collect();
    let mut t = zeros(dim + 1);
    t[dim] = q(-1);
    cone.push(t);
    let rays = extreme_rays(&cone, dim + 1)?;
    let mut verts = Vec::new();
    let mut dirs = Vec::new();
    for r in rays {
        if r[dim].is_zero() {
            dirs.push(r[..dim].to_vec());
        } else {
            let s = r[dim].clone();
            verts.push(r[..dim].iter().map(|x| x / &s).collect());
        }
    }
    Some((verts, dirs))
}

/// Which rows of `{x : a_i·x ≤ b_i}` define facets. The polyhedron must be
/// full-dimensional with no repeated rows; `None` if it has a line in it.
pub fn facet_rows(rows: &[(Vector, super::rational::Q)], dim: usize) -> Option<Vec<bool>> {
    use super::rational::{dot, q};
    let (verts, dirs) = polyhedron_generators(rows, dim)?;
    let gens: Vec<Vector> = verts
        .into_iter()
        .map(|mut v| {
            v.push(q(1));
            v
        })
        .chain(dirs.into_iter().map(|mut d| {
            d.push(q(0));
            d
        }))
        .collect();
    Some(
        rows.iter()
            .map(|(a, b)| {
                let tight: Vec<Vector> =
                    gens.iter().filter(|g| dot(a, &g[..dim]) == b * &g[dim]).cloned().collect();
                super::linalg::rank(&tight) == dim
            })
            .collect(),
    )
}
