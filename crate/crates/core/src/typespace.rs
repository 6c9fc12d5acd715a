//! Quantifier-free types over a space, presented as polyhedral seminorms on
//! `E ⊕ R^n` (base block first) that restrict to the norm of `E`.

use crate::amalgam::Quotient;
use crate::error::{Error, Result};
use crate::fenchel::{self, KFn};
use crate::kernel::linalg::{nullspace, Matrix};
use crate::kernel::polyball::{canonical_order, extreme_points};
use crate::kernel::rational::{dot, serde_mat, serde_q, to_f64, unit, Vector, Q};
use crate::kernel::{Lp, LpError};
use crate::space::{LinMap, Space};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A polyhedral seminorm `z ↦ max_λ λ·z` given by the vertices of its dual ball.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seminorm {
    pub dim: usize,
    #[serde(with = "serde_mat")]
    pub facets: Vec<Vector>,
    #[serde(with = "serde_mat", default)]
    pub kernel: Vec<Vector>,
}

impl Seminorm {
    /// The seminorm `max_λ |λ·z|`, reduced to the extreme functionals.
    pub fn from_functionals(dim: usize, fns: &[Vector]) -> Result<Self> {
        for f in fns {
            if f.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: f.len() });
            }
        }
        let facets = canonical_order(&extreme_points(&canonical_order(fns)));
        let kernel = nullspace(&facets, dim);
        Ok(Seminorm { dim, facets, kernel })
    }

    pub fn value(&self, z: &[Q]) -> Q {
        self.facets.iter().map(|l| dot(l, z)).max().unwrap_or_else(Q::zero).max(Q::zero())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypePres {
    pub base: Space,
    pub nvars: usize,
    pub ext: Seminorm,
}

impl TypePres {
    /// Builds and validates a type from functionals on `E ⊕ R^n`.
    pub fn new(base: Space, nvars: usize, fns: &[Vector]) -> Result<Self> {
        let ext = Seminorm::from_functionals(base.dim + nvars, fns)?;
        let t = TypePres { base, nvars, ext };
        t.check_extends_base()?;
        Ok(t)
    }

    /// Re-canonicalizes and re-validates, e.g. after deserialization.
    pub fn validate(self) -> Result<Self> {
        TypePres::new(self.base, self.nvars, &self.ext.facets)
    }

    fn check_extends_base(&self) -> Result<()> {
        let d = self.base.dim;
        if d == 0 {
            return Ok(());
        }
        let heads: Vec<Vector> = self.ext.facets.iter().map(|l| l[..d].to_vec()).collect();
        if heads.iter().any(|h| self.base.ball.dual_gauge(h) > Q::one()) {
            return Err(Error::Invalid("seminorm exceeds the base norm".into()));
        }
        if !self.base.dual_vertices().iter().all(|w| heads.contains(w)) {
            return Err(Error::Invalid("seminorm falls short of the base norm".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.base.dim + self.nvars
    }

    /// `‖b + Σ λ_i x_i‖`.
    pub fn norm(&self, b: &[Q], lambda: &[Q]) -> Result<Q> {
        if b.len() != self.base.dim {
            return Err(Error::DimensionMismatch { expected: self.base.dim, got: b.len() });
        }
        if lambda.len() != self.nvars {
            return Err(Error::WrongArity { expected: self.nvars, got: lambda.len() });
        }
        let z: Vector = b.iter().chain(lambda).cloned().collect();
        Ok(self.ext.value(&z))
    }

    pub fn kernel_dims(&self) -> usize {
        self.ext.kernel.len()
    }

    /// Functionals split into base block and variable block.
    pub(crate) fn split(&self) -> impl Iterator<Item = (&[Q], &[Q])> {
        let d = self.base.dim;
        self.ext.facets.iter().map(move |l| (&l[..d], &l[d..]))
    }

    fn same_base(&self, other: &TypePres) -> bool {
        self.nvars == other.nvars && self.base.dim == other.base.dim && self.base.ball == other.base.ball
    }
}

/// The type of `a` over `incl(E)` inside `F`.
pub fn tp(incl: &LinMap, a: &[Vector]) -> Result<TypePres> {
    let incl = incl.clone().require_isometric()?;
    let f = &incl.target;
    for v in a {
        if v.len() != f.dim {
            return Err(Error::DimensionMismatch { expected: f.dim, got: v.len() });
        }
    }
    let fns: Vec<Vector> = f
        .dual_vertices()
        .iter()
        .map(|mu| {
            let mut l = incl.pull(mu);
            l.extend(a.iter().map(|v| dot(mu, v)));
            l
        })
        .collect();
    TypePres::new(incl.source.clone(), a.len(), &fns)
}

/// The type of a point of `E` over `E` itself.
pub fn realized(base: &Space, u: &[Q]) -> Result<TypePres> {
    tp(&LinMap::identity(base), &[u.to_vec()])
}

/// `E[ξ]`: the quotient of `E ⊕ R^n` by the kernel of `‖·‖^ξ`.
#[derive(Clone, Debug)]
pub struct Generated {
    pub space: Space,
    /// Isometric inclusion of the base, onto the leading coordinates.
    pub incl: LinMap,
    /// Images of the variables.
    pub generators: Vec<Vector>,
    /// Quotient map `E ⊕ R^n → E[ξ]`, row-major.
    pub proj: Matrix,
}

pub fn generated_space(xi: &TypePres) -> Result<Generated> {
    let (d, n) = (xi.base.dim, xi.nvars);
    let quot = Quotient::new(&xi.ext.kernel, d + n);
    let m = quot.dim();
    let space = if m == 0 {
        Space::trivial()
    } else {
        let facets = xi.ext.facets.iter().map(|l| quot.kept.iter().map(|&k| l[k].clone()).collect()).collect();
        Space::from_facets(m, facets)?
    };
    let cols = (0..d).map(|i| quot.apply(&unit(d + n, i))).collect();
    let incl = LinMap::new(xi.base.clone(), space.clone(), cols)?.require_isometric()?;
    let generators = (0..n).map(|i| quot.apply(&unit(d + n, d + i))).collect();
    Ok(Generated { space, incl, generators, proj: quot.proj })
}

/// `φ*ξ` for `φ: E ⊕ R^m → E ⊕ R^n`, given by columns, fixing `E`.
pub fn pullback(xi: &TypePres, cols: &[Vector]) -> Result<TypePres> {
    let (d, n) = (xi.base.dim, xi.nvars);
    if cols.len() < d {
        return Err(Error::NotExtendingIdentity);
    }
    for c in cols {
        if c.len() != d + n {
            return Err(Error::DimensionMismatch { expected: d + n, got: c.len() });
        }
    }
    if (0..d).any(|j| cols[j] != unit(d + n, j)) {
        return Err(Error::NotExtendingIdentity);
    }
    let fns: Vec<Vector> = xi.ext.facets.iter().map(|l| cols.iter().map(|c| dot(l, c)).collect()).collect();
    TypePres::new(xi.base.clone(), cols.len() - d, &fns)
}

/// Restricts a type over `F` to a type over `E` along an isometric `incl: E → F`.
pub fn restrict_params(xi: &TypePres, incl: &LinMap) -> Result<TypePres> {
    if incl.target.dim != xi.base.dim || incl.target.ball != xi.base.ball {
        return Err(Error::BaseMismatch);
    }
    let incl = incl.clone().require_isometric()?;
    let fns: Vec<Vector> = xi
        .split()
        .map(|(lf, lx)| {
            let mut l = incl.pull(lf);
            l.extend_from_slice(lx);
            l
        })
        .collect();
    TypePres::new(incl.source.clone(), xi.nvars, &fns)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceBracket {
    #[serde(with = "serde_q")]
    pub lo: Q,
    #[serde(with = "serde_q")]
    pub hi: Q,
    /// Base norm of the parameter at which the supremum is attained.
    #[serde(with = "serde_q")]
    pub radius_used: Q,
    pub exact: bool,
}

impl DistanceBracket {
    fn exact(d: Q, radius: Q) -> Self {
        DistanceBracket { lo: d.clone(), hi: d, radius_used: radius, exact: true }
    }
}

/// `sup |‖z‖^ξ − ‖z‖^ζ|` over `z = a + Σ λ_i x_i` with `Σ|λ_i| = 1`.
///
/// One variable goes through conjugates; more variables through one LP per
/// sign pattern and dual vertex. Both are exact.
pub fn type_distance(xi: &TypePres, zeta: &TypePres) -> Result<DistanceBracket> {
    if !xi.same_base(zeta) {
        return Err(Error::BaseMismatch);
    }
    match xi.nvars {
        0 => Ok(DistanceBracket::exact(Q::zero(), Q::zero())),
        1 => {
            let (d, a) = fenchel::sup_distance(&KFn::from_type(xi)?, &KFn::from_type(zeta)?);
            Ok(DistanceBracket::exact(d, xi.base.n(&a)))
        }
        _ => {
            let (d, z) = lp_distance(xi, zeta)?;
            Ok(DistanceBracket::exact(d, xi.base.n(&z[..xi.base.dim])))
        }
    }
}

/// [`type_distance`] for every pair, with each conjugate computed once.
pub fn pairwise_distances(types: &[TypePres]) -> Result<Vec<Vec<DistanceBracket>>> {
    let t = types.len();
    if types.windows(2).any(|w| !w[0].same_base(&w[1])) {
        return Err(Error::BaseMismatch);
    }
    let pairs: Vec<(usize, usize)> = (0..t).flat_map(|i| (i + 1..t).map(move |j| (i, j))).collect();
    let found: Vec<DistanceBracket> = if types.first().is_some_and(|x| x.nvars == 1) {
        let conj: Vec<fenchel::Conjugated> =
            types.par_iter().map(|x| fenchel::Conjugated::new(&KFn::from_type(x)?)).collect::<Result<_>>()?;
        pairs
            .par_iter()
            .map(|&(i, j)| {
                let (d, a) = fenchel::sup_distance_conj(&conj[i], &conj[j]);
                DistanceBracket::exact(d, types[i].base.n(&a))
            })
            .collect()
    } else {
        pairs.par_iter().map(|&(i, j)| type_distance(&types[i], &types[j])).collect::<Result<_>>()?
    };
    let zero = DistanceBracket::exact(Q::zero(), Q::zero());
    let mut out = vec![vec![zero; t]; t];
    for ((i, j), b) in pairs.into_iter().zip(found) {
        out[i][j] = b.clone();
        out[j][i] = b;
    }
    Ok(out)
}

/// The LP route for any number of variables, returning the maximizing `z`.
pub fn lp_distance(xi: &TypePres, zeta: &TypePres) -> Result<(Q, Vector)> {
    if !xi.same_base(zeta) {
        return Err(Error::BaseMismatch);
    }
    let (d, n) = (xi.base.dim, xi.nvars);
    let mut best = (Q::zero(), vec![Q::zero(); d + n]);
    if n == 0 {
        return Ok(best);
    }
    let with_zero = |s: &Seminorm| -> Vec<Vector> {
        if s.facets.is_empty() {
            vec![vec![Q::zero(); d + n]]
        } else {
            s.facets.clone()
        }
    };
    let (fx, fz) = (with_zero(&xi.ext), with_zero(&zeta.ext));
    // the difference is even in z, so the first variable's sign is fixed
    for mask in 0..(1u32 << (n - 1)) {
        let sign: Vec<Q> = (0..n).map(|i| if i > 0 && mask >> (i - 1) & 1 == 1 { -Q::one() } else { Q::one() }).collect();
        // variables (a, t, u); z = (a, sign·t)
        let lift = |l: &Vector| -> Vector {
            let mut r = l[..d].to_vec();
            r.extend((0..n).map(|i| &l[d + i] * &sign[i]));
            r
        };
        for (p, q) in [(&fx, &fz), (&fz, &fx)] {
            for pi in p {
                let mut obj = lift(pi);
                obj.push(-Q::one());
                let mut lp = Lp::new(d + n + 1).maximize(obj);
                for rho in q {
                    let mut row = lift(rho);
                    row.push(-Q::one());
                    lp.le(row, Q::zero());
                }
                for i in 0..n {
                    lp.le((0..=d + n).map(|k| if k == d + i { -Q::one() } else { Q::zero() }).collect(), Q::zero());
                }
                lp.eq((0..=d + n).map(|k| if k >= d && k < d + n { Q::one() } else { Q::zero() }).collect(), Q::one());
                match lp.solve() {
                    Ok(sol) if sol.value > best.0 => {
                        let mut z = sol.point[..d].to_vec();
                        z.extend((0..n).map(|i| &sol.point[d + i] * &sign[i]));
                        best = (sol.value, z);
                    }
                    Ok(_) => {}
                    Err(LpError::Unbounded) => return Err(Error::Unbounded),
                    Err(LpError::Infeasible) => unreachable!("simplex of coefficients is nonempty"),
                }
            }
        }
    }
    Ok(best)
}

/// Integer index vectors `k` with `‖h·k‖ ≤ r` in `g`, found with a floating
/// prefilter; callers recheck membership exactly before relying on a point.
fn lattice_indices(g: &Space, r: &Q, h: &Q, cap: usize) -> Result<Vec<Vec<i64>>> {
    if !h.is_positive() {
        return Err(Error::Invalid("net step must be positive".into()));
    }
    let n = g.dim;
    let bounds: Vec<i64> = (0..n)
        .map(|i| {
            let extent = g.vertices().iter().map(|w| w[i].abs()).max().unwrap_or_else(Q::zero) * r / h;
            extent.floor().to_integer().try_into().unwrap_or(i64::MAX)
        })
        .collect();
    let mut count: usize = 1;
    for b in &bounds {
        count = count.saturating_mul(2 * (*b).min(i64::MAX / 4) as usize + 1);
    }
    if count > cap {
        return Err(Error::GridTooLarge(count));
    }
    let facets = FloatBall::new(g);
    let limit = to_f64(&(r / h)) + 1e-9;
    let mut out = Vec::new();
    let mut idx: Vec<i64> = bounds.iter().map(|b| -b).collect();
    loop {
        let x: Vec<f64> = idx.iter().map(|&k| k as f64).collect();
        if facets.gauge(&x) <= limit {
            out.push(idx.clone());
        }
        let mut i = 0;
        loop {
            if i == n {
                return Ok(out);
            }
            if idx[i] < bounds[i] {
                idx[i] += 1;
                break;
            }
            idx[i] = -bounds[i];
            i += 1;
        }
    }
}

/// Lattice points of step `h` in the closed ball of radius `r` of `g`.
pub fn lattice_ball(g: &Space, r: &Q, h: &Q, cap: usize) -> Result<Vec<Vector>> {
    Ok(lattice_indices(g, r, h, cap)?
        .into_iter()
        .map(|k| k.iter().map(|&x| h * Q::from_integer(x.into())).collect::<Vector>())
        .filter(|c| g.n(c) <= *r)
        .collect())
}

/// Facet functionals in floating point, for ranking only.
struct FloatBall(Vec<Vec<f64>>);

impl FloatBall {
    fn new(g: &Space) -> Self {
        FloatBall(g.dual_vertices().iter().map(|l| l.iter().map(to_f64).collect()).collect())
    }

    fn gauge(&self, x: &[f64]) -> f64 {
        self.0.iter().map(|l| l.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()).fold(0.0, f64::max)
    }
}

/// Largest grid-point count the net searches will enumerate.
pub const NET_CAP: usize = 2_000_000;

/// For each 1-type sample, the distance to the nearest type realized by a net
/// point of `G`; returns the largest of these.
pub fn realized_density_defect(incl: &LinMap, samples: &[TypePres], net_step: &Q) -> Result<Q> {
    let incl = incl.clone().require_isometric()?;
    let per: Vec<Q> = samples
        .par_iter()
        .map(|xi| nearest_realized(&incl, xi, net_step).map(|(d, _)| d))
        .collect::<Result<_>>()?;
    Ok(per.into_iter().max().unwrap_or_else(Q::zero))
}

/// The net point of `G` whose type over `E` is closest to `ξ`, with that distance.
///
/// Net points are visited in order of a floating lower bound on the distance
/// (`|‖c − a‖ − ‖x − a‖^ξ|` at a few parameters `a`), and the search stops once
/// that bound clears the best exact distance by a safe margin.
pub fn nearest_realized(incl: &LinMap, xi: &TypePres, net_step: &Q) -> Result<(Q, Vector)> {
    if xi.nvars != 1 {
        return Err(Error::WrongArity { expected: 1, got: xi.nvars });
    }
    if xi.base.dim != incl.source.dim || xi.base.ball != incl.source.ball {
        return Err(Error::BaseMismatch);
    }
    let incl = incl.clone().require_isometric()?;
    let g = &incl.target;
    let d = xi.base.dim;
    let f = KFn::from_type(xi)?;
    let radius = xi.ext.value(&unit(d + 1, d)) + Q::one();
    let net = lattice_indices(g, &radius, net_step, NET_CAP)?;
    let fball = FloatBall::new(g);
    let h = to_f64(net_step);
    let probes: Vec<(Vec<f64>, f64)> = std::iter::once(vec![Q::zero(); d])
        .chain(xi.base.vertices().iter().cloned())
        .map(|a| (incl.apply(&a).iter().map(to_f64).collect(), to_f64(&f.eval(&a))))
        .collect();
    let mut ranked: Vec<(f64, usize)> = net
        .par_iter()
        .enumerate()
        .map(|(i, k)| {
            let lb = probes
                .iter()
                .map(|(p, fa)| {
                    let x: Vec<f64> = k.iter().zip(p).map(|(&ki, pi)| ki as f64 * h - pi).collect();
                    (fball.gauge(&x) - fa).abs()
                })
                .fold(0.0, f64::max);
            (lb, i)
        })
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut best: Option<(Q, Vector)> = None;
    for (lb, i) in ranked {
        if best.as_ref().is_some_and(|(b, _)| lb > to_f64(b) + 1e-6) {
            break;
        }
        let c: Vector = net[i].iter().map(|&x| net_step * Q::from_integer(x.into())).collect();
        if g.n(&c) > radius {
            continue;
        }
        let other = KFn::from_type(&tp(&incl, &[c.clone()])?)?;
        let (dist, _) = fenchel::sup_distance(&f, &other);
        if best.as_ref().map_or(true, |(b, _)| dist < *b) {
            best = Some((dist, c));
        }
    }
    best.ok_or(Error::GridTooLarge(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::rational::{frac, q, qvec};
    use crate::space::find_isometry;

    fn over_e1(f: &Space, a: Vector) -> TypePres {
        let (_, incl) = f.subspace(&[qvec(&[1, 0])]).unwrap();
        tp(&incl, &[a]).unwrap()
    }

    #[test]
    fn tp_in_linf2() {
        let xi = over_e1(&Space::ell_inf(2), qvec(&[0, 1]));
        assert_eq!(xi.ext.facets, Space::ell_inf(2).dual_vertices().to_vec());
        assert_eq!(xi.norm(&qvec(&[3]), &qvec(&[1])).unwrap(), q(3));
        assert_eq!(xi.kernel_dims(), 0);
    }

    #[test]
    fn zero_tuple_has_kernel() {
        let xi = over_e1(&Space::ell_inf(2), qvec(&[0, 0]));
        assert_eq!(xi.kernel_dims(), 1);
        assert_eq!(xi.norm(&qvec(&[2]), &qvec(&[5])).unwrap(), q(2));
        let g = generated_space(&xi).unwrap();
        assert_eq!(g.space.dim, 1);
    }

    #[test]
    fn point_of_base_generates_base() {
        let xi = over_e1(&Space::ell_inf(2), qvec(&[1, 0]));
        let g = generated_space(&xi).unwrap();
        assert_eq!(g.space.ball, Space::ell_inf(1).ball);
        assert_eq!(g.generators, vec![qvec(&[1])]);
    }

    #[test]
    fn l1_sum_type_generates_l1() {
        let xi = over_e1(&Space::ell_1(2), qvec(&[0, 1]));
        let g = generated_space(&xi).unwrap();
        assert!(find_isometry(&g.space, &Space::ell_1(2)).is_some());
        let back = tp(&g.incl, &g.generators).unwrap();
        assert_eq!(back, xi);
    }

    #[test]
    fn validation_rejects_short_seminorm() {
        let e = Space::ell_inf(1);
        assert!(TypePres::new(e.clone(), 1, &[vec![frac(1, 2), q(1)]]).is_err());
        assert!(TypePres::new(e, 1, &[qvec(&[2, 0]), qvec(&[1, 0])]).is_err());
    }

    #[test]
    fn pullback_examples() {
        let xi = over_e1(&Space::ell_1(2), qvec(&[0, 1]));
        let id = vec![qvec(&[1, 0]), qvec(&[0, 1])];
        assert_eq!(pullback(&xi, &id).unwrap(), xi);
        let dbl = pullback(&xi, &[qvec(&[1, 0]), qvec(&[0, 2])]).unwrap();
        assert_eq!(dbl.norm(&qvec(&[0]), &qvec(&[1])).unwrap(), q(2));
        let inside = pullback(&xi, &[qvec(&[1, 0]), vec![frac(1, 2), q(0)]]).unwrap();
        assert_eq!(inside.ext, realized(&Space::ell_inf(1), &[frac(1, 2)]).unwrap().ext);
        assert_eq!(pullback(&xi, &[qvec(&[2, 0]), qvec(&[0, 1])]), Err(Error::NotExtendingIdentity));
    }

    #[test]
    fn restriction_to_line() {
        let f = Space::ell_inf(2);
        let xi = tp(&LinMap::identity(&f), &[qvec(&[0, 1])]).unwrap();
        let (_, incl) = f.subspace(&[qvec(&[1, 0])]).unwrap();
        let r = restrict_params(&xi, &incl).unwrap();
        assert_eq!(r, over_e1(&f, qvec(&[0, 1])));
        for a in [-3, -1, 0, 1, 2] {
            assert_eq!(r.norm(&qvec(&[a]), &qvec(&[-1])).unwrap(), q(a.abs().max(1)));
        }
        let (_, zero) = f.subspace(&[]).unwrap();
        let r0 = restrict_params(&xi, &zero).unwrap();
        assert_eq!(r0.norm(&[], &qvec(&[3])).unwrap(), q(3));
    }

    #[test]
    fn worked_distance() {
        let xi = over_e1(&Space::ell_1(2), qvec(&[0, 1]));
        let zeta = over_e1(&Space::ell_inf(2), qvec(&[0, 1]));
        let b = type_distance(&xi, &zeta).unwrap();
        assert!(b.exact);
        assert_eq!(b.hi, q(1));
        assert_eq!(lp_distance(&xi, &zeta).unwrap().0, q(1));
        assert_eq!(type_distance(&xi, &xi).unwrap().hi, q(0));
    }

    #[test]
    fn distance_over_zero() {
        let z = Space::trivial();
        let t = |r: i64| TypePres::new(z.clone(), 1, &[qvec(&[r])]).unwrap();
        assert_eq!(type_distance(&t(3), &t(1)).unwrap().hi, q(2));
        assert_eq!(lp_distance(&t(3), &t(0)).unwrap().0, q(3));
    }

    #[test]
    fn density_defect_on_square() {
        let g = Space::ell_inf(2);
        let (_, incl) = g.subspace(&[qvec(&[1, 0])]).unwrap();
        let xi = over_e1(&g, qvec(&[0, 1]));
        let d = realized_density_defect(&incl, &[xi.clone()], &frac(1, 2)).unwrap();
        assert_eq!(d, q(0));
        let (e, id) = (incl.source.clone(), LinMap::identity(&incl.source));
        let far = over_e1(&Space::ell_1(2), qvec(&[0, 1]));
        assert_eq!(far.base, e);
        assert!(realized_density_defect(&id, &[far], &frac(1, 2)).unwrap() >= q(1));
    }
}
