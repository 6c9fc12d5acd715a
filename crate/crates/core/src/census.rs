//! Counting experiments: separated type families over near-Euclidean bases,
//! finite nets of Katětov functions over polyhedral bases, and a probe of how
//! many sampled types are isolated.

use crate::error::{Error, Result};
use crate::fenchel::{is_isolated, is_katetov, ConjFn, Isolation, KFn};
use crate::kernel::lp::Lp;
use crate::kernel::rational::{dot, fmt_q, round_to, scale, serde_mat, serde_q, to_f64, zeros, Vector, Q};
use crate::space::Space;
use crate::typespace::{lattice_ball, pairwise_distances, TypePres};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Where to look for anchors `v_n` with `‖v_n ± v_m‖ ≤ ‖v_n‖ + ‖v_m‖ − 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorSearch {
    Given(#[serde(with = "serde_mat")] Vec<Vector>),
    /// `radius·(cos(nθ), sin(nθ))` for `n = 1..=count`, rounded to `1/denom`,
    /// placed in the first two coordinates.
    Spiral {
        radius: i64,
        #[serde(with = "serde_q")]
        turn: Q,
        count: usize,
        denom: i64,
    },
    /// Every integer point of the cube `[-radius, radius]^d`, up to sign.
    Grid { radius: i64 },
}

impl Default for AnchorSearch {
    fn default() -> Self {
        AnchorSearch::Spiral { radius: 10, turn: Q::new(7.into(), 10.into()), count: 32, denom: 1000 }
    }
}

impl AnchorSearch {
    pub fn candidates(&self, dim: usize) -> Vec<Vector> {
        match self {
            AnchorSearch::Given(v) => v.clone(),
            AnchorSearch::Spiral { radius, turn, count, denom } => (1..=*count)
                .map(|n| {
                    let t = to_f64(turn) * n as f64;
                    let mut v = zeros(dim);
                    v[0] = round_to(*radius as f64 * t.cos(), *denom);
                    if dim > 1 {
                        v[1] = round_to(*radius as f64 * t.sin(), *denom);
                    }
                    v
                })
                .collect(),
            AnchorSearch::Grid { radius } => {
                let side = (2 * radius + 1) as usize;
                let total = side.pow(dim as u32);
                (0..total)
                    .map(|mut k| {
                        (0..dim)
                            .map(|_| {
                                let c = (k % side) as i64 - radius;
                                k /= side;
                                Q::from_integer(c.into())
                            })
                            .collect::<Vector>()
                    })
                    .filter(|v| v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_positive()))
                    .collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparatedFamily {
    pub base: Space,
    #[serde(with = "serde_mat")]
    pub anchors: Vec<Vector>,
    pub sign_patterns: Vec<Vec<i8>>,
    /// Functionals embedding the base into `ℓ∞^N`.
    #[serde(with = "serde_mat")]
    pub coords: Vec<Vector>,
    /// The realizing point in `ℓ∞^N` for each sign pattern.
    #[serde(with = "serde_mat")]
    pub points: Vec<Vector>,
    pub types: Vec<TypePres>,
    #[serde(with = "serde_mat")]
    pub pairwise_lo: Vec<Vector>,
}

fn compatible(e: &Space, v: &[Q], nv: &Q, w: &[Q], nw: &Q) -> bool {
    let bound = nv + nw - Q::one();
    let plus: Vector = v.iter().zip(w).map(|(a, b)| a + b).collect();
    let minus: Vector = v.iter().zip(w).map(|(a, b)| a - b).collect();
    e.n(&plus) <= bound && e.n(&minus) <= bound
}

/// The first `m` candidates (in candidate order) that are pairwise compatible
/// and have norm at least 1/2.
pub fn find_anchors(e: &Space, m: usize, cands: &[Vector]) -> Option<Vec<Vector>> {
    let half = Q::new(1.into(), 2.into());
    let pool: Vec<(Vector, Q)> = cands
        .iter()
        .map(|v| (v.clone(), e.n(v)))
        .filter(|(_, n)| *n >= half)
        .collect();
    let k = pool.len();
    let adj: Vec<Vec<bool>> = (0..k)
        .into_par_iter()
        .map(|i| (0..k).map(|j| i != j && compatible(e, &pool[i].0, &pool[i].1, &pool[j].0, &pool[j].1)).collect())
        .collect();
    fn grow(adj: &[Vec<bool>], chosen: &mut Vec<usize>, from: usize, m: usize) -> bool {
        if chosen.len() == m {
            return true;
        }
        for i in from..adj.len() {
            if chosen.iter().all(|&c| adj[c][i]) {
                chosen.push(i);
                if grow(adj, chosen, i + 1, m) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    let mut chosen = Vec::new();
    grow(&adj, &mut chosen, 0, m).then(|| chosen.into_iter().map(|i| pool[i].0.clone()).collect())
}

/// `2^m` types over `e`, pairwise at distance at least 1: the type with signs
/// `ε` puts `x` within `‖v_n‖ − 1/2` of every `ε_n v_n`.
pub fn lindenstrauss_family(e: &Space, m: usize, search: &AnchorSearch) -> Result<SeparatedFamily> {
    if e.dim < 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: e.dim });
    }
    if m >= 16 {
        return Err(Error::Invalid(format!("2^{m} types is too many")));
    }
    let anchors = find_anchors(e, m, &search.candidates(e.dim)).ok_or(Error::NoAnchorsFound)?;
    for (i, v) in anchors.iter().enumerate() {
        for w in &anchors[i + 1..] {
            if !compatible(e, v, &e.n(v), w, &e.n(w)) {
                return Err(Error::Invalid("anchor inequality fails".into()));
            }
        }
    }
    let half = Q::new(1.into(), 2.into());
    let radii: Vec<Q> = anchors.iter().map(|v| e.n(v) - &half).collect();
    let coords: Vec<Vector> = e.dual_vertices().to_vec();
    let sign_patterns: Vec<Vec<i8>> =
        (0..1usize << m).map(|k| (0..m).map(|n| if k >> n & 1 == 0 { 1 } else { -1 }).collect()).collect();
    let mut points = Vec::new();
    let mut types = Vec::new();
    for signs in &sign_patterns {
        let centers: Vec<Vector> =
            anchors.iter().zip(signs).map(|(v, &s)| scale(&Q::from_integer(s.into()), v)).collect();
        let mut x = Vec::with_capacity(coords.len());
        for l in &coords {
            let lo = centers.iter().zip(&radii).map(|(c, r)| dot(l, c) - r).max().unwrap_or_else(Q::zero);
            let hi = centers.iter().zip(&radii).map(|(c, r)| dot(l, c) + r).min().unwrap_or_else(Q::zero);
            if lo > hi {
                return Err(Error::Invalid("coordinate intervals do not meet".into()));
            }
            x.push(lo);
        }
        let f = ell_inf_distance(e, &coords, &x)?;
        for (c, r) in centers.iter().zip(&radii) {
            if f.eval(c) > *r {
                return Err(Error::Invalid(format!("point misses the ball of radius {}", fmt_q(r))));
            }
        }
        types.push(f.to_type()?);
        points.push(x);
    }
    let pairwise_lo: Vec<Vector> =
        pairwise_distances(&types)?.into_iter().map(|row| row.into_iter().map(|b| b.lo).collect()).collect();
    Ok(SeparatedFamily { base: e.clone(), anchors, sign_patterns, coords, points, types, pairwise_lo })
}

/// `a ↦ max_j |x_j − λ_j·a|`.
fn ell_inf_distance(e: &Space, coords: &[Vector], x: &[Q]) -> Result<KFn> {
    let mut pieces = Vec::with_capacity(2 * coords.len());
    for (l, xj) in coords.iter().zip(x) {
        pieces.push((l.clone(), -xj.clone()));
        pieces.push((l.iter().map(|c| -c).collect(), xj.clone()));
    }
    KFn::new(e.clone(), pieces)
}

/// Random 1-types over `e`: distance functions of random points of `ℓ∞^N`
/// with `‖x‖ ≤ r`, where `e` sits in `ℓ∞^N` through its dual vertices and two
/// extra functionals of the dual ball.
pub fn random_types(e: &Space, count: usize, r: &Q, seed: u64) -> Result<Vec<TypePres>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dv = e.dual_vertices();
    let steps = (r * Q::from_integer(4.into())).floor().to_integer().to_i64().unwrap_or(0);
    (0..count)
        .map(|_| {
            if e.dim == 0 {
                let c = Q::new(rng.gen_range(0..=steps).into(), 4.into());
                return KFn::new(e.clone(), vec![(vec![], c)])?.to_type();
            }
            let mut coords = dv.to_vec();
            for _ in 0..2 {
                let (a, b) = (&dv[rng.gen_range(0..dv.len())], &dv[rng.gen_range(0..dv.len())]);
                let t = Q::new(rng.gen_range(0..=8).into(), 8.into());
                coords.push(a.iter().zip(b).map(|(p, q)| &t * p + (Q::one() - &t) * q).collect());
            }
            let x: Vector = coords.iter().map(|_| Q::new(rng.gen_range(-steps..=steps).into(), 4.into())).collect();
            ell_inf_distance(e, &coords, &x)?.to_type()
        })
        .collect()
}

/// `sup_{‖a‖ ≤ r} |f(a) − g(a)|`, one LP per piece.
pub fn truncated_distance(f: &KFn, g: &KFn, r: &Q) -> Q {
    let one_way = |f: &KFn, g: &KFn| -> Q {
        let d = f.space.dim;
        f.pieces
            .iter()
            .map(|(a, b)| {
                let mut obj = a.clone();
                obj.push(-Q::one());
                let mut lp = Lp::new(d + 1).maximize(obj);
                for (c, e) in &g.pieces {
                    let mut row = c.clone();
                    row.push(-Q::one());
                    lp.le(row, -e.clone());
                }
                for l in f.space.dual_vertices() {
                    let mut row = l.clone();
                    row.push(Q::zero());
                    lp.le(row, r.clone());
                }
                lp.solve().expect("bounded region").value + b
            })
            .max()
            .expect("pieces")
    };
    one_way(f, g).max(one_way(g, f)).max(Q::zero())
}

/// Katětov functions whose values at the `ε`-grid points of the `R`-ball lie on
/// the `ε`-grid in `[0, 2R]`, with the grid points as the only breakpoints.
pub fn polyhedral_net(e: &Space, r: &Q, eps: &Q, cap: usize) -> Result<Vec<KFn>> {
    if !eps.is_positive() || r.is_negative() {
        return Err(Error::Invalid("need eps > 0 and R >= 0".into()));
    }
    let nvals = (Q::from_integer(2.into()) * r / eps).floor().to_integer().to_usize().unwrap_or(usize::MAX).saturating_add(1);
    let values = |k: usize| eps * Q::from_integer(k.into());
    let cands: Vec<KFn> = match e.dim {
        0 => (0..nvals).map(|k| KFn::new(e.clone(), vec![(vec![], values(k))])).collect::<Result<_>>()?,
        1 => line_net(e, r, eps, nvals, cap)?,
        _ => generic_net(e, r, eps, nvals, cap)?,
    };
    let mut net: Vec<KFn> = cands
        .into_par_iter()
        .map(|mut f| {
            let ok = is_katetov(&f)?.holds;
            f.katetov_checked = Some(ok);
            Ok(ok.then_some(f))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    net.sort_by(|a, b| a.pieces.cmp(&b.pieces));
    net.dedup_by(|a, b| a.pieces == b.pieces);
    Ok(net)
}

/// On a line the grid values are a start value and nondecreasing slopes in {−1, 0, 1}.
fn line_net(e: &Space, r: &Q, eps: &Q, nvals: usize, cap: usize) -> Result<Vec<KFn>> {
    let v = e.vertices().iter().find(|v| v[0].is_positive()).expect("line vertex").clone();
    let l = e.dual_vertices().iter().find(|l| l[0].is_positive()).expect("line functional").clone();
    let segs = (Q::from_integer(2.into()) * r / eps).floor().to_integer().to_usize().unwrap_or(0);
    let shapes = (segs + 2) * (segs + 1) / 2;
    let count = shapes.saturating_mul(nvals);
    if count > cap {
        return Err(Error::GridTooLarge(count));
    }
    let grid: Vec<Vector> = (0..=segs).map(|k| scale(&(eps * Q::from_integer(k.into()) - r), &v)).collect();
    let mut out = Vec::with_capacity(count);
    for start in 0..nvals {
        for neg_end in 0..=segs {
            for flat_end in neg_end..=segs {
                let slope = |k: usize| if k < neg_end { -1 } else if k < flat_end { 0 } else { 1 };
                let mut vals = vec![eps * Q::from_integer(start.into())];
                for k in 0..segs {
                    let next = vals[k].clone() + eps * Q::from_integer(slope(k).into());
                    vals.push(next);
                }
                let mut pieces = Vec::new();
                let through = |s: i64, p: &Vector, val: &Q| {
                    let a = scale(&Q::from_integer(s.into()), &l);
                    let b = val - dot(&a, p);
                    (a, b)
                };
                pieces.push(through(-1, &grid[0], &vals[0]));
                pieces.push(through(1, &grid[segs], &vals[segs]));
                for k in 0..segs {
                    pieces.push(through(slope(k), &grid[k], &vals[k]));
                }
                out.push(KFn::new(e.clone(), pieces)?);
            }
        }
    }
    Ok(out)
}

/// Every value assignment on the grid, extended as the largest convex
/// function with slopes in the dual ball below the data.
fn generic_net(e: &Space, r: &Q, eps: &Q, nvals: usize, cap: usize) -> Result<Vec<KFn>> {
    let grid = lattice_ball(e, r, eps, cap)?;
    let count = (0..grid.len()).try_fold(1usize, |acc, _| acc.checked_mul(nvals)).unwrap_or(usize::MAX);
    if count > cap {
        return Err(Error::GridTooLarge(count));
    }
    (0..count)
        .into_par_iter()
        .map(|mut k| {
            let points = grid
                .iter()
                .map(|p| {
                    let val = eps * Q::from_integer((k % nvals).into());
                    k /= nvals;
                    (p.clone(), val)
                })
                .collect();
            let conj = ConjFn { space: e.clone(), points };
            let pieces = conj.complex_vertices().into_iter().map(|(lam, s)| (lam, -s)).collect();
            KFn::new(e.clone(), pieces)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    /// Per sample, the index of the nearest net function.
    pub nearest: Vec<usize>,
    /// Per sample, the truncated distance to it.
    #[serde(with = "crate::kernel::rational::serde_vec")]
    pub distance: Vector,
    pub covered: usize,
    pub total: usize,
}

impl Coverage {
    pub fn all_covered(&self) -> bool {
        self.covered == self.total
    }
}

/// Nearest net function to each sample on the `R`-ball; covered when within `ε`.
pub fn coverage(net: &[KFn], samples: &[TypePres], r: &Q, eps: &Q) -> Result<Coverage> {
    if net.is_empty() {
        return Err(Error::Invalid("empty net".into()));
    }
    let space = &net[0].space;
    let probes: Vec<Vector> = lattice_ball(space, r, &(eps / Q::from_integer(8.into())), 1 << 20)?;
    let fprobe = |f: &KFn| -> Vec<f64> { probes.iter().map(|p| to_f64(&f.eval(p))).collect() };
    let net_vals: Vec<Vec<f64>> = net.par_iter().map(fprobe).collect();
    let nearest: Vec<(usize, Q)> = samples
        .par_iter()
        .map(|xi| {
            let g = KFn::from_type(xi)?;
            let gv = fprobe(&g);
            let mut order: Vec<(f64, usize)> = net_vals
                .iter()
                .enumerate()
                .map(|(i, nv)| (nv.iter().zip(&gv).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max), i))
                .collect();
            order.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut best: Option<(usize, Q)> = None;
            for (lb, i) in order {
                if let Some((_, b)) = &best {
                    if lb > to_f64(b) + 1e-9 {
                        break;
                    }
                }
                let d = truncated_distance(&net[i], &g, r);
                if best.as_ref().map_or(true, |(_, b)| d < *b) {
                    best = Some((i, d));
                }
            }
            Ok(best.expect("nonempty net"))
        })
        .collect::<Result<_>>()?;
    let (nearest, distance): (Vec<usize>, Vector) = nearest.into_iter().unzip();
    let covered = distance.iter().filter(|d| *d <= eps).count();
    Ok(Coverage { total: nearest.len(), covered, nearest, distance })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub verdicts: Vec<Isolation>,
    pub isolated: usize,
    pub not_isolated: usize,
    pub inconclusive: usize,
    #[serde(with = "crate::kernel::rational::serde_vec")]
    pub gaps: Vector,
}

pub fn isolated_density_probe(e: &Space, samples: &[TypePres], level: u32) -> Result<ProbeReport> {
    if samples.iter().any(|s| s.base.ball != e.ball) {
        return Err(Error::BaseMismatch);
    }
    let verdicts: Vec<Isolation> = samples.par_iter().map(|s| is_isolated(s, level)).collect::<Result<_>>()?;
    let mut rep = ProbeReport { verdicts: Vec::new(), isolated: 0, not_isolated: 0, inconclusive: 0, gaps: Vec::new() };
    for v in &verdicts {
        match v {
            Isolation::Isolated => rep.isolated += 1,
            Isolation::NotIsolated(g) => {
                rep.not_isolated += 1;
                rep.gaps.push(g.clone());
            }
            Isolation::Inconclusive(_) => rep.inconclusive += 1,
        }
    }
    rep.verdicts = verdicts;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::rational::{frac, q, qvec};
    use crate::space::rounded_polygon;
    use crate::typespace::realized;

    fn line_type(pieces: &[(i64, i64)]) -> TypePres {
        KFn::new(Space::ell_inf(1), pieces.iter().map(|&(a, b)| (qvec(&[a]), q(b))).collect())
            .unwrap()
            .to_type()
            .unwrap()
    }

    #[test]
    fn one_anchor_gives_two_far_types() {
        let e = rounded_polygon(16, 1000).unwrap();
        let fam = lindenstrauss_family(&e, 1, &AnchorSearch::default()).unwrap();
        assert_eq!(fam.types.len(), 2);
        assert!(fam.pairwise_lo[0][1] >= q(1));
    }

    #[test]
    fn square_has_two_anchors_but_not_three() {
        let e = Space::ell_inf(2);
        let grid = AnchorSearch::Grid { radius: 10 };
        assert!(find_anchors(&e, 2, &grid.candidates(2)).is_some());
        assert!(matches!(lindenstrauss_family(&e, 3, &grid), Err(Error::NoAnchorsFound)));
    }

    #[test]
    fn line_is_rejected() {
        assert!(matches!(
            lindenstrauss_family(&Space::ell_inf(1), 1, &AnchorSearch::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn net_covers_max_type() {
        let e = Space::ell_inf(1);
        let net = polyhedral_net(&e, &q(2), &frac(1, 2), 100_000).unwrap();
        let cov = coverage(&net, &[line_type(&[(1, 0), (-1, 0), (0, 1)])], &q(2), &frac(1, 2)).unwrap();
        assert_eq!(cov.distance[0], q(0));
        let huge = coverage(&net, &random_types(&e, 5, &q(2), 1).unwrap(), &q(2), &q(100)).unwrap();
        assert!(huge.all_covered());
    }

    #[test]
    fn net_cap_is_enforced() {
        assert!(matches!(polyhedral_net(&Space::ell_inf(1), &q(2), &frac(1, 2), 10), Err(Error::GridTooLarge(_))));
        assert!(matches!(polyhedral_net(&Space::ell_inf(2), &q(2), &frac(1, 2), 1000), Err(Error::GridTooLarge(_))));
    }

    #[test]
    fn truncated_distance_on_segment() {
        let f = KFn::from_type(&line_type(&[(1, 1), (-1, 1)])).unwrap();
        let g = KFn::from_type(&line_type(&[(1, 0), (-1, 0), (0, 1)])).unwrap();
        assert_eq!(truncated_distance(&f, &g, &q(2)), q(1));
        assert_eq!(truncated_distance(&f, &f, &q(2)), q(0));
    }

    #[test]
    fn probe_counts() {
        let e = Space::ell_inf(1);
        let samples = vec![realized(&e, &qvec(&[1])).unwrap(), line_type(&[(1, 1), (-1, 1)])];
        let rep = isolated_density_probe(&e, &samples, 3).unwrap();
        assert_eq!(rep.isolated + rep.not_isolated + rep.inconclusive, 2);
        assert_eq!(rep.verdicts[0], Isolation::Isolated);
    }
}
