//! Convex Katětov functions, their conjugates, canonical extensions and the
//! boundary maximality test behind type isolation.

use crate::error::{Error, Result};
use crate::kernel::dd::polyhedron_generators;
use crate::kernel::linalg::rank;
use crate::kernel::rational::{dot, fmt_q, fmt_vec, neg, parse_q, unit, zeros, Vector, Q};
use crate::kernel::{Lp, LpError};
use crate::space::Space;
use crate::typespace::{tp, TypePres};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// `f(v) = max_i α_i·v + β_i`, kept in its unique irredundant form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "KFnJson", into = "KFnJson")]
pub struct KFn {
    pub space: Space,
    pub pieces: Vec<(Vector, Q)>,
    /// `None` until [`is_katetov`] has run.
    pub katetov_checked: Option<bool>,
}

#[derive(Serialize, Deserialize)]
struct KFnJson {
    space: Space,
    pieces: Vec<Vec<String>>,
}

impl From<KFn> for KFnJson {
    fn from(f: KFn) -> Self {
        let pieces = f
            .pieces
            .iter()
            .map(|(a, b)| a.iter().chain(std::iter::once(b)).map(fmt_q).collect())
            .collect();
        KFnJson { space: f.space, pieces }
    }
}

impl TryFrom<KFnJson> for KFn {
    type Error = String;
    fn try_from(j: KFnJson) -> std::result::Result<Self, String> {
        let mut pieces = Vec::new();
        for row in j.pieces {
            let mut v: Vector = row.iter().map(|s| parse_q(s).ok_or(format!("bad rational {s}"))).collect::<std::result::Result<_, _>>()?;
            let b = v.pop().ok_or("empty piece")?;
            pieces.push((v, b));
        }
        KFn::new(j.space, pieces).map_err(|e| e.to_string())
    }
}

impl KFn {
    pub fn new(space: Space, pieces: Vec<(Vector, Q)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Invalid("function has no pieces".into()));
        }
        for (a, _) in &pieces {
            if a.len() != space.dim {
                return Err(Error::DimensionMismatch { expected: space.dim, got: a.len() });
            }
        }
        Ok(KFn { pieces: prune(&pieces), space, katetov_checked: None })
    }

    /// `a ↦ ‖x − a‖^ξ` for a 1-type `ξ`.
    pub fn from_type(xi: &TypePres) -> Result<Self> {
        if xi.nvars != 1 {
            return Err(Error::WrongArity { expected: 1, got: xi.nvars });
        }
        let pieces: Vec<(Vector, Q)> = if xi.ext.facets.is_empty() {
            vec![(zeros(xi.base.dim), Q::zero())]
        } else {
            xi.split().map(|(le, lx)| (neg(le), lx[0].clone())).collect()
        };
        let mut f = KFn::new(xi.base.clone(), pieces)?;
        f.katetov_checked = Some(true);
        Ok(f)
    }

    /// The 1-type with `‖x − a‖ = f(a)`.
    pub fn to_type(&self) -> Result<TypePres> {
        let rep = is_katetov(self)?;
        if !rep.holds {
            return Err(Error::NotKatetov(rep.reason.unwrap_or_default()));
        }
        let fns: Vec<Vector> = self
            .pieces
            .iter()
            .map(|(a, b)| {
                let mut l = neg(a);
                l.push(b.clone());
                l
            })
            .collect();
        TypePres::new(self.space.clone(), 1, &fns)
    }

    /// Distance to a point of the space.
    pub fn distance_to(space: &Space, u: &[Q]) -> Self {
        let pieces = space.dual_vertices().iter().map(|l| (l.clone(), -dot(l, u))).collect();
        let mut f = KFn::new(space.clone(), pieces).expect("dual vertices");
        if space.dim == 0 {
            f = KFn::new(space.clone(), vec![(vec![], Q::zero())]).expect("constant");
        }
        f.katetov_checked = Some(true);
        f
    }

    pub fn eval(&self, v: &[Q]) -> Q {
        self.pieces.iter().map(|(a, b)| dot(a, v) + b).max().expect("nonempty")
    }

    /// `f*(λ)` by linear programming; `None` when `λ` is outside the domain.
    pub fn conjugate_lp(&self, lambda: &[Q]) -> Option<Q> {
        let d = self.space.dim;
        let mut obj = lambda.to_vec();
        obj.push(-Q::one());
        let mut lp = Lp::new(d + 1).maximize(obj);
        for (a, b) in &self.pieces {
            let mut row = a.clone();
            row.push(-Q::one());
            lp.le(row, -b.clone());
        }
        match lp.solve() {
            Ok(s) => Some(s.value),
            Err(LpError::Unbounded) => None,
            Err(LpError::Infeasible) => unreachable!("epigraph is nonempty"),
        }
    }
}

/// Keeps the largest offset per slope, then drops pieces nowhere strictly on top.
fn prune(pieces: &[(Vector, Q)]) -> Vec<(Vector, Q)> {
    let mut sorted = pieces.to_vec();
    sorted.sort_by(|x, y| x.0.cmp(&y.0).then(y.1.cmp(&x.1)));
    sorted.dedup_by(|later, first| later.0 == first.0);
    if sorted.len() > 1 {
        let rows: Vec<(Vector, Q)> = sorted
            .iter()
            .map(|(a, b)| {
                let mut r = a.clone();
                r.push(-Q::one());
                (r, -b.clone())
            })
            .collect();
        if let Some(keep) = crate::kernel::dd::facet_rows(&rows, sorted[0].0.len() + 1) {
            return sorted.into_iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| p).collect();
        }
    }
    let mut keep = vec![true; sorted.len()];
    for i in 0..sorted.len() {
        if keep.iter().filter(|&&k| k).count() == 1 {
            break;
        }
        let (ai, bi) = &sorted[i];
        let d = ai.len();
        let mut obj = ai.clone();
        obj.push(-Q::one());
        let mut lp = Lp::new(d + 1).maximize(obj);
        for (j, (aj, bj)) in sorted.iter().enumerate() {
            if j != i && keep[j] {
                let mut row = aj.clone();
                row.push(-Q::one());
                lp.le(row, -bj.clone());
            }
        }
        let on_top = match lp.solve() {
            Ok(s) => (s.value + bi).is_positive(),
            Err(_) => true,
        };
        keep[i] = on_top;
    }
    sorted.into_iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| p).collect()
}

/// `f*` on the dual ball, as `λ ↦ max_k λ·v_k − c_k` over the vertices
/// `(v_k, c_k)` of the epigraph of `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjFn {
    pub space: Space,
    pub points: Vec<(Vector, Q)>,
}

pub fn conjugate(f: &KFn) -> Result<ConjFn> {
    let d = f.space.dim;
    let rows: Vec<(Vector, Q)> = f
        .pieces
        .iter()
        .map(|(a, b)| {
            let mut r = a.clone();
            r.push(-Q::one());
            (r, -b.clone())
        })
        .collect();
    let (verts, _) = polyhedron_generators(&rows, d + 1)
        .ok_or_else(|| Error::NotKatetov("slopes do not span the dual space".into()))?;
    let points = verts.into_iter().map(|mut v| {
        let c = v.pop().expect("height");
        (v, c)
    });
    Ok(ConjFn { space: f.space.clone(), points: points.collect() })
}

impl ConjFn {
    pub fn value(&self, lambda: &[Q]) -> Q {
        self.argmax(lambda).1
    }

    /// Value with a point of the space where the supremum is attained.
    pub fn argmax(&self, lambda: &[Q]) -> (&Vector, Q) {
        self.points
            .iter()
            .map(|(v, c)| (v, dot(lambda, v) - c))
            .max_by(|x, y| x.1.cmp(&y.1))
            .expect("epigraph has a vertex")
    }

    /// Vertices of the linearity complex of `f*` on the dual ball, with values.
    pub fn complex_vertices(&self) -> Vec<(Vector, Q)> {
        let d = self.space.dim;
        let mut rows: Vec<(Vector, Q)> = self
            .space
            .vertices()
            .iter()
            .map(|w| {
                let mut r = w.clone();
                r.push(Q::zero());
                (r, Q::one())
            })
            .collect();
        for (v, c) in &self.points {
            let mut r = v.clone();
            r.push(-Q::one());
            rows.push((r, c.clone()));
        }
        let (verts, _) = polyhedron_generators(&rows, d + 1).expect("dual ball is bounded");
        verts
            .into_iter()
            .map(|mut v| {
                let s = v.pop().expect("height");
                (v, s)
            })
            .collect()
    }

    /// `f**(v) = max over the dual ball of λ·v − f*(λ)`, by linear programming.
    pub fn biconjugate(&self, v: &[Q]) -> Q {
        let d = self.space.dim;
        let mut obj = v.to_vec();
        obj.push(-Q::one());
        let mut lp = Lp::new(d + 1).maximize(obj);
        for w in self.space.vertices() {
            let mut r = w.clone();
            r.push(Q::zero());
            lp.le(r, Q::one());
        }
        for (p, c) in &self.points {
            let mut r = p.clone();
            r.push(-Q::one());
            lp.le(r, c.clone());
        }
        lp.solve().expect("compact domain").value
    }
}

/// `sup |f − g|` computed as `max |f* − g*|` over the dual ball, with a point
/// of the space where the supremum is attained.
pub fn sup_distance(f: &KFn, g: &KFn) -> (Q, Vector) {
    let (fs, gs) = (Conjugated::new(f).expect("Katetov"), Conjugated::new(g).expect("Katetov"));
    sup_distance_conj(&fs, &gs)
}

/// `f*` together with the vertices of its linearity complex, for repeated
/// distance queries against the same function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conjugated {
    pub conj: ConjFn,
    pub complex: Vec<Vector>,
}

impl Conjugated {
    pub fn new(f: &KFn) -> Result<Self> {
        let conj = conjugate(f)?;
        let complex = conj.complex_vertices().into_iter().map(|(l, _)| l).collect();
        Ok(Conjugated { conj, complex })
    }
}

/// [`sup_distance`] on precomputed conjugates.
pub fn sup_distance_conj(fs: &Conjugated, gs: &Conjugated) -> (Q, Vector) {
    let mut best = (Q::zero(), zeros(fs.conj.space.dim));
    for lam in fs.complex.iter().chain(&gs.complex) {
        let (va, fv) = fs.conj.argmax(lam);
        let (vb, gv) = gs.conj.argmax(lam);
        let (gap, at) = if fv >= gv { (&fv - &gv, va) } else { (&gv - &fv, vb) };
        if gap > best.0 {
            best = (gap, at.clone());
        }
    }
    best
}

/// `sup (g − f)` directly: the max over pieces `(α, β)` of `g` of `f*(α) + β`.
pub fn sup_excess(f: &KFn, g: &KFn) -> Option<Q> {
    g.pieces.iter().map(|(a, b)| f.conjugate_lp(a).map(|c| c + b)).collect::<Option<Vec<_>>>().map(|v| v.into_iter().max().expect("nonempty"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KatetovReport {
    pub holds: bool,
    /// `max f*(λ) + f*(−λ)` over the dual ball, when the domain check passed.
    #[serde(with = "crate::kernel::rational::serde_opt_q", default)]
    pub antipode_max: Option<Q>,
    pub reason: Option<String>,
}

/// Slopes in the dual ball, every dual vertex among the slopes (so the
/// conjugate's domain is exactly the ball), and `f*(λ) + f*(−λ) ≤ 0`, which as a
/// convex function of `λ` is checked at the dual vertices.
pub fn is_katetov(f: &KFn) -> Result<KatetovReport> {
    let fail = |r: String| Ok(KatetovReport { holds: false, antipode_max: None, reason: Some(r) });
    for (a, _) in &f.pieces {
        if f.space.ball.dual_gauge(a) > Q::one() {
            return fail(format!("slope {} has dual norm above 1", fmt_vec(a)));
        }
    }
    for w in f.space.dual_vertices() {
        if !f.pieces.iter().any(|(a, _)| a == w) {
            return fail(format!("dual vertex {} is not a slope", fmt_vec(w)));
        }
    }
    let fs = conjugate(f)?;
    let worst = if f.space.dim == 0 {
        fs.value(&[]) * Q::from_integer(2.into())
    } else {
        f.space.dual_vertices().iter().map(|w| fs.value(w) + fs.value(&neg(w))).max().expect("dual vertices")
    };
    let holds = !worst.is_positive();
    let reason = (!holds).then(|| format!("antipode sum reaches {}", fmt_q(&worst)));
    Ok(KatetovReport { holds, antipode_max: Some(worst), reason })
}

/// A convex polyhedral region `{x : a_i·x ≤ b_i}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pub rows: Vec<(Vector, Q)>,
}

impl Region {
    pub fn point(u: &[Q]) -> Self {
        let n = u.len();
        let mut rows = Vec::new();
        for i in 0..n {
            rows.push((unit(n, i), u[i].clone()));
            rows.push((neg(&unit(n, i)), -u[i].clone()));
        }
        Region { rows }
    }

    /// The closed ball of radius `r` about `c`.
    pub fn ball(space: &Space, c: &[Q], r: &Q) -> Self {
        let rows = space.dual_vertices().iter().map(|l| (l.clone(), dot(l, c) + r)).collect();
        Region { rows }
    }
}

/// `f̃(y) = inf_{x ∈ X} f(x) + ‖y − x‖`, through its conjugate: `f̃* = (f + ι_X)*`
/// on the dual ball, and `f̃` is read off the vertices of that conjugate's epigraph.
pub fn katetov_extend(f: &KFn, region: &Region) -> Result<KFn> {
    let d = f.space.dim;
    let mut rows: Vec<(Vector, Q)> = region
        .rows
        .iter()
        .map(|(a, b)| {
            let mut r = a.clone();
            r.push(Q::zero());
            (r, b.clone())
        })
        .collect();
    for (a, b) in &f.pieces {
        let mut r = a.clone();
        r.push(-Q::one());
        rows.push((r, -b.clone()));
    }
    if d == 0 {
        return Ok(f.clone());
    }
    let (verts, _) =
        polyhedron_generators(&rows, d + 1).ok_or_else(|| Error::NotKatetov("epigraph contains a line".into()))?;
    if verts.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let points: Vec<(Vector, Q)> = verts
        .into_iter()
        .map(|mut v| {
            let c = v.pop().expect("height");
            (v, c)
        })
        .collect();
    let ext_conj = ConjFn { space: f.space.clone(), points };
    let pieces = ext_conj.complex_vertices().into_iter().map(|(lam, s)| (lam, -s)).collect();
    KFn::new(f.space.clone(), pieces)
}

/// `sup (f̃ − f)` for the extension of `f` restricted to `X`.
pub fn locality_gap(f: &KFn, region: &Region) -> Result<Q> {
    let ext = katetov_extend(f, region)?;
    let fs = conjugate(f)?;
    Ok(ext.pieces.iter().map(|(a, b)| fs.value(a) + b).max().expect("nonempty").max(Q::zero()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Violated,
    NoViolationFound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxTestReport {
    pub verdict: Verdict,
    #[serde(with = "crate::kernel::rational::serde_q")]
    pub gap: Q,
    pub witness_g: Option<KFn>,
    #[serde(with = "crate::kernel::rational::serde_opt_vec", default)]
    pub witness_lambda: Option<Vector>,
    pub level: u32,
}

/// Points of the dual sphere: on each facet, the barycentric combinations of
/// its vertices with weights in `2^{1−level} Z`.
pub fn sphere_points(space: &Space, level: u32) -> Vec<Vector> {
    let denom = 1i64 << (level.max(1) - 1).min(20);
    let mut out: Vec<Vector> = Vec::new();
    for w in space.vertices() {
        let face: Vec<&Vector> = space.dual_vertices().iter().filter(|m| dot(w, m) == Q::one()).collect();
        for weights in compositions(denom, face.len()) {
            let mut p = zeros(space.dim);
            for (k, m) in weights.iter().zip(&face) {
                if *k != 0 {
                    let c = Q::new((*k).into(), denom.into());
                    for (x, y) in p.iter_mut().zip(m.iter()) {
                        *x += &c * y;
                    }
                }
            }
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    out
}

/// All ways to write `total` as an ordered sum of `parts` nonnegative integers.
fn compositions(total: i64, parts: usize) -> Vec<Vec<i64>> {
    if parts == 0 {
        return Vec::new();
    }
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// The Katětov function below `f` that pushes `g*(λ)` up to the antipodal
/// bound `−f*(−λ)`; its slopes are the dual vertices and `±λ`.
fn lift_at(f: &KFn, fs: &ConjFn, lambda: &Vector) -> Result<KFn> {
    let mlam = neg(lambda);
    let mut slopes: Vec<Vector> = f.space.dual_vertices().to_vec();
    for s in [lambda, &mlam] {
        if !slopes.contains(s) {
            slopes.push(s.clone());
        }
    }
    let pieces = slopes
        .into_iter()
        .map(|s| {
            let h = if &s == lambda {
                -fs.value(&mlam)
            } else if s == mlam {
                fs.value(&mlam)
            } else {
                fs.value(&s)
            };
            (s, -h)
        })
        .collect();
    KFn::new(f.space.clone(), pieces)
}

/// Searches the dual sphere for `λ` and Katětov `g ≤ f` with `g*(λ) > f*(λ) + r`.
pub fn boundary_max_test(f: &KFn, r: &Q, level: u32) -> Result<MaxTestReport> {
    let rep = is_katetov(f)?;
    if !rep.holds {
        return Err(Error::NotKatetov(rep.reason.unwrap_or_default()));
    }
    let fs = conjugate(f)?;
    let cands = sphere_points(&f.space, level);
    let found: Vec<(Q, KFn, Vector)> = cands
        .par_iter()
        .filter(|lam| -fs.value(lam) - fs.value(&neg(lam)) > Q::zero())
        .map(|lam| -> Result<Option<(Q, KFn, Vector)>> {
            let mut g = lift_at(f, &fs, lam)?;
            let grep = is_katetov(&g)?;
            g.katetov_checked = Some(grep.holds);
            if !grep.holds || sup_excess(f, &g).map_or(true, |e| e.is_positive()) {
                return Ok(None);
            }
            let gap = conjugate(&g)?.value(lam) - fs.value(lam);
            Ok(Some((gap, g, lam.clone())))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let best = found.into_iter().fold(None::<(Q, KFn, Vector)>, |acc, x| match acc {
        Some(a) if a.0 >= x.0 => Some(a),
        _ => Some(x),
    });
    Ok(match best {
        Some((gap, g, lam)) if gap > *r => MaxTestReport {
            verdict: Verdict::Violated,
            gap,
            witness_g: Some(g),
            witness_lambda: Some(lam),
            level,
        },
        Some((gap, _, _)) => MaxTestReport {
            verdict: Verdict::NoViolationFound,
            gap: gap.max(Q::zero()),
            witness_g: None,
            witness_lambda: None,
            level,
        },
        None => MaxTestReport { verdict: Verdict::NoViolationFound, gap: Q::zero(), witness_g: None, witness_lambda: None, level },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Isolation {
    Isolated,
    NotIsolated(#[serde(with = "crate::kernel::rational::serde_q")] Q),
    Inconclusive(u32),
}

/// `max −f*(μ) − f*(−μ)` over the dual sphere, one LP per sphere facet.
pub fn antipode_slack(f: &KFn) -> Result<Q> {
    let d = f.space.dim;
    if d == 0 {
        return Ok(Q::zero());
    }
    let fs = conjugate(f)?;
    let mut worst = Q::zero();
    for w in f.space.vertices() {
        // variables (μ, s1, s2)
        let mut obj = zeros(d + 2);
        obj[d] = -Q::one();
        obj[d + 1] = -Q::one();
        let mut lp = Lp::new(d + 2).maximize(obj);
        for (v, c) in &fs.points {
            let mut r1 = v.clone();
            r1.extend([-Q::one(), Q::zero()]);
            lp.le(r1, c.clone());
            let mut r2 = neg(v);
            r2.extend([Q::zero(), -Q::one()]);
            lp.le(r2, c.clone());
        }
        for u in f.space.vertices() {
            let mut r = u.clone();
            r.extend([Q::zero(), Q::zero()]);
            lp.le(r, Q::one());
        }
        let mut face = w.clone();
        face.extend([Q::zero(), Q::zero()]);
        lp.eq(face, Q::one());
        let v = lp.solve().map_err(Error::from)?.value;
        worst = worst.max(v);
    }
    Ok(worst)
}

/// Isolated when the antipode sum of `f*` vanishes on the whole dual sphere;
/// not isolated when the boundary test produces a witness.
pub fn is_isolated(xi: &TypePres, level: u32) -> Result<Isolation> {
    let f = KFn::from_type(xi)?;
    if antipode_slack(&f)?.is_zero() {
        return Ok(Isolation::Isolated);
    }
    let rep = boundary_max_test(&f, &Q::zero(), level)?;
    Ok(match rep.verdict {
        Verdict::Violated => Isolation::NotIsolated(rep.gap),
        Verdict::NoViolationFound => Isolation::Inconclusive(level),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub smooth: bool,
    pub isolation: Isolation,
    pub agree: bool,
}

/// Compares smoothness of `v` in a plane with isolation of the type of `u` over `span v`.
pub fn smooth_isolation_crosscheck(e2: &Space, v: &[Q], u: &[Q], level: u32) -> Result<CrossCheck> {
    if e2.dim != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: e2.dim });
    }
    if v.len() != 2 || u.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: v.len().min(u.len()) });
    }
    if rank(&[v.to_vec(), u.to_vec()]) < 2 {
        return Err(Error::NotABasis);
    }
    let smooth = e2.is_smooth(v)?;
    let (_, incl) = e2.subspace(&[v.to_vec()])?;
    let isolation = is_isolated(&tp(&incl, &[u.to_vec()])?, level)?;
    let agree = matches!((smooth, &isolation), (true, Isolation::Isolated) | (false, Isolation::NotIsolated(_)));
    Ok(CrossCheck { smooth, isolation, agree })
}
