//! Chains of polyhedral spaces grown by realizing types one pushout at a time,
//! with a density defect, forbidden type balls, and an ε-extension certifier.

use crate::amalgam::amalgamate;
use crate::error::{Error, Result};
use crate::kernel::linalg::{inverse, rank};
use crate::kernel::polyball::MAX_DIM;
use crate::kernel::rational::{fmt_q, serde_mat, serde_q, serde_vec, unit, Vector, Q};
use crate::space::{distortion, find_isometry, Isometry, LinMap, Space};
use crate::typespace::{generated_space, nearest_realized, tp, type_distance, TypePres};
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A type realized at some stage: `witness` realizes `ty` over the span of `basis`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub stage: usize,
    #[serde(with = "serde_mat")]
    pub basis: Vec<Vector>,
    pub ty: TypePres,
    #[serde(with = "serde_mat")]
    pub witness: Vec<Vector>,
}

/// A forbidden ball `B(ty, radius)` of types over the first space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Avoid {
    pub ty: TypePres,
    #[serde(with = "serde_q")]
    pub radius: Q,
}

fn realized_lo(av: &TypePres, realized: &TypePres) -> Result<Q> {
    Ok(type_distance(av, realized)?.lo)
}

fn default_avoid_net() -> Q {
    Q::new(1.into(), 2.into())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainState {
    pub spaces: Vec<Space>,
    /// `links[k]: E_k → E_{k+1}`, each the inclusion of the leading coordinates.
    pub links: Vec<LinMap>,
    pub ledger: Vec<LedgerEntry>,
    #[serde(with = "serde_vec")]
    pub defect_history: Vec<Q>,
    #[serde(default)]
    pub avoid: Vec<Avoid>,
    /// Net step used to keep every point of the top space out of the forbidden balls.
    #[serde(with = "serde_q", default = "default_avoid_net")]
    pub avoid_net: Q,
    pub dim_cap: usize,
}

/// A 1-type over the span of `basis` inside `E_stage`, used to measure density.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub stage: usize,
    #[serde(with = "serde_mat")]
    pub basis: Vec<Vector>,
    pub ty: TypePres,
}

impl Sample {
    /// A type over the first space of a chain.
    pub fn over_base(ty: TypePres) -> Self {
        let d = ty.base.dim;
        Sample { stage: 0, basis: (0..d).map(|i| unit(d, i)).collect(), ty }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetParams {
    #[serde(with = "serde_q")]
    pub step: Q,
}

impl Default for NetParams {
    fn default() -> Self {
        NetParams { step: Q::new(1.into(), 2.into()) }
    }
}

impl ChainState {
    pub fn new(e0: Space, dim_cap: usize) -> Result<Self> {
        if dim_cap > MAX_DIM {
            return Err(Error::DimensionTooLarge { got: dim_cap, cap: MAX_DIM });
        }
        if e0.dim > dim_cap {
            return Err(Error::DimensionTooLarge { got: e0.dim, cap: dim_cap });
        }
        Ok(ChainState {
            spaces: vec![e0],
            links: Vec::new(),
            ledger: Vec::new(),
            defect_history: Vec::new(),
            avoid: Vec::new(),
            avoid_net: default_avoid_net(),
            dim_cap,
        })
    }

    pub fn with_avoid(mut self, ty: TypePres, radius: Q) -> Self {
        self.avoid.push(Avoid { ty, radius });
        self
    }

    pub fn top(&self) -> &Space {
        self.spaces.last().expect("nonempty chain")
    }

    pub fn top_stage(&self) -> usize {
        self.spaces.len() - 1
    }

    /// Pushes a vector of `E_stage` up to the top space.
    pub fn lift(&self, stage: usize, v: &[Q]) -> Vector {
        self.links[stage..].iter().fold(v.to_vec(), |x, l| l.apply(&x))
    }

    /// The composite link `E_stage → E_top`.
    pub fn embed(&self, stage: usize) -> Result<LinMap> {
        let s = &self.spaces[stage];
        let cols = (0..s.dim).map(|i| self.lift(stage, &unit(s.dim, i))).collect();
        let mut m = LinMap::new(s.clone(), self.top().clone(), cols)?;
        m.isometry = Isometry::Isometric;
        Ok(m)
    }

    /// Inclusion of a sample's base into the top space.
    pub fn sample_incl(&self, s: &Sample) -> Result<LinMap> {
        let cols = s.basis.iter().map(|b| self.lift(s.stage, b)).collect();
        let mut m = LinMap::new(s.ty.base.clone(), self.top().clone(), cols)?;
        m.isometry = Isometry::Isometric;
        Ok(m)
    }

    /// Realizes `ξ` (a type over `F`) in `E_{k+1} = E_k ⊕_F F[ξ]`, where
    /// `sub: F → E_k` is isometric. Fails without change if the new witness
    /// falls into a forbidden ball or the dimension cap is exceeded.
    pub fn step(&self, sub: &LinMap, xi: &TypePres) -> Result<ChainState> {
        let top = self.top();
        if sub.target.dim != top.dim || sub.target.ball != top.ball {
            return Err(Error::BaseMismatch);
        }
        if xi.base.dim != sub.source.dim || xi.base.ball != sub.source.ball {
            return Err(Error::BaseMismatch);
        }
        let sub = sub.clone().require_isometric()?;
        let gen = generated_space(xi)?;
        let next_dim = top.dim + gen.space.dim - xi.base.dim;
        if next_dim > self.dim_cap {
            return Err(Error::DimensionTooLarge { got: next_dim, cap: self.dim_cap });
        }
        let out = amalgamate(&sub.source, &sub, &gen.incl)?;
        let witness: Vec<Vector> = gen.generators.iter().map(|g| out.g1.apply(g)).collect();
        let base_in_next = self.embed(0)?.then(&out.g0)?;
        for (index, av) in self.avoid.iter().enumerate() {
            if av.ty.nvars != witness.len() || av.ty.base.ball != self.spaces[0].ball {
                continue;
            }
            let realized = tp(&base_in_next, &witness)?;
            let near = if av.ty.nvars == 1 {
                nearest_realized(&base_in_next, &av.ty, &self.avoid_net)?.0
            } else {
                realized_lo(&av.ty, &realized)?
            };
            if near.min(realized_lo(&av.ty, &realized)?) <= av.radius {
                return Err(Error::AvoidanceViolation { index, radius: av.radius.clone() });
            }
        }
        let mut next = self.clone();
        let stage = next.spaces.len();
        next.ledger.push(LedgerEntry {
            stage,
            basis: sub.cols.iter().map(|c| out.g0.apply(c)).collect(),
            ty: xi.clone(),
            witness,
        });
        next.links.push(out.g0);
        next.spaces.push(out.result);
        Ok(next)
    }

    /// Rechecks every link and every ledger witness exactly.
    pub fn verify(&self) -> Result<()> {
        for l in &self.links {
            let mut fresh = l.clone();
            fresh.isometry = Isometry::Unchecked;
            fresh.require_isometric()?;
        }
        for e in &self.ledger {
            let incl = LinMap::new(e.ty.base.clone(), self.spaces[e.stage].clone(), e.basis.clone())?;
            let again = tp(&incl, &e.witness)?;
            if !type_distance(&again, &e.ty)?.hi.is_zero() {
                return Err(Error::Invalid(format!("ledger witness at stage {} does not realize its type", e.stage)));
            }
        }
        Ok(())
    }

    /// Every vector of the chain named by the ledger, lifted to the top, in ledger order.
    fn ledger_vectors(&self) -> Vec<Vec<Vector>> {
        let mut lists = vec![self.embed(0).map(|m| m.cols).unwrap_or_default()];
        for e in &self.ledger {
            lists.push(e.basis.iter().chain(&e.witness).map(|v| self.lift(e.stage, v)).collect());
        }
        lists
    }
}

/// Extension problems `E ⊆ F`, each given by its isometric inclusion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    pub problems: Vec<LinMap>,
}

/// Ten problems with `dim F ≤ 3` over lines, planes and the zero space.
pub fn standard_catalog() -> Catalog {
    use crate::kernel::rational::{frac, qvec};
    use crate::space::hexagon;
    let (linf2, l12, hex) = (Space::ell_inf(2), Space::ell_1(2), hexagon());
    let line = |f: &Space, v: Vector| f.subspace(&[v]).expect("line").1;
    let zero = |f: &Space| f.subspace(&[]).expect("zero").1;
    let problems = vec![
        line(&linf2, qvec(&[1, 0])),
        line(&l12, qvec(&[1, 0])),
        line(&hex, qvec(&[1, 0])),
        line(&l12, vec![frac(1, 2), frac(1, 2)]),
        line(&linf2, qvec(&[1, 1])),
        zero(&linf2),
        zero(&hex),
        zero(&Space::ell_inf(1)),
        Space::ell_inf(3).subspace(&[qvec(&[1, 0, 0]), qvec(&[0, 1, 0])]).expect("plane").1,
        Space::ell_1(3).subspace(&[qvec(&[1, 0, 0]), qvec(&[0, 1, 0])]).expect("plane").1,
    ];
    Catalog { problems }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = combinations(n - 1, k);
    for mut c in combinations(n - 1, k - 1) {
        c.push(n - 1);
        out.push(c);
    }
    out.sort();
    out
}

/// An isometric copy of `e` in the top space spanned by vectors the ledger names.
pub fn find_embedding(cs: &ChainState, e: &Space) -> Option<LinMap> {
    let top = cs.top();
    if e.dim == 0 {
        return LinMap::new(e.clone(), top.clone(), vec![]).ok().map(LinMap::check_isometry);
    }
    for list in cs.ledger_vectors() {
        for pick in combinations(list.len(), e.dim) {
            let vs: Vec<Vector> = pick.iter().map(|&i| list[i].clone()).collect();
            if rank(&vs) < e.dim {
                continue;
            }
            let Ok((s, incl)) = top.subspace(&vs) else { continue };
            if let Some(iso) = find_isometry(e, &s) {
                return iso.then(&incl).ok();
            }
        }
    }
    None
}

/// A problem with `dim F = dim E + 1` after replacing `E = 0` by a line of `F`:
/// the type `ξ` of the extra vector `u` and an embedding `φ` of `E`.
struct Reduction {
    incl: LinMap,
    phi: LinMap,
    u: Option<Vector>,
    xi: Option<TypePres>,
}

fn reduce(cs: &ChainState, problem: &LinMap) -> Result<Option<Reduction>> {
    let f = &problem.target;
    let incl = if problem.source.dim == 0 && f.dim > 0 { f.subspace(&[unit(f.dim, 0)])?.1 } else { problem.clone() };
    let d = incl.source.dim;
    if f.dim > d + 1 {
        return Ok(None);
    }
    let Some(phi) = find_embedding(cs, &incl.source) else { return Ok(None) };
    if f.dim == d {
        return Ok(Some(Reduction { incl, phi, u: None, xi: None }));
    }
    let u = (0..f.dim)
        .map(|i| unit(f.dim, i))
        .find(|v| rank(&incl.cols.iter().cloned().chain([v.clone()]).collect::<Vec<_>>()) == d + 1)
        .expect("completes a basis");
    let xi = tp(&incl, &[u.clone()])?;
    Ok(Some(Reduction { incl, phi, u: Some(u), xi: Some(xi) }))
}

/// `ψ: F → top` with `ψ∘incl = φ` and `ψ(u) = c`.
fn extension(red: &Reduction, c: Option<&Vector>) -> Result<LinMap> {
    let f = &red.incl.target;
    let mut basis = red.incl.cols.clone();
    let mut images = red.phi.cols.clone();
    if let (Some(u), Some(c)) = (&red.u, c) {
        basis.push(u.clone());
        images.push(c.clone());
    }
    let n = f.dim;
    let bm: Vec<Vector> = (0..n).map(|i| basis.iter().map(|b| b[i].clone()).collect()).collect();
    let binv = inverse(&bm).ok_or(Error::NotABasis)?;
    let top = &red.phi.target;
    let cols = (0..n)
        .map(|j| {
            let mut v = vec![Q::zero(); top.dim];
            for (k, img) in images.iter().enumerate() {
                for (x, y) in v.iter_mut().zip(img) {
                    *x += &binv[k][j] * y;
                }
            }
            v
        })
        .collect();
    LinMap::new(f.clone(), top.clone(), cols)
}

/// Samples for the density defect: the types the catalog asks for, over the
/// subspaces where the chain can already place `E`.
pub fn catalog_samples(cs: &ChainState, cat: &Catalog) -> Result<Vec<Sample>> {
    let mut out = Vec::new();
    for p in &cat.problems {
        if let Some(Reduction { phi, xi: Some(xi), .. }) = reduce(cs, p)? {
            out.push(Sample { stage: cs.top_stage(), basis: phi.cols, ty: xi });
        }
    }
    Ok(out)
}

fn defect(cs: &ChainState, samples: &[Sample], net: &NetParams) -> Result<Q> {
    let per: Vec<Q> = samples
        .par_iter()
        .map(|s| Ok(nearest_realized(&cs.sample_incl(s)?, &s.ty, &net.step)?.0))
        .collect::<Result<_>>()?;
    Ok(per.into_iter().max().unwrap_or_else(Q::zero))
}

/// Appends the current density defect over `samples` to the history.
pub fn defect_report(cs: &mut ChainState, samples: &[Sample], net: &NetParams) -> Result<Q> {
    let d = defect(cs, samples, net)?;
    cs.defect_history.push(d.clone());
    Ok(d)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub stage: usize,
    pub source: String,
    #[serde(with = "serde_q")]
    pub distance_before: Q,
    pub dim: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleLog {
    pub steps: Vec<StepRecord>,
    pub skipped: Vec<String>,
    pub stop: String,
}

/// Greedy realization: each round realizes the candidate type farthest from
/// everything the net of the top space realizes. Candidates are the samples
/// plus the types the catalog asks for.
pub fn schedule(
    cs: &ChainState,
    budget: usize,
    samples: &[Sample],
    cat: &Catalog,
    net: &NetParams,
) -> Result<(ChainState, ScheduleLog)> {
    let mut cs = cs.clone();
    let mut log = ScheduleLog::default();
    if budget == 0 {
        log.stop = "budget exhausted".into();
        return Ok((cs, log));
    }
    if cs.defect_history.is_empty() {
        defect_report(&mut cs, samples, net)?;
    }
    let mut blocked: Vec<String> = Vec::new();
    for _ in 0..budget {
        let mut cands: Vec<(Q, String, LinMap, TypePres)> = Vec::new();
        for (i, s) in samples.iter().enumerate() {
            let incl = cs.sample_incl(s)?;
            cands.push((Q::zero(), format!("sample {i}"), incl, s.ty.clone()));
        }
        for (j, p) in cat.problems.iter().enumerate() {
            if let Some(Reduction { phi, xi: Some(xi), .. }) = reduce(&cs, p)? {
                cands.push((Q::zero(), format!("problem {j}"), phi, xi));
            }
        }
        cands.retain(|c| !blocked.contains(&c.1));
        let dists: Vec<Q> = cands
            .par_iter()
            .map(|(_, _, incl, ty)| Ok(nearest_realized(incl, ty, &net.step)?.0))
            .collect::<Result<_>>()?;
        for (c, d) in cands.iter_mut().zip(dists) {
            c.0 = d;
        }
        cands.retain(|c| !c.0.is_zero());
        cands.sort_by(|a, b| b.0.cmp(&a.0));
        if cands.is_empty() {
            log.stop = "every candidate is realized on the net".into();
            return Ok((cs, log));
        }
        let mut advanced = false;
        for (dist, label, incl, ty) in cands {
            match cs.step(&incl, &ty) {
                Ok(next) => {
                    cs = next;
                    log.steps.push(StepRecord { stage: cs.top_stage(), source: label, distance_before: dist, dim: cs.top().dim });
                    advanced = true;
                    break;
                }
                Err(e @ (Error::AvoidanceViolation { .. } | Error::DimensionTooLarge { .. })) => {
                    log.skipped.push(format!("{label}: {e}"));
                    blocked.push(label);
                }
                Err(e) => return Err(e),
            }
        }
        if !advanced {
            log.stop = if log.skipped.iter().any(|s| s.contains("cap")) {
                "every remaining candidate is blocked; realize types with larger kernels to stay under the dimension cap".into()
            } else {
                "every remaining candidate is blocked by a forbidden ball".into()
            };
            return Ok((cs, log));
        }
        defect_report(&mut cs, samples, net)?;
    }
    log.stop = "budget exhausted".into();
    Ok((cs, log))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertStatus {
    Certified {
        psi: LinMap,
        #[serde(with = "serde_q")]
        distortion: Q,
    },
    Unresolved {
        #[serde(with = "crate::kernel::rational::serde_opt_q")]
        best: Option<Q>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub problem: usize,
    pub status: CertStatus,
}

/// `max(‖ψ‖ − 1, 1 − min‖ψx‖)` over the unit sphere.
pub fn eps_of(psi: &LinMap) -> Result<Q> {
    let (lo, hi) = distortion(psi)?;
    Ok((hi - Q::one()).max(Q::one() - lo))
}

/// For each problem `E ⊆ F`, looks for `ψ: F → top` extending an embedding of
/// `E` with `(1−ε)‖x‖ ≤ ‖ψx‖ ≤ (1+ε)‖x‖`, trying ledger witnesses and then
/// the net point whose type is nearest the one required.
pub fn certify_eps_gurarij(cs: &ChainState, cat: &Catalog, eps: &Q, net: &NetParams) -> Result<Vec<Certificate>> {
    cat.problems
        .par_iter()
        .enumerate()
        .map(|(problem, p)| {
            let Some(red) = reduce(cs, p)? else {
                return Ok(Certificate { problem, status: CertStatus::Unresolved { best: None } });
            };
            let mut cands: Vec<Option<Vector>> = Vec::new();
            if let (Some(xi), Some(_)) = (&red.xi, &red.u) {
                for list in cs.ledger_vectors() {
                    cands.extend(list.into_iter().map(Some));
                }
                cands.push(Some(nearest_realized(&red.phi, xi, &net.step)?.1));
            } else {
                cands.push(None);
            }
            let mut best: Option<Q> = None;
            for c in cands {
                let psi = extension(&red, c.as_ref())?;
                let e = eps_of(&psi)?;
                if e <= *eps {
                    return Ok(Certificate { problem, status: CertStatus::Certified { psi, distortion: e } });
                }
                if best.as_ref().map_or(true, |b| e < *b) {
                    best = Some(e);
                }
            }
            Ok(Certificate { problem, status: CertStatus::Unresolved { best } })
        })
        .collect()
}

/// CSV lines `stage,dim,defect` for a chain's history.
pub fn history_csv(cs: &ChainState) -> String {
    let mut out = String::from("stage,dim,defect\n");
    for (k, d) in cs.defect_history.iter().enumerate() {
        let dim = cs.spaces.get(k).map_or(0, |s| s.dim);
        out.push_str(&format!("{k},{dim},{}\n", fmt_q(d)));
    }
    out
}

/// Distance between the type of a witness over the first space and a forbidden type.
pub fn avoid_margin(cs: &ChainState, entry: &LedgerEntry, av: &Avoid) -> Result<Option<Q>> {
    if av.ty.nvars != entry.witness.len() || av.ty.base.ball != cs.spaces[0].ball {
        return Ok(None);
    }
    let w: Vec<Vector> = entry.witness.iter().map(|v| cs.lift(entry.stage, v)).collect();
    let realized = tp(&cs.embed(0)?, &w)?;
    Ok(Some(type_distance(&av.ty, &realized)?.lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fenchel::KFn;
    use crate::kernel::rational::{frac, q, qvec};

    fn line_type(pieces: &[(i64, i64)]) -> TypePres {
        KFn::new(Space::ell_inf(1), pieces.iter().map(|&(a, b)| (qvec(&[a]), q(b))).collect())
            .unwrap()
            .to_type()
            .unwrap()
    }

    fn max_abs_one() -> TypePres {
        line_type(&[(1, 0), (-1, 0), (0, 1)])
    }

    fn abs_plus_one() -> TypePres {
        line_type(&[(1, 1), (-1, 1)])
    }

    #[test]
    fn step_builds_square() {
        let cs = ChainState::new(Space::ell_inf(1), 6).unwrap();
        let next = cs.step(&cs.embed(0).unwrap(), &max_abs_one()).unwrap();
        assert!(find_isometry(next.top(), &Space::ell_inf(2)).is_some());
        next.verify().unwrap();
        let again = next.step(&next.embed(0).unwrap(), &crate::typespace::realized(&Space::ell_inf(1), &qvec(&[1])).unwrap()).unwrap();
        assert_eq!(again.top().dim, 2);
    }

    #[test]
    fn avoided_step_is_refused() {
        let cs = ChainState::new(Space::ell_inf(1), 6).unwrap().with_avoid(max_abs_one(), frac(1, 2));
        let r = cs.step(&cs.embed(0).unwrap(), &max_abs_one());
        assert!(matches!(r, Err(Error::AvoidanceViolation { index: 0, .. })));
    }

    #[test]
    fn schedule_realizes_sample() {
        let cs = ChainState::new(Space::ell_inf(1), 6).unwrap();
        let samples = vec![Sample::over_base(abs_plus_one())];
        let empty = Catalog { problems: vec![] };
        let (same, _) = schedule(&cs, 0, &samples, &empty, &NetParams::default()).unwrap();
        assert_eq!(same, cs);
        let (next, log) = schedule(&cs, 1, &samples, &empty, &NetParams::default()).unwrap();
        assert_eq!(log.steps.len(), 1);
        assert!(next.defect_history[0] >= q(1) - frac(1, 2));
        assert!(next.defect_history[1] <= frac(1, 2));
    }

    #[test]
    fn blocked_schedule_stops_early() {
        let cs = ChainState::new(Space::ell_inf(1), 6).unwrap().with_avoid(abs_plus_one(), frac(1, 2));
        let samples = vec![Sample::over_base(abs_plus_one())];
        let (next, log) = schedule(&cs, 3, &samples, &Catalog { problems: vec![] }, &NetParams::default()).unwrap();
        assert!(log.steps.is_empty());
        assert_eq!(log.skipped.len(), 1);
        assert_eq!(next.spaces, cs.spaces);
        assert!(log.stop.contains("forbidden"));
    }

    #[test]
    fn certify_trivial_problems() {
        let mut cs = ChainState::new(Space::ell_inf(1), 6).unwrap();
        cs = cs.step(&cs.embed(0).unwrap(), &max_abs_one()).unwrap();
        let cat = Catalog { problems: vec![standard_catalog().problems[0].clone()] };
        let cert = certify_eps_gurarij(&cs, &cat, &q(0), &NetParams::default()).unwrap();
        assert!(matches!(cert[0].status, CertStatus::Certified { .. }));
        let empty = certify_eps_gurarij(&cs, &Catalog { problems: vec![] }, &q(0), &NetParams::default()).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn l1_plane_does_not_fit_square() {
        let mut cs = ChainState::new(Space::ell_inf(1), 6).unwrap();
        cs = cs.step(&cs.embed(0).unwrap(), &max_abs_one()).unwrap();
        let cat = Catalog { problems: vec![standard_catalog().problems[1].clone()] };
        let cert = certify_eps_gurarij(&cs, &cat, &frac(1, 4), &NetParams::default()).unwrap();
        match &cert[0].status {
            CertStatus::Unresolved { best: Some(b) } => assert!(*b > frac(1, 4)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
