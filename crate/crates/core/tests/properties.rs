mod common;

use common::*;
use num_traits::{Signed, Zero};
use polygur::amalgam::amalgamate;
use polygur::census::{polyhedral_net, random_types};
use polygur::fenchel::{conjugate, is_katetov, sup_distance, KFn};
use polygur::forge::{schedule, Catalog, ChainState, NetParams, Sample};
use polygur::kernel::rational::{dot, frac, q, unit, Vector};
use polygur::kernel::Lp;
use polygur::typespace::{lp_distance, pairwise_distances, type_distance, TypePres};
use polygur::{Space, Q};
use proptest::prelude::*;
use rand::Rng;

fn add(a: &[Q], b: &[Q]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norm_is_a_norm(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = r.gen_range(1..=3);
        let s = rand_space(&mut r, d);
        let (u, v) = (rand_vec(&mut r, d, 4, 3), rand_vec(&mut r, d, 4, 3));
        let c = small(&mut r, -3, 3, 2);
        prop_assert!(s.norm(&add(&u, &v)).unwrap() <= s.norm(&u).unwrap() + s.norm(&v).unwrap());
        let cu: Vector = u.iter().map(|x| x * &c).collect();
        prop_assert_eq!(s.norm(&cu).unwrap(), s.norm(&u).unwrap() * c.abs());
        let lam = rand_vec(&mut r, d, 2, 3);
        prop_assert!(dot(&lam, &u).abs() <= s.dual_norm(&lam).unwrap() * s.norm(&u).unwrap());
        let back = s.dual_space().unwrap().dual_space().unwrap();
        prop_assert_eq!(back.ball, s.ball);
    }

    #[test]
    fn lp_matches_vertex_enumeration(seed in any::<u64>()) {
        // maximize over a random bounded polygon: the optimum is at a vertex,
        // which brute force finds by intersecting every pair of constraints
        let mut r = rng(seed);
        let s = rand_space(&mut r, 2);
        let rows: Vec<(Vector, Q)> = s.dual_vertices().iter().map(|l| (l.clone(), small(&mut r, 1, 3, 2))).collect();
        let c = rand_vec(&mut r, 2, 3, 1);
        let mut lp = Lp::new(2).maximize(c.clone());
        for (a, b) in &rows {
            lp.le(a.clone(), b.clone());
        }
        let got = lp.solve().unwrap().value;
        let mut best: Option<Q> = None;
        for (i, (a, b)) in rows.iter().enumerate() {
            for (e, f) in &rows[i + 1..] {
                let det = &a[0] * &e[1] - &a[1] * &e[0];
                if det.is_zero() {
                    continue;
                }
                let x = vec![(b * &e[1] - &a[1] * f) / &det, (&a[0] * f - &e[0] * b) / &det];
                if rows.iter().all(|(g, h)| dot(g, &x) <= *h) {
                    let v = dot(&c, &x);
                    if best.as_ref().map_or(true, |w| v > *w) {
                        best = Some(v);
                    }
                }
            }
        }
        prop_assert_eq!(got, best.unwrap());
    }

    #[test]
    fn amalgam_square_commutes(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = r.gen_range(0..=2);
        let e = rand_space(&mut r, d);
        let (k0, k1) = (r.gen_range(1..=3 - d), r.gen_range(1..=3 - d));
        let f0 = rand_extension(&mut r, &e, k0);
        let f1 = rand_extension(&mut r, &e, k1);
        let out = amalgamate(&e, &f0, &f1).unwrap();
        for j in 0..d {
            prop_assert_eq!(out.g0.apply(&f0.cols[j]), out.g1.apply(&f1.cols[j]));
        }
        let v = rand_vec(&mut r, f1.target.dim, 3, 2);
        prop_assert_eq!(out.result.norm(&out.g1.apply(&v)).unwrap(), f1.target.norm(&v).unwrap());
        prop_assert!(out.result.dim <= f0.target.dim + f1.target.dim - d);
    }

    #[test]
    fn biconjugation_is_exact(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = r.gen_range(1..=2);
        let s = rand_space(&mut r, d);
        let f = rand_katetov(&mut r, &s);
        let c = conjugate(&f).unwrap();
        let v = rand_vec(&mut r, s.dim, 6, 4);
        prop_assert_eq!(c.biconjugate(&v), f.eval(&v));
    }

    #[test]
    fn conjugation_is_isometric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = r.gen_range(1..=2);
        let s = rand_space(&mut r, d);
        let (f, g) = (rand_katetov(&mut r, &s), rand_katetov(&mut r, &s));
        prop_assert_eq!(sup_distance(&f, &g).0, arrangement_sup(&f, &g));
    }

    #[test]
    fn type_distance_is_a_metric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = r.gen_range(1..=2);
        let s = rand_space(&mut r, d);
        let ts = random_types(&s, 3, &q(3), r.gen()).unwrap();
        let m = pairwise_distances(&ts).unwrap();
        for i in 0..3 {
            prop_assert!(m[i][i].lo.is_zero());
            for j in 0..3 {
                prop_assert_eq!(&m[i][j], &m[j][i]);
                for k in 0..3 {
                    prop_assert!(m[i][k].lo <= &m[i][j].lo + &m[j][k].lo);
                }
            }
        }
        prop_assert_eq!(&m[0][1].lo, &lp_distance(&ts[0], &ts[1]).unwrap().0);
    }

    #[test]
    fn trivial_base_distance_is_gap_of_radii(a in 0i64..40, b in 0i64..40, den in 1i64..6) {
        let (ra, rb) = (frac(a, den), frac(b, den));
        let one = |x: &Q| TypePres::new(Space::trivial(), 1, &[vec![x.clone()]]).unwrap();
        let bracket = type_distance(&one(&ra), &one(&rb)).unwrap();
        prop_assert_eq!(bracket.lo, (ra - rb).abs());
        prop_assert!(bracket.exact);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn net_members_are_katetov(step in 1i64..=2) {
        let e = Space::ell_inf(1);
        let net = polyhedral_net(&e, &q(1), &frac(1, step), 100_000).unwrap();
        prop_assert!(!net.is_empty());
        for f in net.iter().take(40) {
            prop_assert!(is_katetov(f).unwrap().holds);
            prop_assert!(primal_katetov(f, &primal_points(f)));
        }
    }

    #[test]
    fn schedule_keeps_ledger_valid(seed in any::<u64>()) {
        let cs = ChainState::new(Space::ell_inf(1), 4).unwrap();
        let samples: Vec<Sample> = random_types(&cs.spaces[0], 2, &q(2), seed).unwrap().into_iter().map(Sample::over_base).collect();
        let (next, _) = schedule(&cs, 2, &samples, &Catalog { problems: vec![] }, &NetParams::default()).unwrap();
        next.verify().unwrap();
        let json = serde_json::to_string(&next).unwrap();
        let back: ChainState = serde_json::from_str(&json).unwrap();
        back.verify().unwrap();
        for w in next.defect_history.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        for k in 0..next.spaces.len() {
            let incl = next.embed(k).unwrap();
            let v = unit(incl.source.dim, 0);
            prop_assert_eq!(next.top().norm(&incl.apply(&v)).unwrap(), incl.source.norm(&v).unwrap());
        }
    }

    #[test]
    fn distance_function_is_katetov(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = r.gen_range(1..=2);
        let s = rand_space(&mut r, d);
        let u = rand_vec(&mut r, s.dim, 3, 2);
        let f = KFn::distance_to(&s, &u);
        let rep = is_katetov(&f).unwrap();
        prop_assert!(rep.holds);
        prop_assert!(rep.antipode_max.unwrap() <= Q::zero());
        prop_assert_eq!(f.eval(&u), Q::zero());
    }
}
