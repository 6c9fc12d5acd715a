//! Random generators and brute-force oracles shared by the integration tests
//! and the acceptance runner.
#![allow(dead_code)]

use polygur::census::random_types;
use polygur::fenchel::KFn;
use polygur::kernel::linalg::rank;
use polygur::kernel::rational::{dot, sub, to_f64, unit, zeros, Vector};
use polygur::{LinMap, Space, Q};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small(rng: &mut ChaCha8Rng, lo: i64, hi: i64, den: i64) -> Q {
    Q::new(rng.gen_range(lo * den..=hi * den).into(), den.into())
}

pub fn rand_vec(rng: &mut ChaCha8Rng, dim: usize, bound: i64, den: i64) -> Vector {
    (0..dim).map(|_| small(rng, -bound, bound, den)).collect()
}

/// A symmetric polytope ball spanned by a few random integer points.
pub fn rand_space(rng: &mut ChaCha8Rng, dim: usize) -> Space {
    if dim == 0 {
        return Space::trivial();
    }
    loop {
        let k = dim + rng.gen_range(0..=if dim == 3 { 1 } else { 2 });
        let pts: Vec<Vector> = (0..k).map(|_| rand_vec(rng, dim, 2, 1)).collect();
        if rank(&pts) == dim {
            return Space::from_vertices(dim, pts).expect("full-dimensional");
        }
    }
}

/// An isometric embedding of `e` into a space with `extra` more dimensions:
/// the new ball is `conv(B_E × 0 ∪ {±(u_i, t_i e_i)})`, moved by a random
/// unimodular change of coordinates.
pub fn rand_extension(rng: &mut ChaCha8Rng, e: &Space, extra: usize) -> LinMap {
    let n = e.dim + extra;
    let pad = |v: &[Q], tail: Vector| -> Vector { v.iter().cloned().chain(tail).collect() };
    let mut verts: Vec<Vector> = e.vertices().iter().map(|v| pad(v, zeros(extra))).collect();
    for i in 0..extra {
        let u = rand_vec(rng, e.dim, 1, 2);
        let t = [Q::new(1.into(), 2.into()), Q::from_integer(1.into()), Q::from_integer(2.into())][rng.gen_range(0..3)].clone();
        let mut tail = zeros(extra);
        tail[i] = t;
        verts.push(pad(&u, tail));
    }
    let mut t: Vec<Vector> = (0..n).map(|i| unit(n, i)).collect();
    if n > 1 {
        for _ in 0..2 {
            let i = rng.gen_range(0..n);
            let j = (i + rng.gen_range(1..n)) % n;
            let c = Q::from_integer(if rng.gen_bool(0.5) { 1 } else { -1 }.into());
            let rj = t[j].clone();
            for (x, y) in t[i].iter_mut().zip(rj) {
                *x += &c * y;
            }
        }
    }
    let apply = |v: &Vector| -> Vector { t.iter().map(|row| dot(row, v)).collect() };
    let f = Space::from_vertices(n, verts.iter().map(apply).collect()).expect("extension ball");
    let cols = (0..e.dim).map(|j| apply(&pad(&unit(e.dim, j), zeros(extra)))).collect();
    LinMap::new(e.clone(), f, cols).expect("shapes")
}

/// A random convex Katětov function: the distance function of a random type.
pub fn rand_katetov(rng: &mut ChaCha8Rng, e: &Space) -> KFn {
    let seed = rng.gen();
    let xi = random_types(e, 1, &Q::from_integer(3.into()), seed).expect("types").remove(0);
    KFn::from_type(&xi).expect("one variable")
}

/// The named planar spaces used across the tests.
pub fn plane_catalog() -> Vec<Space> {
    let p = |v: &[(i64, i64)]| {
        Space::from_vertices(2, v.iter().map(|&(a, b)| vec![Q::from_integer(a.into()), Q::from_integer(b.into())]).collect())
            .expect("polygon")
    };
    vec![
        Space::ell_1(2),
        Space::ell_inf(2),
        polygur::space::hexagon(),
        p(&[(2, 0), (1, 2)]),
        p(&[(3, 1), (0, 1)]),
        p(&[(2, 1), (1, 2), (-1, 1)]),
        p(&[(3, 0), (2, 1), (0, 1)]),
        p(&[(1, 0), (1, 1), (0, 2), (-1, 1)]),
        p(&[(4, 1), (1, 3), (-2, 1)]),
        p(&[(3, -1), (2, 2), (-1, 2)]),
        polygur::space::rounded_polygon(8, 100).expect("octagon"),
    ]
}

fn piece_planes(f: &KFn) -> Vec<(Vector, Q)> {
    let mut out = Vec::new();
    for (i, (a, b)) in f.pieces.iter().enumerate() {
        for (c, d) in &f.pieces[i + 1..] {
            let n = sub(a, c);
            if n.iter().any(|x| !x.is_zero()) {
                out.push((n, d - b));
            }
        }
    }
    out
}

/// `sup |f − g|` over a space of dimension at most 2, evaluated at every
/// vertex of the arrangement of lines where two pieces of `f` or of `g` agree.
pub fn arrangement_sup(f: &KFn, g: &KFn) -> Q {
    let d = f.space.dim;
    let mut cands = vec![zeros(d)];
    let mut planes = piece_planes(f);
    planes.extend(piece_planes(g));
    match d {
        0 => {}
        1 => cands.extend(planes.iter().map(|(n, c)| vec![c / &n[0]])),
        2 => {
            for (i, (n, c)) in planes.iter().enumerate() {
                for (m, e) in &planes[i + 1..] {
                    let det = &n[0] * &m[1] - &n[1] * &m[0];
                    if !det.is_zero() {
                        let x = (c * &m[1] - &n[1] * e) / &det;
                        let y = (&n[0] * e - &m[0] * c) / &det;
                        cands.push(vec![x, y]);
                    }
                }
            }
        }
        _ => panic!("arrangement oracle handles dimension at most 2"),
    }
    cands.iter().map(|a| (f.eval(a) - g.eval(a)).abs()).max().expect("origin")
}

/// Pieces in floating point, for grid scans.
pub struct FloatFn(Vec<(Vec<f64>, f64)>);

impl FloatFn {
    pub fn new(f: &KFn) -> Self {
        FloatFn(f.pieces.iter().map(|(a, b)| (a.iter().map(to_f64).collect(), to_f64(b))).collect())
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .map(|(a, b)| a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + b)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn grid(dim: usize, center: &[f64], half: f64, steps: usize) -> Vec<Vec<f64>> {
    let side = 2 * steps + 1;
    let h = half / steps as f64;
    (0..side.pow(dim as u32))
        .map(|mut k| {
            (0..dim)
                .map(|i| {
                    let c = (k % side) as f64 - steps as f64;
                    k /= side;
                    center[i] + c * h
                })
                .collect()
        })
        .collect()
}

/// `sup |f − g|` by scanning a coarse grid on the cube around `radius` times
/// the unit ball, then zooming into the best cells until the mesh is below `2^-16`.
pub fn grid_sup(f: &KFn, g: &KFn, radius: f64) -> f64 {
    let d = f.space.dim;
    let reach = f.space.vertices().iter().flatten().map(|x| to_f64(x).abs()).fold(0.0, f64::max);
    let half = radius * reach.max(1.0);
    let (ff, gg) = (FloatFn::new(f), FloatFn::new(g));
    let val = |x: &[f64]| (ff.eval(x) - gg.eval(x)).abs();
    let coarse_steps = 128;
    let mut pts: Vec<(f64, Vec<f64>)> = grid(d, &vec![0.0; d], half, coarse_steps).into_iter().map(|x| (val(&x), x)).collect();
    pts.sort_by(|a, b| b.0.total_cmp(&a.0));
    pts.truncate(24);
    let mut best = pts.first().map_or(0.0, |p| p.0);
    for (_, start) in pts {
        let mut c = start;
        let mut h = half / coarse_steps as f64;
        while h > 1.0 / 65536.0 {
            let local = grid(d, &c, h, 4);
            let (v, x) = local.into_iter().map(|x| (val(&x), x)).max_by(|a, b| a.0.total_cmp(&b.0)).expect("points");
            best = best.max(v);
            c = x;
            h /= 2.0;
        }
    }
    best
}

/// Points for the primal Katětov check: a wide coarse grid, a fine grid near
/// the origin, and the arrangement vertices of `f`.
pub fn primal_points(f: &KFn) -> Vec<Vec<f64>> {
    let d = f.space.dim;
    let mut pts = grid(d, &vec![0.0; d], 48.0, 12);
    pts.extend(grid(d, &vec![0.0; d], 6.0, 12));
    let planes = piece_planes(f);
    if d == 1 {
        pts.extend(planes.iter().map(|(n, c)| vec![to_f64(&(c / &n[0]))]));
    } else if d == 2 {
        for (i, (n, c)) in planes.iter().enumerate() {
            for (m, e) in &planes[i + 1..] {
                let det = &n[0] * &m[1] - &n[1] * &m[0];
                if !det.is_zero() {
                    pts.push(vec![to_f64(&((c * &m[1] - &n[1] * e) / &det)), to_f64(&((&n[0] * e - &m[0] * c) / &det))]);
                }
            }
        }
    }
    pts
}

/// `|f(a) − f(b)| ≤ ‖a − b‖ ≤ f(a) + f(b)` on every pair of the given points.
pub fn primal_katetov(f: &KFn, pts: &[Vec<f64>]) -> bool {
    let ff = FloatFn::new(f);
    let facets: Vec<Vec<f64>> = f.space.dual_vertices().iter().map(|l| l.iter().map(to_f64).collect()).collect();
    let norm = |v: &[f64]| facets.iter().map(|l| l.iter().zip(v).map(|(p, q)| p * q).sum::<f64>()).fold(0.0, f64::max);
    let vals: Vec<f64> = pts.iter().map(|p| ff.eval(p)).collect();
    let tol = 1e-9;
    let mut diff = vec![0.0; f.space.dim];
    for i in 0..pts.len() {
        for j in i..pts.len() {
            for (k, x) in diff.iter_mut().enumerate() {
                *x = pts[i][k] - pts[j][k];
            }
            let n = norm(&diff);
            if (vals[i] - vals[j]).abs() > n + tol || n > vals[i] + vals[j] + tol {
                return false;
            }
        }
    }
    true
}
