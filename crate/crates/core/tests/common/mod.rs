//! Seeded random corpora and independent oracles shared by the integration tests.
#![allow(dead_code)]

use num::{BigInt, Integer, One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use tropical_jacobian::function::Breakpoint;
use tropical_jacobian::graph::GraphPoint;
use tropical_jacobian::rational::{frac, int};
use tropical_jacobian::{MetricGraph, PlFunction, Q};

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_length<R: Rng>(rng: &mut R, max_den: i64) -> Q {
    let q = rng.gen_range(1..=max_den);
    let p = rng.gen_range(1..=3 * q);
    frac(p, q)
}

/// Connected multigraph: a random spanning tree plus extra edges, which may be
/// loops or parallel to existing edges. Edge order and orientation are shuffled.
pub fn random_graph<R: Rng>(
    rng: &mut R,
    max_vertices: usize,
    max_edges: usize,
    mut length: impl FnMut(&mut R) -> Q,
) -> MetricGraph {
    let n = rng.gen_range(1..=max_vertices);
    let m = rng.gen_range((n - 1).max(1)..=max_edges.max(n - 1));
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    while edges.len() < m {
        edges.push((rng.gen_range(0..n), rng.gen_range(0..n)));
    }
    edges.shuffle(rng);
    let edges: Vec<_> = edges
        .into_iter()
        .map(|(a, b)| {
            let (a, b) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
            (a, b, length(rng))
        })
        .collect();
    MetricGraph::from_lengths(n, &edges).expect("random graph is connected")
}

/// Corpus for the Abel-Jacobi criteria: up to 8 vertices, 12 edges, denominators up to 12.
pub fn metric_corpus(seed: u64, count: usize) -> Vec<MetricGraph> {
    let mut r = rng(seed);
    (0..count).map(|_| random_graph(&mut r, 8, 12, |r| random_length(r, 12))).collect()
}

pub fn random_point<R: Rng>(rng: &mut R, g: &MetricGraph) -> GraphPoint {
    if g.edge_count() == 0 || rng.gen_bool(0.3) {
        return GraphPoint::Vertex(rng.gen_range(0..g.vertex_count()));
    }
    let e = rng.gen_range(0..g.edge_count());
    let k = rng.gen_range(1..12);
    g.point_on_edge(e, g.len(e) * frac(k, 12)).unwrap()
}

/// Random integer-sloped function with rational vertex values.
///
/// Each edge gets up to two random prefix pieces, then two final pieces whose
/// slopes straddle the remaining average rise so that their split point is
/// interior and rational.
pub fn random_integer_sloped<R: Rng>(rng: &mut R, g: &MetricGraph) -> PlFunction {
    let values: Vec<Q> = (0..g.vertex_count()).map(|_| frac(rng.gen_range(-8..=8), rng.gen_range(1..=4))).collect();
    let mut edges = Vec::new();
    for e in g.edges() {
        let (start, end) = (values[e.src].clone(), values[e.dst].clone());
        let mut pts = vec![Breakpoint::new(Q::zero(), start.clone())];
        let (mut at, mut val) = (Q::zero(), start);
        for _ in 0..rng.gen_range(0..=2) {
            let step = (&e.len - &at) * frac(rng.gen_range(1..4), 5);
            at += &step;
            val += step * int(rng.gen_range(-3..=3));
            pts.push(Breakpoint::new(at.clone(), val.clone()));
        }
        let rest = &e.len - &at;
        let avg = (&end - &val) / &rest;
        let base = avg.floor().to_integer();
        let lo = if avg.is_integer() { &base - BigInt::one() } else { base.clone() } - BigInt::from(rng.gen_range(0..2));
        let hi = &base + BigInt::one() + BigInt::from(rng.gen_range(0..2));
        let (lo, hi) = (Q::from_integer(lo), Q::from_integer(hi));
        // lo * x + hi * (rest - x) = end - val
        let x = (&end - &val - &hi * &rest) / (&lo - &hi);
        pts.push(Breakpoint::new(&at + &x, &val + &lo * &x));
        pts.push(Breakpoint::new(e.len.clone(), end));
        edges.push(pts);
    }
    PlFunction::new(g, edges).expect("generated function is continuous")
}

/// Number of spanning trees by enumerating all `(n-1)`-subsets of non-loop edges.
pub fn brute_force_tree_count(g: &MetricGraph) -> BigInt {
    let n = g.vertex_count();
    let edges: Vec<(usize, usize)> = g.edges().iter().filter(|e| !e.is_loop()).map(|e| (e.src, e.dst)).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    fn rec(edges: &[(usize, usize)], start: usize, need: usize, chosen: &mut Vec<usize>, n: usize) -> u64 {
        if need == 0 {
            let mut p: Vec<usize> = (0..n).collect();
            for &i in chosen.iter() {
                let (a, b) = (find(&mut p, edges[i].0), find(&mut p, edges[i].1));
                if a == b {
                    return 0;
                }
                p[a] = b;
            }
            return 1;
        }
        let mut total = 0;
        for i in start..edges.len() {
            if edges.len() - i < need {
                break;
            }
            chosen.push(i);
            total += rec(edges, i + 1, need - 1, chosen, n);
            chosen.pop();
        }
        total
    }
    BigInt::from(rec(&edges, 0, n - 1, &mut Vec::new(), n))
}

/// Invariant factors from determinantal divisors: `d_k = D_k / D_{k-1}`, where
/// `D_k` is the gcd of all `k x k` minors. Includes unit factors; stops at the rank.
pub fn determinantal_factors(m: &[Vec<i64>]) -> Vec<BigInt> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    let mut prev = BigInt::one();
    for k in 1..=rows.min(cols) {
        let mut g = BigInt::zero();
        for rs in subsets(rows, k) {
            for cs in subsets(cols, k) {
                let minor: Vec<Vec<BigInt>> =
                    rs.iter().map(|&r| cs.iter().map(|&c| BigInt::from(m[r][c])).collect()).collect();
                g = g.gcd(&laplace_det(&minor));
            }
        }
        if g.is_zero() {
            break;
        }
        out.push(&g / &prev);
        prev = g;
    }
    out
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut with: Vec<Vec<usize>> = subsets(n - 1, k - 1);
    for s in with.iter_mut() {
        s.push(n - 1);
    }
    let mut without = subsets(n - 1, k);
    without.extend(with);
    without
}

/// Cofactor expansion along the first row.
pub fn laplace_det(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut total = BigInt::zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<BigInt>> = m[1..]
            .iter()
            .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect())
            .collect();
        let term = &m[0][j] * laplace_det(&minor);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// Product of random elementary integer operations; determinant `±1`.
pub fn random_unimodular<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<i64>> {
    let mut u: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    if n == 0 {
        return u;
    }
    for _ in 0..rng.gen_range(1..=2 * n + 2) {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        match rng.gen_range(0..3) {
            0 if a != b => {
                let k = rng.gen_range(-2..=2);
                for c in 0..n {
                    u[a][c] += k * u[b][c];
                }
            }
            1 => u.swap(a, b),
            _ => {
                for c in 0..n {
                    u[a][c] = -u[a][c];
                }
            }
        }
    }
    u
}

/// Sign-aware exact check: `a + s * da == b + t * db` for some `s, t` in `[0, 1]`.
/// Enumerates candidate parameters from every coordinate pair; independent of
/// the cross-product routine in the library.
pub fn segments_meet(a0: &[Q; 3], a1: &[Q; 3], b0: &[Q; 3], b1: &[Q; 3]) -> SegmentContact {
    let da: Vec<Q> = (0..3).map(|k| &a1[k] - &a0[k]).collect();
    let db: Vec<Q> = (0..3).map(|k| &b1[k] - &b0[k]).collect();
    let r: Vec<Q> = (0..3).map(|k| &b0[k] - &a0[k]).collect();
    let in_unit = |x: &Q| !x.is_negative() && *x <= Q::one();
    let check = |s: &Q, t: &Q| (0..3).all(|k| &da[k] * s - &db[k] * t == r[k]);
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        // s * da - t * db = r on coordinates i, j
        let det = &da[i] * -&db[j] + &db[i] * &da[j];
        if det.is_zero() {
            continue;
        }
        let s = (&r[i] * -&db[j] + &db[i] * &r[j]) / &det;
        let t = (&da[i] * &r[j] - &r[i] * &da[j]) / &det;
        if check(&s, &t) && in_unit(&s) && in_unit(&t) {
            return SegmentContact::Point((0..3).map(|k| &a0[k] + &da[k] * &s).collect());
        }
        return SegmentContact::None;
    }
    // parallel directions: sample the endpoints of each segment against the other
    let on = |p: &[Q; 3], q0: &[Q; 3], d: &[Q]| -> Option<Q> {
        let k = (0..3).find(|&k| !d[k].is_zero())?;
        let s = (&p[k] - &q0[k]) / &d[k];
        ((0..3).all(|c| &q0[c] + &d[c] * &s == p[c]) && in_unit(&s)).then_some(s)
    };
    let hits: Vec<Vec<Q>> = [(b0, a0, &da), (b1, a0, &da), (a0, b0, &db), (a1, b0, &db)]
        .into_iter()
        .filter(|(p, q0, d)| on(p, q0, d).is_some())
        .map(|(p, _, _)| p.to_vec())
        .collect();
    let mut distinct = hits.clone();
    distinct.sort();
    distinct.dedup();
    match distinct.len() {
        0 => SegmentContact::None,
        1 => SegmentContact::Point(distinct.pop().unwrap()),
        _ => SegmentContact::Overlap,
    }
}

#[derive(Debug, PartialEq, Eq)]
pub enum SegmentContact {
    None,
    Point(Vec<Q>),
    Overlap,
}

/// Lattice length of `b - a` from scratch: `gcd(numerators) / lcm(denominators)` after
/// scaling to a common denominator.
pub fn lattice_length(a: &[Q; 3], b: &[Q; 3]) -> Q {
    let d: Vec<Q> = (0..3).map(|k| &b[k] - &a[k]).collect();
    let den = d.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let g = d
        .iter()
        .map(|x| (x * Q::from_integer(den.clone())).to_integer().abs())
        .fold(BigInt::zero(), |acc, x| acc.gcd(&x));
    Q::new(g, den)
}
