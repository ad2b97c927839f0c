//! Isometric piecewise-linear embeddings of metric graphs into `Q^3`.
//!
//! On a simple loopless model with vertices `v_1..v_n` and edges `e_1..e_m`
//! three tropical meromorphic functions are built:
//!
//! * `F1`: on every edge, slope `+1` up to the midpoint and `-1` after, zero at vertices;
//! * `F2`: the same tent shape with slope `±i` on edge `e_i`;
//! * `F3`: value `i` at `v_i`, flat near both ends of every edge with one
//!   integer-slope ramp centred on the midpoint, so `F3(x) != F3(x̂)` for the
//!   reflection `x̂` of `x` about the midpoint.
//!
//! The map `x -> (F1, F2, F3)(x)` is affine on each edge of the common
//! refinement, its direction there is primitive because the `F1` slope is
//! `±1`, and it is injective. Both properties are certified exactly on
//! every output rather than assumed.

use num::{BigInt, Integer, One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{tents, unit_tents, Breakpoint, PlFunction};
use crate::graph::{simple_loopless_model, subdivide, GraphJson, GraphPoint, MetricGraph, VertexIx};
use crate::rational::{self, Q};

pub type Point3 = [Q; 3];
pub type Direction = [BigInt; 3];

fn require_simple(graph: &MetricGraph) -> Result<()> {
    if graph.has_loops() {
        return Err(Error::ModelNotSimple("model has a loop edge".into()));
    }
    if graph.has_parallel_edges() {
        return Err(Error::ModelNotSimple("model has parallel edges".into()));
    }
    Ok(())
}

pub fn build_f1(graph: &MetricGraph) -> Result<PlFunction> {
    require_simple(graph)?;
    Ok(unit_tents(graph))
}

/// Tent slopes on edge `i` (0-based) are `±(i + 1)`.
pub fn build_f2(graph: &MetricGraph) -> Result<PlFunction> {
    require_simple(graph)?;
    let slopes: Vec<Q> = (1..=graph.edge_count() as i64).map(rational::int).collect();
    Ok(tents(graph, &slopes))
}

/// Value assigned to vertex `v` by `F3`.
pub fn f3_vertex_value(v: VertexIx) -> Q {
    rational::int(v as i64 + 1)
}

/// Ramp of `F3` on an edge: `(slope, half-width)`.
///
/// The slope is the smallest integer in magnitude whose ramp fits in the middle
/// half of the edge, i.e. `half-width = |dv| / (2 |slope|) <= len / 4`.
pub fn f3_ramp(rise: &Q, len: &Q) -> (BigInt, Q) {
    assert!(!rise.is_zero(), "endpoint values of F3 differ");
    let needed = (rational::int(2) * rise.abs() / len).ceil().to_integer();
    let magnitude = needed.max(BigInt::one());
    let half_width = rise.abs() / (rational::int(2) * Q::from_integer(magnitude.clone()));
    let slope = if rise.is_positive() { magnitude } else { -magnitude };
    (slope, half_width)
}

pub fn build_f3(graph: &MetricGraph) -> Result<PlFunction> {
    require_simple(graph)?;
    let two = rational::int(2);
    let edges = graph
        .edges()
        .iter()
        .map(|e| {
            let (lo, hi) = (f3_vertex_value(e.src), f3_vertex_value(e.dst));
            let (_, delta) = f3_ramp(&(&hi - &lo), &e.len);
            let mid = &e.len / &two;
            vec![
                Breakpoint::new(Q::zero(), lo.clone()),
                Breakpoint::new(&mid - &delta, lo),
                Breakpoint::new(&mid + &delta, hi.clone()),
                Breakpoint::new(e.len.clone(), hi),
            ]
        })
        .collect();
    PlFunction::new(graph, edges)
}

/// Where a segment comes from on the input graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceSpan {
    pub edge: String,
    pub from: Q,
    pub to: Q,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub a: Point3,
    pub b: Point3,
    /// `(b - a) / len`, an integer vector.
    pub dir: Direction,
    pub mult: u64,
    /// Endpoints as vertices of the refined model.
    pub ends: (VertexIx, VertexIx),
    /// Metric length of the source piece.
    pub len: Q,
    pub source: SourceSpan,
}

impl Segment {
    /// Lattice length of `b - a`: the scalar `t` with `b - a = t * (primitive vector)`.
    pub fn lattice_length(&self) -> Q {
        let delta: Vec<Q> = (0..3).map(|k| &self.b[k] - &self.a[k]).collect();
        let den = delta.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let ints: Vec<BigInt> = delta.iter().map(|x| (x * Q::from_integer(den.clone())).to_integer()).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        Q::new(g, den)
    }
}

/// The image of the graph: one segment per edge of the refined model.
#[derive(Debug, Clone)]
pub struct Embedding3D {
    /// Common refinement on which all three coordinates are affine.
    pub subdivision: MetricGraph,
    pub vertex_images: Vec<Point3>,
    pub segments: Vec<Segment>,
}

fn gcd_of(dir: &Direction) -> BigInt {
    dir.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x))
}

/// Builds the three coordinate functions and the refined model, then certifies
/// the result. Errors only with [`Error::CertificationFailure`], which the
/// construction rules out.
pub fn embed(graph: &MetricGraph) -> Result<Embedding3D> {
    let model = simple_loopless_model(graph);
    let g = &model.graph;
    let coords = [build_f1(g)?, build_f2(g)?, build_f3(g)?];

    let mut cuts = Vec::new();
    for f in &coords {
        for e in 0..g.edge_count() {
            let bps = f.breakpoints(e);
            for b in &bps[1..bps.len() - 1] {
                cuts.push(GraphPoint::Edge { edge: e, offset: b.offset.clone() });
            }
        }
    }
    let fine = subdivide(g, &cuts)?;
    let fine_coords: Vec<PlFunction> = coords.iter().map(|f| f.on_subdivision(&fine)).collect();

    let vertex_images: Vec<Point3> = (0..fine.graph.vertex_count())
        .map(|v| {
            let p = GraphPoint::Vertex(v);
            [fine_coords[0].eval(&p), fine_coords[1].eval(&p), fine_coords[2].eval(&p)]
        })
        .collect();

    let mut segments = Vec::with_capacity(fine.graph.edge_count());
    for (i, e) in fine.graph.edges().iter().enumerate() {
        let mut dir: Vec<BigInt> = Vec::with_capacity(3);
        for f in &fine_coords {
            let slopes = f.slopes(i);
            if slopes.len() != 1 || !rational::is_integral(&slopes[0]) {
                return Err(Error::CertificationFailure(format!("coordinate is not integer-affine on piece {:?}", e.id)));
            }
            dir.push(slopes[0].to_integer());
        }
        let (model_edge, model_from) = &fine.edge_origin[i];
        let (input_edge, input_from) = &model.edge_origin[*model_edge];
        let from = input_from + model_from;
        segments.push(Segment {
            a: vertex_images[e.src].clone(),
            b: vertex_images[e.dst].clone(),
            dir: [dir[0].clone(), dir[1].clone(), dir[2].clone()],
            mult: 1,
            ends: (e.src, e.dst),
            len: e.len.clone(),
            source: SourceSpan { edge: graph.edge(*input_edge).id.clone(), to: &from + &e.len, from },
        });
    }

    let embedding = Embedding3D { subdivision: fine.graph, vertex_images, segments };
    embedding.certify()?;
    Ok(embedding)
}

/// Exact intersection of two closed segments in `Q^3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Intersection {
    Empty,
    Point(Point3),
    Overlap,
}

fn sub3(a: &Point3, b: &Point3) -> Point3 {
    [&a[0] - &b[0], &a[1] - &b[1], &a[2] - &b[2]]
}

fn cross(a: &Point3, b: &Point3) -> Point3 {
    [
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

fn dot(a: &Point3, b: &Point3) -> Q {
    &a[0] * &b[0] + &a[1] * &b[1] + &a[2] * &b[2]
}

fn is_zero3(a: &Point3) -> bool {
    a.iter().all(Zero::is_zero)
}

fn along(p: &Point3, d: &Point3, s: &Q) -> Point3 {
    [&p[0] + &d[0] * s, &p[1] + &d[1] * s, &p[2] + &d[2] * s]
}

fn unit_interval(s: &Q) -> bool {
    !s.is_negative() && *s <= Q::one()
}

pub fn intersect_segments(p0: &Point3, p1: &Point3, q0: &Point3, q1: &Point3) -> Intersection {
    let d1 = sub3(p1, p0);
    let d2 = sub3(q1, q0);
    let r = sub3(q0, p0);
    let n = cross(&d1, &d2);
    if !is_zero3(&n) {
        if !dot(&r, &n).is_zero() {
            return Intersection::Empty;
        }
        let nn = dot(&n, &n);
        let s = dot(&cross(&r, &d2), &n) / &nn;
        let t = dot(&cross(&r, &d1), &n) / &nn;
        return if unit_interval(&s) && unit_interval(&t) {
            Intersection::Point(along(p0, &d1, &s))
        } else {
            Intersection::Empty
        };
    }
    if !is_zero3(&cross(&r, &d1)) {
        return Intersection::Empty;
    }
    // collinear: compare parameter intervals along the first segment
    let dd = dot(&d1, &d1);
    let t0 = dot(&r, &d1) / &dd;
    let t1 = dot(&sub3(q1, p0), &d1) / &dd;
    let lo = Q::zero().max(t0.clone().min(t1.clone()));
    let hi = Q::one().min(t0.max(t1));
    if lo > hi {
        Intersection::Empty
    } else if lo == hi {
        Intersection::Point(along(p0, &d1, &lo))
    } else {
        Intersection::Overlap
    }
}

fn boxes_disjoint(a: &Segment, b: &Segment) -> bool {
    (0..3).any(|k| {
        let (alo, ahi) = if a.a[k] <= a.b[k] { (&a.a[k], &a.b[k]) } else { (&a.b[k], &a.a[k]) };
        let (blo, bhi) = if b.a[k] <= b.b[k] { (&b.a[k], &b.b[k]) } else { (&b.b[k], &b.a[k]) };
        ahi < blo || bhi < alo
    })
}

impl Embedding3D {
    /// Checks integer primitive directions, per-segment isometry, and global injectivity.
    pub fn certify(&self) -> Result<()> {
        self.check_directions()?;
        self.check_injective()
    }

    fn check_directions(&self) -> Result<()> {
        for s in &self.segments {
            let step: Point3 = std::array::from_fn(|k| Q::from_integer(s.dir[k].clone()) * &s.len);
            if sub3(&s.b, &s.a) != step {
                return Err(Error::CertificationFailure(format!("direction of {:?} does not match its endpoints", s.source)));
            }
            if !gcd_of(&s.dir).is_one() {
                return Err(Error::CertificationFailure(format!("direction {:?} is not primitive", s.dir)));
            }
            if s.lattice_length() != s.len {
                return Err(Error::CertificationFailure(format!("lattice length differs from length on {:?}", s.source)));
            }
        }
        Ok(())
    }

    /// Segments may meet only at the image of a shared model vertex.
    fn check_injective(&self) -> Result<()> {
        let n = self.segments.len();
        let failure = (0..n).into_par_iter().find_map_first(|i| {
            (i + 1..n).find_map(|j| {
                let (a, b) = (&self.segments[i], &self.segments[j]);
                if boxes_disjoint(a, b) {
                    return None;
                }
                let shared = [a.ends.0, a.ends.1]
                    .into_iter()
                    .find(|v| *v == b.ends.0 || *v == b.ends.1);
                let ok = match (intersect_segments(&a.a, &a.b, &b.a, &b.b), shared) {
                    (Intersection::Empty, None) => true,
                    (Intersection::Point(p), Some(v)) => p == self.vertex_images[v],
                    _ => false,
                };
                (!ok).then_some((i, j))
            })
        });
        match failure {
            None => Ok(()),
            Some((i, j)) => Err(Error::CertificationFailure(format!(
                "segments from {:?} and {:?} intersect",
                self.segments[i].source, self.segments[j].source
            ))),
        }
    }

    pub fn total_lattice_length(&self) -> Q {
        self.segments.iter().fold(Q::zero(), |acc, s| acc + s.lattice_length())
    }

    pub fn to_json(&self) -> EmbeddingJson {
        EmbeddingJson {
            subdivision: self.subdivision.to_json(),
            segments: self.segments.iter().map(SegmentJson::from).collect(),
            rays: Vec::new(),
        }
    }

    /// Float polyline rows `segment,x,y,z` for external plotting.
    pub fn plot_csv(&self) -> String {
        let mut out = String::from("segment,x,y,z\n");
        for (i, s) in self.segments.iter().enumerate() {
            for p in [&s.a, &s.b] {
                out.push_str(&format!(
                    "{i},{},{},{}\n",
                    rational::to_f64(&p[0]),
                    rational::to_f64(&p[1]),
                    rational::to_f64(&p[2])
                ));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ray {
    pub vertex: VertexIx,
    pub at: Point3,
    pub dir: Direction,
    pub mult: BigInt,
}

/// An embedding completed by unbounded rays so that it is balanced.
#[derive(Debug, Clone)]
pub struct BalancedComplex {
    pub embedding: Embedding3D,
    pub rays: Vec<Ray>,
}

/// Sum of `mult * primitive outgoing direction` over segments at each vertex.
fn outgoing_sums(e: &Embedding3D) -> Vec<Direction> {
    let mut sums: Vec<Direction> = vec![std::array::from_fn(|_| BigInt::zero()); e.subdivision.vertex_count()];
    for s in &e.segments {
        let m = BigInt::from(s.mult);
        for k in 0..3 {
            sums[s.ends.0][k] += &m * &s.dir[k];
            sums[s.ends.1][k] -= &m * &s.dir[k];
        }
    }
    sums
}

/// Adds at each unbalanced vertex one ray along the primitive part of the defect,
/// with multiplicity equal to the gcd of the defect.
pub fn balance(e: &Embedding3D) -> BalancedComplex {
    let mut rays = Vec::new();
    for (v, sum) in outgoing_sums(e).into_iter().enumerate() {
        let g = gcd_of(&sum);
        if g.is_zero() {
            continue;
        }
        rays.push(Ray {
            vertex: v,
            at: e.vertex_images[v].clone(),
            dir: std::array::from_fn(|k| -&sum[k] / &g),
            mult: g,
        });
    }
    BalancedComplex { embedding: e.clone(), rays }
}

impl BalancedComplex {
    /// Net weighted direction at every vertex; all zero when balanced.
    pub fn defects(&self) -> Vec<Direction> {
        let mut sums = outgoing_sums(&self.embedding);
        for r in &self.rays {
            for k in 0..3 {
                sums[r.vertex][k] += &r.mult * &r.dir[k];
            }
        }
        sums
    }

    pub fn is_balanced(&self) -> bool {
        self.defects().iter().all(|d| d.iter().all(Zero::is_zero))
            && self.rays.iter().all(|r| gcd_of(&r.dir).is_one() && r.mult.is_positive())
    }

    pub fn to_json(&self) -> EmbeddingJson {
        let mut doc = self.embedding.to_json();
        doc.rays = self
            .rays
            .iter()
            .map(|r| RayJson {
                at: r.at.iter().map(rational::render).collect(),
                dir: r.dir.iter().map(|x| x.to_string().parse().expect("direction fits in i64")).collect(),
                mult: r.mult.to_string().parse().expect("multiplicity fits in u64"),
            })
            .collect();
        doc
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmbeddingJson {
    pub subdivision: GraphJson,
    pub segments: Vec<SegmentJson>,
    pub rays: Vec<RayJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SegmentJson {
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub dir: Vec<i64>,
    pub mult: u64,
    pub src: SourceJson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceJson {
    pub edge: String,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RayJson {
    pub at: Vec<String>,
    pub dir: Vec<i64>,
    pub mult: u64,
}

impl From<&Segment> for SegmentJson {
    fn from(s: &Segment) -> Self {
        SegmentJson {
            a: s.a.iter().map(rational::render).collect(),
            b: s.b.iter().map(rational::render).collect(),
            dir: s.dir.iter().map(|x| x.to_string().parse().expect("direction fits in i64")).collect(),
            mult: s.mult,
            src: SourceJson {
                edge: s.source.edge.clone(),
                from: rational::render(&s.source.from),
                to: rational::render(&s.source.to),
            },
        }
    }
}
