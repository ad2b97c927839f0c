//! Continuous piecewise-linear functions on a metric graph, stored as
//! breakpoint lists per edge, and their divisors.

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::graph::{End, GraphPoint, MetricGraph, Subdivision, VertexIx};
use crate::rational::{self, Q};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Breakpoint {
    pub offset: Q,
    pub value: Q,
}

impl Breakpoint {
    pub fn new(offset: Q, value: Q) -> Self {
        Breakpoint { offset, value }
    }
}

/// Shape of the graph a function lives on: `(src, dst, len)` per edge.
type Frame = Vec<(VertexIx, VertexIx, Q)>;

/// A continuous function, affine between consecutive breakpoints of each edge.
///
/// Breakpoints where the slope does not change are removed on construction,
/// so structural equality is equality of functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlFunction {
    frame: Frame,
    edges: Vec<Vec<Breakpoint>>,
    vertex_values: Vec<Q>,
}

fn frame_of(graph: &MetricGraph) -> Frame {
    graph.edges().iter().map(|e| (e.src, e.dst, e.len.clone())).collect()
}

fn slope(a: &Breakpoint, b: &Breakpoint) -> Q {
    (&b.value - &a.value) / (&b.offset - &a.offset)
}

fn normalize(points: Vec<Breakpoint>) -> Vec<Breakpoint> {
    let mut out: Vec<Breakpoint> = Vec::with_capacity(points.len());
    for p in points {
        if out.len() >= 2 {
            let n = out.len();
            if slope(&out[n - 2], &out[n - 1]) == slope(&out[n - 1], &p) {
                out.pop();
            }
        }
        out.push(p);
    }
    out
}

impl PlFunction {
    /// Validates breakpoint lists (one per edge, in edge order) against `graph`.
    pub fn new(graph: &MetricGraph, edges: Vec<Vec<Breakpoint>>) -> Result<Self> {
        if edges.len() != graph.edge_count() {
            return Err(Error::Invalid(format!(
                "expected breakpoints for {} edges, got {}",
                graph.edge_count(),
                edges.len()
            )));
        }
        let mut vertex_values: Vec<Option<Q>> = vec![None; graph.vertex_count()];
        let mut set = |v: VertexIx, value: &Q, id: &str| -> Result<()> {
            match &vertex_values[v] {
                Some(old) if old != value => Err(Error::Invalid(format!(
                    "discontinuity at vertex {:?} (edge {id:?})",
                    graph.vertex_ids()[v]
                ))),
                _ => {
                    vertex_values[v] = Some(value.clone());
                    Ok(())
                }
            }
        };
        for (e, bps) in graph.edges().iter().zip(&edges) {
            let (Some(first), Some(last)) = (bps.first(), bps.last()) else {
                return Err(Error::Invalid(format!("edge {:?} has no breakpoints", e.id)));
            };
            if !first.offset.is_zero() || last.offset != e.len || bps.len() < 2 {
                return Err(Error::Invalid(format!(
                    "breakpoints on edge {:?} must run from 0 to {}",
                    e.id, e.len
                )));
            }
            if bps.windows(2).any(|w| w[0].offset >= w[1].offset) {
                return Err(Error::Invalid(format!(
                    "breakpoint offsets on edge {:?} are not increasing",
                    e.id
                )));
            }
            set(e.src, &first.value, &e.id)?;
            set(e.dst, &last.value, &e.id)?;
        }
        // only an edgeless single-vertex graph leaves a vertex untouched
        let vertex_values = vertex_values.into_iter().map(|v| v.unwrap_or_else(Q::zero)).collect();
        Ok(PlFunction {
            frame: frame_of(graph),
            edges: edges.into_iter().map(normalize).collect(),
            vertex_values,
        })
    }

    pub fn constant(graph: &MetricGraph, c: Q) -> Self {
        PlFunction::from_vertex_values(graph, &vec![c; graph.vertex_count()])
    }

    /// Affine on every edge, interpolating the given vertex values.
    pub fn from_vertex_values(graph: &MetricGraph, values: &[Q]) -> Self {
        let edges = graph
            .edges()
            .iter()
            .map(|e| {
                vec![
                    Breakpoint::new(Q::zero(), values[e.src].clone()),
                    Breakpoint::new(e.len.clone(), values[e.dst].clone()),
                ]
            })
            .collect();
        let mut f = PlFunction::new(graph, edges).expect("interpolation is continuous");
        f.vertex_values = values.to_vec();
        f
    }

    pub fn breakpoints(&self, e: usize) -> &[Breakpoint] {
        &self.edges[e]
    }

    pub fn vertex_value(&self, v: VertexIx) -> &Q {
        &self.vertex_values[v]
    }

    pub fn on_graph(&self, graph: &MetricGraph) -> bool {
        self.frame == frame_of(graph)
    }

    fn eval_edge(&self, e: usize, offset: &Q) -> Q {
        let bps = &self.edges[e];
        let k = bps.partition_point(|b| b.offset <= *offset);
        if k == bps.len() {
            return bps[k - 1].value.clone();
        }
        let (a, b) = (&bps[k - 1], &bps[k]);
        &a.value + slope(a, b) * (offset - &a.offset)
    }

    pub fn eval(&self, p: &GraphPoint) -> Q {
        match p {
            GraphPoint::Vertex(v) => self.vertex_values[*v].clone(),
            GraphPoint::Edge { edge, offset } => self.eval_edge(*edge, offset),
        }
    }

    /// Slopes of the affine pieces of edge `e`, in the source-to-target direction.
    pub fn slopes(&self, e: usize) -> Vec<Q> {
        self.edges[e].windows(2).map(|w| slope(&w[0], &w[1])).collect()
    }

    pub fn is_integer_sloped(&self) -> bool {
        (0..self.edges.len()).all(|e| self.slopes(e).iter().all(rational::is_integral))
    }

    fn check_integer_slopes(&self, graph: &MetricGraph) -> Result<()> {
        for e in 0..self.edges.len() {
            if let Some(s) = self.slopes(e).into_iter().find(|s| !rational::is_integral(s)) {
                return Err(Error::NonIntegerSlope {
                    edge: graph.edge(e).id.clone(),
                    slope: rational::render(&s),
                });
            }
        }
        Ok(())
    }

    /// Pointwise combination over the union of both breakpoint sets.
    fn zip_with(&self, other: &PlFunction, op: impl Fn(&Q, &Q) -> Q) -> Result<PlFunction> {
        if self.frame != other.frame {
            return Err(Error::GraphMismatch);
        }
        let edges = (0..self.edges.len())
            .map(|e| {
                let mut offsets: Vec<Q> = self.edges[e]
                    .iter()
                    .chain(&other.edges[e])
                    .map(|b| b.offset.clone())
                    .collect();
                offsets.sort();
                offsets.dedup();
                let points = offsets
                    .into_iter()
                    .map(|o| {
                        let v = op(&self.eval_edge(e, &o), &other.eval_edge(e, &o));
                        Breakpoint::new(o, v)
                    })
                    .collect();
                normalize(points)
            })
            .collect();
        let vertex_values = self
            .vertex_values
            .iter()
            .zip(&other.vertex_values)
            .map(|(a, b)| op(a, b))
            .collect();
        Ok(PlFunction { frame: self.frame.clone(), edges, vertex_values })
    }

    pub fn add(&self, other: &PlFunction) -> Result<PlFunction> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn negate(&self) -> PlFunction {
        self.map_values(|v| -v)
    }

    pub fn add_constant(&self, c: &Q) -> PlFunction {
        self.map_values(|v| v + c)
    }

    pub fn scale(&self, k: &Q) -> PlFunction {
        self.map_values(|v| v * k)
    }

    fn map_values(&self, f: impl Fn(&Q) -> Q) -> PlFunction {
        PlFunction {
            frame: self.frame.clone(),
            edges: self
                .edges
                .iter()
                .map(|bps| normalize(bps.iter().map(|b| Breakpoint::new(b.offset.clone(), f(&b.value))).collect()))
                .collect(),
            vertex_values: self.vertex_values.iter().map(f).collect(),
        }
    }

    /// The same function on a refined model of its graph.
    pub fn on_subdivision(&self, sub: &Subdivision) -> PlFunction {
        let mut edges = vec![Vec::new(); sub.graph.edge_count()];
        for (e, pieces) in sub.pieces.iter().enumerate() {
            for piece in pieces {
                let mut pts = vec![Breakpoint::new(Q::zero(), self.eval_edge(e, &piece.from))];
                for b in &self.edges[e] {
                    if b.offset > piece.from && b.offset < piece.to {
                        pts.push(Breakpoint::new(&b.offset - &piece.from, b.value.clone()));
                    }
                }
                pts.push(Breakpoint::new(&piece.to - &piece.from, self.eval_edge(e, &piece.to)));
                edges[piece.edge] = pts;
            }
        }
        PlFunction::new(&sub.graph, edges).expect("restriction of a continuous function")
    }

    /// Inverse of [`PlFunction::on_subdivision`]: reads a function on the refined
    /// model back onto the original graph.
    pub fn from_subdivision(original: &MetricGraph, sub: &Subdivision, f: &PlFunction) -> Result<PlFunction> {
        if !f.on_graph(&sub.graph) {
            return Err(Error::GraphMismatch);
        }
        let edges = sub
            .pieces
            .iter()
            .map(|pieces| {
                let mut pts: Vec<Breakpoint> = Vec::new();
                for piece in pieces {
                    let shifted = f.edges[piece.edge]
                        .iter()
                        .map(|b| Breakpoint::new(&b.offset + &piece.from, b.value.clone()));
                    for b in shifted {
                        if pts.last().map_or(true, |last| last.offset < b.offset) {
                            pts.push(b);
                        }
                    }
                }
                pts
            })
            .collect();
        PlFunction::new(original, edges)
    }

    /// `div(F)`: at each point, the sum of the outgoing slopes.
    pub fn divisor(&self, graph: &MetricGraph) -> Result<Divisor> {
        if !self.on_graph(graph) {
            return Err(Error::GraphMismatch);
        }
        self.check_integer_slopes(graph)?;
        let as_int = |q: Q| rational::to_i64(&q).expect("integral slope fits in i64");
        let mut d = Divisor::zero();
        for v in 0..graph.vertex_count() {
            let out: i64 = graph
                .incident(v)
                .iter()
                .map(|&(e, end)| {
                    let s = self.slopes(e);
                    match end {
                        End::Source => as_int(s[0].clone()),
                        End::Target => -as_int(s[s.len() - 1].clone()),
                    }
                })
                .sum();
            d.add_at(GraphPoint::Vertex(v), out);
        }
        for e in 0..self.edges.len() {
            let s = self.slopes(e);
            for (k, b) in self.edges[e].iter().enumerate().skip(1).take(s.len() - 1) {
                let out = as_int(&s[k] - &s[k - 1]);
                d.add_at(GraphPoint::Edge { edge: e, offset: b.offset.clone() }, out);
            }
        }
        Ok(d)
    }

    pub fn to_json(&self, graph: &MetricGraph) -> PlFunctionJson {
        PlFunctionJson {
            edges: graph
                .edges()
                .iter()
                .zip(&self.edges)
                .map(|(e, bps)| EdgeFunctionJson {
                    edge: e.id.clone(),
                    breakpoints: bps
                        .iter()
                        .map(|b| BreakpointJson { offset: b.offset.clone(), value: b.value.clone() })
                        .collect(),
                })
                .collect(),
            vertices: graph
                .vertex_ids()
                .iter()
                .zip(&self.vertex_values)
                .map(|(v, val)| VertexValueJson { vertex: v.clone(), value: val.clone() })
                .collect(),
        }
    }

    pub fn from_json(graph: &MetricGraph, doc: &PlFunctionJson) -> Result<Self> {
        let mut edges = vec![None; graph.edge_count()];
        for ef in &doc.edges {
            let e = graph
                .edge_index(&ef.edge)
                .ok_or_else(|| Error::Invalid(format!("unknown edge {:?}", ef.edge)))?;
            let bps = ef.breakpoints.iter().map(|b| Breakpoint::new(b.offset.clone(), b.value.clone()));
            edges[e] = Some(bps.collect());
        }
        let edges = edges
            .into_iter()
            .enumerate()
            .map(|(e, b)| b.ok_or_else(|| Error::Invalid(format!("no breakpoints for edge {:?}", graph.edge(e).id))))
            .collect::<Result<Vec<_>>>()?;
        let mut f = PlFunction::new(graph, edges)?;
        for vv in &doc.vertices {
            let v = graph
                .vertex_index(&vv.vertex)
                .ok_or_else(|| Error::Invalid(format!("unknown vertex {:?}", vv.vertex)))?;
            if graph.edge_count() == 0 {
                f.vertex_values[v] = vv.value.clone();
            } else if f.vertex_values[v] != vv.value {
                return Err(Error::Invalid(format!("vertex value of {:?} disagrees with its edges", vv.vertex)));
            }
        }
        Ok(f)
    }
}

/// Divisor of `f`; errors with `NonIntegerSlope` unless `f` is tropical meromorphic.
pub fn divisor_of(f: &PlFunction, graph: &MetricGraph) -> Result<Divisor> {
    f.divisor(graph)
}

pub fn is_integer_sloped(f: &PlFunction) -> bool {
    f.is_integer_sloped()
}

/// Tent on every edge: slope `+s` from the source to the midpoint, `-s` after,
/// zero at vertices; `s` is the edge's entry in `slopes`.
pub fn tents(graph: &MetricGraph, slopes: &[Q]) -> PlFunction {
    let two = rational::int(2);
    let edges = graph
        .edges()
        .iter()
        .zip(slopes)
        .map(|(e, s)| {
            let mid = &e.len / &two;
            vec![
                Breakpoint::new(Q::zero(), Q::zero()),
                Breakpoint::new(mid.clone(), s * &mid),
                Breakpoint::new(e.len.clone(), Q::zero()),
            ]
        })
        .collect();
    PlFunction::new(graph, edges).expect("tents vanish at every vertex")
}

pub fn unit_tents(graph: &MetricGraph) -> PlFunction {
    tents(graph, &vec![Q::one(); graph.edge_count()])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlFunctionJson {
    pub edges: Vec<EdgeFunctionJson>,
    pub vertices: Vec<VertexValueJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeFunctionJson {
    pub edge: String,
    pub breakpoints: Vec<BreakpointJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BreakpointJson {
    #[serde(with = "rational::serde_str")]
    pub offset: Q,
    #[serde(with = "rational::serde_str")]
    pub value: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexValueJson {
    pub vertex: String,
    #[serde(with = "rational::serde_str")]
    pub value: Q,
}
