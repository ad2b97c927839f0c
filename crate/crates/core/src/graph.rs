//! Metric graph models, points on them, subdivision, and a deterministic
//! basis of first homology.
//!
//! Vertices and edges are addressed by their position in the model
//! (`VertexIx`, `EdgeIx`); string ids only matter for I/O. "Smallest id"
//! everywhere means smallest position, i.e. declaration order.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Q};

pub type VertexIx = usize;
pub type EdgeIx = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub src: VertexIx,
    pub dst: VertexIx,
    pub len: Q,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.src == self.dst
    }
}

/// Which end of an edge sits at a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum End {
    Source,
    Target,
}

/// A connected finite graph with positive rational edge lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    /// Edge-ends at each vertex in edge order; a loop contributes both ends.
    incidence: Vec<Vec<(EdgeIx, End)>>,
}

impl MetricGraph {
    pub fn new(vertices: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Invalid("graph has no vertices".into()));
        }
        let mut seen = HashSet::new();
        for v in &vertices {
            if !seen.insert(v.as_str()) {
                return Err(Error::Invalid(format!("duplicate vertex id {v:?}")));
            }
        }
        let mut seen = HashSet::new();
        for e in &edges {
            if !seen.insert(e.id.as_str()) {
                return Err(Error::Invalid(format!("duplicate edge id {:?}", e.id)));
            }
            if e.src >= vertices.len() || e.dst >= vertices.len() {
                return Err(Error::Invalid(format!("edge {:?} has an unknown endpoint", e.id)));
            }
            if !e.len.is_positive() {
                return Err(Error::Invalid(format!("edge {:?} has non-positive length", e.id)));
            }
        }
        let mut incidence = vec![Vec::new(); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            incidence[e.src].push((i, End::Source));
            incidence[e.dst].push((i, End::Target));
        }
        let graph = MetricGraph { vertices, edges, incidence };
        if !graph.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(graph)
    }

    /// Builds a graph with vertices `v0..v{n-1}` and edges `e0..`.
    pub fn from_lengths(n: usize, edges: &[(VertexIx, VertexIx, Q)]) -> Result<Self> {
        let vertices = (0..n).map(|i| format!("v{i}")).collect();
        let edges = edges
            .iter()
            .enumerate()
            .map(|(i, (s, d, l))| Edge { id: format!("e{i}"), src: *s, dst: *d, len: l.clone() })
            .collect();
        MetricGraph::new(vertices, edges)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(e, end) in &self.incidence[v] {
                let w = self.far_end(e, end);
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_ids(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeIx) -> &Edge {
        &self.edges[e]
    }

    pub fn len(&self, e: EdgeIx) -> &Q {
        &self.edges[e].len
    }

    pub fn incident(&self, v: VertexIx) -> &[(EdgeIx, End)] {
        &self.incidence[v]
    }

    /// The vertex at the opposite end of `e` from `end`.
    pub fn far_end(&self, e: EdgeIx, end: End) -> VertexIx {
        match end {
            End::Source => self.edges[e].dst,
            End::Target => self.edges[e].src,
        }
    }

    pub fn vertex_index(&self, id: &str) -> Option<VertexIx> {
        self.vertices.iter().position(|v| v == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<EdgeIx> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn total_length(&self) -> Q {
        self.edges.iter().fold(Q::zero(), |acc, e| acc + &e.len)
    }

    /// First Betti number `m - n + 1`.
    pub fn genus(&self) -> usize {
        self.edges.len() + 1 - self.vertices.len()
    }

    pub fn has_loops(&self) -> bool {
        self.edges.iter().any(Edge::is_loop)
    }

    pub fn has_parallel_edges(&self) -> bool {
        let mut pairs = HashSet::new();
        self.edges
            .iter()
            .filter(|e| !e.is_loop())
            .any(|e| !pairs.insert((e.src.min(e.dst), e.src.max(e.dst))))
    }

    pub fn is_simple(&self) -> bool {
        !self.has_loops() && !self.has_parallel_edges()
    }

    pub fn has_unit_lengths(&self) -> Result<()> {
        match self.edges.iter().find(|e| e.len != rational::int(1)) {
            Some(e) => Err(Error::NonUnitLengths(e.id.clone())),
            None => Ok(()),
        }
    }

    /// Canonical point at `offset` along `e`; endpoints become vertices.
    pub fn point_on_edge(&self, e: EdgeIx, offset: Q) -> Result<GraphPoint> {
        let edge = self
            .edges
            .get(e)
            .ok_or_else(|| Error::Invalid(format!("edge index {e} out of range")))?;
        if offset.is_negative() || offset > edge.len {
            return Err(Error::Invalid(format!(
                "offset {} outside edge {:?} of length {}",
                offset, edge.id, edge.len
            )));
        }
        if offset.is_zero() {
            Ok(GraphPoint::Vertex(edge.src))
        } else if offset == edge.len {
            Ok(GraphPoint::Vertex(edge.dst))
        } else {
            Ok(GraphPoint::Edge { edge: e, offset })
        }
    }

    /// Checks that `p` is in canonical form and lies on this graph.
    pub fn validate_point(&self, p: &GraphPoint) -> Result<()> {
        match p {
            GraphPoint::Vertex(v) if *v < self.vertices.len() => Ok(()),
            GraphPoint::Vertex(v) => Err(Error::Invalid(format!("vertex index {v} out of range"))),
            GraphPoint::Edge { edge, offset } => match self.edges.get(*edge) {
                Some(e) if offset.is_positive() && *offset < e.len => Ok(()),
                Some(e) => Err(Error::Invalid(format!(
                    "offset {offset} is not interior to edge {:?}",
                    e.id
                ))),
                None => Err(Error::Invalid(format!("edge index {edge} out of range"))),
            },
        }
    }

    /// Parses `"v1"` or `"e1:1/3"`.
    pub fn parse_point(&self, s: &str) -> Result<GraphPoint> {
        match s.split_once(':') {
            Some((e, off)) => {
                let ei = self
                    .edge_index(e.trim())
                    .ok_or_else(|| Error::Invalid(format!("unknown edge {e:?}")))?;
                self.point_on_edge(ei, rational::parse(off)?)
            }
            None => self
                .vertex_index(s.trim())
                .map(GraphPoint::Vertex)
                .ok_or_else(|| Error::Invalid(format!("unknown vertex {s:?}"))),
        }
    }

    pub fn point_to_json(&self, p: &GraphPoint) -> PointJson {
        match p {
            GraphPoint::Vertex(v) => PointJson::Vertex { vertex: self.vertices[*v].clone() },
            GraphPoint::Edge { edge, offset } => PointJson::Edge {
                edge: self.edges[*edge].id.clone(),
                offset: offset.clone(),
            },
        }
    }

    pub fn point_from_json(&self, p: &PointJson) -> Result<GraphPoint> {
        match p {
            PointJson::Vertex { vertex } => self
                .vertex_index(vertex)
                .map(GraphPoint::Vertex)
                .ok_or_else(|| Error::Invalid(format!("unknown vertex {vertex:?}"))),
            PointJson::Edge { edge, offset } => {
                let ei = self
                    .edge_index(edge)
                    .ok_or_else(|| Error::Invalid(format!("unknown edge {edge:?}")))?;
                self.point_on_edge(ei, offset.clone())
            }
        }
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeJson {
                    id: e.id.clone(),
                    src: self.vertices[e.src].clone(),
                    dst: self.vertices[e.dst].clone(),
                    len: e.len.clone(),
                })
                .collect(),
        }
    }

    pub fn from_json(doc: &GraphJson) -> Result<Self> {
        let lookup = |id: &str| {
            doc.vertices
                .iter()
                .position(|v| v == id)
                .ok_or_else(|| Error::Invalid(format!("edge endpoint {id:?} is not a vertex")))
        };
        let edges = doc
            .edges
            .iter()
            .map(|e| {
                Ok(Edge { id: e.id.clone(), src: lookup(&e.src)?, dst: lookup(&e.dst)?, len: e.len.clone() })
            })
            .collect::<Result<Vec<_>>>()?;
        MetricGraph::new(doc.vertices.clone(), edges)
    }
}

/// A point of the metric graph in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphPoint {
    Vertex(VertexIx),
    /// Strictly interior: `0 < offset < len`, measured from the edge source.
    Edge { edge: EdgeIx, offset: Q },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub id: String,
    pub src: String,
    pub dst: String,
    #[serde(with = "rational::serde_str")]
    pub len: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum PointJson {
    Vertex {
        vertex: String,
    },
    Edge {
        edge: String,
        #[serde(with = "rational::serde_str")]
        offset: Q,
    },
}

/// One piece of an original edge after subdivision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    /// Edge of the refined model.
    pub edge: EdgeIx,
    /// Offsets along the original edge covered by this piece.
    pub from: Q,
    pub to: Q,
}

/// A refined model together with the maps relating it to the original.
#[derive(Debug, Clone)]
pub struct Subdivision {
    pub graph: MetricGraph,
    /// For each original edge, its pieces in source-to-target order.
    pub pieces: Vec<Vec<Piece>>,
    /// Original vertex index -> refined vertex index (identity on positions).
    pub vertex_map: Vec<VertexIx>,
    /// Refined edge -> (original edge, offset of its source along it).
    pub edge_origin: Vec<(EdgeIx, Q)>,
}

impl Subdivision {
    /// Image of a point of the original graph in the refined model.
    pub fn map_point(&self, p: &GraphPoint) -> GraphPoint {
        match p {
            GraphPoint::Vertex(v) => GraphPoint::Vertex(self.vertex_map[*v]),
            GraphPoint::Edge { edge, offset } => {
                for piece in &self.pieces[*edge] {
                    if *offset == piece.from {
                        return GraphPoint::Vertex(self.graph.edges[piece.edge].src);
                    }
                    if *offset < piece.to {
                        return GraphPoint::Edge { edge: piece.edge, offset: offset - &piece.from };
                    }
                }
                unreachable!("offset inside the edge is covered by its pieces")
            }
        }
    }

    /// Preimage of a point of the refined model in the original graph.
    pub fn original_point(&self, original: &MetricGraph, p: &GraphPoint) -> GraphPoint {
        match p {
            GraphPoint::Vertex(v) => {
                if let Some(orig) = self.vertex_map.iter().position(|w| w == v) {
                    return GraphPoint::Vertex(orig);
                }
                // a cut point: the source of the piece that starts there
                let (e, from) = self
                    .edge_origin
                    .iter()
                    .enumerate()
                    .find(|(ne, _)| self.graph.edges[*ne].src == *v)
                    .map(|(_, o)| o.clone())
                    .expect("every new vertex starts a piece");
                GraphPoint::Edge { edge: e, offset: from }
            }
            GraphPoint::Edge { edge, offset } => {
                let (e, from) = &self.edge_origin[*edge];
                original.point_on_edge(*e, from + offset).expect("piece lies inside its edge")
            }
        }
    }

    /// Rewrites an integer 1-chain on the original edges as a chain on the pieces.
    pub fn transport_chain(&self, chain: &[i64]) -> Vec<i64> {
        let mut out = vec![0; self.graph.edge_count()];
        for (e, c) in chain.iter().enumerate() {
            for piece in &self.pieces[e] {
                out[piece.edge] = *c;
            }
        }
        out
    }
}

/// Refines `graph` so that every point in `points` becomes a vertex.
///
/// New vertices are named `<edge>@<offset>`, new pieces `<edge>.<k>`; an edge
/// that is not cut keeps its id.
pub fn subdivide(graph: &MetricGraph, points: &[GraphPoint]) -> Result<Subdivision> {
    let mut cuts: BTreeMap<EdgeIx, BTreeSet<Q>> = BTreeMap::new();
    for p in points {
        graph.validate_point(p)?;
        if let GraphPoint::Edge { edge, offset } = p {
            cuts.entry(*edge).or_default().insert(offset.clone());
        }
    }

    let mut taken: HashSet<String> = graph.vertices.iter().cloned().collect();
    taken.extend(graph.edges.iter().map(|e| e.id.clone()));
    let mut fresh = |base: String| {
        let mut name = base;
        while taken.contains(&name) {
            name.push('\'');
        }
        taken.insert(name.clone());
        name
    };

    let mut vertices = graph.vertices.clone();
    let mut edges = Vec::new();
    let mut pieces = Vec::with_capacity(graph.edge_count());
    let mut edge_origin = Vec::new();

    for (ei, e) in graph.edges.iter().enumerate() {
        let Some(offsets) = cuts.get(&ei) else {
            pieces.push(vec![Piece { edge: edges.len(), from: Q::zero(), to: e.len.clone() }]);
            edge_origin.push((ei, Q::zero()));
            edges.push(e.clone());
            continue;
        };
        let mut ends = vec![(Q::zero(), e.src)];
        for off in offsets {
            vertices.push(fresh(format!("{}@{}", e.id, off)));
            ends.push((off.clone(), vertices.len() - 1));
        }
        ends.push((e.len.clone(), e.dst));
        let mut own = Vec::new();
        for (k, w) in ends.windows(2).enumerate() {
            let (from, a) = &w[0];
            let (to, b) = &w[1];
            own.push(Piece { edge: edges.len(), from: from.clone(), to: to.clone() });
            edge_origin.push((ei, from.clone()));
            edges.push(Edge { id: fresh(format!("{}.{}", e.id, k)), src: *a, dst: *b, len: to - from });
        }
        pieces.push(own);
    }

    let vertex_map = (0..graph.vertex_count()).collect();
    Ok(Subdivision { graph: MetricGraph::new(vertices, edges)?, pieces, vertex_map, edge_origin })
}

/// A model of the same metric graph with no loops and no parallel edges.
///
/// Loops are cut at their thirds; each member of a parallel family is cut at
/// its midpoint.
pub fn simple_loopless_model(graph: &MetricGraph) -> Subdivision {
    let mut families: BTreeMap<(VertexIx, VertexIx), Vec<EdgeIx>> = BTreeMap::new();
    let mut points = Vec::new();
    for (i, e) in graph.edges.iter().enumerate() {
        if e.is_loop() {
            points.push(GraphPoint::Edge { edge: i, offset: &e.len / rational::int(3) });
            points.push(GraphPoint::Edge { edge: i, offset: &e.len * rational::frac(2, 3) });
        } else {
            families.entry((e.src.min(e.dst), e.src.max(e.dst))).or_default().push(i);
        }
    }
    for family in families.values().filter(|f| f.len() > 1) {
        for &i in family {
            points.push(GraphPoint::Edge { edge: i, offset: &graph.edges[i].len / rational::int(2) });
        }
    }
    subdivide(graph, &points).expect("cut points are interior")
}

/// Rooted spanning tree with parent pointers.
#[derive(Debug, Clone)]
pub struct SpanningTree {
    /// `(parent vertex, edge to parent)`; `None` at the root.
    parent: Vec<Option<(VertexIx, EdgeIx)>>,
    depth: Vec<usize>,
    in_tree: Vec<bool>,
}

impl SpanningTree {
    /// Breadth-first from vertex 0, scanning incident edges in edge order.
    pub fn bfs(graph: &MetricGraph) -> Self {
        let mut tree = SpanningTree::empty(graph);
        let mut queue = VecDeque::from([0]);
        let mut seen = vec![false; graph.vertex_count()];
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &(e, end) in graph.incident(v) {
                let w = graph.far_end(e, end);
                if !seen[w] {
                    seen[w] = true;
                    tree.attach(w, v, e);
                    queue.push_back(w);
                }
            }
        }
        tree
    }

    /// Depth-first from the last vertex, scanning incident edges in reverse order.
    pub fn dfs(graph: &MetricGraph) -> Self {
        let mut tree = SpanningTree::empty(graph);
        let root = graph.vertex_count() - 1;
        let mut seen = vec![false; graph.vertex_count()];
        seen[root] = true;
        let mut stack = vec![root];
        while let Some(&v) = stack.last() {
            let next = graph
                .incident(v)
                .iter()
                .rev()
                .map(|&(e, end)| (e, graph.far_end(e, end)))
                .find(|&(_, w)| !seen[w]);
            match next {
                Some((e, w)) => {
                    seen[w] = true;
                    tree.attach(w, v, e);
                    stack.push(w);
                }
                None => {
                    stack.pop();
                }
            }
        }
        tree
    }

    fn empty(graph: &MetricGraph) -> Self {
        SpanningTree {
            parent: vec![None; graph.vertex_count()],
            depth: vec![0; graph.vertex_count()],
            in_tree: vec![false; graph.edge_count()],
        }
    }

    fn attach(&mut self, child: VertexIx, parent: VertexIx, e: EdgeIx) {
        self.parent[child] = Some((parent, e));
        self.depth[child] = self.depth[parent] + 1;
        self.in_tree[e] = true;
    }

    pub fn contains(&self, e: EdgeIx) -> bool {
        self.in_tree[e]
    }

    pub fn edges(&self) -> Vec<EdgeIx> {
        (0..self.in_tree.len()).filter(|&e| self.in_tree[e]).collect()
    }

    /// Tree path from `from` to `to` as `(edge, +1 if traversed source->target else -1)`.
    pub fn path(&self, graph: &MetricGraph, from: VertexIx, to: VertexIx) -> Vec<(EdgeIx, i64)> {
        let step = |v: VertexIx| self.parent[v].expect("non-root vertex has a parent");
        let (mut a, mut b) = (from, to);
        let mut up = Vec::new();
        let mut down = Vec::new();
        while a != b {
            if self.depth[a] >= self.depth[b] {
                let (p, e) = step(a);
                up.push((e, if graph.edges[e].src == a { 1 } else { -1 }));
                a = p;
            } else {
                let (p, e) = step(b);
                down.push((e, if graph.edges[e].src == p { 1 } else { -1 }));
                b = p;
            }
        }
        up.extend(down.into_iter().rev());
        up
    }
}

/// Fundamental cycles of the BFS spanning tree, one per non-tree edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleBasis {
    /// `g x m` matrix; row `i` is the `i`-th cycle in edge coordinates.
    pub cycles: Vec<Vec<i64>>,
    pub tree_edges: Vec<EdgeIx>,
}

impl CycleBasis {
    pub fn genus(&self) -> usize {
        self.cycles.len()
    }

    /// Signed endpoint sum of a 1-chain; zero exactly for cycles.
    pub fn boundary(graph: &MetricGraph, chain: &[i64]) -> Vec<i64> {
        let mut b = vec![0; graph.vertex_count()];
        for (e, c) in chain.iter().enumerate() {
            b[graph.edges[e].dst] += c;
            b[graph.edges[e].src] -= c;
        }
        b
    }

    /// Replaces each cycle by its image in a refinement of the graph.
    pub fn transport(&self, sub: &Subdivision) -> CycleBasis {
        let tree_edges = self
            .tree_edges
            .iter()
            .flat_map(|&e| sub.pieces[e].iter().map(|p| p.edge))
            .collect();
        CycleBasis { cycles: self.cycles.iter().map(|c| sub.transport_chain(c)).collect(), tree_edges }
    }
}

pub fn homology_basis(graph: &MetricGraph) -> CycleBasis {
    let tree = SpanningTree::bfs(graph);
    let mut cycles = Vec::new();
    for (i, e) in graph.edges.iter().enumerate() {
        if tree.contains(i) {
            continue;
        }
        let mut row = vec![0; graph.edge_count()];
        row[i] = 1;
        for (f, sign) in tree.path(graph, e.dst, e.src) {
            row[f] += sign;
        }
        cycles.push(row);
    }
    CycleBasis { cycles, tree_edges: tree.edges() }
}
