//! Period matrices, Jacobian points, the Abel-Jacobi map, and the two
//! independent routes to deciding whether a divisor is principal: the
//! lattice test on its Abel-Jacobi class, and solving the weighted Laplacian
//! for a function with that divisor.
//!
//! Jacobian coordinates are relative to the cycle basis produced by
//! [`homology_basis`]; coordinate `i` of a point is the edge-length pairing of
//! a path chain with the `i`-th basis cycle.

use num::{BigInt, Zero};

use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::function::PlFunction;
use crate::graph::{homology_basis, subdivide, CycleBasis, GraphPoint, MetricGraph, SpanningTree};
use crate::linalg::{self, QMatrix};
use crate::rational::{self, Q};

/// Name of the basis convention, carried in serialized Jacobian points.
pub const BASIS_TAG: &str = "bfs-v1";

/// Gram matrix of the edge-length pairing on a cycle basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodMatrix {
    pub gram: QMatrix,
    pub basis: CycleBasis,
}

impl PeriodMatrix {
    pub fn genus(&self) -> usize {
        self.gram.len()
    }

    pub fn is_positive_definite(&self) -> bool {
        linalg::is_positive_definite(&self.gram)
    }

    /// Integer coefficients `c` with `v = sum c_i * gram[i]`, if `v` lies in the period lattice.
    pub fn lattice_coefficients(&self, v: &[Q]) -> Option<Vec<BigInt>> {
        assert_eq!(v.len(), self.genus(), "vector has the wrong dimension");
        // the gram matrix is symmetric, so row combinations solve gram * c = v
        let c = linalg::solve(&self.gram, v).expect("period matrix is nonsingular");
        c.iter().map(|x| rational::is_integral(x).then(|| x.to_integer())).collect()
    }

    pub fn lattice_member(&self, v: &[Q]) -> bool {
        self.lattice_coefficients(v).is_some()
    }
}

pub fn period_matrix(graph: &MetricGraph, basis: &CycleBasis) -> PeriodMatrix {
    let g = basis.genus();
    let mut gram = vec![vec![Q::zero(); g]; g];
    for i in 0..g {
        for j in i..g {
            let mut acc = Q::zero();
            for (e, edge) in graph.edges().iter().enumerate() {
                let c = basis.cycles[i][e] * basis.cycles[j][e];
                if c != 0 {
                    acc += &edge.len * rational::int(c);
                }
            }
            gram[j][i] = acc.clone();
            gram[i][j] = acc;
        }
    }
    PeriodMatrix { gram, basis: basis.clone() }
}

/// `true` with the coefficient vector when `v` lies in the lattice spanned by the gram rows.
pub fn lattice_member(pm: &PeriodMatrix, v: &[Q]) -> (bool, Option<Vec<BigInt>>) {
    let c = pm.lattice_coefficients(v);
    (c.is_some(), c)
}

/// A point of the Jacobian torus, represented by any lift of its coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JacobianPoint {
    pub coords: Vec<Q>,
}

impl JacobianPoint {
    pub fn zero(genus: usize) -> Self {
        JacobianPoint { coords: vec![Q::zero(); genus] }
    }

    pub fn sub(&self, other: &JacobianPoint) -> Vec<Q> {
        self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect()
    }

    /// Equality on the torus: the difference lies in the period lattice.
    pub fn lattice_eq(&self, other: &JacobianPoint, pm: &PeriodMatrix) -> bool {
        pm.lattice_member(&self.sub(other))
    }

    pub fn is_zero_in(&self, pm: &PeriodMatrix) -> bool {
        pm.lattice_member(&self.coords)
    }
}

/// How a path between two points is chosen. Different strategies give
/// different chains whose Abel-Jacobi images agree modulo periods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathStrategy {
    /// BFS tree from vertex 0; leave and enter edge interiors through the source end.
    Bfs,
    /// DFS tree from the last vertex; leave and enter edge interiors through the target end.
    Dfs,
}

/// Signed length traversed on each edge by the chosen path from `from` to `to`.
pub fn path_chain(graph: &MetricGraph, from: &GraphPoint, to: &GraphPoint, strategy: PathStrategy) -> Vec<Q> {
    let mut chain = vec![Q::zero(); graph.edge_count()];
    if let (GraphPoint::Edge { edge: a, offset: oa }, GraphPoint::Edge { edge: b, offset: ob }) = (from, to) {
        if a == b && strategy == PathStrategy::Bfs {
            chain[*a] = ob - oa;
            return chain;
        }
    }
    let tree = match strategy {
        PathStrategy::Bfs => SpanningTree::bfs(graph),
        PathStrategy::Dfs => SpanningTree::dfs(graph),
    };
    let exit_via_source = strategy == PathStrategy::Bfs;
    let start = match from {
        GraphPoint::Vertex(v) => *v,
        GraphPoint::Edge { edge, offset } => {
            let e = graph.edge(*edge);
            if exit_via_source {
                chain[*edge] -= offset;
                e.src
            } else {
                chain[*edge] += &e.len - offset;
                e.dst
            }
        }
    };
    let (end, tail) = match to {
        GraphPoint::Vertex(v) => (*v, None),
        GraphPoint::Edge { edge, offset } => {
            let e = graph.edge(*edge);
            if exit_via_source {
                (e.src, Some((*edge, offset.clone())))
            } else {
                (e.dst, Some((*edge, offset - &e.len)))
            }
        }
    };
    for (e, sign) in tree.path(graph, start, end) {
        chain[e] += graph.len(e) * rational::int(sign);
    }
    if let Some((e, delta)) = tail {
        chain[e] += delta;
    }
    chain
}

/// Coordinates of a length chain: its pairing with each basis cycle.
pub fn pair_with_basis(basis: &CycleBasis, chain: &[Q]) -> Vec<Q> {
    basis
        .cycles
        .iter()
        .map(|cycle| {
            cycle
                .iter()
                .zip(chain)
                .filter(|(c, _)| **c != 0)
                .fold(Q::zero(), |acc, (c, x)| acc + x * rational::int(*c))
        })
        .collect()
}

pub fn abel_jacobi(graph: &MetricGraph, basis: &CycleBasis, base: &GraphPoint, p: &GraphPoint) -> JacobianPoint {
    abel_jacobi_along(graph, basis, base, p, PathStrategy::Bfs)
}

pub fn abel_jacobi_along(
    graph: &MetricGraph,
    basis: &CycleBasis,
    base: &GraphPoint,
    p: &GraphPoint,
    strategy: PathStrategy,
) -> JacobianPoint {
    JacobianPoint { coords: pair_with_basis(basis, &path_chain(graph, base, p, strategy)) }
}

/// `sum mult(x) * AJ(x)` for a divisor of any degree.
pub fn abel_jacobi_divisor(
    graph: &MetricGraph,
    basis: &CycleBasis,
    base: &GraphPoint,
    d: &Divisor,
    strategy: PathStrategy,
) -> JacobianPoint {
    let mut coords = vec![Q::zero(); basis.genus()];
    for (p, m) in d.iter() {
        let aj = abel_jacobi_along(graph, basis, base, p, strategy);
        for (c, x) in coords.iter_mut().zip(aj.coords) {
            *c += x * rational::int(m);
        }
    }
    JacobianPoint { coords }
}

/// Class of a degree-zero divisor in the Jacobian.
pub fn divisor_class(graph: &MetricGraph, basis: &CycleBasis, base: &GraphPoint, d: &Divisor) -> Result<JacobianPoint> {
    divisor_class_along(graph, basis, base, d, PathStrategy::Bfs)
}

pub fn divisor_class_along(
    graph: &MetricGraph,
    basis: &CycleBasis,
    base: &GraphPoint,
    d: &Divisor,
    strategy: PathStrategy,
) -> Result<JacobianPoint> {
    graph.validate_point(base)?;
    d.validate(graph)?;
    if d.degree() != 0 {
        return Err(Error::NonZeroDegree(d.degree()));
    }
    Ok(abel_jacobi_divisor(graph, basis, base, d, strategy))
}

/// Principal iff degree zero and the Abel-Jacobi class lies in the period lattice.
pub fn is_principal(graph: &MetricGraph, d: &Divisor) -> bool {
    if d.validate(graph).is_err() || d.degree() != 0 {
        return false;
    }
    let basis = homology_basis(graph);
    if basis.genus() == 0 {
        return true;
    }
    let pm = period_matrix(graph, &basis);
    let class = divisor_class(graph, &basis, &GraphPoint::Vertex(0), d).expect("degree checked");
    class.is_zero_in(&pm)
}

/// Oriented edge steps of a basis cycle arranged as a closed walk.
pub fn cycle_walk(graph: &MetricGraph, cycle: &[i64]) -> Vec<(usize, i64)> {
    let mut remaining: Vec<(usize, i64)> = cycle
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0)
        .map(|(e, c)| {
            assert!(c.abs() == 1, "walks are defined for cycles with unit coefficients");
            (e, *c)
        })
        .collect();
    let Some(first) = remaining.first().copied() else {
        return Vec::new();
    };
    let head = |(e, s): (usize, i64)| if s > 0 { graph.edge(e).dst } else { graph.edge(e).src };
    let tail = |(e, s): (usize, i64)| if s > 0 { graph.edge(e).src } else { graph.edge(e).dst };
    remaining.remove(0);
    let mut walk = vec![first];
    while !remaining.is_empty() {
        let at = head(*walk.last().expect("walk is non-empty"));
        let k = remaining
            .iter()
            .position(|&step| tail(step) == at)
            .expect("basis cycle is a closed walk");
        walk.push(remaining.remove(k));
    }
    assert_eq!(head(*walk.last().unwrap()), tail(walk[0]), "walk closes up");
    walk
}

/// Total Abel-Jacobi increment accumulated by walking once around basis cycle `i`,
/// one half-edge at a time.
pub fn cycle_increment(graph: &MetricGraph, basis: &CycleBasis, i: usize) -> Vec<Q> {
    let two = rational::int(2);
    let mut total = vec![Q::zero(); basis.genus()];
    for (e, sign) in cycle_walk(graph, &basis.cycles[i]) {
        let half = graph.len(e) / &two;
        let mid = GraphPoint::Edge { edge: e, offset: half.clone() };
        let (start, end) = if sign > 0 {
            (GraphPoint::Vertex(graph.edge(e).src), GraphPoint::Vertex(graph.edge(e).dst))
        } else {
            (GraphPoint::Vertex(graph.edge(e).dst), GraphPoint::Vertex(graph.edge(e).src))
        };
        for (a, b) in [(&start, &mid), (&mid, &end)] {
            let mut step = vec![Q::zero(); graph.edge_count()];
            step[e] = &half * rational::int(sign);
            debug_assert!(step_is_local(graph, a, b, &step));
            for (t, x) in total.iter_mut().zip(pair_with_basis(basis, &step)) {
                *t += x;
            }
        }
    }
    total
}

fn step_is_local(graph: &MetricGraph, a: &GraphPoint, b: &GraphPoint, step: &[Q]) -> bool {
    let pos = |p: &GraphPoint, e: usize| match p {
        GraphPoint::Vertex(v) if *v == graph.edge(e).src => Q::zero(),
        GraphPoint::Vertex(_) => graph.len(e).clone(),
        GraphPoint::Edge { offset, .. } => offset.clone(),
    };
    step.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .all(|(e, x)| graph.edge(e).is_loop() || pos(b, e) - pos(a, e) == *x)
}

/// A tropical meromorphic function `F` with `div(F) = d` and `F(gauge) = 0`.
///
/// Solves the Laplacian of the model refined at `supp(d)` and `gauge`, with
/// edge weights `1/len`, and interpolates linearly. The lattice test and the
/// integrality of the solved slopes must agree; a disagreement is reported as
/// [`Error::InternalInconsistency`].
pub fn lift_to_function(graph: &MetricGraph, d: &Divisor, gauge: &GraphPoint) -> Result<PlFunction> {
    graph.validate_point(gauge)?;
    d.validate(graph)?;
    if d.degree() != 0 {
        return Err(Error::NotPrincipal);
    }
    let principal = is_principal(graph, d);

    let mut cut: Vec<GraphPoint> = d.points().cloned().collect();
    cut.push(gauge.clone());
    let sub = subdivide(graph, &cut)?;
    let fine = &sub.graph;
    let GraphPoint::Vertex(pin) = sub.map_point(gauge) else {
        unreachable!("gauge is a vertex of the refinement");
    };
    let target = d.on_subdivision(&sub);

    // reduced system: drop the pinned vertex's row and column
    let n = fine.vertex_count();
    let index: Vec<Option<usize>> = (0..n)
        .scan(0, |k, v| {
            Some(if v == pin {
                None
            } else {
                *k += 1;
                Some(*k - 1)
            })
        })
        .collect();
    let mut lap = vec![vec![Q::zero(); n - 1]; n - 1];
    for e in fine.edges().iter().filter(|e| !e.is_loop()) {
        let w = e.len.recip();
        for (a, b) in [(e.src, e.dst), (e.dst, e.src)] {
            if let Some(i) = index[a] {
                lap[i][i] += &w;
                if let Some(j) = index[b] {
                    lap[i][j] -= &w;
                }
            }
        }
    }
    // outgoing slope sum at v is -(L phi)(v), so L phi = -d
    let mut rhs = vec![Q::zero(); n - 1];
    for (p, m) in target.iter() {
        let GraphPoint::Vertex(v) = p else {
            unreachable!("support is refined to vertices");
        };
        if let Some(i) = index[*v] {
            rhs[i] = rational::int(-m);
        }
    }
    let phi_reduced = linalg::solve(&lap, &rhs).expect("reduced Laplacian of a connected graph is nonsingular");
    let values: Vec<Q> = index
        .iter()
        .map(|i| i.map_or_else(Q::zero, |i| phi_reduced[i].clone()))
        .collect();
    let f = PlFunction::from_subdivision(graph, &sub, &PlFunction::from_vertex_values(fine, &values))?;

    match (principal, f.is_integer_sloped()) {
        (true, true) => {
            let got = f.divisor(graph)?;
            if got != *d {
                return Err(Error::InternalInconsistency("solved function has the wrong divisor".into()));
            }
            Ok(f)
        }
        (false, false) => Err(Error::NotPrincipal),
        (true, false) => Err(Error::InternalInconsistency(
            "lattice test says principal but the solved slopes are not integral".into(),
        )),
        (false, true) => Err(Error::InternalInconsistency(
            "solved slopes are integral but the lattice test says not principal".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::unit_tents;
    use crate::graph::fixtures::*;
    use crate::rational::{frac, int};

    fn pt(edge: usize, offset: Q) -> GraphPoint {
        GraphPoint::Edge { edge, offset }
    }

    #[test]
    fn circle_period() {
        let g = circle(int(3));
        let pm = period_matrix(&g, &homology_basis(&g));
        assert_eq!(pm.gram, vec![vec![int(3)]]);
        assert!(pm.is_positive_definite());
    }

    #[test]
    fn theta_period() {
        let (a, b, c) = (frac(1, 2), int(2), frac(7, 3));
        let g = theta(a.clone(), b.clone(), c.clone());
        let pm = period_matrix(&g, &homology_basis(&g));
        assert_eq!(pm.gram, vec![vec![&a + &b, a.clone()], vec![a.clone(), &a + &c]]);
    }

    #[test]
    fn segment_has_empty_period_matrix() {
        let g = segment(1);
        let pm = period_matrix(&g, &homology_basis(&g));
        assert_eq!(pm.genus(), 0);
        assert_eq!(lattice_member(&pm, &[]), (true, Some(vec![])));
    }

    #[test]
    fn lattice_membership() {
        let g = circle(int(3));
        let pm = period_matrix(&g, &homology_basis(&g));
        assert!(pm.lattice_member(&[int(3)]));
        assert!(pm.lattice_member(&[int(-6)]));
        assert!(!pm.lattice_member(&[int(2)]));

        let g = theta(int(1), int(1), int(1));
        let pm = period_matrix(&g, &homology_basis(&g));
        assert_eq!(pm.gram, vec![vec![int(2), int(1)], vec![int(1), int(2)]]);
        assert_eq!(lattice_member(&pm, &[int(2), int(1)]), (true, Some(vec![BigInt::from(1), BigInt::from(0)])));
        assert_eq!(lattice_member(&pm, &[int(1), int(1)]), (false, None));
        for row in &pm.gram {
            assert!(pm.lattice_member(row));
        }
    }

    #[test]
    fn abel_jacobi_on_circle() {
        let l = int(5);
        let g = circle(l.clone());
        let basis = homology_basis(&g);
        let pm = period_matrix(&g, &basis);
        let base = GraphPoint::Vertex(0);
        assert_eq!(abel_jacobi(&g, &basis, &base, &base), JacobianPoint::zero(1));
        let d = frac(3, 2);
        let p = pt(0, d.clone());
        // one way round the loop gives d, the other d - L
        let forward = abel_jacobi_along(&g, &basis, &base, &p, PathStrategy::Bfs);
        let backward = abel_jacobi_along(&g, &basis, &base, &p, PathStrategy::Dfs);
        assert_eq!(forward.coords, vec![d.clone()]);
        assert_eq!(backward.coords, vec![&d - &l]);
        assert!(forward.lattice_eq(&backward, &pm));
    }

    #[test]
    fn classes_of_point_differences() {
        let g = circle(int(4));
        let basis = homology_basis(&g);
        let pm = period_matrix(&g, &basis);
        let d = Divisor::difference(pt(0, int(1)), GraphPoint::Vertex(0));
        let class = divisor_class(&g, &basis, &pt(0, frac(5, 2)), &d).unwrap();
        assert!(!class.is_zero_in(&pm));
        assert!(class.lattice_eq(&JacobianPoint { coords: vec![int(1)] }, &pm));
        assert_eq!(
            divisor_class(&g, &basis, &GraphPoint::Vertex(0), &Divisor::from_pairs([(GraphPoint::Vertex(0), 1)])),
            Err(Error::NonZeroDegree(1))
        );
        assert_eq!(divisor_class(&g, &basis, &GraphPoint::Vertex(0), &Divisor::zero()).unwrap(), JacobianPoint::zero(1));
    }

    #[test]
    fn segment_endpoints_are_equivalent() {
        let g = segment(3);
        let d = Divisor::difference(GraphPoint::Vertex(0), GraphPoint::Vertex(1));
        assert!(is_principal(&g, &d));
        let f = lift_to_function(&g, &d, &GraphPoint::Vertex(0)).unwrap();
        assert_eq!(f.divisor(&g).unwrap(), d);
        assert_eq!(f.eval(&GraphPoint::Vertex(0)), int(0));
    }

    #[test]
    fn distinct_points_on_circle_are_not_equivalent() {
        let g = circle(int(3));
        let d = Divisor::difference(pt(0, int(1)), GraphPoint::Vertex(0));
        assert!(!is_principal(&g, &d));
        assert_eq!(lift_to_function(&g, &d, &GraphPoint::Vertex(0)), Err(Error::NotPrincipal));
        let not_degree_zero = Divisor::from_pairs([(GraphPoint::Vertex(0), 2)]);
        assert!(!is_principal(&g, &not_degree_zero));
        assert_eq!(lift_to_function(&g, &not_degree_zero, &GraphPoint::Vertex(0)), Err(Error::NotPrincipal));
    }

    #[test]
    fn lifting_the_tent_divisor() {
        let g = segment(2);
        let d = Divisor::from_pairs([
            (GraphPoint::Vertex(0), 1),
            (GraphPoint::Vertex(1), 1),
            (pt(0, int(1)), -2),
        ]);
        let f = lift_to_function(&g, &d, &GraphPoint::Vertex(0)).unwrap();
        assert_eq!(f, unit_tents(&g));
        let shifted = lift_to_function(&g, &d, &pt(0, int(1))).unwrap();
        assert_eq!(shifted, unit_tents(&g).add_constant(&int(-1)));
    }

    #[test]
    fn zero_divisor_lifts_to_zero() {
        let g = theta(int(1), int(2), int(3));
        let f = lift_to_function(&g, &Divisor::zero(), &GraphPoint::Vertex(1)).unwrap();
        assert_eq!(f, PlFunction::constant(&g, int(0)));
    }

    #[test]
    fn lift_on_theta_interior_support() {
        // F = tents with slopes (1, 2, 3): its divisor lives partly in edge interiors
        let g = theta(int(2), int(3), int(4));
        let f = crate::function::tents(&g, &[int(1), int(2), int(3)]);
        let d = f.divisor(&g).unwrap();
        assert!(is_principal(&g, &d));
        let lifted = lift_to_function(&g, &d, &GraphPoint::Vertex(0)).unwrap();
        assert_eq!(lifted, f);
    }

    #[test]
    fn cycle_increments_are_gram_rows() {
        for g in [theta(int(1), frac(2, 3), int(5)), k4(), circle(int(7))] {
            let basis = homology_basis(&g);
            let pm = period_matrix(&g, &basis);
            for i in 0..basis.genus() {
                assert_eq!(cycle_increment(&g, &basis, i), pm.gram[i]);
            }
        }
    }
}
