//! Jacobians of unit-length graphs: the cokernel of the reduced Laplacian and
//! the cokernel of the cycle Gram matrix, computed through Smith normal form.

use std::fmt;

use num::{BigInt, Integer, One, Signed, Zero};

use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::graph::{homology_basis, GraphPoint, MetricGraph};
use crate::linalg;
use crate::rational::Q;

pub type ZMatrix = Vec<Vec<BigInt>>;

/// `s = u * m * v` with `u`, `v` unimodular and `s` diagonal, each diagonal
/// entry dividing the next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub u: ZMatrix,
    pub s: ZMatrix,
    pub v: ZMatrix,
}

impl SmithForm {
    pub fn diagonal(&self) -> Vec<BigInt> {
        let k = self.s.len().min(self.s.first().map_or(0, Vec::len));
        (0..k).map(|i| self.s[i][i].clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|d| !d.is_zero()).count()
    }
}

fn identity(n: usize) -> ZMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

fn swap_cols(m: &mut ZMatrix, a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

/// row[dst] -= q * row[src]
fn row_axpy(m: &mut ZMatrix, dst: usize, src: usize, q: &BigInt) {
    let src_row = m[src].clone();
    for (x, y) in m[dst].iter_mut().zip(&src_row) {
        *x -= q * y;
    }
}

/// col[dst] -= q * col[src]
fn col_axpy(m: &mut ZMatrix, dst: usize, src: usize, q: &BigInt) {
    for row in m.iter_mut() {
        let y = row[src].clone();
        row[dst] -= q * y;
    }
}

/// Smith normal form with smallest-magnitude pivoting.
pub fn smith_normal_form(m: &[Vec<BigInt>]) -> SmithForm {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut s: ZMatrix = m.to_vec();
    let mut u = identity(rows);
    let mut v = identity(cols);

    for t in 0..rows.min(cols) {
        loop {
            let pivot = (t..rows)
                .flat_map(|i| (t..cols).map(move |j| (i, j)))
                .filter(|&(i, j)| !s[i][j].is_zero())
                .min_by(|&(a, b), &(c, d)| s[a][b].abs().cmp(&s[c][d].abs()));
            let Some((pi, pj)) = pivot else {
                return SmithForm { u, s, v };
            };
            s.swap(t, pi);
            u.swap(t, pi);
            swap_cols(&mut s, t, pj);
            swap_cols(&mut v, t, pj);

            let mut clean = true;
            for i in t + 1..rows {
                if s[i][t].is_zero() {
                    continue;
                }
                let q = s[i][t].div_floor(&s[t][t]);
                row_axpy(&mut s, i, t, &q);
                row_axpy(&mut u, i, t, &q);
                clean &= s[i][t].is_zero();
            }
            for j in t + 1..cols {
                if s[t][j].is_zero() {
                    continue;
                }
                let q = s[t][j].div_floor(&s[t][t]);
                col_axpy(&mut s, j, t, &q);
                col_axpy(&mut v, j, t, &q);
                clean &= s[t][j].is_zero();
            }
            if !clean {
                continue;
            }
            // the pivot must divide the rest of the block
            let offender = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !s[i][j].is_multiple_of(&s[t][t])));
            match offender {
                Some(i) => {
                    let one = BigInt::from(-1);
                    row_axpy(&mut s, t, i, &one);
                    row_axpy(&mut u, t, i, &one);
                }
                None => break,
            }
        }
        if s[t][t].is_negative() {
            for x in s[t].iter_mut().chain(u[t].iter_mut()) {
                *x = -x.clone();
            }
        }
    }
    SmithForm { u, s, v }
}

/// A finitely generated abelian group `Z^r x Z/d1 x ... x Z/dk`, `d1 | d2 | ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteAbelianGroup {
    pub factors: Vec<BigInt>,
    pub free_rank: usize,
}

impl FiniteAbelianGroup {
    /// Cokernel `Z^rows / im(m)`.
    pub fn cokernel(m: &[Vec<BigInt>]) -> Self {
        let rows = m.len();
        let snf = smith_normal_form(m);
        let diag = snf.diagonal();
        let factors = diag.iter().filter(|d| !d.is_zero() && !d.is_one()).cloned().collect();
        FiniteAbelianGroup { factors, free_rank: rows - snf.rank() }
    }

    pub fn trivial() -> Self {
        FiniteAbelianGroup { factors: Vec::new(), free_rank: 0 }
    }

    /// `None` for infinite groups.
    pub fn order(&self) -> Option<BigInt> {
        (self.free_rank == 0).then(|| self.factors.iter().product())
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty() && self.free_rank == 0
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts: Vec<String> = Vec::new();
        if self.free_rank > 0 {
            parts.push(if self.free_rank == 1 { "Z".into() } else { format!("Z^{}", self.free_rank) });
        }
        parts.extend(self.factors.iter().map(|d| format!("Z/{d}")));
        write!(f, "{}", parts.join(" x "))
    }
}

/// Combinatorial Laplacian with vertex 0 deleted; loops contribute nothing,
/// parallel edges add up.
pub fn reduced_laplacian(graph: &MetricGraph) -> ZMatrix {
    let n = graph.vertex_count();
    let mut lap = vec![vec![BigInt::zero(); n]; n];
    for e in graph.edges().iter().filter(|e| !e.is_loop()) {
        lap[e.src][e.src] += 1;
        lap[e.dst][e.dst] += 1;
        lap[e.src][e.dst] -= 1;
        lap[e.dst][e.src] -= 1;
    }
    lap.into_iter().skip(1).map(|row| row.into_iter().skip(1).collect()).collect()
}

/// Integer Gram matrix of the cycle basis under `<e, e'> = [e = e']`.
pub fn cycle_gram(graph: &MetricGraph) -> ZMatrix {
    let basis = homology_basis(graph);
    basis
        .cycles
        .iter()
        .map(|a| basis.cycles.iter().map(|b| BigInt::from(a.iter().zip(b).map(|(x, y)| x * y).sum::<i64>())).collect())
        .collect()
}

pub fn discrete_jacobian_via_laplacian(graph: &MetricGraph) -> Result<FiniteAbelianGroup> {
    graph.has_unit_lengths()?;
    Ok(FiniteAbelianGroup::cokernel(&reduced_laplacian(graph)))
}

pub fn discrete_jacobian_via_pairing(graph: &MetricGraph) -> Result<FiniteAbelianGroup> {
    graph.has_unit_lengths()?;
    Ok(FiniteAbelianGroup::cokernel(&cycle_gram(graph)))
}

/// Matrix-tree theorem: the determinant of the reduced Laplacian.
pub fn spanning_tree_count(graph: &MetricGraph) -> BigInt {
    linalg::det_integer(&reduced_laplacian(graph))
}

/// Whether a divisor supported on vertices is trivial in the Laplacian
/// presentation, i.e. lies in the integer image of the Laplacian.
pub fn is_trivial_class(graph: &MetricGraph, d: &Divisor) -> Result<bool> {
    graph.has_unit_lengths()?;
    d.validate(graph)?;
    if d.degree() != 0 {
        return Ok(false);
    }
    let mut chips = vec![Q::zero(); graph.vertex_count()];
    for (p, m) in d.iter() {
        match p {
            GraphPoint::Vertex(v) => chips[*v] = Q::from_integer(BigInt::from(m)),
            GraphPoint::Edge { .. } => {
                return Err(Error::Invalid("divisor is not supported on vertices".into()));
            }
        }
    }
    let lap: Vec<Vec<Q>> = reduced_laplacian(graph)
        .into_iter()
        .map(|r| r.into_iter().map(Q::from_integer).collect())
        .collect();
    let x = linalg::solve(&lap, &chips[1..]).expect("reduced Laplacian of a connected graph is nonsingular");
    Ok(x.iter().all(|q| q.is_integer()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::rational::int;

    fn zm(rows: &[&[i64]]) -> ZMatrix {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn check_snf(m: &ZMatrix) -> SmithForm {
        let snf = smith_normal_form(m);
        assert_eq!(linalg::mul(&linalg::mul(&snf.u, m), &snf.v), snf.s);
        for (i, row) in snf.s.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                assert!(i == j || x.is_zero());
            }
        }
        assert!(linalg::det_integer(&snf.u).abs().is_one());
        assert!(linalg::det_integer(&snf.v).abs().is_one());
        snf
    }

    #[test]
    fn snf_examples() {
        assert_eq!(check_snf(&zm(&[&[1, 0], &[0, 1]])).diagonal(), vec![BigInt::from(1), BigInt::from(1)]);
        assert_eq!(check_snf(&zm(&[&[2, 1], &[1, 2]])).diagonal(), vec![BigInt::from(1), BigInt::from(3)]);
        assert_eq!(check_snf(&zm(&[&[0, 0], &[0, 0]])).diagonal(), vec![BigInt::zero(), BigInt::zero()]);
        assert_eq!(check_snf(&zm(&[&[2, 0], &[0, 3]])).diagonal(), vec![BigInt::from(1), BigInt::from(6)]);
        assert_eq!(check_snf(&zm(&[&[4, 6, 8]])).diagonal(), vec![BigInt::from(2)]);
        assert_eq!(check_snf(&zm(&[&[0, 2], &[-4, 0], &[0, 0]])).diagonal(), vec![BigInt::from(2), BigInt::from(4)]);
    }

    #[test]
    fn group_display() {
        assert_eq!(FiniteAbelianGroup::trivial().to_string(), "0");
        let g = FiniteAbelianGroup { factors: vec![BigInt::from(4), BigInt::from(4)], free_rank: 0 };
        assert_eq!(g.to_string(), "Z/4 x Z/4");
        assert_eq!(g.order(), Some(BigInt::from(16)));
        let free = FiniteAbelianGroup::cokernel(&zm(&[&[2, 0], &[0, 0]]));
        assert_eq!(free.to_string(), "Z x Z/2");
        assert_eq!(free.order(), None);
    }

    #[test]
    fn tree_has_trivial_jacobian() {
        let g = MetricGraph::from_lengths(4, &[(0, 1, int(1)), (1, 2, int(1)), (1, 3, int(1))]).unwrap();
        assert!(discrete_jacobian_via_laplacian(&g).unwrap().is_trivial());
        assert!(discrete_jacobian_via_pairing(&g).unwrap().is_trivial());
        assert_eq!(spanning_tree_count(&g), BigInt::one());
    }

    #[test]
    fn banana_three() {
        let g = theta(int(1), int(1), int(1));
        assert_eq!(reduced_laplacian(&g), zm(&[&[3]]));
        let expected = FiniteAbelianGroup { factors: vec![BigInt::from(3)], free_rank: 0 };
        assert_eq!(discrete_jacobian_via_laplacian(&g).unwrap(), expected);
        assert_eq!(discrete_jacobian_via_pairing(&g).unwrap(), expected);
    }

    #[test]
    fn triangle_circle() {
        let g = MetricGraph::from_lengths(3, &[(0, 1, int(1)), (1, 2, int(1)), (2, 0, int(1))]).unwrap();
        assert_eq!(cycle_gram(&g), zm(&[&[3]]));
        assert_eq!(discrete_jacobian_via_pairing(&g).unwrap().to_string(), "Z/3");
    }

    #[test]
    fn k4_two_routes() {
        let g = k4();
        let lap = discrete_jacobian_via_laplacian(&g).unwrap();
        assert_eq!(lap, discrete_jacobian_via_pairing(&g).unwrap());
        assert_eq!(lap.order(), Some(BigInt::from(16)));
        assert_eq!(spanning_tree_count(&g), BigInt::from(16));
    }

    #[test]
    fn cycle_counts() {
        for n in 3..9 {
            let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, int(1))).collect();
            let g = MetricGraph::from_lengths(n, &edges).unwrap();
            assert_eq!(spanning_tree_count(&g), BigInt::from(n));
        }
    }

    #[test]
    fn rejects_non_unit_lengths() {
        let g = circle(int(2));
        assert_eq!(discrete_jacobian_via_laplacian(&g), Err(Error::NonUnitLengths("e0".into())));
        assert_eq!(discrete_jacobian_via_pairing(&g), Err(Error::NonUnitLengths("e0".into())));
    }

    #[test]
    fn vertex_classes_on_banana() {
        let g = theta(int(1), int(1), int(1));
        let d = Divisor::difference(GraphPoint::Vertex(0), GraphPoint::Vertex(1));
        assert!(!is_trivial_class(&g, &d).unwrap());
        let triple = Divisor::from_pairs([(GraphPoint::Vertex(0), 3), (GraphPoint::Vertex(1), -3)]);
        assert!(is_trivial_class(&g, &triple).unwrap());
    }
}
