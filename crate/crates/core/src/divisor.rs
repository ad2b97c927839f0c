//! Divisors: finitely supported integer combinations of graph points.

use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{GraphPoint, MetricGraph, PointJson, Subdivision};

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Divisor {
    support: BTreeMap<GraphPoint, i64>,
}

impl Divisor {
    pub fn zero() -> Self {
        Divisor::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (GraphPoint, i64)>>(pairs: I) -> Self {
        let mut d = Divisor::zero();
        for (p, m) in pairs {
            d.add_at(p, m);
        }
        d
    }

    /// `(p) - (q)`.
    pub fn difference(p: GraphPoint, q: GraphPoint) -> Self {
        Divisor::from_pairs([(p, 1), (q, -1)])
    }

    pub fn add_at(&mut self, p: GraphPoint, m: i64) {
        let slot = self.support.entry(p).or_insert(0);
        *slot += m;
        if *slot == 0 {
            self.support.retain(|_, m| *m != 0);
        }
    }

    pub fn degree(&self) -> i64 {
        self.support.values().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn multiplicity(&self, p: &GraphPoint) -> i64 {
        self.support.get(p).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GraphPoint, i64)> {
        self.support.iter().map(|(p, m)| (p, *m))
    }

    pub fn points(&self) -> impl Iterator<Item = &GraphPoint> {
        self.support.keys()
    }

    pub fn validate(&self, graph: &MetricGraph) -> Result<()> {
        self.points().try_for_each(|p| graph.validate_point(p))
    }

    /// The same divisor expressed on a refined model.
    pub fn on_subdivision(&self, sub: &Subdivision) -> Divisor {
        Divisor::from_pairs(self.iter().map(|(p, m)| (sub.map_point(p), m)))
    }

    pub fn to_json(&self, graph: &MetricGraph) -> Vec<DivisorTermJson> {
        self.iter()
            .map(|(p, m)| DivisorTermJson { at: graph.point_to_json(p), mult: m })
            .collect()
    }

    pub fn from_json(graph: &MetricGraph, terms: &[DivisorTermJson]) -> Result<Self> {
        let mut d = Divisor::zero();
        for t in terms {
            d.add_at(graph.point_from_json(&t.at)?, t.mult);
        }
        Ok(d)
    }
}

impl Add for &Divisor {
    type Output = Divisor;

    fn add(self, rhs: &Divisor) -> Divisor {
        let mut out = self.clone();
        for (p, m) in rhs.iter() {
            out.add_at(p.clone(), m);
        }
        out
    }
}

impl Neg for &Divisor {
    type Output = Divisor;

    fn neg(self) -> Divisor {
        Divisor::from_pairs(self.iter().map(|(p, m)| (p.clone(), -m)))
    }
}

impl Sub for &Divisor {
    type Output = Divisor;

    fn sub(self, rhs: &Divisor) -> Divisor {
        self + &(-rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivisorTermJson {
    pub at: PointJson,
    pub mult: i64,
}
