//! Lattice graph machinery: the size S(B) of a finite set (a lattice Steiner
//! value), associated trees and tracks, enumeration of the interaction-set
//! collection 𝔅 = {B : 1 ≤ S(B) ≤ r}, the constants L and λ₀, and exhaustive
//! checks of the counting bounds built on them.

mod counting;
mod euler;
mod sets;
mod steiner;

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::lattice::{l1_distance, LatticePoint, Region};

pub use counting::{
    count_closed_tracks, verify_graph_bounds, verify_l_bound, verify_set_track_multiplicity,
    verify_sets_containing_bound, verify_track_count,
};
pub use euler::lexmin_euler_circuit;
pub(crate) use sets::binomial;
pub use sets::{enumerate_sets_containing, l_factor, l_max, lambda0, Lambda0, SetCatalog};
pub use steiner::{associated_graph, size_of};

/// A graph on lattice points whose edges all have length 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitGraph {
    vertices: Region,
    /// Sorted; each edge stored as (smaller, larger) endpoint.
    edges: Vec<(LatticePoint, LatticePoint)>,
}

impl UnitGraph {
    pub fn new(vertices: Region, edges: Vec<(LatticePoint, LatticePoint)>) -> Result<Self> {
        let mut canonical = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if !vertices.contains(&a) || !vertices.contains(&b) {
                return Err(Error::invalid("edge endpoint is not a vertex"));
            }
            if l1_distance(&a, &b)? != 1 {
                return Err(Error::invalid("edges of a unit graph must have length 1"));
            }
            canonical.push(if a < b { (a, b) } else { (b, a) });
        }
        canonical.sort();
        canonical.dedup();
        Ok(UnitGraph {
            vertices,
            edges: canonical,
        })
    }

    pub fn vertices(&self) -> &Region {
        &self.vertices
    }

    pub fn edges(&self) -> &[(LatticePoint, LatticePoint)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for (a, b) in &self.edges {
            let (i, j) = (
                self.vertices.index_of(a).unwrap(),
                self.vertices.index_of(b).unwrap(),
            );
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; adj.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut visited = 1;
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    visited += 1;
                    queue.push_back(u);
                }
            }
        }
        visited == adj.len()
    }

    /// Connected with exactly |V| − 1 edges.
    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.vertices.len() && self.is_connected()
    }

    /// Every edge duplicated, as a multigraph adjacency map.
    pub(crate) fn doubled(&self) -> BTreeMap<LatticePoint, BTreeMap<LatticePoint, u32>> {
        let mut multi: BTreeMap<LatticePoint, BTreeMap<LatticePoint, u32>> = BTreeMap::new();
        for v in self.vertices.iter() {
            multi.entry(v.clone()).or_default();
        }
        for (a, b) in &self.edges {
            *multi.get_mut(a).unwrap().entry(b.clone()).or_default() += 2;
            *multi.get_mut(b).unwrap().entry(a.clone()).or_default() += 2;
        }
        multi
    }
}

/// A closed walk (t₀,…,tₙ) with t₀ = tₙ and unit steps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Track {
    points: Vec<LatticePoint>,
}

impl Track {
    pub fn new(points: Vec<LatticePoint>) -> Result<Self> {
        let (first, last) = match (points.first(), points.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::invalid("a track needs at least one point")),
        };
        if first != last {
            return Err(Error::invalid("a track must return to its start"));
        }
        for w in points.windows(2) {
            if l1_distance(&w[0], &w[1])? != 1 {
                return Err(Error::invalid("consecutive track points must be at distance 1"));
            }
        }
        Ok(Track { points })
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    /// Number of steps n.
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn start(&self) -> &LatticePoint {
        &self.points[0]
    }
}

/// A finite set B ⊂ ℤ^ν with at least two points and its cached size S(B).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InteractionSet {
    points: Region,
    size: u32,
}

impl InteractionSet {
    pub fn new(points: Region, budget: &Budget) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("an interaction set needs at least two points"));
        }
        let size = size_of(&points, budget)?;
        Ok(InteractionSet { points, size })
    }

    pub(crate) fn with_size(points: Region, size: u32) -> Self {
        InteractionSet { points, size }
    }

    pub fn points(&self) -> &Region {
        &self.points
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    /// Membership in 𝔅 for interaction radius `r`.
    pub fn in_collection(&self, r: u32) -> bool {
        self.size >= 1 && self.size <= r
    }

    pub fn intersects(&self, other: &InteractionSet) -> bool {
        self.points.intersects(&other.points)
    }

    pub fn translate(&self, by: &LatticePoint) -> InteractionSet {
        InteractionSet {
            points: self.points.translate(by),
            size: self.size,
        }
    }

    /// The translate whose lexicographically smallest point is the origin.
    pub fn normalized(&self) -> InteractionSet {
        let shift = LatticePoint::origin(self.points.points()[0].dim()).difference(&self.points.points()[0]);
        self.translate(&shift)
    }
}

/// The associated track tr_B: the lexicographically first Eulerian circuit of
/// the edge-doubled associated graph, starting at its smallest vertex.
pub fn associated_track(b: &Region, budget: &Budget) -> Result<Track> {
    let graph = associated_graph(b, budget)?;
    let start = graph.vertices().points()[0].clone();
    euler::doubled_tree_track(&graph, &start)
}

/// As [`associated_track`], with the circuit pinned to start at `start`,
/// which must be a vertex of the associated graph.
pub fn associated_track_from(b: &Region, start: &LatticePoint, budget: &Budget) -> Result<Track> {
    let graph = associated_graph(b, budget)?;
    if !graph.vertices().contains(start) {
        return Err(Error::invalid(
            "track start is not a vertex of the associated graph",
        ));
    }
    euler::doubled_tree_track(&graph, start)
}

/// The extended track tr′_B of length 2r.
pub fn extended_track(b: &InteractionSet, r: u32, budget: &Budget) -> Result<Track> {
    let track = associated_track(b.points(), budget)?;
    euler::extend_track(track, b.size(), r)
}

/// As [`extended_track`], pinned to start at `start`.
pub fn extended_track_from(
    b: &InteractionSet,
    r: u32,
    start: &LatticePoint,
    budget: &Budget,
) -> Result<Track> {
    let track = associated_track_from(b.points(), start, budget)?;
    euler::extend_track(track, b.size(), r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn region(pts: &[&[i64]]) -> Region {
        Region::new(pts.iter().map(|c| LatticePoint::from(c.to_vec())).collect()).unwrap()
    }

    fn pts(pts: &[&[i64]]) -> Vec<LatticePoint> {
        pts.iter().map(|c| LatticePoint::from(c.to_vec())).collect()
    }

    #[test]
    fn track_validation() {
        assert!(Track::new(pts(&[&[0], &[1], &[0]])).is_ok());
        assert!(Track::new(pts(&[&[0], &[1]])).is_err());
        assert!(Track::new(pts(&[&[0], &[2], &[0]])).is_err());
        assert!(Track::new(vec![]).is_err());
    }

    #[test]
    fn unit_graph_rejects_long_edges() {
        let v = region(&[&[0], &[2]]);
        let e = vec![(LatticePoint::from([0]), LatticePoint::from([2]))];
        assert!(UnitGraph::new(v, e).is_err());
    }

    #[test]
    fn associated_tracks_small_cases() {
        let b = Budget::default();
        let t = associated_track(&region(&[&[0], &[1]]), &b).unwrap();
        assert_eq!(t.points(), pts(&[&[0], &[1], &[0]]).as_slice());
        let t = associated_track(&region(&[&[0], &[2]]), &b).unwrap();
        assert_eq!(t.points(), pts(&[&[0], &[1], &[2], &[1], &[0]]).as_slice());
        let t = associated_track_from(&region(&[&[0], &[2]]), &LatticePoint::from([1]), &b).unwrap();
        assert_eq!(t.points(), pts(&[&[1], &[0], &[1], &[2], &[1]]).as_slice());
        assert!(associated_track_from(&region(&[&[0], &[2]]), &LatticePoint::from([5]), &b).is_err());
    }

    #[test]
    fn extended_track_examples() {
        let b = Budget::default();
        let set = InteractionSet::new(region(&[&[0], &[1]]), &b).unwrap();
        let t = extended_track(&set, 1, &b).unwrap();
        assert_eq!(t.points(), pts(&[&[0], &[1], &[0]]).as_slice());
        let t = extended_track(&set, 2, &b).unwrap();
        assert_eq!(t.points(), pts(&[&[0], &[1], &[0], &[1], &[0]]).as_slice());
        assert_eq!(t.steps(), 4);

        let wide = InteractionSet::new(region(&[&[0], &[2]]), &b).unwrap();
        assert!(extended_track(&wide, 1, &b).is_err());
    }

    #[test]
    fn singleton_track_is_trivial() {
        let b = Budget::default();
        let t = associated_track(&region(&[&[4, 4]]), &b).unwrap();
        assert_eq!(t.steps(), 0);
    }

    #[test]
    fn normalized_moves_first_point_to_origin() {
        let b = Budget::default();
        let set = InteractionSet::new(region(&[&[3, 1], &[3, 2]]), &b).unwrap();
        let n = set.normalized();
        assert_eq!(n.points(), &region(&[&[0, 0], &[0, 1]]));
        assert_eq!(n.size(), 1);
    }
}
