//! Exact lattice Steiner trees.
//!
//! Clamping every coordinate into the bounding box of B maps unit edges to
//! unit edges or collapses them and fixes every point of B, so a 1-connected
//! graph with a vertex outside the box can always be shrunk. Every minimal
//! 1-connected graph therefore lives in the bounding box, and the searches
//! below are restricted to it.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use crate::budget::{guard, Budget};
use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, Region};

use super::sets::binomial;
use super::UnitGraph;

/// The grid graph on the bounding box of a region.
struct BoxGraph {
    lo: Vec<i64>,
    extent: Vec<usize>,
    strides: Vec<usize>,
    volume: usize,
}

impl BoxGraph {
    fn bounding(region: &Region) -> Self {
        let nu = region.dim().expect("nonempty region");
        let mut lo = vec![i64::MAX; nu];
        let mut hi = vec![i64::MIN; nu];
        for p in region.iter() {
            for (axis, &c) in p.coords().iter().enumerate() {
                lo[axis] = lo[axis].min(c);
                hi[axis] = hi[axis].max(c);
            }
        }
        let extent: Vec<usize> = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as usize).collect();
        let mut strides = vec![1usize; nu];
        for axis in (0..nu.saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * extent[axis + 1];
        }
        let volume = extent.iter().product();
        BoxGraph {
            lo,
            extent,
            strides,
            volume,
        }
    }

    /// Row-major index; increasing index order is lexicographic point order.
    fn index(&self, p: &LatticePoint) -> usize {
        p.coords()
            .iter()
            .enumerate()
            .map(|(axis, &c)| (c - self.lo[axis]) as usize * self.strides[axis])
            .sum()
    }

    fn point(&self, mut index: usize) -> LatticePoint {
        let coords = self
            .strides
            .iter()
            .enumerate()
            .map(|(axis, &stride)| {
                let c = index / stride;
                index %= stride;
                self.lo[axis] + c as i64
            })
            .collect::<Vec<_>>();
        LatticePoint::from(coords)
    }

    fn for_each_neighbour(&self, index: usize, mut f: impl FnMut(usize)) {
        for axis in 0..self.extent.len() {
            let c = (index / self.strides[axis]) % self.extent[axis];
            if c > 0 {
                f(index - self.strides[axis]);
            }
            if c + 1 < self.extent[axis] {
                f(index + self.strides[axis]);
            }
        }
    }

    fn bfs(&self, source: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.volume];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v] + 1;
            self.for_each_neighbour(v, |u| {
                if dist[u] == u32::MAX {
                    dist[u] = d;
                    queue.push_back(u);
                }
            });
        }
        dist
    }
}

fn check_input(b: &Region) -> Result<()> {
    if b.is_empty() {
        return Err(Error::invalid("size of an empty set is undefined"));
    }
    Ok(())
}

/// S(B): the minimum number of edges of a connected unit-edge lattice graph
/// whose vertex set contains B. A singleton has size 0.
///
/// Computed exactly with the Dreyfus–Wagner dynamic program over the grid
/// graph of the bounding box.
pub fn size_of(b: &Region, budget: &Budget) -> Result<u32> {
    check_input(b)?;
    let k = b.len();
    if k == 1 {
        return Ok(0);
    }
    if k == 2 {
        let p = b.points();
        return Ok(crate::lattice::l1_distance(&p[0], &p[1])? as u32);
    }
    let grid = BoxGraph::bounding(b);
    let v = grid.volume;
    let cells = 3u128.saturating_pow(k as u32).saturating_mul(v as u128);
    guard("steiner dynamic program", cells, budget.max_search_nodes)?;

    let terminals: Vec<usize> = b.iter().map(|p| grid.index(p)).collect();
    let full = (1usize << k) - 1;
    let mut dp = vec![u32::MAX; (full + 1) * v];
    for (i, &t) in terminals.iter().enumerate() {
        let dist = grid.bfs(t);
        dp[(1 << i) * v..(1 << i) * v + v].copy_from_slice(&dist);
    }
    for mask in 1..=full {
        if mask.count_ones() < 2 {
            continue;
        }
        let low = mask & mask.wrapping_neg();
        let row = mask * v;
        // split at every vertex
        let mut sub = (mask - 1) & mask;
        while sub > 0 {
            if sub & low != 0 {
                let other = mask ^ sub;
                for node in 0..v {
                    let a = dp[sub * v + node];
                    let c = dp[other * v + node];
                    if a != u32::MAX && c != u32::MAX && a + c < dp[row + node] {
                        dp[row + node] = a + c;
                    }
                }
            }
            sub = (sub - 1) & mask;
        }
        // then grow along shortest paths
        let mut heap: BinaryHeap<Reverse<(u32, usize)>> = (0..v)
            .filter(|&node| dp[row + node] != u32::MAX)
            .map(|node| Reverse((dp[row + node], node)))
            .collect();
        while let Some(Reverse((d, node))) = heap.pop() {
            if d > dp[row + node] {
                continue;
            }
            grid.for_each_neighbour(node, |u| {
                if d + 1 < dp[row + u] {
                    dp[row + u] = d + 1;
                    heap.push(Reverse((d + 1, u)));
                }
            });
        }
    }
    Ok(dp[full * v + terminals[0]])
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Lexicographically smallest spanning tree (sorted edge list order) of the
/// induced unit-edge subgraph on `vertices`, or `None` if it is disconnected.
///
/// Kruskal over edges in increasing order is the greedy matroid basis, which
/// is componentwise (hence lexicographically) minimal.
fn lexmin_spanning_tree(vertices: &[usize], grid: &BoxGraph) -> Option<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for (i, &a) in vertices.iter().enumerate() {
        grid.for_each_neighbour(a, |u| {
            if u > a {
                if let Ok(j) = vertices.binary_search(&u) {
                    edges.push((a, u, i, j));
                }
            }
        });
    }
    edges.sort_unstable();
    let mut parent: Vec<usize> = (0..vertices.len()).collect();
    let mut tree = Vec::with_capacity(vertices.len().saturating_sub(1));
    for (a, u, i, j) in edges {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            tree.push((a, u));
        }
    }
    (tree.len() + 1 == vertices.len()).then_some(tree)
}

/// G_B: the first graph, in sorted-edge-list order, among the 1-connected
/// graphs with S(B) edges whose vertex set contains B.
///
/// A minimal graph is a tree on S(B)+1 vertices, so the search runs over the
/// sets of S(B)+1−|B| extra box points whose union with B induces a connected
/// subgraph, taking the lexicographically smallest spanning tree of each.
pub fn associated_graph(b: &Region, budget: &Budget) -> Result<UnitGraph> {
    check_input(b)?;
    let m = size_of(b, budget)? as usize;
    if b.len() == 1 {
        return UnitGraph::new(b.clone(), Vec::new());
    }
    let grid = BoxGraph::bounding(b);
    let terminals: Vec<usize> = b.iter().map(|p| grid.index(p)).collect();
    let extra = m + 1 - b.len();
    let candidates: Vec<usize> = (0..grid.volume)
        .filter(|i| terminals.binary_search(i).is_err())
        .collect();
    guard(
        "associated graph search",
        binomial(candidates.len() as u128, extra as u128),
        budget.max_search_nodes,
    )?;

    let mut best: Option<Vec<(usize, usize)>> = None;
    for_each_combination(candidates.len(), extra, |chosen| {
        let mut vertices = terminals.clone();
        vertices.extend(chosen.iter().map(|&c| candidates[c]));
        vertices.sort_unstable();
        if let Some(tree) = lexmin_spanning_tree(&vertices, &grid) {
            if best.as_ref().is_none_or(|cur| tree < *cur) {
                best = Some(tree);
            }
        }
    });
    let tree = best.expect("a minimal tree exists in the bounding box");
    build_graph(&tree, &grid)
}

/// Calls `f` on every k-subset of 0..n, in lexicographic order.
fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut chosen: Vec<usize> = (0..k).collect();
    loop {
        f(&chosen);
        let Some(i) = (0..k).rev().find(|&i| chosen[i] < n - k + i) else {
            return;
        };
        chosen[i] += 1;
        for j in i + 1..k {
            chosen[j] = chosen[j - 1] + 1;
        }
    }
}

fn build_graph(tree: &[(usize, usize)], grid: &BoxGraph) -> Result<UnitGraph> {
    let mut vertices: Vec<LatticePoint> = Vec::with_capacity(tree.len() + 1);
    let mut edges = Vec::with_capacity(tree.len());
    for &(a, u) in tree {
        let (pa, pu) = (grid.point(a), grid.point(u));
        vertices.push(pa.clone());
        vertices.push(pu.clone());
        edges.push((pa, pu));
    }
    UnitGraph::new(Region::new(vertices)?, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn region(pts: &[&[i64]]) -> Region {
        Region::new(pts.iter().map(|c| LatticePoint::from(c.to_vec())).collect()).unwrap()
    }

    #[test]
    fn size_examples() {
        let b = Budget::default();
        assert_eq!(size_of(&region(&[&[0], &[1]]), &b).unwrap(), 1);
        assert_eq!(size_of(&region(&[&[0, 0], &[1, 1]]), &b).unwrap(), 2);
        assert_eq!(size_of(&region(&[&[0], &[3]]), &b).unwrap(), 3);
        assert_eq!(size_of(&region(&[&[7, 7]]), &b).unwrap(), 0);
        assert!(size_of(&Region::default(), &b).is_err());
    }

    #[test]
    fn steiner_point_is_used_for_three_corners() {
        // (0,0),(2,0),(1,1): the tree through (1,0) has 3 edges
        let b = Budget::default();
        assert_eq!(size_of(&region(&[&[0, 0], &[2, 0], &[1, 1]]), &b).unwrap(), 3);
        // four corners of a 2x2 square need 6 edges (a plus shape through the centre)
        assert_eq!(
            size_of(&region(&[&[0, 0], &[2, 0], &[0, 2], &[2, 2]]), &b).unwrap(),
            6
        );
    }

    #[test]
    fn associated_graph_examples() {
        let b = Budget::default();
        let g = associated_graph(&region(&[&[0], &[2]]), &b).unwrap();
        assert_eq!(g.vertices(), &region(&[&[0], &[1], &[2]]));
        assert_eq!(g.edge_count(), 2);

        let g = associated_graph(&region(&[&[0, 0], &[1, 1]]), &b).unwrap();
        // (0,0)-(0,1) precedes (0,0)-(1,0)
        assert_eq!(g.vertices(), &region(&[&[0, 0], &[0, 1], &[1, 1]]));
        assert!(g.is_tree());
    }

    #[test]
    fn guard_trips_on_tiny_budget() {
        let tight = Budget {
            max_search_nodes: 10,
            ..Budget::default()
        };
        let r = size_of(&region(&[&[0, 0], &[5, 0], &[0, 5]]), &tight);
        assert!(matches!(r, Err(Error::ResourceLimit { .. })));
    }
}
