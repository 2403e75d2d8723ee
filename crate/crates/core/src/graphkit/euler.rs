use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::lattice::LatticePoint;

use super::{Track, UnitGraph};

type MultiGraph = BTreeMap<LatticePoint, BTreeMap<LatticePoint, u32>>;

fn remove_edge(graph: &mut MultiGraph, a: &LatticePoint, b: &LatticePoint) {
    for (x, y) in [(a, b), (b, a)] {
        let row = graph.get_mut(x).expect("vertex present");
        let m = row.get_mut(y).expect("edge present");
        *m -= 1;
        if *m == 0 {
            row.remove(y);
        }
    }
}

fn reachable(graph: &MultiGraph, from: &LatticePoint, to: &LatticePoint) -> bool {
    let mut seen = BTreeSet::from([from]);
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            return true;
        }
        for u in graph[v].keys() {
            if seen.insert(u) {
                queue.push_back(u);
            }
        }
    }
    false
}

/// The lexicographically smallest closed Eulerian circuit (as a vertex
/// sequence) of a connected multigraph with all degrees even, starting at
/// `start`.
///
/// Greedy Fleury walk: from the current vertex take the smallest neighbour
/// whose edge is not a bridge of the remaining graph, unless it is the only
/// edge left there. Every such move keeps a completion possible and any other
/// move does not, so the greedy sequence is the lexicographic minimum.
pub fn lexmin_euler_circuit(
    adjacency: &BTreeMap<LatticePoint, BTreeMap<LatticePoint, u32>>,
    start: &LatticePoint,
) -> Result<Vec<LatticePoint>> {
    let mut graph: MultiGraph = adjacency.clone();
    if !graph.contains_key(start) {
        return Err(Error::invalid("circuit start is not a vertex"));
    }
    for (v, row) in &graph {
        let degree: u32 = row.values().sum();
        if !degree.is_multiple_of(2) {
            return Err(Error::invalid(format!("vertex {v:?} has odd degree")));
        }
        for (u, m) in row {
            if graph.get(u).and_then(|r| r.get(v)) != Some(m) {
                return Err(Error::invalid("adjacency is not symmetric"));
            }
        }
    }
    let edge_total: u32 = graph.values().flat_map(|r| r.values()).sum::<u32>() / 2;

    let mut walk = vec![start.clone()];
    let mut current = start.clone();
    for _ in 0..edge_total {
        let row = &graph[&current];
        if row.is_empty() {
            return Err(Error::invalid("multigraph is not connected"));
        }
        let only_edge = row.len() == 1 && row.values().next() == Some(&1);
        let mut next = None;
        for (u, &m) in row {
            if only_edge || m > 1 {
                next = Some(u.clone());
                break;
            }
            let mut trial = graph.clone();
            remove_edge(&mut trial, &current, u);
            if reachable(&trial, u, &current) {
                next = Some(u.clone());
                break;
            }
        }
        let next = next.ok_or_else(|| Error::invalid("no admissible edge; graph not Eulerian"))?;
        remove_edge(&mut graph, &current, &next);
        walk.push(next.clone());
        current = next;
    }
    if graph.values().any(|r| !r.is_empty()) {
        return Err(Error::invalid("multigraph is not connected"));
    }
    Ok(walk)
}

pub(super) fn doubled_tree_track(graph: &UnitGraph, start: &LatticePoint) -> Result<Track> {
    let walk = lexmin_euler_circuit(&graph.doubled(), start)?;
    Track::new(walk)
}

/// Appends r−m steps along +e₁ and r−m steps back along −e₁.
pub(super) fn extend_track(track: Track, size: u32, r: u32) -> Result<Track> {
    if size > r {
        return Err(Error::invalid(format!(
            "set of size {size} is not an interaction set for radius {r}"
        )));
    }
    let mut points = track.points;
    let pad = (r - size) as usize;
    let mut at = points.last().expect("nonempty track").clone();
    for _ in 0..pad {
        at = at.stepped(0, 1);
        points.push(at.clone());
    }
    for _ in 0..pad {
        at = at.stepped(0, -1);
        points.push(at.clone());
    }
    Track::new(points)
}
