use std::collections::{BTreeSet, VecDeque};

use gibbs_core::graphkit::{
    associated_graph, associated_track, enumerate_sets_containing, l_max, lambda0, size_of, SetCatalog,
};
use gibbs_core::lattice::LatticePoint;
use gibbs_core::{Budget, Region};
use proptest::prelude::*;

fn pt(c: &[i64]) -> LatticePoint {
    LatticePoint::new(c.to_vec()).unwrap()
}

fn region(pts: &[&[i64]]) -> Region {
    Region::new(pts.iter().map(|c| pt(c)).collect()).unwrap()
}

fn connected(vertices: &BTreeSet<Vec<i64>>) -> bool {
    let Some(first) = vertices.iter().next() else {
        return true;
    };
    let mut seen = BTreeSet::from([first.clone()]);
    let mut queue = VecDeque::from([first.clone()]);
    while let Some(v) = queue.pop_front() {
        for axis in 0..v.len() {
            for step in [-1, 1] {
                let mut w = v.clone();
                w[axis] += step;
                if vertices.contains(&w) && seen.insert(w.clone()) {
                    queue.push_back(w);
                }
            }
        }
    }
    seen.len() == vertices.len()
}

fn box_points(lo: &[i64], hi: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for (a, b) in lo.iter().zip(hi) {
        out = out
            .into_iter()
            .flat_map(|p| {
                (*a..=*b).map(move |c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    out
}

fn choose<T: Clone>(
    items: &[T],
    k: usize,
    from: usize,
    acc: &mut Vec<T>,
    f: &mut dyn FnMut(&[T]) -> bool,
) -> bool {
    if acc.len() == k {
        return f(acc);
    }
    for i in from..items.len() {
        acc.push(items[i].clone());
        if choose(items, k, i + 1, acc, f) {
            return true;
        }
        acc.pop();
    }
    false
}

/// Fewest edges of a connected lattice graph containing `b`, searching vertex
/// sets inside the bounding box inflated by one in every direction. Gives up
/// (returns `None`) beyond `cap` edges.
fn brute_size_capped(b: &[Vec<i64>], cap: u32) -> Option<u32> {
    let nu = b[0].len();
    let lo: Vec<i64> = (0..nu)
        .map(|a| b.iter().map(|p| p[a]).min().unwrap() - 1)
        .collect();
    let hi: Vec<i64> = (0..nu)
        .map(|a| b.iter().map(|p| p[a]).max().unwrap() + 1)
        .collect();
    let terminals: BTreeSet<Vec<i64>> = b.iter().cloned().collect();
    let extra: Vec<Vec<i64>> = box_points(&lo, &hi)
        .into_iter()
        .filter(|p| !terminals.contains(p))
        .collect();
    let max_extra = (cap as usize + 1)
        .saturating_sub(terminals.len())
        .min(extra.len());
    for k in 0..=max_extra {
        let found = choose(&extra, k, 0, &mut Vec::new(), &mut |chosen| {
            let mut all = terminals.clone();
            all.extend(chosen.iter().cloned());
            connected(&all)
        });
        if found {
            return Some((terminals.len() + k - 1) as u32);
        }
    }
    None
}

fn brute_size(b: &[Vec<i64>]) -> u32 {
    brute_size_capped(b, u32::MAX - 1).expect("the inflated box is connected")
}

/// Sets containing the origin with 1 ≤ S ≤ r, found by scanning all small
/// subsets of the cube [-r, r]^ν.
fn brute_sets_at_origin(nu: usize, r: u32) -> BTreeSet<Vec<Vec<i64>>> {
    let origin = vec![0i64; nu];
    let ri = r as i64;
    let others: Vec<Vec<i64>> = box_points(&vec![-ri; nu], &vec![ri; nu])
        .into_iter()
        .filter(|p| *p != origin)
        .collect();
    let mut out = BTreeSet::new();
    for k in 1..=r as usize {
        choose(&others, k, 0, &mut Vec::new(), &mut |chosen| {
            let mut pts: Vec<Vec<i64>> = chosen.to_vec();
            pts.push(origin.clone());
            if brute_size_capped(&pts, r).is_some_and(|s| s >= 1) {
                pts.sort();
                out.insert(pts);
            }
            false
        });
    }
    out
}

fn brute_l(nu: usize, r: u32) -> u64 {
    let at_origin = brute_sets_at_origin(nu, r);
    let mut best = 0;
    for b in &at_origin {
        let mut meeting = BTreeSet::new();
        for t in b {
            for c in &at_origin {
                let mut moved: Vec<Vec<i64>> = c
                    .iter()
                    .map(|p| p.iter().zip(t).map(|(x, y)| x + y).collect())
                    .collect();
                moved.sort();
                meeting.insert(moved);
            }
        }
        best = best.max(meeting.len() as u64);
    }
    best
}

#[test]
fn size_matches_brute_force_on_fixed_sets() {
    let b = Budget::default();
    let cases: &[&[&[i64]]] = &[
        &[&[0], &[3]],
        &[&[0, 0], &[1, 1]],
        &[&[0, 0], &[2, 0], &[1, 2]],
        &[&[0, 0], &[2, 2], &[0, 2], &[2, 0]],
        &[&[0, 0, 0], &[1, 1, 1]],
        &[&[0, 0], &[1, 0], &[0, 1], &[1, 1]],
    ];
    for pts in cases {
        let coords: Vec<Vec<i64>> = pts.iter().map(|c| c.to_vec()).collect();
        assert_eq!(size_of(&region(pts), &b).unwrap(), brute_size(&coords), "{pts:?}");
    }
    assert_eq!(size_of(&region(&[&[4, 4]]), &b).unwrap(), 0);
}

#[test]
fn catalog_matches_brute_force() {
    let b = Budget::default();
    for (nu, r) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        let brute = brute_sets_at_origin(nu, r);
        let got: BTreeSet<Vec<Vec<i64>>> = enumerate_sets_containing(&LatticePoint::origin(nu), r, &b)
            .unwrap()
            .iter()
            .map(|s| s.points().iter().map(|p| p.coords().to_vec()).collect())
            .collect();
        assert_eq!(got, brute, "nu={nu} r={r}");
        assert_eq!(SetCatalog::new(nu, r, &b).unwrap().count_per_point(), brute.len());
    }
}

#[test]
fn pinned_catalog_sizes_and_l_constants() {
    let b = Budget::default();
    // counts and L values taken from the brute-force oracle above
    let pinned = [(1, 1, 2, 3), (1, 2, 7, 14), (2, 1, 4, 7), (2, 2, 30, 75)];
    for (nu, r, count, l) in pinned {
        assert_eq!(brute_sets_at_origin(nu, r).len(), count, "nu={nu} r={r}");
        assert_eq!(brute_l(nu, r), l, "nu={nu} r={r}");
        assert_eq!(l_max(nu, r, &b).unwrap(), l, "nu={nu} r={r}");
    }
}

#[test]
fn threshold_denominators() {
    let b = Budget::default();
    assert_eq!(lambda0(1, 1, &b).unwrap().denominator, 9600);
    assert_eq!(lambda0(2, 1, &b).unwrap().denominator, 89600);
}

fn small_region(nu: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-1i64..=2, nu), 1..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn size_agrees_with_brute_force(pts in small_region(2)) {
        let r = Region::new(pts.iter().map(|c| pt(c)).collect()).unwrap();
        let mut distinct: Vec<Vec<i64>> = pts.clone();
        distinct.sort();
        distinct.dedup();
        prop_assert_eq!(size_of(&r, &Budget::default()).unwrap(), brute_size(&distinct));
    }

    #[test]
    fn size_is_translation_invariant(pts in small_region(2), shift in prop::collection::vec(-50i64..50, 2)) {
        let b = Budget::default();
        let r = Region::new(pts.iter().map(|c| pt(c)).collect()).unwrap();
        let moved = r.translate(&pt(&shift));
        prop_assert_eq!(size_of(&r, &b).unwrap(), size_of(&moved, &b).unwrap());
    }

    #[test]
    fn associated_structures_are_consistent(pts in small_region(2)) {
        let b = Budget::default();
        let r = Region::new(pts.iter().map(|c| pt(c)).collect()).unwrap();
        let s = size_of(&r, &b).unwrap() as usize;
        let g = associated_graph(&r, &b).unwrap();
        prop_assert!(g.is_tree());
        prop_assert_eq!(g.edge_count(), s);
        prop_assert!(r.is_subset_of(g.vertices()));
        let t = associated_track(&r, &b).unwrap();
        prop_assert_eq!(t.steps(), 2 * s);
        prop_assert_eq!(t.points().first(), t.points().last());
        prop_assert!(g.vertices().iter().all(|v| t.points().contains(v)));
    }

    #[test]
    fn adding_a_point_never_shrinks_size(pts in small_region(2), extra in prop::collection::vec(-1i64..=2, 2)) {
        let b = Budget::default();
        let r = Region::new(pts.iter().map(|c| pt(c)).collect()).unwrap();
        let bigger = r.union(&Region::new(vec![pt(&extra)]).unwrap());
        prop_assert!(size_of(&r, &b).unwrap() <= size_of(&bigger, &b).unwrap());
    }
}
