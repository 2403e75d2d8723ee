//! Exhaustive checks of the lattice counting bounds: closed tracks, sets per
//! extended track, sets per point, and the constant L.

use std::collections::BTreeMap;

use crate::budget::{guard, Budget};
use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::record::VerificationRecord;

use super::sets::l_max_from;
use super::{associated_graph, extended_track_from, SetCatalog, Track};

/// Number of tracks (t₀, t₁, …, tₙ) with tₙ = t₀, by explicit enumeration of
/// unit-step walks (pruned once the walk cannot get back in time).
pub fn count_closed_tracks(t0: &LatticePoint, n: usize, budget: &Budget) -> Result<u128> {
    let nu = t0.dim();
    guard(
        "closed track enumeration",
        (2 * nu as u128).saturating_pow(n as u32),
        budget.max_walks,
    )?;
    fn walk(pos: &mut Vec<i64>, left: usize, nu: usize, count: &mut u128) {
        let dist: u64 = pos.iter().map(|c| c.unsigned_abs()).sum();
        if dist as usize > left || !(left - dist as usize).is_multiple_of(2) {
            return;
        }
        if left == 0 {
            *count += 1;
            return;
        }
        for axis in 0..nu {
            for step in [-1, 1] {
                pos[axis] += step;
                walk(pos, left - 1, nu, count);
                pos[axis] -= step;
            }
        }
    }
    // translation invariance: walk relative to t0
    let mut rel = vec![0i64; nu];
    let mut count = 0;
    walk(&mut rel, n, nu, &mut count);
    Ok(count)
}

/// Closed tracks of length n from t0 versus (2ν)^{n−1}.
pub fn verify_track_count(
    nu: usize,
    n: usize,
    t0: &LatticePoint,
    budget: &Budget,
) -> Result<VerificationRecord> {
    if n <= 1 {
        return Err(Error::invalid("track count bound needs n > 1"));
    }
    if t0.dim() != nu {
        return Err(Error::invalid("start point has the wrong dimension"));
    }
    let count = count_closed_tracks(t0, n, budget)?;
    let bound = (2 * nu as u128).pow(n as u32 - 1);
    Ok(VerificationRecord::new(
        "closed_track_count",
        format!("nu={nu} n={n}"),
        count as f64,
        bound as f64,
        count <= bound,
    ))
}

/// Largest number of sets C ∋ t₀ sharing one extended track (started at t₀)
/// versus 2^{2r−1}. Also fails if any extended track is not a closed track of
/// length 2r.
pub fn verify_set_track_multiplicity(catalog: &SetCatalog, budget: &Budget) -> Result<VerificationRecord> {
    let (nu, r) = (catalog.nu(), catalog.r());
    let origin = LatticePoint::origin(nu);
    let mut per_track: BTreeMap<Track, u64> = BTreeMap::new();
    let mut malformed = 0;
    for set in catalog.containing(&origin) {
        let track = extended_track_from(&set, r, &origin, budget)?;
        if track.steps() != 2 * r as usize || track.start() != &origin {
            malformed += 1;
        }
        *per_track.entry(track).or_default() += 1;
    }
    let worst = per_track.values().copied().max().unwrap_or(0);
    let bound = 1u64 << (2 * r - 1);
    let mut rec = VerificationRecord::new(
        "sets_per_extended_track",
        format!("nu={nu} r={r}"),
        worst as f64,
        bound as f64,
        worst <= bound && malformed == 0,
    );
    if malformed > 0 {
        rec = rec.with_note(format!("{malformed} extended tracks malformed"));
    }
    Ok(rec)
}

/// |{C ∈ 𝔅 : t₀ ∈ C}| versus (4ν)^{2r−1}.
pub fn verify_sets_containing_bound(catalog: &SetCatalog) -> VerificationRecord {
    let (nu, r) = (catalog.nu(), catalog.r());
    let count = catalog.count_per_point() as u128;
    let bound = (4 * nu as u128).pow(2 * r - 1);
    VerificationRecord::new(
        "sets_per_point",
        format!("nu={nu} r={r}"),
        count as f64,
        bound as f64,
        count <= bound,
    )
}

/// L versus (4ν)^{2r−1}(r+1).
pub fn verify_l_bound(catalog: &SetCatalog) -> Result<VerificationRecord> {
    let (nu, r) = (catalog.nu(), catalog.r());
    let l = l_max_from(catalog)? as u128;
    let bound = (4 * nu as u128).pow(2 * r - 1) * (r as u128 + 1);
    Ok(VerificationRecord::new(
        "l_constant_bound",
        format!("nu={nu} r={r}"),
        l as f64,
        bound as f64,
        l <= bound,
    ))
}

/// Associated graphs of every translation class are trees with S(B) edges,
/// and associated tracks are closed tracks of length 2·S(B).
fn verify_associated_structures(catalog: &SetCatalog, budget: &Budget) -> Result<Vec<VerificationRecord>> {
    let (nu, r) = (catalog.nu(), catalog.r());
    let mut bad_trees = 0u64;
    let mut bad_tracks = 0u64;
    let mut total = 0u64;
    for rep in catalog.class_representatives() {
        total += 1;
        let g = associated_graph(rep.points(), budget)?;
        if !(g.is_tree() && g.edge_count() == rep.size() as usize && rep.points().is_subset_of(g.vertices()))
        {
            bad_trees += 1;
        }
        let start = rep.points().points()[0].clone();
        let t = extended_track_from(rep, r, &start, budget)?;
        let covers = g.vertices().iter().all(|v| t.points().contains(v));
        if t.steps() != 2 * r as usize || !covers {
            bad_tracks += 1;
        }
    }
    Ok(vec![
        VerificationRecord::new(
            "associated_graph_tree",
            format!("nu={nu} r={r} classes={total}"),
            bad_trees as f64,
            0.0,
            bad_trees == 0,
        )
        .with_note("measured = classes whose associated graph is not a tree with S(B) edges"),
        VerificationRecord::new(
            "extended_track_shape",
            format!("nu={nu} r={r} classes={total}"),
            bad_tracks as f64,
            0.0,
            bad_tracks == 0,
        )
        .with_note("measured = classes whose extended track is malformed"),
    ])
}

/// Every graph-counting check for one (ν, r), with track lengths 2..=max_n.
pub fn verify_graph_bounds(
    nu: usize,
    r: u32,
    max_n: usize,
    budget: &Budget,
) -> Result<Vec<VerificationRecord>> {
    let origin = LatticePoint::origin(nu);
    let mut out = Vec::new();
    for n in 2..=max_n {
        out.push(verify_track_count(nu, n, &origin, budget)?);
    }
    let catalog = SetCatalog::new(nu, r, budget)?;
    out.extend(verify_associated_structures(&catalog, budget)?);
    out.push(verify_set_track_multiplicity(&catalog, budget)?);
    out.push(verify_sets_containing_bound(&catalog));
    out.push(verify_l_bound(&catalog)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    /// Closed-walk count by propagating walk counts over positions.
    fn closed_walks_by_transfer(nu: usize, n: usize) -> u128 {
        let origin = LatticePoint::origin(nu);
        let mut counts: HashMap<LatticePoint, u128> = HashMap::from([(origin.clone(), 1)]);
        for _ in 0..n {
            let mut next: HashMap<LatticePoint, u128> = HashMap::new();
            for (p, c) in &counts {
                for q in p.neighbours() {
                    *next.entry(q).or_default() += c;
                }
            }
            counts = next;
        }
        counts.get(&origin).copied().unwrap_or(0)
    }

    #[test]
    fn track_counts_examples() {
        let b = Budget::default();
        let rec = verify_track_count(1, 2, &LatticePoint::from([0]), &b).unwrap();
        assert_eq!((rec.measured, rec.bound, rec.pass), (2.0, 2.0, true));
        let rec = verify_track_count(2, 2, &LatticePoint::from([0, 0]), &b).unwrap();
        assert_eq!((rec.measured, rec.bound, rec.pass), (4.0, 4.0, true));
        for n in [3, 5, 7] {
            assert_eq!(count_closed_tracks(&LatticePoint::from([9]), n, &b).unwrap(), 0);
        }
        assert!(verify_track_count(1, 1, &LatticePoint::from([0]), &b).is_err());
    }

    #[test]
    fn enumeration_agrees_with_transfer_counts() {
        let b = Budget::default();
        for nu in 1..=3 {
            for n in 0..=8 {
                let t0 = LatticePoint::origin(nu);
                assert_eq!(
                    count_closed_tracks(&t0, n, &b).unwrap(),
                    closed_walks_by_transfer(nu, n),
                    "nu={nu} n={n}"
                );
            }
        }
    }

    #[test]
    fn all_graph_bounds_hold_on_small_grid() {
        let b = Budget::default();
        for nu in 1..=2 {
            for r in 1..=2 {
                for rec in verify_graph_bounds(nu, r, 6, &b).unwrap() {
                    assert!(rec.pass, "{rec:?}");
                }
            }
        }
    }
}
