//! The series P_N(A) = Σₙ J_A(N, n): families of interaction sets, Q-connected
//! family enumeration, the terms J_A(N, n), stabilization radii, the
//! geometric tail bound, and the thermodynamic-limit report.

mod report;
mod verify;

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::budget::{guard, Budget};
use crate::cumulants::semi_invariant_family;
use crate::error::{Error, Result};
use crate::graphkit::{InteractionSet, SetCatalog};
use crate::lattice::{cube, LatticePoint, Region};
use crate::model::{CylinderEvent, InteractionModel};
use crate::sum::CompensatedSum;

pub use report::{
    model_rho, thermodynamic_probability, Certificate, ExpansionOptions, ExpansionReport, OracleComparison,
    RhoChoice, TermRow,
};
pub use verify::{consistency_check, verify_bounds};

/// A multiset {(C₁, n₁), …, (C_k, n_k)} of distinct interaction sets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Family {
    entries: Vec<(InteractionSet, u32)>,
}

impl Family {
    /// Sorts the entries; rejects zero multiplicities and repeated sets.
    pub fn new(mut entries: Vec<(InteractionSet, u32)>) -> Result<Self> {
        entries.sort();
        if entries.iter().any(|(_, m)| *m == 0) {
            return Err(Error::invalid("multiplicities must be at least 1"));
        }
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::invalid("family sets must be distinct"));
        }
        Ok(Family { entries })
    }

    pub fn empty() -> Self {
        Family { entries: Vec::new() }
    }

    pub fn entries(&self) -> &[(InteractionSet, u32)] {
        &self.entries
    }

    /// Number of distinct sets k.
    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    /// |Γ| = Σ nᵢ.
    pub fn len(&self) -> usize {
        self.entries.iter().map(|(_, m)| *m as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Γ! = Π nᵢ!.
    pub fn factorial(&self) -> u128 {
        self.entries.iter().map(|(_, m)| factorial(*m as u128)).product()
    }

    /// u_j(Γ): the total multiplicity of entries whose set meets C_j
    /// (C_j itself included). `j` is zero-based.
    pub fn u_weight(&self, j: usize) -> Result<u64> {
        let (cj, _) = self
            .entries
            .get(j)
            .ok_or_else(|| Error::invalid(format!("entry {j} out of range")))?;
        Ok(self
            .entries
            .iter()
            .filter(|(ci, _)| ci.intersects(cj))
            .map(|(_, m)| *m as u64)
            .sum())
    }

    /// |Γ|! / Γ!: the number of sequences reducing to Γ.
    pub fn reduction_count(&self) -> u128 {
        let mut out = factorial(self.len() as u128);
        for (_, m) in &self.entries {
            out /= factorial(*m as u128);
        }
        out
    }

    pub fn sets(&self) -> impl Iterator<Item = &InteractionSet> {
        self.entries.iter().map(|(c, _)| c)
    }
}

fn factorial(n: u128) -> u128 {
    (1..=n).product()
}

/// Where candidate sets come from during family enumeration.
#[derive(Debug, Clone, Copy)]
pub enum SetSource<'a> {
    /// Every member of 𝔅.
    Collection(&'a SetCatalog),
    /// Only sets carrying a potential term. Families using any other set
    /// contribute an exact zero to J, so this gives the same J.
    Active(&'a InteractionModel),
}

impl SetSource<'_> {
    fn containing(&self, t: &LatticePoint) -> Vec<InteractionSet> {
        match self {
            SetSource::Collection(c) => c.containing(t),
            SetSource::Active(m) => m.active_sets_containing(t),
        }
    }
}

/// Every collection of `k ≤ max_k` distinct sets, all inside `container`,
/// with (Q, C₁, …, C_k) connected. Grouped by k, each group sorted.
fn connected_collections(
    q: &Region,
    max_k: usize,
    container: &Region,
    source: SetSource<'_>,
    budget: &Budget,
) -> Result<Vec<Vec<Vec<InteractionSet>>>> {
    let mut levels: Vec<Vec<Vec<InteractionSet>>> = vec![vec![Vec::new()]];
    let mut total = 0u128;
    for _ in 0..max_k {
        let mut next: BTreeSet<Vec<InteractionSet>> = BTreeSet::new();
        for coll in levels.last().unwrap() {
            let mut cover: BTreeSet<&LatticePoint> = q.iter().collect();
            for c in coll {
                cover.extend(c.points().iter());
            }
            let mut candidates: BTreeSet<InteractionSet> = BTreeSet::new();
            for t in cover {
                for c in source.containing(t) {
                    if c.points().is_subset_of(container) && !coll.contains(&c) {
                        candidates.insert(c);
                    }
                }
            }
            for c in candidates {
                let mut grown = coll.clone();
                let at = grown.binary_search(&c).unwrap_err();
                grown.insert(at, c);
                next.insert(grown);
            }
        }
        total += next.len() as u128;
        guard("connected set collections", total, budget.max_families)?;
        levels.push(next.into_iter().collect());
    }
    Ok(levels)
}

/// All compositions of `n` into `k` positive parts, lexicographic order.
fn compositions(n: u32, k: usize) -> Vec<Vec<u32>> {
    fn go(n: u32, k: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k == 1 {
            prefix.push(n);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 1..=n - (k as u32 - 1) {
            prefix.push(first);
            go(n - first, k - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k == 0 {
        if n == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    if n as usize >= k {
        go(n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// Every Q-connected family of length `n` whose sets come from `source` and
/// lie in `container`, in deterministic order (by number of distinct sets,
/// then collection, then multiplicities). n = 0 gives only the empty family.
pub fn enumerate_q_connected_families(
    q: &Region,
    n: usize,
    container: &Region,
    source: SetSource<'_>,
    budget: &Budget,
) -> Result<Vec<Family>> {
    if q.is_empty() {
        return Err(Error::invalid("Q must be nonempty"));
    }
    if n == 0 {
        return Ok(vec![Family::empty()]);
    }
    let levels = connected_collections(q, n, container, source, budget)?;
    let mut count = 0u128;
    for (k, level) in levels.iter().enumerate().skip(1) {
        let per = crate::graphkit::binomial(n as u128 - 1, k as u128 - 1);
        count = count.saturating_add(per.saturating_mul(level.len() as u128));
    }
    guard("families", count, budget.max_families)?;
    let mut out = Vec::with_capacity(count as usize);
    for (k, level) in levels.iter().enumerate().skip(1) {
        let comps = compositions(n as u32, k);
        for coll in level {
            for mults in &comps {
                out.push(Family {
                    entries: coll.iter().cloned().zip(mults.iter().copied()).collect(),
                });
            }
        }
    }
    Ok(out)
}

/// One series term with the data behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JTerm {
    pub n: usize,
    pub cube_radius: u32,
    pub family_count: usize,
    pub value: f64,
}

/// Per-family semi-invariants ⟨I_A, Φ_Γ⟩₀ for all Q-connected families of
/// length n inside Λ_N, in enumeration order.
pub(crate) fn family_semi_invariants(
    model: &InteractionModel,
    event: &CylinderEvent,
    cube_radius: u32,
    n: usize,
    budget: &Budget,
) -> Result<Vec<(Family, f64)>> {
    let region = cube(cube_radius, model.nu());
    if !event.base().is_subset_of(&region) {
        return Err(Error::invalid(format!(
            "event base is not inside the cube of radius {cube_radius}"
        )));
    }
    if n + 1 > budget.max_cumulant_order {
        return Err(Error::ResourceLimit {
            what: "semi-invariant order",
            needed: n as u128 + 1,
            budget: budget.max_cumulant_order as u128,
        });
    }
    let indicator = event.indicator(model.measure(), budget)?;
    let families =
        enumerate_q_connected_families(event.base(), n, &region, SetSource::Active(model), budget)?;
    let values: Vec<Result<f64>> = families
        .par_iter()
        .map(|f| semi_invariant_family(&indicator, f, model, budget))
        .collect();
    families
        .into_iter()
        .zip(values)
        .map(|(f, v)| Ok((f, v?)))
        .collect()
}

/// J_A(N, n) = Σ_Γ ⟨I_A, Φ_Γ⟩₀ / Γ! over Q-connected families of length n
/// inside Λ_N, Q being the base of A.
pub fn j_term(
    model: &InteractionModel,
    event: &CylinderEvent,
    cube_radius: u32,
    n: usize,
    budget: &Budget,
) -> Result<JTerm> {
    let parts = family_semi_invariants(model, event, cube_radius, n, budget)?;
    let mut sum = CompensatedSum::new();
    for (f, v) in &parts {
        sum.add(v / f.factorial() as f64);
    }
    Ok(JTerm {
        n,
        cube_radius,
        family_count: parts.len(),
        value: sum.value(),
    })
}

/// M_n = r(n+1) + q + d: beyond this cube radius J_A(N, n) no longer
/// depends on N.
pub fn m_stabilization(n: u64, r: u64, q: u64, d: u64) -> u64 {
    r * (n + 1) + q + d
}

/// 2^{2q} · P₀(A) · Σ_{n≥n₀} ρⁿ (n+1), summed in closed form.
pub fn tail_bound(q: u32, p0a: f64, n0: u32, rho: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::invalid(format!("ρ = {rho} must lie in [0, 1)")));
    }
    if n0 < 4 {
        return Err(Error::invalid("the term bound only holds from n = 4 on"));
    }
    if !(0.0..=1.0).contains(&p0a) {
        return Err(Error::invalid("P₀(A) must lie in [0, 1]"));
    }
    let n0f = n0 as f64;
    let geometric = rho.powi(n0 as i32) * ((n0f + 1.0) - n0f * rho) / (1.0 - rho).powi(2);
    Ok(4f64.powi(q as i32) * p0a * geometric)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_ising, IsingFields};

    fn p1(c: i64) -> LatticePoint {
        LatticePoint::from([c])
    }

    fn set(cs: &[i64]) -> InteractionSet {
        InteractionSet::new(
            Region::new(cs.iter().map(|&c| p1(c)).collect()).unwrap(),
            &Budget::default(),
        )
        .unwrap()
    }

    #[test]
    fn family_statistics() {
        let single = Family::new(vec![(set(&[0, 1]), 3)]).unwrap();
        assert_eq!(single.u_weight(0).unwrap(), 3);
        assert_eq!(single.reduction_count(), 1);
        assert_eq!(single.factorial(), 6);

        let chain = Family::new(vec![(set(&[0, 1]), 1), (set(&[1, 2]), 2)]).unwrap();
        assert_eq!(chain.u_weight(0).unwrap(), 3);
        assert_eq!(chain.u_weight(1).unwrap(), 3);
        assert_eq!(chain.reduction_count(), 3);
        assert!(chain.u_weight(2).is_err());

        let apart = Family::new(vec![(set(&[0, 1]), 1), (set(&[5, 6]), 1)]).unwrap();
        assert_eq!(apart.u_weight(0).unwrap(), 1);
        assert_eq!(apart.reduction_count(), 2);

        assert!(Family::new(vec![(set(&[0, 1]), 1), (set(&[0, 1]), 2)]).is_err());
        assert!(Family::new(vec![(set(&[0, 1]), 0)]).is_err());
    }

    #[test]
    fn compositions_count() {
        assert_eq!(compositions(4, 2), vec![vec![1, 3], vec![2, 2], vec![3, 1]]);
        assert_eq!(compositions(5, 3).len(), 6);
        assert!(compositions(2, 3).is_empty());
    }

    #[test]
    fn first_order_families_in_one_dimension() {
        let b = Budget::default();
        let catalog = SetCatalog::new(1, 1, &b).unwrap();
        let q = Region::new(vec![p1(0)]).unwrap();
        let fams =
            enumerate_q_connected_families(&q, 1, &cube(3, 1), SetSource::Collection(&catalog), &b).unwrap();
        assert_eq!(fams.len(), 2);
        assert_eq!(fams[0].entries()[0].0, set(&[-1, 0]));
        assert_eq!(fams[1].entries()[0].0, set(&[0, 1]));

        let empty =
            enumerate_q_connected_families(&q, 0, &cube(3, 1), SetSource::Collection(&catalog), &b).unwrap();
        assert_eq!(empty, vec![Family::empty()]);
    }

    #[test]
    fn container_limits_families() {
        let b = Budget::default();
        let catalog = SetCatalog::new(1, 1, &b).unwrap();
        let q = Region::new(vec![p1(0)]).unwrap();
        let fams =
            enumerate_q_connected_families(&q, 2, &cube(1, 1), SetSource::Collection(&catalog), &b).unwrap();
        // {−1,0}² , {0,1}², {−1,0}+{0,1}
        assert_eq!(fams.len(), 3);
    }

    #[test]
    fn stabilization_examples() {
        assert_eq!(m_stabilization(2, 1, 0, 0), 3);
        assert_eq!(m_stabilization(0, 1, 0, 2), 3);
        assert!(m_stabilization(4, 1, 0, 0) >= m_stabilization(3, 1, 0, 0));
    }

    #[test]
    fn tail_examples() {
        assert_eq!(tail_bound(0, 1.0, 4, 0.0).unwrap(), 0.0);
        let t = tail_bound(0, 1.0, 4, 0.9).unwrap();
        assert!((t - 91.854).abs() < 1e-9, "{t}");
        let direct: f64 = (4..5000).map(|n| 0.9f64.powi(n) * (n as f64 + 1.0)).sum();
        assert!((t - direct).abs() < 1e-9);
        assert!(tail_bound(0, 1.0, 4, 1.0).is_err());
        assert!(tail_bound(0, 1.0, 3, 0.5).is_err());
        assert!(tail_bound(0, 1.0, 5, 0.5).unwrap() < tail_bound(0, 1.0, 4, 0.5).unwrap());
        assert!(tail_bound(0, 1.0, 5, 0.6).unwrap() > tail_bound(0, 1.0, 5, 0.5).unwrap());
    }

    #[test]
    fn j_term_low_orders() {
        let b = Budget::default();
        let a = CylinderEvent::site_in(p1(0), vec![1.0]).unwrap();
        let free = build_ising(1, 0.0, &[1.0], &IsingFields::uniform(0.2)).unwrap();
        let j0 = j_term(&free, &a, 2, 0, &b).unwrap();
        let p0 = crate::model::event_probability_p0(free.measure(), &a, &b).unwrap();
        assert!((j0.value - p0).abs() < 1e-15);
        for n in 1..=3 {
            assert_eq!(j_term(&free, &a, 4, n, &b).unwrap().value, 0.0);
        }
        let sym = build_ising(1, 1e-3, &[1.0], &IsingFields::uniform(0.0)).unwrap();
        assert!(j_term(&sym, &a, 3, 1, &b).unwrap().value.abs() < 1e-18);
    }
}
