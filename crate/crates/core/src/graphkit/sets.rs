use std::collections::BTreeSet;

use serde::Serialize;

use crate::budget::{guard, Budget};
use crate::error::{Error, Result};
use crate::lattice::{l1_ball, l1_distance, LatticePoint, Region};

use super::{size_of, InteractionSet};

/// All members of 𝔅 that contain the origin, for one (ν, r).
///
/// 𝔅 is translation invariant, so sets containing any other point are
/// translates of these.
#[derive(Debug, Clone)]
pub struct SetCatalog {
    nu: usize,
    r: u32,
    at_origin: Vec<InteractionSet>,
}

impl SetCatalog {
    pub fn new(nu: usize, r: u32, budget: &Budget) -> Result<Self> {
        if nu == 0 || r == 0 {
            return Err(Error::invalid("need ν ≥ 1 and r ≥ 1"));
        }
        let origin = LatticePoint::origin(nu);
        // diam(C) ≤ S(C) ≤ r, so every member lies in the radius-r ball
        let others: Vec<LatticePoint> = l1_ball(&origin, r as u64)
            .iter()
            .filter(|p| **p != origin)
            .cloned()
            .collect();
        // a tree with at most r edges has at most r+1 vertices
        let max_extra = (r as usize).min(others.len());
        let candidates: u128 = (1..=max_extra)
            .map(|k| binomial(others.len() as u128, k as u128))
            .sum();
        guard("interaction set enumeration", candidates, budget.max_sets)?;

        let mut at_origin = Vec::new();
        let mut chosen = Vec::with_capacity(max_extra);
        collect_subsets(&others, 0, max_extra, &mut chosen, &mut |subset| {
            if subset.iter().enumerate().any(|(i, a)| {
                subset[i + 1..]
                    .iter()
                    .any(|b| l1_distance(a, b).unwrap() > r as u64)
            }) {
                return Ok(());
            }
            let mut pts: Vec<LatticePoint> = subset.iter().map(|p| (*p).clone()).collect();
            pts.push(origin.clone());
            let region = Region::new(pts)?;
            let size = size_of(&region, budget)?;
            if (1..=r).contains(&size) {
                at_origin.push(InteractionSet::with_size(region, size));
            }
            Ok(())
        })?;
        at_origin.sort();
        Ok(SetCatalog { nu, r, at_origin })
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// Members of 𝔅 containing `t`, in canonical order.
    pub fn containing(&self, t: &LatticePoint) -> Vec<InteractionSet> {
        let mut out: Vec<InteractionSet> = self.at_origin.iter().map(|c| c.translate(t)).collect();
        out.sort();
        out
    }

    /// One representative per translation class: members whose smallest
    /// point is the origin.
    pub fn class_representatives(&self) -> impl Iterator<Item = &InteractionSet> {
        let origin = LatticePoint::origin(self.nu);
        self.at_origin
            .iter()
            .filter(move |c| c.points().points()[0] == origin)
    }

    pub fn count_per_point(&self) -> usize {
        self.at_origin.len()
    }
}

fn collect_subsets<'a>(
    items: &'a [LatticePoint],
    from: usize,
    max_len: usize,
    chosen: &mut Vec<&'a LatticePoint>,
    f: &mut impl FnMut(&[&'a LatticePoint]) -> Result<()>,
) -> Result<()> {
    for i in from..items.len() {
        chosen.push(&items[i]);
        f(chosen)?;
        if chosen.len() < max_len {
            collect_subsets(items, i + 1, max_len, chosen, f)?;
        }
        chosen.pop();
    }
    Ok(())
}

pub(crate) fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// All C ∈ 𝔅 with t0 ∈ C.
pub fn enumerate_sets_containing(t0: &LatticePoint, r: u32, budget: &Budget) -> Result<Vec<InteractionSet>> {
    Ok(SetCatalog::new(t0.dim(), r, budget)?.containing(t0))
}

/// l(B): the number of members of 𝔅 intersecting B.
pub fn l_factor(b: &InteractionSet, catalog: &SetCatalog) -> Result<u64> {
    if !b.in_collection(catalog.r()) {
        return Err(Error::invalid(format!(
            "set of size {} is not in the collection for r = {}",
            b.size(),
            catalog.r()
        )));
    }
    let mut seen = BTreeSet::new();
    for t in b.points().iter() {
        seen.extend(catalog.containing(t));
    }
    Ok(seen.len() as u64)
}

/// L = max l(B) over 𝔅, taken over one representative per translation class.
pub fn l_max(nu: usize, r: u32, budget: &Budget) -> Result<u64> {
    let catalog = SetCatalog::new(nu, r, budget)?;
    l_max_from(&catalog)
}

pub(crate) fn l_max_from(catalog: &SetCatalog) -> Result<u64> {
    let mut best = 0;
    for rep in catalog.class_representatives() {
        best = best.max(l_factor(rep, catalog)?);
    }
    Ok(best)
}

/// λ₀ = 1 / (50 · L · (8ν)^{2r}), kept as an exact reciprocal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Lambda0 {
    pub l: u64,
    pub denominator: u128,
}

impl Lambda0 {
    pub fn from_l(nu: usize, r: u32, l: u64) -> Self {
        let base = 8u128 * nu as u128;
        Lambda0 {
            l,
            denominator: 50 * l as u128 * base.pow(2 * r),
        }
    }

    pub fn value(&self) -> f64 {
        1.0 / self.denominator as f64
    }

    /// 0 ≤ λ ≤ λ₀, with λ₀ correctly rounded to f64 (so λ = λ₀ as typed is
    /// admitted).
    pub fn admits(&self, lambda: f64) -> bool {
        (0.0..=self.value()).contains(&lambda)
    }
}

pub fn lambda0(nu: usize, r: u32, budget: &Budget) -> Result<Lambda0> {
    Ok(Lambda0::from_l(nu, r, l_max(nu, r, budget)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sets_containing_origin_in_one_dimension() {
        let b = Budget::default();
        let sets = enumerate_sets_containing(&LatticePoint::from([0]), 1, &b).unwrap();
        let got: Vec<Vec<i64>> = sets
            .iter()
            .map(|s| s.points().iter().map(|p| p.coords()[0]).collect())
            .collect();
        assert_eq!(got, vec![vec![-1, 0], vec![0, 1]]);
    }

    #[test]
    fn l_factor_nearest_neighbour() {
        let b = Budget::default();
        for nu in [1usize, 2, 3] {
            let catalog = SetCatalog::new(nu, 1, &b).unwrap();
            let pair = InteractionSet::new(
                Region::new(vec![LatticePoint::origin(nu), LatticePoint::unit(nu, 0)]).unwrap(),
                &b,
            )
            .unwrap();
            assert_eq!(l_factor(&pair, &catalog).unwrap(), 4 * nu as u64 - 1);
        }
    }

    #[test]
    fn l_factor_rejects_sets_outside_collection() {
        let b = Budget::default();
        let catalog = SetCatalog::new(1, 1, &b).unwrap();
        let wide = InteractionSet::new(
            Region::new(vec![LatticePoint::from([0]), LatticePoint::from([2])]).unwrap(),
            &b,
        )
        .unwrap();
        assert!(l_factor(&wide, &catalog).is_err());
    }

    #[test]
    fn lambda0_exact_values() {
        let b = Budget::default();
        assert_eq!(lambda0(1, 1, &b).unwrap().denominator, 9600);
        assert_eq!(lambda0(2, 1, &b).unwrap().denominator, 89600);
    }

    #[test]
    fn admits_threshold() {
        let l0 = Lambda0::from_l(1, 1, 3);
        let v = l0.value();
        assert!(l0.admits(0.0));
        assert!(l0.admits(v));
        assert!(l0.admits(1.0 / 9600.0));
        assert!(!l0.admits(f64::from_bits(v.to_bits() + 1)));
        assert!(!l0.admits(-1e-300));
    }
}
