use std::collections::BTreeMap;

use crate::budget::{guard, Budget};
use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, Region};
use crate::observable::Observable;

use super::ProductMeasure;

/// Most clauses accepted by inclusion–exclusion (2^k clause subsets).
const MAX_CLAUSES: usize = 20;

/// One conjunction: every listed site takes a value in its allowed set.
/// Sites not listed are unconstrained.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Clause(BTreeMap<LatticePoint, Vec<f64>>);

impl Clause {
    /// Builds a clause, intersecting repeated constraints on the same site.
    pub fn new(constraints: impl IntoIterator<Item = (LatticePoint, Vec<f64>)>) -> Result<Self> {
        let mut map: BTreeMap<LatticePoint, Vec<f64>> = BTreeMap::new();
        for (site, allowed) in constraints {
            if allowed.is_empty() {
                return Err(Error::invalid(format!("site {site:?} has an empty allowed set")));
            }
            if allowed.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("allowed values must be finite"));
            }
            let mut allowed = canonical_values(allowed);
            if let Some(prev) = map.get(&site) {
                allowed.retain(|v| prev.contains(v));
                if allowed.is_empty() {
                    return Err(Error::invalid(format!(
                        "constraints on site {site:?} are contradictory"
                    )));
                }
            }
            map.insert(site, allowed);
        }
        Ok(Clause(map))
    }

    pub fn constraints(&self) -> &BTreeMap<LatticePoint, Vec<f64>> {
        &self.0
    }

    fn holds(&self, sites: &Region, values: &[f64]) -> bool {
        self.0.iter().all(|(site, allowed)| {
            let i = sites.index_of(site).expect("clause sites lie in the base");
            allowed.contains(&values[i])
        })
    }

    /// Conjunction of two clauses; `None` if no value satisfies both on
    /// some site.
    fn and(&self, other: &Clause) -> Option<Clause> {
        let mut out = self.0.clone();
        for (site, allowed) in &other.0 {
            match out.get_mut(site) {
                Some(mine) => {
                    mine.retain(|v| allowed.contains(v));
                    if mine.is_empty() {
                        return None;
                    }
                }
                None => {
                    out.insert(site.clone(), allowed.clone());
                }
            }
        }
        Some(Clause(out))
    }

    fn probability_p0(&self, measure: &ProductMeasure) -> f64 {
        self.0
            .iter()
            .map(|(site, allowed)| measure.site(site).probability_of(allowed))
            .product()
    }
}

fn canonical_values(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    values.dedup();
    values
}

/// An event A ∈ Σ_Q in disjunctive normal form over site-value constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderEvent {
    base: Region,
    clauses: Vec<Clause>,
}

impl CylinderEvent {
    pub fn new(base: Region, clauses: Vec<Clause>) -> Result<Self> {
        if base.is_empty() {
            return Err(Error::invalid("event base must be nonempty"));
        }
        for clause in &clauses {
            if let Some(site) = clause.0.keys().find(|s| !base.contains(s)) {
                return Err(Error::invalid(format!(
                    "constrained site {site:?} is not in the base"
                )));
            }
        }
        if clauses.len() > MAX_CLAUSES {
            return Err(Error::invalid(format!(
                "at most {MAX_CLAUSES} clauses are supported, got {}",
                clauses.len()
            )));
        }
        Ok(CylinderEvent { base, clauses })
    }

    /// The whole configuration space, seen as an event on `base`.
    pub fn whole_space(base: Region) -> Result<Self> {
        CylinderEvent::new(base, vec![Clause::default()])
    }

    /// The impossible event on `base`.
    pub fn empty(base: Region) -> Result<Self> {
        CylinderEvent::new(base, Vec::new())
    }

    /// {ω(site) ∈ allowed} on the base {site}.
    pub fn site_in(site: LatticePoint, allowed: Vec<f64>) -> Result<Self> {
        let base = Region::from_sorted(vec![site.clone()]);
        CylinderEvent::new(base, vec![Clause::new([(site, allowed)])?])
    }

    pub fn base(&self) -> &Region {
        &self.base
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// The same event viewed on a larger base Q′ ⊇ Q (the new sites are
    /// unconstrained).
    pub fn with_base(&self, enlarged: Region) -> Result<Self> {
        if !self.base.is_subset_of(&enlarged) {
            return Err(Error::invalid("enlarged base must contain the original base"));
        }
        CylinderEvent::new(enlarged, self.clauses.clone())
    }

    pub fn contains(&self, sites: &Region, values: &[f64]) -> bool {
        self.clauses.iter().any(|c| c.holds(sites, values))
    }

    /// I_A as an observable on the base.
    pub fn indicator(&self, measure: &ProductMeasure, budget: &Budget) -> Result<Observable> {
        Observable::from_fn(self.base.clone(), measure, budget, |values| {
            if self.contains(&self.base, values) {
                1.0
            } else {
                0.0
            }
        })
    }
}

/// P₀(A) by inclusion–exclusion over the clauses; each intersection of
/// clauses factorizes over sites.
pub fn event_probability_p0(measure: &ProductMeasure, event: &CylinderEvent, budget: &Budget) -> Result<f64> {
    let k = event.clauses.len();
    guard("clause subsets", 1u128 << k, budget.max_configurations)?;
    let mut sum = crate::sum::CompensatedSum::new();
    for mask in 1u32..(1u32 << k) {
        let mut meet = Some(Clause::default());
        for (i, clause) in event.clauses.iter().enumerate() {
            if mask & (1 << i) != 0 {
                meet = meet.and_then(|m| m.and(clause));
            }
        }
        if let Some(meet) = meet {
            let p = meet.probability_p0(measure);
            if mask.count_ones() % 2 == 1 {
                sum.add(p);
            } else {
                sum.add(-p);
            }
        }
    }
    Ok(sum.value().clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_ising, build_potts, IsingFields};

    fn p1(c: i64) -> LatticePoint {
        LatticePoint::from([c])
    }

    #[test]
    fn probability_examples() {
        let b = Budget::default();
        let ising = build_ising(1, 0.0, &[1.0], &IsingFields::uniform(0.0)).unwrap();
        let up = CylinderEvent::site_in(p1(0), vec![1.0]).unwrap();
        assert_eq!(event_probability_p0(ising.measure(), &up, &b).unwrap(), 0.5);

        let potts = build_potts(1, 0.0, 4, &[1.0]).unwrap();
        let low = CylinderEvent::site_in(p1(0), vec![1.0, 2.0]).unwrap();
        assert_eq!(event_probability_p0(potts.measure(), &low, &b).unwrap(), 0.5);

        let base = Region::new(vec![p1(0), p1(1)]).unwrap();
        let all = CylinderEvent::whole_space(base.clone()).unwrap();
        assert_eq!(event_probability_p0(potts.measure(), &all, &b).unwrap(), 1.0);
        let none = CylinderEvent::empty(base).unwrap();
        assert_eq!(event_probability_p0(potts.measure(), &none, &b).unwrap(), 0.0);
    }

    #[test]
    fn overlapping_clauses_match_enumeration() {
        let b = Budget::default();
        let potts = build_potts(1, 0.0, 3, &[1.0]).unwrap();
        let base = Region::new(vec![p1(0), p1(1)]).unwrap();
        let event = CylinderEvent::new(
            base.clone(),
            vec![
                Clause::new([(p1(0), vec![1.0, 2.0])]).unwrap(),
                Clause::new([(p1(1), vec![2.0])]).unwrap(),
                Clause::new([(p1(0), vec![2.0, 3.0]), (p1(1), vec![1.0, 3.0])]).unwrap(),
            ],
        )
        .unwrap();
        let mut hits = 0;
        for a in 1..=3 {
            for c in 1..=3 {
                if event.contains(&base, &[a as f64, c as f64]) {
                    hits += 1;
                }
            }
        }
        let p = event_probability_p0(potts.measure(), &event, &b).unwrap();
        assert!((p - hits as f64 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        let base = Region::new(vec![p1(0)]).unwrap();
        let outside = Clause::new([(p1(1), vec![1.0])]).unwrap();
        assert!(CylinderEvent::new(base, vec![outside]).is_err());
        assert!(Clause::new([(p1(0), vec![])]).is_err());
        assert!(Clause::new([(p1(0), vec![1.0]), (p1(0), vec![-1.0])]).is_err());
    }
}
