//! Interaction models: finitely supported site distributions (the initial
//! probabilities P_t), potentials Φ = {Φ_B} bounded by λ, cylinder events,
//! and the Ising, Potts and custom builders.

mod config;
mod event;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::graphkit::{size_of, InteractionSet};
use crate::lattice::{LatticePoint, Region};
use crate::observable::Observable;

pub use config::{
    ClauseConfig, ConstraintConfig, Couplings, EventConfig, FieldsConfig, ModelConfig, ModelKind, SiteField,
    SiteOverride, SitesConfig, TermConfig,
};
pub use event::{event_probability_p0, Clause, CylinderEvent};

const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// A probability distribution on finitely many real spin values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution")]
pub struct SiteDistribution {
    support: Vec<f64>,
    probabilities: Vec<f64>,
}

#[derive(Deserialize)]
struct RawDistribution {
    support: Vec<f64>,
    probabilities: Vec<f64>,
}

impl TryFrom<RawDistribution> for SiteDistribution {
    type Error = Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        SiteDistribution::new(raw.support, raw.probabilities)
    }
}

impl SiteDistribution {
    pub fn new(support: Vec<f64>, probabilities: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != probabilities.len() {
            return Err(Error::invalid(
                "site distribution needs matching nonempty support and probability lists",
            ));
        }
        if support.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("support values must be finite"));
        }
        for (i, a) in support.iter().enumerate() {
            if support[i + 1..].contains(a) {
                return Err(Error::invalid(format!("support value {a} repeated")));
            }
        }
        if probabilities.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::invalid("probabilities must be nonnegative"));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::invalid(format!("probabilities sum to {total}, not 1")));
        }
        Ok(SiteDistribution {
            support,
            probabilities,
        })
    }

    /// Uniform on `values`.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        SiteDistribution::new(values, vec![1.0 / n as f64; n])
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn index_of(&self, value: f64) -> Option<usize> {
        self.support.iter().position(|&v| v == value)
    }

    /// P_t(F) for a finite set of values F.
    pub fn probability_of(&self, allowed: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.probabilities)
            .filter(|(v, _)| allowed.contains(v))
            .map(|(_, p)| p)
            .sum()
    }

    pub fn same_support(&self, other: &SiteDistribution) -> bool {
        self.support == other.support
    }
}

/// The product measure P₀: one distribution per site, with a default and
/// finitely many per-site overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductMeasure {
    default: SiteDistribution,
    overrides: BTreeMap<LatticePoint, SiteDistribution>,
}

impl ProductMeasure {
    pub fn uniform(default: SiteDistribution) -> Self {
        ProductMeasure {
            default,
            overrides: BTreeMap::new(),
        }
    }

    pub fn with_overrides(
        default: SiteDistribution,
        overrides: BTreeMap<LatticePoint, SiteDistribution>,
    ) -> Self {
        ProductMeasure { default, overrides }
    }

    pub fn site(&self, t: &LatticePoint) -> &SiteDistribution {
        self.overrides.get(t).unwrap_or(&self.default)
    }

    pub fn default_site(&self) -> &SiteDistribution {
        &self.default
    }

    pub fn overrides(&self) -> &BTreeMap<LatticePoint, SiteDistribution> {
        &self.overrides
    }

    /// All sites share the default support (values may differ in weight).
    pub fn has_uniform_support(&self) -> bool {
        self.overrides.values().all(|d| d.same_support(&self.default))
    }
}

/// Φ_B for one set B, as a table over the local configurations of B.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTerm {
    pub set: InteractionSet,
    pub table: Arc<[f64]>,
}

#[derive(Debug, Clone, PartialEq)]
enum Potential {
    /// One table per translation class, instantiated on demand. Shapes are
    /// normalized so their smallest point is the origin.
    TranslationInvariant(Vec<PotentialTerm>),
    Explicit {
        terms: BTreeMap<InteractionSet, Arc<[f64]>>,
        by_point: BTreeMap<LatticePoint, Vec<InteractionSet>>,
    },
}

/// ν, r, λ, the initial probabilities and the potential.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionModel {
    nu: usize,
    r: u32,
    lambda: f64,
    measure: ProductMeasure,
    potential: Potential,
}

impl InteractionModel {
    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn measure(&self) -> &ProductMeasure {
        &self.measure
    }

    /// Sets B carrying a potential term and containing `t`, canonical order.
    pub fn active_sets_containing(&self, t: &LatticePoint) -> Vec<InteractionSet> {
        let mut out: Vec<InteractionSet> = match &self.potential {
            Potential::TranslationInvariant(shapes) => shapes
                .iter()
                .flat_map(|shape| {
                    shape
                        .set
                        .points()
                        .iter()
                        .map(move |anchor| shape.set.translate(&t.difference(anchor)))
                })
                .collect(),
            Potential::Explicit { by_point, .. } => by_point.get(t).cloned().unwrap_or_default(),
        };
        out.sort();
        out.dedup();
        out
    }

    /// The potential term on `set`, if the model has one.
    pub fn term(&self, set: &InteractionSet) -> Option<PotentialTerm> {
        match &self.potential {
            Potential::TranslationInvariant(shapes) => {
                let shape = set.normalized();
                shapes.iter().find(|s| s.set == shape).map(|s| PotentialTerm {
                    set: set.clone(),
                    table: Arc::clone(&s.table),
                })
            }
            Potential::Explicit { terms, .. } => terms.get(set).map(|table| PotentialTerm {
                set: set.clone(),
                table: Arc::clone(table),
            }),
        }
    }

    /// Φ_B as an observable; the zero variable if B carries no term.
    pub fn phi(&self, set: &InteractionSet) -> Observable {
        let radices: Vec<usize> = set.points().iter().map(|p| self.measure.site(p).len()).collect();
        let table = match self.term(set) {
            Some(t) => t.table,
            None => vec![0.0; radices.iter().product()].into(),
        };
        Observable::with_radices(set.points().clone(), radices, table)
            .expect("potential tables are validated at construction")
    }

    /// Every potential term whose set lies inside `region`, canonical order.
    pub fn terms_within(&self, region: &Region) -> Vec<PotentialTerm> {
        let mut sets: Vec<InteractionSet> = match &self.potential {
            Potential::TranslationInvariant(shapes) => region
                .iter()
                .flat_map(|anchor| shapes.iter().map(move |s| s.set.translate(anchor)))
                .filter(|s| s.points().is_subset_of(region))
                .collect(),
            Potential::Explicit { terms, .. } => terms
                .keys()
                .filter(|s| s.points().is_subset_of(region))
                .cloned()
                .collect(),
        };
        sets.sort();
        sets.dedup();
        sets.into_iter()
            .map(|s| self.term(&s).expect("set taken from the potential"))
            .collect()
    }

    fn validate(self, budget: &Budget) -> Result<Self> {
        if self.nu == 0 {
            return Err(Error::invalid("dimension ν must be at least 1"));
        }
        if self.r == 0 {
            return Err(Error::invalid("interaction radius r must be at least 1"));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::invalid("λ must be a finite nonnegative number"));
        }
        for site in self.measure.overrides().keys() {
            if site.dim() != self.nu {
                return Err(Error::invalid(format!("site {site:?} has the wrong dimension")));
            }
        }
        let check = |term: &PotentialTerm, radices: Vec<usize>| -> Result<()> {
            let pts = term.set.points();
            if pts.dim() != Some(self.nu) {
                return Err(Error::invalid(format!(
                    "term set {pts:?} has the wrong dimension"
                )));
            }
            let size = size_of(pts, budget)?;
            if !(1..=self.r).contains(&size) {
                return Err(Error::invalid(format!(
                    "term set {pts:?} has size {size}, outside 1..={}",
                    self.r
                )));
            }
            let expected: usize = radices.iter().product();
            if term.table.len() != expected {
                return Err(Error::invalid(format!(
                    "table for {pts:?} has {} entries, expected {expected}",
                    term.table.len()
                )));
            }
            if let Some(v) = term.table.iter().find(|v| v.is_nan() || v.abs() > self.lambda) {
                return Err(Error::invalid(format!(
                    "potential value {v} on {pts:?} exceeds λ = {}",
                    self.lambda
                )));
            }
            Ok(())
        };
        match &self.potential {
            Potential::TranslationInvariant(shapes) => {
                if !self.measure.has_uniform_support() {
                    return Err(Error::invalid(
                        "translation-invariant potentials need one common site support",
                    ));
                }
                let k = self.measure.default_site().len();
                for (i, shape) in shapes.iter().enumerate() {
                    if shapes[..i].iter().any(|s| s.set == shape.set) {
                        return Err(Error::invalid("two potential terms share a translation class"));
                    }
                    check(shape, vec![k; shape.set.points().len()])?;
                }
            }
            Potential::Explicit { terms, .. } => {
                for (set, table) in terms {
                    let radices = set.points().iter().map(|p| self.measure.site(p).len()).collect();
                    check(
                        &PotentialTerm {
                            set: set.clone(),
                            table: Arc::clone(table),
                        },
                        radices,
                    )?;
                }
            }
        }
        Ok(self)
    }
}

fn check_couplings(nu: usize, couplings: &[f64]) -> Result<()> {
    if couplings.len() != nu {
        return Err(Error::invalid(format!(
            "expected {nu} coupling constants (one per lattice axis), got {}",
            couplings.len()
        )));
    }
    if let Some(k) = couplings.iter().find(|k| k.is_nan() || k.abs() > 1.0) {
        return Err(Error::invalid(format!("coupling {k} violates |K| ≤ 1")));
    }
    Ok(())
}

fn nearest_neighbour_shapes(
    nu: usize,
    couplings: &[f64],
    pair_table: impl Fn(f64) -> Vec<f64>,
) -> Vec<PotentialTerm> {
    (0..nu)
        .map(|axis| {
            let pair = Region::from_sorted(vec![LatticePoint::origin(nu), LatticePoint::unit(nu, axis)]);
            PotentialTerm {
                set: InteractionSet::with_size(pair, 1),
                table: pair_table(couplings[axis]).into(),
            }
        })
        .collect()
}

/// Potts model: colours 1..=q uniformly distributed, and
/// Φ_{s,t}(ω) = λ K_{st} δ(ω(s), ω(t)) on nearest-neighbour pairs. `couplings`
/// holds one K per lattice axis.
pub fn build_potts(nu: usize, lambda: f64, q: u32, couplings: &[f64]) -> Result<InteractionModel> {
    if q < 2 {
        return Err(Error::invalid("Potts model needs q ≥ 2"));
    }
    check_couplings(nu, couplings)?;
    let colours: Vec<f64> = (1..=q).map(f64::from).collect();
    let measure = ProductMeasure::uniform(SiteDistribution::uniform(colours)?);
    let q = q as usize;
    let shapes = nearest_neighbour_shapes(nu, couplings, |k| {
        (0..q * q)
            .map(|i| if i / q == i % q { lambda * k } else { 0.0 })
            .collect()
    });
    InteractionModel {
        nu,
        r: 1,
        lambda,
        measure,
        potential: Potential::TranslationInvariant(shapes),
    }
    .validate(&Budget::default())
}

/// External fields h_t of the Ising model: a default plus per-site values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IsingFields {
    pub default: f64,
    pub per_site: BTreeMap<LatticePoint, f64>,
}

impl IsingFields {
    pub fn uniform(h: f64) -> Self {
        IsingFields {
            default: h,
            per_site: BTreeMap::new(),
        }
    }
}

/// Spin distribution on {−1, +1} absorbing the external field h:
/// P(x) ∝ e^{−x h}.
pub fn ising_site(h: f64) -> Result<SiteDistribution> {
    if !h.is_finite() {
        return Err(Error::invalid("field must be finite"));
    }
    // 1/(1+e^{±2h}) avoids overflow for large |h|
    let plus = 1.0 / (1.0 + (2.0 * h).exp());
    let minus = 1.0 / (1.0 + (-2.0 * h).exp());
    SiteDistribution::new(vec![-1.0, 1.0], vec![minus, plus])
}

/// The field h with P(+1) = `p_plus`.
pub fn ising_field_for(p_plus: f64) -> Result<f64> {
    if !(p_plus > 0.0 && p_plus < 1.0) {
        return Err(Error::invalid("P(+1) must lie strictly between 0 and 1"));
    }
    Ok(0.5 * ((1.0 - p_plus) / p_plus).ln())
}

/// Ising model: spins ±1 with the external field absorbed into the site
/// distributions, and Φ_{s,t}(ω) = λ K_{st} ω(s) ω(t) on nearest-neighbour
/// pairs. `couplings` holds one K per lattice axis.
pub fn build_ising(
    nu: usize,
    lambda: f64,
    couplings: &[f64],
    fields: &IsingFields,
) -> Result<InteractionModel> {
    check_couplings(nu, couplings)?;
    let default = ising_site(fields.default)?;
    let overrides = fields
        .per_site
        .iter()
        .map(|(site, &h)| Ok((site.clone(), ising_site(h)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let shapes = nearest_neighbour_shapes(nu, couplings, |k| {
        // support order (−1, +1): products +1, −1, −1, +1
        vec![lambda * k, -lambda * k, -lambda * k, lambda * k]
    });
    InteractionModel {
        nu,
        r: 1,
        lambda,
        measure: ProductMeasure::with_overrides(default, overrides),
        potential: Potential::TranslationInvariant(shapes),
    }
    .validate(&Budget::default())
}

/// A general model from explicit tables. With `translation_invariant`, each
/// term stands for its whole translation class.
pub fn build_custom(
    nu: usize,
    r: u32,
    lambda: f64,
    measure: ProductMeasure,
    terms: Vec<(Region, Vec<f64>)>,
    translation_invariant: bool,
    budget: &Budget,
) -> Result<InteractionModel> {
    let mut built = Vec::with_capacity(terms.len());
    for (region, table) in terms {
        if region.len() < 2 {
            return Err(Error::invalid(format!(
                "term set {region:?} has fewer than two points"
            )));
        }
        if region.dim() != Some(nu) {
            return Err(Error::invalid(format!(
                "term set {region:?} has the wrong dimension"
            )));
        }
        let set = InteractionSet::new(region, budget)?;
        built.push(PotentialTerm {
            set,
            table: table.into(),
        });
    }
    let potential = if translation_invariant {
        Potential::TranslationInvariant(
            built
                .into_iter()
                .map(|t| PotentialTerm {
                    set: t.set.normalized(),
                    table: t.table,
                })
                .collect(),
        )
    } else {
        let mut terms = BTreeMap::new();
        let mut by_point: BTreeMap<LatticePoint, Vec<InteractionSet>> = BTreeMap::new();
        for t in built {
            for p in t.set.points().iter() {
                by_point.entry(p.clone()).or_default().push(t.set.clone());
            }
            if terms.insert(t.set.clone(), t.table).is_some() {
                return Err(Error::invalid(format!(
                    "two potential terms on {:?}",
                    t.set.points()
                )));
            }
        }
        for sets in by_point.values_mut() {
            sets.sort();
        }
        Potential::Explicit { terms, by_point }
    };
    InteractionModel {
        nu,
        r,
        lambda,
        measure,
        potential,
    }
    .validate(budget)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1(c: i64) -> LatticePoint {
        LatticePoint::from([c])
    }

    fn pair(a: i64, b: i64) -> InteractionSet {
        InteractionSet::new(Region::new(vec![p1(a), p1(b)]).unwrap(), &Budget::default()).unwrap()
    }

    #[test]
    fn site_distribution_validation() {
        assert!(SiteDistribution::new(vec![1.0, 2.0], vec![0.5, 0.5]).is_ok());
        assert!(SiteDistribution::new(vec![1.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(SiteDistribution::new(vec![1.0, 2.0], vec![0.6, 0.5]).is_err());
        assert!(SiteDistribution::new(vec![1.0, 2.0], vec![1.5, -0.5]).is_err());
        assert!(SiteDistribution::new(vec![], vec![]).is_err());
    }

    #[test]
    fn potts_examples() {
        let free = build_potts(1, 0.0, 2, &[1.0]).unwrap();
        let t = free.term(&pair(0, 1)).unwrap();
        assert!(t.table.iter().all(|&v| v == 0.0));

        let m = build_potts(1, 0.25, 3, &[0.5]).unwrap();
        let site = m.measure().site(&p1(0));
        assert!((site.probability_of(&[2.0]) - 1.0 / 3.0).abs() < 1e-15);
        let t = m.term(&pair(4, 5)).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let want = if a == b { 0.125 } else { 0.0 };
                assert_eq!(t.table[a * 3 + b], want);
            }
        }
        assert!(build_potts(1, 0.1, 3, &[1.5]).is_err());
        assert!(build_potts(1, 0.1, 1, &[1.0]).is_err());
    }

    #[test]
    fn ising_examples() {
        let m = build_ising(1, 0.3, &[1.0], &IsingFields::uniform(0.0)).unwrap();
        assert_eq!(m.measure().site(&p1(0)).probability_of(&[1.0]), 0.5);

        let m = build_ising(1, 0.3, &[-0.5], &IsingFields::uniform(1.0)).unwrap();
        let p_plus = m.measure().site(&p1(3)).probability_of(&[1.0]);
        let e = std::f64::consts::E;
        assert!((p_plus - (1.0 / e) / (e + 1.0 / e)).abs() < 1e-15);
        assert!((p_plus - 0.1192).abs() < 1e-4);
        let t = m.term(&pair(0, 1)).unwrap();
        assert_eq!(t.table.iter().fold(0.0f64, |a, v| a.max(v.abs())), 0.15);

        assert!(build_ising(1, 0.3, &[1.01], &IsingFields::default()).is_err());
        assert!(build_ising(2, 0.3, &[1.0], &IsingFields::default()).is_err());
    }

    #[test]
    fn ising_field_round_trip() {
        let h = ising_field_for(0.6).unwrap();
        let p = ising_site(h).unwrap().probability_of(&[1.0]);
        assert!((p - 0.6).abs() < 1e-15);
    }

    #[test]
    fn custom_examples() {
        let b = Budget::default();
        let measure = ProductMeasure::uniform(SiteDistribution::uniform(vec![0.0, 1.0]).unwrap());
        let far = Region::new(vec![p1(0), p1(2)]).unwrap();
        let r = build_custom(1, 1, 1.0, measure.clone(), vec![(far, vec![0.0; 4])], false, &b);
        assert!(matches!(r, Err(Error::InvalidInput(_))));

        let free = build_custom(1, 1, 0.0, measure.clone(), vec![], false, &b).unwrap();
        assert!(free.terms_within(&crate::lattice::cube(3, 1)).is_empty());

        let near = Region::new(vec![p1(0), p1(1)]).unwrap();
        let eps = 1e-9;
        let r = build_custom(
            1,
            1,
            0.5,
            measure.clone(),
            vec![(near.clone(), vec![0.5 + eps, 0.0, 0.0, 0.0])],
            false,
            &b,
        );
        assert!(r.is_err());
        let ok = build_custom(
            1,
            1,
            0.5,
            measure,
            vec![(near, vec![0.5, -0.5, 0.0, 0.0])],
            false,
            &b,
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn translation_invariant_terms_cover_regions() {
        let m = build_ising(2, 0.1, &[1.0, 0.5], &IsingFields::default()).unwrap();
        let region = crate::lattice::cube(1, 2);
        // 3x3 grid: 6 horizontal + 6 vertical unit pairs
        assert_eq!(m.terms_within(&region).len(), 12);
        let origin = LatticePoint::origin(2);
        assert_eq!(m.active_sets_containing(&origin).len(), 4);
        for t in m.terms_within(&region) {
            assert!(t.table.iter().all(|v| v.abs() <= m.lambda()));
        }
    }
}
