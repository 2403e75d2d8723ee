//! Exact finite-volume Gibbs probabilities by enumeration of every
//! configuration on the cube Λ_N.

use rayon::prelude::*;

use crate::budget::{guard, Budget};
use crate::error::{Error, Result};
use crate::lattice::{cube, Region};
use crate::model::{CylinderEvent, InteractionModel, ProductMeasure};
use crate::observable::Observable;
use crate::sum::CompensatedSum;

/// Configurations per parallel work unit. Fixed, so the reduction tree does
/// not depend on the thread count.
const BLOCK: u128 = 4096;

/// Spin values on a finite set of sites.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalConfiguration {
    sites: Region,
    values: Vec<f64>,
}

impl LocalConfiguration {
    /// `values` are listed in the canonical order of `sites`; each must lie in
    /// that site's support.
    pub fn new(sites: Region, values: Vec<f64>, measure: &ProductMeasure) -> Result<Self> {
        if sites.len() != values.len() {
            return Err(Error::invalid("one value per site is required"));
        }
        for (site, v) in sites.iter().zip(&values) {
            if measure.site(site).index_of(*v).is_none() {
                return Err(Error::invalid(format!(
                    "value {v} is not in the support at {site:?}"
                )));
            }
        }
        Ok(LocalConfiguration { sites, values })
    }

    pub fn sites(&self) -> &Region {
        &self.sites
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// U_Λ(ω): the sum of Φ_B(ω) over potential terms with B ⊆ Λ.
pub fn interaction_energy(
    model: &InteractionModel,
    region: &Region,
    config: &LocalConfiguration,
) -> Result<f64> {
    let mut index = Vec::with_capacity(region.len());
    for site in region {
        let pos = config
            .sites
            .index_of(site)
            .ok_or_else(|| Error::invalid(format!("site {site:?} is not assigned")))?;
        let v = config.values[pos];
        index.push(
            model
                .measure()
                .site(site)
                .index_of(v)
                .expect("validated configuration"),
        );
    }
    let terms = compile_terms(model, region);
    Ok(terms
        .iter()
        .map(|t| t.eval(&index))
        .sum::<CompensatedSum>()
        .value())
}

/// A table whose sites are given as positions in an enclosing region.
struct Compiled {
    positions: Vec<usize>,
    radices: Vec<usize>,
    table: std::sync::Arc<[f64]>,
}

impl Compiled {
    fn from_observable(obs: &Observable, region: &Region) -> Option<Self> {
        let positions = obs
            .sites()
            .iter()
            .map(|s| region.index_of(s))
            .collect::<Option<Vec<_>>>()?;
        Some(Compiled {
            positions,
            radices: obs.radices().to_vec(),
            table: obs.table().into(),
        })
    }

    #[inline]
    fn eval(&self, digits: &[usize]) -> f64 {
        let mut flat = 0;
        for (&p, &r) in self.positions.iter().zip(&self.radices) {
            flat = flat * r + digits[p];
        }
        self.table[flat]
    }
}

fn compile_terms(model: &InteractionModel, region: &Region) -> Vec<Compiled> {
    model
        .terms_within(region)
        .iter()
        .map(|t| {
            let obs = model.phi(&t.set);
            Compiled::from_observable(&obs, region).expect("term lies inside the region")
        })
        .collect()
}

/// ⟨Y⟩ under P_N, the Gibbs modification of P₀ by U_{Λ_N}.
pub fn gibbs_expectation(model: &InteractionModel, n: u32, y: &Observable, budget: &Budget) -> Result<f64> {
    let region = cube(n, model.nu());
    if y.sites().dim().is_some_and(|d| d != model.nu()) {
        return Err(Error::invalid("observable has the wrong dimension"));
    }
    let y = Compiled::from_observable(y, &region)
        .ok_or_else(|| Error::invalid(format!("observable support is not inside the cube of radius {n}")))?;
    let measure = model.measure();
    let dists: Vec<_> = region.iter().map(|s| measure.site(s)).collect();
    let radices: Vec<usize> = dists.iter().map(|d| d.len()).collect();
    let total = radices
        .iter()
        .try_fold(1u128, |acc, &r| acc.checked_mul(r as u128))
        .unwrap_or(u128::MAX);
    guard("configurations of the cube", total, budget.max_configurations)?;

    let terms = compile_terms(model, &region);
    // U ≤ Σ max Φ_B, so exp(U − shift) ≤ 1
    let shift: f64 = terms
        .iter()
        .map(|t| t.table.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .sum();

    let blocks = total.div_ceil(BLOCK);
    let partials: Vec<(CompensatedSum, CompensatedSum)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK;
            let end = (start + BLOCK).min(total);
            let mut digits = decode(start, &radices);
            let mut num = CompensatedSum::new();
            let mut den = CompensatedSum::new();
            for _ in start..end {
                let mut p = 1.0;
                for (d, &i) in dists.iter().zip(&digits) {
                    p *= d.probabilities()[i];
                }
                let u: f64 = terms.iter().map(|t| t.eval(&digits)).sum();
                let w = p * (u - shift).exp();
                den.add(w);
                num.add(y.eval(&digits) * w);
                advance(&mut digits, &radices);
            }
            (num, den)
        })
        .collect();

    let mut num = CompensatedSum::new();
    let mut den = CompensatedSum::new();
    for (a, b) in &partials {
        num.merge(a);
        den.merge(b);
    }
    Ok(num.value() / den.value())
}

/// P_N(A) = ⟨I_A e^U⟩ / ⟨e^U⟩ on Λ_N.
pub fn gibbs_probability(
    model: &InteractionModel,
    n: u32,
    event: &CylinderEvent,
    budget: &Budget,
) -> Result<f64> {
    let region = cube(n, model.nu());
    if !event.base().is_subset_of(&region) {
        return Err(Error::invalid(format!(
            "event base is not inside the cube of radius {n}"
        )));
    }
    let indicator = event.indicator(model.measure(), budget)?;
    gibbs_expectation(model, n, &indicator, budget)
}

/// Odometer digits of configuration number `k` (last site fastest).
fn decode(mut k: u128, radices: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; radices.len()];
    for i in (0..radices.len()).rev() {
        let r = radices[i] as u128;
        digits[i] = (k % r) as usize;
        k /= r;
    }
    digits
}

#[inline]
fn advance(digits: &mut [usize], radices: &[usize]) {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < radices[i] {
            return;
        }
        digits[i] = 0;
    }
}
