use std::sync::Arc;

use crate::budget::{guard, Budget};
use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, Region};
use crate::model::ProductMeasure;

/// A random variable depending on finitely many sites, stored as a value
/// table over the local configurations of its support.
///
/// The table is row-major over the sites in canonical order (last site
/// varies fastest); each site ranges over the indices of its support under
/// the product measure the observable was built for.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    sites: Region,
    radices: Vec<usize>,
    table: Arc<[f64]>,
}

impl Observable {
    pub fn new(sites: Region, table: impl Into<Arc<[f64]>>, measure: &ProductMeasure) -> Result<Self> {
        let radices: Vec<usize> = sites.iter().map(|p| measure.site(p).len()).collect();
        Observable::with_radices(sites, radices, table.into())
    }

    pub(crate) fn with_radices(sites: Region, radices: Vec<usize>, table: Arc<[f64]>) -> Result<Self> {
        let expected: usize = radices.iter().product();
        if table.len() != expected {
            return Err(Error::invalid(format!(
                "value table has {} entries, local configuration space has {expected}",
                table.len()
            )));
        }
        if table.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("value table contains a non-finite entry"));
        }
        Ok(Observable {
            sites,
            radices,
            table,
        })
    }

    pub fn constant(value: f64) -> Self {
        Observable {
            sites: Region::default(),
            radices: Vec::new(),
            table: Arc::from(vec![value]),
        }
    }

    /// X_t(ω) = ω(t).
    pub fn spin(site: &LatticePoint, measure: &ProductMeasure) -> Self {
        let dist = measure.site(site);
        Observable {
            sites: Region::from_sorted(vec![site.clone()]),
            radices: vec![dist.len()],
            table: Arc::from(dist.support().to_vec()),
        }
    }

    /// Builds the table by evaluating `f` on every local configuration, given
    /// as spin values in site order.
    pub fn from_fn(
        sites: Region,
        measure: &ProductMeasure,
        budget: &Budget,
        mut f: impl FnMut(&[f64]) -> f64,
    ) -> Result<Self> {
        let dists: Vec<_> = sites.iter().map(|p| measure.site(p)).collect();
        let radices: Vec<usize> = dists.iter().map(|d| d.len()).collect();
        let total = radices.iter().map(|&r| r as u128).product::<u128>();
        guard("observable table", total, budget.max_configurations)?;
        let mut table = Vec::with_capacity(total as usize);
        let mut idx = vec![0usize; radices.len()];
        let mut values: Vec<f64> = dists.iter().map(|d| d.support()[0]).collect();
        for _ in 0..total {
            table.push(f(&values));
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < radices[k] {
                    values[k] = dists[k].support()[idx[k]];
                    break;
                }
                idx[k] = 0;
                values[k] = dists[k].support()[0];
            }
        }
        Observable::with_radices(sites, radices, table.into())
    }

    pub fn sites(&self) -> &Region {
        &self.sites
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn scaled(&self, factor: f64) -> Observable {
        Observable {
            sites: self.sites.clone(),
            radices: self.radices.clone(),
            table: self.table.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.table.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Table lookup given support indices for the observable's own sites.
    #[inline]
    pub fn value_at(&self, indices: &[usize]) -> f64 {
        let mut flat = 0;
        for (i, &r) in indices.iter().zip(&self.radices) {
            flat = flat * r + i;
        }
        self.table[flat]
    }
}
