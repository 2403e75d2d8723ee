//! JSON-shaped model and event configuration.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, Region};

use super::{
    build_custom, build_ising, build_potts, ising_field_for, Clause, CylinderEvent, InteractionModel,
    IsingFields, ProductMeasure, SiteDistribution,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ising,
    Potts,
    Custom,
}

/// A coupling constant shared by all axes, or one per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Couplings {
    Uniform(f64),
    PerAxis(Vec<f64>),
}

/// Ising external field: one value everywhere, or a default plus
/// per-site overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldsConfig {
    Uniform(f64),
    PerSite {
        #[serde(default)]
        default: f64,
        #[serde(default)]
        sites: Vec<SiteField>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteField {
    pub site: LatticePoint,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SitesConfig {
    pub default: SiteDistribution,
    #[serde(default)]
    pub overrides: Vec<SiteOverride>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteOverride {
    pub site: LatticePoint,
    pub support: Vec<f64>,
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub set: Vec<LatticePoint>,
    pub table: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub nu: usize,
    #[serde(default = "default_r")]
    pub r: u32,
    pub lambda: f64,
    pub model: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Couplings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields: Option<FieldsConfig>,
    /// Ising shortcut: P(+1) at every site, converted to a uniform field.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sites: Option<SitesConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<TermConfig>,
    #[serde(default)]
    pub translation_invariant: bool,
}

fn default_r() -> u32 {
    1
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("model config: {e}")))
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        serde_json::from_value(value).map_err(|e| Error::invalid(format!("model config: {e}")))
    }

    fn couplings(&self) -> Vec<f64> {
        match &self.couplings {
            None => vec![1.0; self.nu],
            Some(Couplings::Uniform(k)) => vec![*k; self.nu],
            Some(Couplings::PerAxis(ks)) => ks.clone(),
        }
    }

    fn reject_unused(&self, what: &str, present: bool) -> Result<()> {
        if present {
            Err(Error::invalid(format!(
                "key \"{what}\" does not apply to a {:?} model",
                self.model
            )))
        } else {
            Ok(())
        }
    }

    pub fn build(&self, budget: &Budget) -> Result<InteractionModel> {
        if self.model != ModelKind::Custom && self.r != 1 {
            return Err(Error::invalid("Ising and Potts models have r = 1"));
        }
        match self.model {
            ModelKind::Ising => {
                self.reject_unused("q", self.q.is_some())?;
                self.reject_unused("sites", self.sites.is_some())?;
                self.reject_unused("terms", !self.terms.is_empty())?;
                let fields = match (&self.fields, self.p_plus) {
                    (Some(_), Some(_)) => {
                        return Err(Error::invalid("give either \"fields\" or \"p_plus\", not both"))
                    }
                    (None, Some(p)) => IsingFields::uniform(ising_field_for(p)?),
                    (None, None) => IsingFields::default(),
                    (Some(FieldsConfig::Uniform(h)), None) => IsingFields::uniform(*h),
                    (Some(FieldsConfig::PerSite { default, sites }), None) => {
                        let mut per_site = BTreeMap::new();
                        for f in sites {
                            if per_site.insert(f.site.clone(), f.h).is_some() {
                                return Err(Error::invalid(format!("field at {:?} given twice", f.site)));
                            }
                        }
                        IsingFields {
                            default: *default,
                            per_site,
                        }
                    }
                };
                build_ising(self.nu, self.lambda, &self.couplings(), &fields)
            }
            ModelKind::Potts => {
                self.reject_unused("fields", self.fields.is_some())?;
                self.reject_unused("p_plus", self.p_plus.is_some())?;
                self.reject_unused("sites", self.sites.is_some())?;
                self.reject_unused("terms", !self.terms.is_empty())?;
                let q = self.q.ok_or_else(|| Error::invalid("Potts model needs \"q\""))?;
                build_potts(self.nu, self.lambda, q, &self.couplings())
            }
            ModelKind::Custom => {
                self.reject_unused("q", self.q.is_some())?;
                self.reject_unused("couplings", self.couplings.is_some())?;
                self.reject_unused("fields", self.fields.is_some())?;
                self.reject_unused("p_plus", self.p_plus.is_some())?;
                let sites = self
                    .sites
                    .as_ref()
                    .ok_or_else(|| Error::invalid("custom model needs \"sites\""))?;
                let mut overrides = BTreeMap::new();
                for o in &sites.overrides {
                    let dist = SiteDistribution::new(o.support.clone(), o.probabilities.clone())?;
                    if overrides.insert(o.site.clone(), dist).is_some() {
                        return Err(Error::invalid(format!("site {:?} overridden twice", o.site)));
                    }
                }
                let measure = ProductMeasure::with_overrides(sites.default.clone(), overrides);
                let terms = self
                    .terms
                    .iter()
                    .map(|t| Ok((Region::new(t.set.clone())?, t.table.clone())))
                    .collect::<Result<Vec<_>>>()?;
                build_custom(
                    self.nu,
                    self.r,
                    self.lambda,
                    measure,
                    terms,
                    self.translation_invariant,
                    budget,
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintConfig {
    pub site: LatticePoint,
    pub allowed: Vec<f64>,
}

/// A clause is a single constraint, `{"all": [...]}`, or a bare list of
/// constraints. An empty list is the unconstrained clause.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClauseConfig {
    Single(ConstraintConfig),
    All { all: Vec<ConstraintConfig> },
    List(Vec<ConstraintConfig>),
}

impl ClauseConfig {
    fn constraints(&self) -> &[ConstraintConfig] {
        match self {
            ClauseConfig::Single(c) => std::slice::from_ref(c),
            ClauseConfig::All { all } => all,
            ClauseConfig::List(cs) => cs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventConfig {
    pub base: Vec<LatticePoint>,
    pub clauses: Vec<ClauseConfig>,
}

impl EventConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("event config: {e}")))
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        serde_json::from_value(value).map_err(|e| Error::invalid(format!("event config: {e}")))
    }

    pub fn build(&self) -> Result<CylinderEvent> {
        let base = Region::new(self.base.clone())?;
        let clauses = self
            .clauses
            .iter()
            .map(|c| {
                Clause::new(
                    c.constraints()
                        .iter()
                        .map(|k| (k.site.clone(), k.allowed.clone())),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        CylinderEvent::new(base, clauses)
    }
}
