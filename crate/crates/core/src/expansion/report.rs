use std::fmt::Write as _;

use serde::Serialize;

use crate::budget::Budget;
use crate::error::Result;
use crate::exactgibbs::gibbs_probability;
use crate::graphkit::{l_max, size_of, Lambda0};
use crate::lattice::distance_to_origin;
use crate::model::{event_probability_p0, CylinderEvent, InteractionModel};
use crate::sum::CompensatedSum;

use super::{j_term, m_stabilization, tail_bound};

/// Ratio used for the geometric tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RhoChoice {
    /// ρ = λ · 6e² · L · (8ν)^{2r}, sharp for the given λ.
    Model,
    /// ρ = 0.9, valid for every λ ≤ λ₀.
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionOptions {
    pub rho: RhoChoice,
    /// Also compute P_N(A) exactly on this cube for comparison.
    pub oracle_cube: Option<u32>,
}

impl Default for ExpansionOptions {
    fn default() -> Self {
        ExpansionOptions {
            rho: RhoChoice::Model,
            oracle_cube: None,
        }
    }
}

/// Status of the error certificate attached to a partial sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    /// λ ≤ λ₀ and the tail bound applies.
    Certified,
    /// λ > λ₀ or ρ ≥ 1: the partial sum carries no guarantee.
    Refused,
    /// The tail bound needs the first omitted order to be at least 4.
    TailOmitted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermRow {
    pub n: usize,
    pub m_n: u64,
    pub family_count: usize,
    pub j: f64,
    pub running_sum: f64,
    pub tail_at_next: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleComparison {
    pub cube_radius: u32,
    pub probability: f64,
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub nu: usize,
    pub r: u32,
    pub lambda: f64,
    pub l_constant: u64,
    pub lambda0: f64,
    pub lambda0_denominator: u128,
    pub lambda_within_lambda0: bool,
    pub q: u32,
    pub d: u64,
    pub p0_event: f64,
    pub rho_source: RhoChoice,
    pub rho: f64,
    pub terms: Vec<TermRow>,
    pub partial_sum: f64,
    pub tail_bound: Option<f64>,
    pub certificate: Certificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleComparison>,
}

/// 17 significant digits, enough to round-trip any f64.
pub(crate) fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl ExpansionReport {
    /// Columns n, M_n, family_count, J_n, running_sum, tail_at_next; an
    /// empty cell where no tail bound applies.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,M_n,family_count,J_n,running_sum,tail_at_next\n");
        for t in &self.terms {
            let tail = t.tail_at_next.map(fmt_float).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{}",
                t.n,
                t.m_n,
                t.family_count,
                fmt_float(t.j),
                fmt_float(t.running_sum),
                tail
            )
            .unwrap();
        }
        out
    }
}

/// λ · 6e² · L · (8ν)^{2r}.
pub fn model_rho(nu: usize, r: u32, lambda: f64, l: u64) -> f64 {
    let e2 = std::f64::consts::E.powi(2);
    lambda * 6.0 * e2 * l as f64 * (8.0 * nu as f64).powi(2 * r as i32)
}

/// Σ_{n ≤ n_max} J_A(M_n, n), each term on its own stable cube, with the
/// certified tail bound for the omitted orders.
pub fn thermodynamic_probability(
    model: &InteractionModel,
    event: &CylinderEvent,
    n_max: usize,
    options: &ExpansionOptions,
    budget: &Budget,
) -> Result<ExpansionReport> {
    let (nu, r, lambda) = (model.nu(), model.r(), model.lambda());
    let base = event.base();
    let q = size_of(base, budget)?;
    let d = distance_to_origin(base)?;
    let l = l_max(nu, r, budget)?;
    let lambda0 = Lambda0::from_l(nu, r, l);
    let within = lambda0.admits(lambda);
    let p0a = event_probability_p0(model.measure(), event, budget)?;
    let rho = match options.rho {
        RhoChoice::Model => model_rho(nu, r, lambda, l),
        RhoChoice::Fixed => 0.9,
    };
    let tail_from = |n0: usize| -> Option<f64> {
        if n0 >= 4 && rho < 1.0 {
            tail_bound(q, p0a, n0 as u32, rho).ok()
        } else {
            None
        }
    };

    let mut terms = Vec::with_capacity(n_max + 1);
    let mut running = CompensatedSum::new();
    for n in 0..=n_max {
        let m_n = m_stabilization(n as u64, r as u64, q as u64, d);
        let radius = u32::try_from(m_n).map_err(|_| crate::error::Error::invalid("cube too large"))?;
        let term = j_term(model, event, radius, n, budget)?;
        running.add(term.value);
        terms.push(TermRow {
            n,
            m_n,
            family_count: term.family_count,
            j: term.value,
            running_sum: running.value(),
            tail_at_next: tail_from(n + 1),
        });
    }

    let tail = tail_from(n_max + 1);
    let (certificate, note) = if !within {
        (
            Certificate::Refused,
            Some(format!(
                "λ = {lambda} exceeds λ₀ = 1/{}; convergence is not certified",
                lambda0.denominator
            )),
        )
    } else if rho >= 1.0 {
        (Certificate::Refused, Some(format!("ρ = {rho} is not below 1")))
    } else if tail.is_none() {
        (
            Certificate::TailOmitted,
            Some("the tail bound needs n_max ≥ 3".to_string()),
        )
    } else {
        (Certificate::Certified, None)
    };

    let partial_sum = running.value();
    let oracle = match options.oracle_cube {
        Some(n) => {
            let p = gibbs_probability(model, n, event, budget)?;
            Some(OracleComparison {
                cube_radius: n,
                probability: p,
                difference: (partial_sum - p).abs(),
            })
        }
        None => None,
    };

    Ok(ExpansionReport {
        nu,
        r,
        lambda,
        l_constant: l,
        lambda0: lambda0.value(),
        lambda0_denominator: lambda0.denominator,
        lambda_within_lambda0: within,
        q,
        d,
        p0_event: p0a,
        rho_source: options.rho,
        rho,
        terms,
        partial_sum,
        tail_bound: tail,
        certificate,
        note,
        oracle,
    })
}
