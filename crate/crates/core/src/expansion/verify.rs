use std::ops::RangeInclusive;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::graphkit::{l_max, size_of, Lambda0, SetCatalog};
use crate::lattice::{cube, Region};
use crate::model::{event_probability_p0, Clause, CylinderEvent, InteractionModel};
use crate::record::VerificationRecord;
use crate::sum::CompensatedSum;

use super::{
    enumerate_q_connected_families, family_semi_invariants, thermodynamic_probability, ExpansionOptions,
    Family, SetSource,
};

/// Slack for comparisons of quantities that are exact up to rounding.
const ROUNDING: f64 = 1e-12;

/// (Σ n_j ln(u_j / n_j), Σ n_j ln(u_j + 1) − Σ n_j ln n_j) for one family.
fn weight_logs(f: &Family) -> Result<(f64, f64)> {
    let mut ratio = 0.0;
    let mut product = 0.0;
    for (j, (_, m)) in f.entries().iter().enumerate() {
        let u = f.u_weight(j)? as f64;
        let m = *m as f64;
        ratio += m * (u / m).ln();
        product += m * (u + 1.0).ln() - m * m.ln();
    }
    Ok((ratio, product))
}

/// Numerical checks of the combinatorial and analytic bounds behind the
/// series, for every order in `orders` on the cube of radius `cube_radius`:
///
/// * `family_log_ratio`: Σ n_j ln(u_j/n_j) ≤ n ln L for every family of 𝔅;
/// * `family_product_bound`: Π (u_j+1)^{n_j} < (eL)ⁿ Π n_j^{n_j};
/// * `family_count`: the number of Q-connected families is below
///   2^{2q} (2(8ν)^{2r})ⁿ;
/// * `semi_invariant_bound` (n > 3): |⟨I_A, Φ_Γ⟩₀| < P₀(A) λⁿ (3e²L)ⁿ (n+1) Γ!;
/// * `term_bound` (n > 3): |J_A(N, n)| ≤ 2^{2q} P₀(A) 0.9ⁿ (n+1), claimed
///   only for λ ≤ λ₀.
pub fn verify_bounds(
    model: &InteractionModel,
    event: &CylinderEvent,
    orders: RangeInclusive<usize>,
    cube_radius: u32,
    budget: &Budget,
) -> Result<Vec<VerificationRecord>> {
    let (nu, r, lambda) = (model.nu(), model.r(), model.lambda());
    let base = event.base();
    let q = size_of(base, budget)?;
    let p0a = event_probability_p0(model.measure(), event, budget)?;
    let catalog = SetCatalog::new(nu, r, budget)?;
    let l = l_max(nu, r, budget)?;
    let lf = l as f64;
    let within = Lambda0::from_l(nu, r, l).admits(lambda);
    let region = cube(cube_radius, nu);
    let four_q = 4f64.powi(q as i32);
    let e2 = std::f64::consts::E.powi(2);
    let mut out = Vec::new();

    for n in orders {
        if n == 0 {
            continue;
        }
        let params = format!("nu={nu} r={r} lambda={lambda:e} N={cube_radius} n={n}");
        let nf = n as f64;
        let families =
            enumerate_q_connected_families(base, n, &region, SetSource::Collection(&catalog), budget)?;

        let mut worst_ratio = f64::NEG_INFINITY;
        let mut worst_product = f64::NEG_INFINITY;
        for f in &families {
            let (ratio, product) = weight_logs(f)?;
            worst_ratio = worst_ratio.max(ratio);
            worst_product = worst_product.max(product);
        }
        let ratio_bound = nf * lf.ln();
        out.push(
            VerificationRecord::new(
                "family_log_ratio",
                params.clone(),
                worst_ratio,
                ratio_bound,
                worst_ratio <= ratio_bound + ROUNDING,
            )
            .with_note("measured = max over families of Σ n_j ln(u_j/n_j); bound = n ln L"),
        );
        let product_bound = nf * (1.0 + lf.ln());
        out.push(
            VerificationRecord::new(
                "family_product_bound",
                params.clone(),
                worst_product,
                product_bound,
                worst_product < product_bound,
            )
            .with_note("logarithms: Σ n_j ln(u_j+1) − Σ n_j ln n_j versus n(1 + ln L)"),
        );

        let count_bound = four_q * (2.0 * (8.0 * nu as f64).powi(2 * r as i32)).powi(n as i32);
        out.push(VerificationRecord::new(
            "family_count",
            params.clone(),
            families.len() as f64,
            count_bound,
            (families.len() as f64) < count_bound,
        ));

        if n > 3 {
            let parts = family_semi_invariants(model, event, cube_radius, n, budget)?;
            let scale = p0a * (lambda * 3.0 * e2 * lf).powi(n as i32) * (nf + 1.0);
            let mut worst = 0.0f64;
            let mut j = CompensatedSum::new();
            for (f, k) in &parts {
                let gf = f.factorial() as f64;
                j.add(k / gf);
                let bound = scale * gf;
                let ratio = if k.abs() == 0.0 {
                    0.0
                } else if bound == 0.0 {
                    f64::MAX
                } else {
                    k.abs() / bound
                };
                worst = worst.max(ratio);
            }
            out.push(
                VerificationRecord::new("semi_invariant_bound", params.clone(), worst, 1.0, worst < 1.0)
                    .with_note("measured = max over families of |⟨I_A, Φ_Γ⟩₀| / bound"),
            );

            let j = j.value().abs();
            let term_bound = four_q * p0a * 0.9f64.powi(n as i32) * (nf + 1.0);
            let mut rec =
                VerificationRecord::new("term_bound", params.clone(), j, term_bound, j <= term_bound);
            if !within {
                rec = rec.with_note("λ exceeds λ₀, where the bound is not claimed");
            }
            out.push(rec);
        }
    }
    Ok(out)
}

/// The same event rebuilt from its constraints listed in reverse order.
fn reencoded(event: &CylinderEvent) -> Result<CylinderEvent> {
    let mut base: Vec<_> = event.base().points().to_vec();
    base.reverse();
    let clauses = event
        .clauses()
        .iter()
        .map(|c| {
            let mut constraints: Vec<_> = c
                .constraints()
                .iter()
                .map(|(s, v)| {
                    let mut v = v.clone();
                    v.reverse();
                    (s.clone(), v)
                })
                .collect();
            constraints.reverse();
            Clause::new(constraints)
        })
        .collect::<Result<Vec<_>>>()?;
    CylinderEvent::new(Region::new(base)?, clauses)
}

/// The two consistency conditions on cylinder probabilities:
///
/// * `base_enlargement`: A seen on Q and on Q′ ⊇ Q gives partial sums within
///   the two tail bounds of each other;
/// * `encoding_permutation`: listing sites and values in another order gives
///   bit-identical terms.
pub fn consistency_check(
    model: &InteractionModel,
    event: &CylinderEvent,
    enlarged: &Region,
    n_max: usize,
    options: &ExpansionOptions,
    budget: &Budget,
) -> Result<Vec<VerificationRecord>> {
    if !event.base().is_subset_of(enlarged) {
        return Err(Error::invalid("the enlarged base must contain the event base"));
    }
    let options = ExpansionOptions {
        oracle_cube: None,
        ..options.clone()
    };
    let params = format!("nu={} lambda={:e} n_max={n_max}", model.nu(), model.lambda());
    let small = thermodynamic_probability(model, event, n_max, &options, budget)?;
    let large = thermodynamic_probability(
        model,
        &event.with_base(enlarged.clone())?,
        n_max,
        &options,
        budget,
    )?;
    let diff = (small.partial_sum - large.partial_sum).abs();
    let tails = small.tail_bound.unwrap_or(0.0) + large.tail_bound.unwrap_or(0.0);
    let mut enlarge = VerificationRecord::new(
        "base_enlargement",
        params.clone(),
        diff,
        tails,
        diff <= tails + ROUNDING,
    );
    if small.tail_bound.is_none() || large.tail_bound.is_none() {
        enlarge = enlarge.with_note("no tail certificate; agreement to rounding required");
    }

    let shuffled = thermodynamic_probability(model, &reencoded(event)?, n_max, &options, budget)?;
    let identical = small.terms.len() == shuffled.terms.len()
        && small
            .terms
            .iter()
            .zip(&shuffled.terms)
            .all(|(a, b)| a.j.to_bits() == b.j.to_bits())
        && small.partial_sum.to_bits() == shuffled.partial_sum.to_bits();
    let permute = VerificationRecord::new(
        "encoding_permutation",
        params,
        (small.partial_sum - shuffled.partial_sum).abs(),
        0.0,
        identical,
    )
    .with_note("pass requires bit-identical terms");
    Ok(vec![enlarge, permute])
}
