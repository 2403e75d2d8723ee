//! Joint semi-invariants (cumulants) with respect to the product measure P₀.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::sync::OnceLock;

use crate::budget::{guard, Budget};
use crate::error::{Error, Result};
use crate::expansion::Family;
use crate::lattice::Region;
use crate::model::{InteractionModel, ProductMeasure};
use crate::observable::Observable;
use crate::sum::CompensatedSum;

/// Hard ceiling on argument lists; Bell(12) partitions is already ~4·10⁶.
const MAX_ORDER: usize = 12;

/// ⟨Π vars⟩₀. Variables whose supports form separate intersection
/// components are independent under P₀, so each component is enumerated on
/// its own and the results multiplied.
pub fn mixed_moment(vars: &[&Observable], measure: &ProductMeasure, budget: &Budget) -> Result<f64> {
    let supports: Vec<&Region> = vars.iter().map(|v| v.sites()).collect();
    let mut product = 1.0;
    for component in components(&supports) {
        let members: Vec<&Observable> = component.iter().map(|&i| vars[i]).collect();
        product *= connected_moment(&members, measure, budget)?;
    }
    Ok(product)
}

/// Connected components of the intersection graph on `supports`. Variables
/// with empty support are constants and form their own components.
fn components(supports: &[&Region]) -> Vec<Vec<usize>> {
    let n = supports.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                if !seen[j] && supports[i].intersects(supports[j]) {
                    seen[j] = true;
                    comp.push(j);
                    queue.push_back(j);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

fn connected_moment(vars: &[&Observable], measure: &ProductMeasure, budget: &Budget) -> Result<f64> {
    let mut union = Region::default();
    for v in vars {
        union = union.union(v.sites());
    }
    let dists: Vec<_> = union.iter().map(|s| measure.site(s)).collect();
    let radices: Vec<usize> = dists.iter().map(|d| d.len()).collect();
    for v in vars {
        let own: Vec<usize> = v.sites().iter().map(|s| measure.site(s).len()).collect();
        if own != v.radices() {
            return Err(Error::invalid(
                "observable was built for a different product measure",
            ));
        }
    }
    let total = radices
        .iter()
        .try_fold(1u128, |acc, &r| acc.checked_mul(r as u128))
        .unwrap_or(u128::MAX);
    guard(
        "configurations of a moment support",
        total,
        budget.max_configurations,
    )?;
    let positions: Vec<Vec<usize>> = vars
        .iter()
        .map(|v| v.sites().iter().map(|s| union.index_of(s).unwrap()).collect())
        .collect();

    let mut digits = vec![0usize; radices.len()];
    let mut local = Vec::new();
    let mut sum = CompensatedSum::new();
    for _ in 0..total {
        let mut w = 1.0;
        for (d, &i) in dists.iter().zip(&digits) {
            w *= d.probabilities()[i];
        }
        if w != 0.0 {
            for (v, pos) in vars.iter().zip(&positions) {
                local.clear();
                local.extend(pos.iter().map(|&p| digits[p]));
                w *= v.value_at(&local);
            }
            sum.add(w);
        }
        for k in (0..digits.len()).rev() {
            digits[k] += 1;
            if digits[k] < radices[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    Ok(sum.value())
}

/// Set partitions of {0..n} as lists of block bitmasks, generated from
/// restricted-growth strings and cached per n.
fn partitions(n: usize) -> &'static [Vec<u32>] {
    static CACHE: [OnceLock<Vec<Vec<u32>>>; MAX_ORDER + 1] = [const { OnceLock::new() }; MAX_ORDER + 1];
    CACHE[n].get_or_init(|| {
        let mut out = Vec::new();
        if n == 0 {
            out.push(Vec::new());
            return out;
        }
        let mut rgs = vec![0usize; n];
        loop {
            let blocks = rgs.iter().max().unwrap() + 1;
            let mut masks = vec![0u32; blocks];
            for (i, &b) in rgs.iter().enumerate() {
                masks[b] |= 1 << i;
            }
            out.push(masks);
            // next restricted-growth string: bump the last position that may grow
            let mut i = n - 1;
            loop {
                if i == 0 {
                    return out;
                }
                let prefix_max = *rgs[..i].iter().max().unwrap();
                if rgs[i] <= prefix_max {
                    rgs[i] += 1;
                    for x in &mut rgs[i + 1..] {
                        *x = 0;
                    }
                    break;
                }
                i -= 1;
            }
        }
    })
}

/// Total order on observables by support, radices, then table bits.
fn canonical_cmp(a: &Observable, b: &Observable) -> Ordering {
    a.sites()
        .cmp(b.sites())
        .then_with(|| a.radices().cmp(b.radices()))
        .then_with(|| {
            a.table()
                .iter()
                .zip(b.table())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or_else(|| a.table().len().cmp(&b.table().len()))
        })
}

/// ⟨V₁, …, V_n⟩₀ = Σ_π (−1)^{|π|−1} (|π|−1)! Π_{b∈π} ⟨Π_{i∈b} V_i⟩₀.
///
/// A single variable gives its mean. Arguments are put in canonical order
/// first, so any permutation of them gives a bit-identical result.
pub fn semi_invariant(vars: &[Observable], measure: &ProductMeasure, budget: &Budget) -> Result<f64> {
    let n = vars.len();
    if n == 0 {
        return Err(Error::invalid("a semi-invariant needs at least one argument"));
    }
    let cap = budget.max_cumulant_order.min(MAX_ORDER);
    if n > cap {
        return Err(Error::ResourceLimit {
            what: "semi-invariant order",
            needed: n as u128,
            budget: cap as u128,
        });
    }
    let mut vars: Vec<&Observable> = vars.iter().collect();
    vars.sort_by(|a, b| canonical_cmp(a, b));
    let mut moments = vec![0.0; 1 << n];
    let mut members = Vec::with_capacity(n);
    for (mask, slot) in moments.iter_mut().enumerate().skip(1) {
        members.clear();
        members.extend((0..n).filter(|i| mask & (1 << i) != 0).map(|i| vars[i]));
        *slot = mixed_moment(&members, measure, budget)?;
    }
    let mut factorials = vec![1.0f64; n + 1];
    for k in 1..=n {
        factorials[k] = factorials[k - 1] * k as f64;
    }
    let mut sum = CompensatedSum::new();
    for partition in partitions(n) {
        let k = partition.len();
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let product: f64 = partition.iter().map(|&m| moments[m as usize]).product();
        sum.add(sign * factorials[k - 1] * product);
    }
    Ok(sum.value())
}

/// ⟨Y, Φ_Γ⟩₀: Y followed by Φ_{C_i} repeated n_i times.
pub fn semi_invariant_family(
    y: &Observable,
    family: &Family,
    model: &InteractionModel,
    budget: &Budget,
) -> Result<f64> {
    let mut vars = Vec::with_capacity(family.len() + 1);
    vars.push(y.clone());
    for (set, mult) in family.entries() {
        let phi = model.phi(set);
        for _ in 0..*mult {
            vars.push(phi.clone());
        }
    }
    semi_invariant(&vars, model.measure(), budget)
}

/// Whether (Q, B₁, …, B_n) is connected, with an edge between two members
/// exactly when they intersect.
pub fn is_connected_sequence(q: &Region, sets: &[Region]) -> bool {
    let mut all: Vec<&Region> = Vec::with_capacity(sets.len() + 1);
    all.push(q);
    all.extend(sets);
    let comps = components(&all);
    comps.len() == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticePoint;
    use crate::model::{build_ising, IsingFields, SiteDistribution};

    fn p1(c: i64) -> LatticePoint {
        LatticePoint::from([c])
    }

    fn reg(cs: &[i64]) -> Region {
        Region::new(cs.iter().map(|&c| p1(c)).collect()).unwrap()
    }

    fn symmetric() -> ProductMeasure {
        ProductMeasure::uniform(SiteDistribution::uniform(vec![-1.0, 1.0]).unwrap())
    }

    fn pair_product(a: i64, b: i64, m: &ProductMeasure) -> Observable {
        Observable::from_fn(reg(&[a, b]), m, &Budget::default(), |v| v[0] * v[1]).unwrap()
    }

    #[test]
    fn bell_numbers() {
        let bell = [1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975];
        for (n, &b) in bell.iter().enumerate() {
            assert_eq!(partitions(n).len(), b, "n={n}");
        }
    }

    #[test]
    fn moment_examples() {
        let b = Budget::default();
        let m = symmetric();
        let x0 = Observable::spin(&p1(0), &m);
        assert_eq!(mixed_moment(&[&x0], &m, &b).unwrap(), 0.0);
        let a = pair_product(0, 1, &m);
        let c = pair_product(1, 2, &m);
        assert_eq!(mixed_moment(&[&a, &c], &m, &b).unwrap(), 0.0);

        let skew = ProductMeasure::uniform(SiteDistribution::new(vec![0.0, 1.0], vec![0.3, 0.7]).unwrap());
        let y0 = Observable::spin(&p1(0), &skew);
        let y5 = Observable::spin(&p1(5), &skew);
        let got = mixed_moment(&[&y0, &y5], &skew, &b).unwrap();
        assert!((got - 0.49).abs() < 1e-15);
    }

    #[test]
    fn cumulant_examples() {
        let b = Budget::default();
        let m = symmetric();
        let x = Observable::spin(&p1(0), &m);
        assert_eq!(semi_invariant(&[x.clone(), x.clone()], &m, &b).unwrap(), 1.0);
        let y = Observable::spin(&p1(3), &m);
        assert_eq!(semi_invariant(&[x.clone(), y], &m, &b).unwrap(), 0.0);
        let ind = Observable::from_fn(reg(&[0]), &m, &b, |v| (v[0] > 0.0) as u8 as f64).unwrap();
        assert_eq!(semi_invariant(&[ind], &m, &b).unwrap(), 0.5);
        assert!(semi_invariant(&[], &m, &b).is_err());
    }

    #[test]
    fn connectivity_examples() {
        assert!(is_connected_sequence(&reg(&[0]), &[]));
        assert!(!is_connected_sequence(&reg(&[0]), &[reg(&[0, 1]), reg(&[5, 6])]));
        assert!(is_connected_sequence(&reg(&[0]), &[reg(&[1, 2]), reg(&[0, 1])]));
    }

    #[test]
    fn third_cumulant_of_bernoulli() {
        // κ₃ of Bernoulli(p) is p(1−p)(1−2p)
        let b = Budget::default();
        let p = 0.3;
        let m = ProductMeasure::uniform(SiteDistribution::new(vec![0.0, 1.0], vec![1.0 - p, p]).unwrap());
        let x = Observable::spin(&p1(0), &m);
        let k3 = semi_invariant(&[x.clone(), x.clone(), x], &m, &b).unwrap();
        assert!((k3 - p * (1.0 - p) * (1.0 - 2.0 * p)).abs() < 1e-15);
    }

    #[test]
    fn ising_first_order_term_vanishes_by_symmetry() {
        let b = Budget::default();
        let model = build_ising(1, 0.01, &[1.0], &IsingFields::uniform(0.0)).unwrap();
        let ind = Observable::from_fn(reg(&[0]), model.measure(), &b, |v| (v[0] > 0.0) as u8 as f64).unwrap();
        let phi = pair_product(0, 1, model.measure()).scaled(0.01);
        assert!(semi_invariant(&[ind, phi], model.measure(), &b).unwrap().abs() < 1e-18);
    }

    #[test]
    fn order_guard() {
        let b = Budget {
            max_cumulant_order: 3,
            ..Budget::default()
        };
        let m = symmetric();
        let x = Observable::spin(&p1(0), &m);
        assert!(matches!(
            semi_invariant(&vec![x; 4], &m, &b),
            Err(Error::ResourceLimit { .. })
        ));
    }
}
