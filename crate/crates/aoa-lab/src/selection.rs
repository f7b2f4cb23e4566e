//! Antenna-subset selection. The deterministic bound shrinks as the sum of
//! squared antenna indices grows, so choosing `F` of `M` antennas reduces to
//! maximizing `sum x^2` over index sets, and the optimum is the `F` indices
//! furthest from the origin. This module carries that rule, the search
//! objective, and an exhaustive-enumeration oracle for small arrays.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::array_model::{AntennaSubset, ModelError};
use crate::fisher::SubsetSpec;

/// Enumeration ceiling for the exhaustive oracle.
pub const ENUMERATION_BUDGET: u128 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectionError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("enumerating {combinations} subsets exceeds the budget of {budget}")]
    BudgetExceeded { combinations: u128, budget: u128 },
}

/// Named selection rules used across experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectionRule {
    /// Keep every antenna.
    All,
    /// Keep indices `0..f`.
    First,
    /// Keep indices `m-f..m`.
    Furthest,
}

impl SelectionRule {
    pub fn name(&self) -> &'static str {
        match self {
            SelectionRule::All => "all",
            SelectionRule::First => "first",
            SelectionRule::Furthest => "furthest",
        }
    }

    /// The corresponding deterministic-bound subset spec for `f` antennas kept
    /// out of `m`.
    pub fn spec(&self, f: usize) -> SubsetSpec {
        match self {
            SelectionRule::All => SubsetSpec::Full,
            SelectionRule::First => SubsetSpec::First(f),
            SelectionRule::Furthest => SubsetSpec::Furthest(f),
        }
    }
}

impl std::fmt::Display for SelectionRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Exact integer sum of squared indices of the subset.
pub fn subset_sum_sq(subset: &AntennaSubset) -> u128 {
    subset.sum_sq_indices()
}

/// Size-normalized selection objective `sum x^2 / F^2`. Subsets with larger
/// values give a smaller deterministic bound.
pub fn normalized_objective(subset: &AntennaSubset) -> f64 {
    let f = subset.len() as f64;
    (subset.sum_sq_indices() as f64) / (f * f)
}

/// Trace of the angular-sensitivity weight matrix of the subset:
/// `beta^2 sum x^2 / F^2`.
pub fn subset_trace(subset: &AntennaSubset, beta: f64) -> f64 {
    beta * beta * normalized_objective(subset)
}

/// The optimal subset under the normalized objective: the `f` indices
/// furthest from the origin.
pub fn furthest_subset(m: usize, f: usize) -> Result<AntennaSubset, SelectionError> {
    Ok(AntennaSubset::furthest(m, f)?)
}

/// Binomial coefficient with saturation at `u128::MAX`.
fn binomial(m: usize, f: usize) -> u128 {
    if f > m {
        return 0;
    }
    let f = f.min(m - f);
    let mut acc: u128 = 1;
    for i in 0..f {
        acc = match acc.checked_mul((m - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn for_each_combination(
    m: usize,
    f: usize,
    mut visit: impl FnMut(&[usize]),
) {
    let mut idx: Vec<usize> = (0..f).collect();
    loop {
        visit(&idx);
        // Advance to the next combination in lexicographic order.
        let mut i = f;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + m - f {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..f {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exhaustively search all `f`-of-`m` subsets for the largest normalized
/// objective. Ties keep the lexicographically smallest subset. Refuses plans
/// beyond [`ENUMERATION_BUDGET`] combinations.
pub fn brute_force_best_subset(
    m: usize,
    f: usize,
) -> Result<(AntennaSubset, f64), SelectionError> {
    let subset_probe = AntennaSubset::furthest(m, f)?; // validates f <= m, f >= 1
    let combinations = binomial(m, f);
    if combinations > ENUMERATION_BUDGET {
        return Err(SelectionError::BudgetExceeded {
            combinations,
            budget: ENUMERATION_BUDGET,
        });
    }
    let _ = subset_probe;
    let mut best: Option<(Vec<usize>, u128)> = None;
    for_each_combination(m, f, |idx| {
        let sum: u128 = idx.iter().map(|&x| (x as u128) * (x as u128)).sum();
        let better = match &best {
            None => true,
            Some((_, best_sum)) => sum > *best_sum,
        };
        if better {
            best = Some((idx.to_vec(), sum));
        }
    });
    let (idx, _) = best.expect("at least one combination exists");
    let subset = AntennaSubset::new(idx)?;
    let obj = normalized_objective(&subset);
    Ok((subset, obj))
}

/// Objective values of every `f`-of-`m` subset, for small enumerable plans.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionObjective {
    pub values: BTreeMap<AntennaSubset, f64>,
}

/// Evaluate the normalized objective on all subsets; same budget as the
/// exhaustive search.
pub fn evaluate_all(m: usize, f: usize) -> Result<SelectionObjective, SelectionError> {
    let combinations = binomial(m, f);
    if combinations > ENUMERATION_BUDGET {
        return Err(SelectionError::BudgetExceeded {
            combinations,
            budget: ENUMERATION_BUDGET,
        });
    }
    AntennaSubset::furthest(m, f)?; // validates the (m, f) pair
    let mut values = BTreeMap::new();
    for_each_combination(m, f, |idx| {
        let subset = AntennaSubset::new(idx.to_vec()).expect("combination indices are distinct");
        let obj = normalized_objective(&subset);
        values.insert(subset, obj);
    });
    Ok(SelectionObjective { values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(14, 7), 3432);
        assert_eq!(binomial(6, 2), 15);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(40, 20), 137_846_528_820);
    }

    #[test]
    fn exhaustive_search_finds_furthest() {
        for m in 2..=10 {
            for f in 1..=m {
                let (best, obj) = brute_force_best_subset(m, f).unwrap();
                let fur = furthest_subset(m, f).unwrap();
                assert_eq!(best, fur, "m={m} f={f}");
                assert!((obj - normalized_objective(&fur)).abs() == 0.0);
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            brute_force_best_subset(40, 20),
            Err(SelectionError::BudgetExceeded { .. })
        ));
        assert!(matches!(
            evaluate_all(40, 20),
            Err(SelectionError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn evaluate_all_is_complete_and_consistent() {
        let table = evaluate_all(6, 2).unwrap();
        assert_eq!(table.values.len(), 15);
        let best = table
            .values
            .iter()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        assert_eq!(best.0, &furthest_subset(6, 2).unwrap());
        // Worst pair is {0, 1}.
        let worst = AntennaSubset::new(vec![0, 1]).unwrap();
        assert_eq!(table.values[&worst], 0.25);
    }

    #[test]
    fn furthest_objective_decreases_with_subset_size() {
        // Adding antennas to the furthest set dilutes the normalized
        // objective: (1/F^2) sum x^2 strictly decreases in F.
        let m = 32;
        let mut prev = f64::INFINITY;
        for f in 1..=m {
            let obj = normalized_objective(&furthest_subset(m, f).unwrap());
            assert!(obj < prev, "f={f}: {obj} !< {prev}");
            prev = obj;
        }
    }

    #[test]
    fn first_objective_increases_with_subset_size() {
        let mut prev = -1.0;
        for f in 2..=32 {
            let obj = normalized_objective(&AntennaSubset::first(f).unwrap());
            assert!(obj > prev, "f={f}");
            prev = obj;
        }
    }

    #[test]
    fn closed_form_index_sums_hold_exactly() {
        // Integer identities behind the closed-form traces:
        //   full/first: 6 sum = F (F-1) (2F-1)
        //   furthest:   6 sum = F [6M(M-F-1) + (F+1)(2F+1)]
        for m in 2..=64usize {
            let mut running: u128 = 0;
            for f in 1..=m {
                let x = (m - f) as u128;
                running += x * x;
                // M - F - 1 goes negative at F = M, so evaluate in i128.
                let closed_i = (f as i128)
                    * (6 * (m as i128) * ((m as i128) - (f as i128) - 1)
                        + ((f as i128) + 1) * (2 * (f as i128) + 1));
                assert_eq!(6 * running as i128, closed_i, "m={m} f={f}");
                let first_sum: u128 = (0..f as u128).map(|x| x * x).sum();
                assert_eq!(
                    6 * first_sum,
                    (f as u128) * ((f as u128) - 1) * (2 * (f as u128) - 1)
                );
            }
        }
    }

    #[test]
    fn subset_trace_matches_direct_summation() {
        let beta = std::f64::consts::PI;
        let subset = furthest_subset(16, 6).unwrap();
        let direct: f64 = subset
            .indices()
            .iter()
            .map(|&x| (x as f64) * (x as f64))
            .sum::<f64>()
            * beta
            * beta
            / 36.0;
        assert_eq!(subset_trace(&subset, beta), direct);
        assert_eq!(subset_sum_sq(&subset), 955);
    }

    #[test]
    fn rule_specs_resolve_to_expected_indices() {
        assert_eq!(
            SelectionRule::Furthest.spec(3).resolve(8).unwrap().indices(),
            &[5, 6, 7]
        );
        assert_eq!(
            SelectionRule::First.spec(3).resolve(8).unwrap().indices(),
            &[0, 1, 2]
        );
        assert_eq!(SelectionRule::All.spec(8).resolve(8).unwrap().len(), 8);
    }
}
