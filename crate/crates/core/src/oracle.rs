//! Exhaustive ground truth over subsets of the potential targets.
//!
//! Nothing here is clever: every subset of at most `k` potential levels is
//! evaluated with the behavior rule directly. Enumeration refuses to start
//! when the number of subsets exceeds a cap.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{group_totals, potential_targets, total_improvement, Instance, TargetSet};
use crate::pareto::{FrontierPoint, ParetoFrontier, WelfareTuple};
use crate::rational::Rational;
use crate::welfare::DpSolution;

pub const DEFAULT_MAX_SUBSETS: u128 = 2_000_000;

/// Number of subsets of an `m`-set with at most `k` elements, saturating.
pub fn subset_count(m: usize, k: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for i in 0..=k.min(m) {
        total = total.saturating_add(binom);
        binom = binom.saturating_mul((m - i) as u128) / (i as u128 + 1);
    }
    total
}

/// Calls `visit` on every subset of `levels` with at most `k` elements,
/// smaller subsets first, each size in lexicographic index order.
pub fn for_each_subset(levels: &[Rational], k: usize, mut visit: impl FnMut(&[Rational])) {
    fn rec(
        levels: &[Rational],
        start: usize,
        size: usize,
        current: &mut Vec<Rational>,
        visit: &mut dyn FnMut(&[Rational]),
    ) {
        if current.len() == size {
            visit(current);
            return;
        }
        let needed = size - current.len();
        for i in start..=levels.len().saturating_sub(needed) {
            if i >= levels.len() {
                break;
            }
            current.push(levels[i].clone());
            rec(levels, i + 1, size, current, visit);
            current.pop();
        }
    }
    let mut current = Vec::with_capacity(k);
    for size in 0..=k.min(levels.len()) {
        rec(levels, 0, size, &mut current, &mut visit);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Oracle {
    pub max_subsets: u128,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle {
            max_subsets: DEFAULT_MAX_SUBSETS,
        }
    }
}

impl Oracle {
    pub fn with_cap(max_subsets: u128) -> Self {
        Oracle { max_subsets }
    }

    fn candidates(&self, instance: &Instance, k: usize) -> Result<Vec<Rational>> {
        let levels = potential_targets(instance).levels().to_vec();
        let subsets = subset_count(levels.len(), k);
        if subsets > self.max_subsets {
            return Err(Error::SearchSpaceTooLarge {
                subsets,
                cap: self.max_subsets,
            });
        }
        Ok(levels)
    }

    pub fn optimum(&self, instance: &Instance, k: usize) -> Result<DpSolution> {
        let levels = self.candidates(instance, k)?;
        let mut best = DpSolution {
            value: Rational::zero(),
            targets: TargetSet::empty(),
        };
        for_each_subset(&levels, k, |subset| {
            let set = TargetSet::new(subset.iter().cloned());
            let value = total_improvement(instance.agents(), &set);
            if value > best.value {
                best = DpSolution {
                    value,
                    targets: set,
                };
            }
        });
        Ok(best)
    }

    pub fn pareto(&self, instance: &Instance, k: usize) -> Result<ParetoFrontier> {
        let levels = self.candidates(instance, k)?;
        let mut achieved: BTreeMap<WelfareTuple, TargetSet> = BTreeMap::new();
        for_each_subset(&levels, k, |subset| {
            let set = TargetSet::new(subset.iter().cloned());
            let tuple = WelfareTuple::new(group_totals(instance, &set));
            achieved.entry(tuple).or_insert(set);
        });
        let tuples: Vec<&WelfareTuple> = achieved.keys().collect();
        let points = achieved
            .iter()
            .filter(|(t, _)| !tuples.iter().any(|other| other.dominates(t)))
            .map(|(t, s)| FrontierPoint {
                tuple: t.clone(),
                targets: s.clone(),
            })
            .collect();
        Ok(ParetoFrontier { points })
    }

    pub fn max_min(&self, instance: &Instance, k: usize) -> Result<Rational> {
        let levels = self.candidates(instance, k)?;
        let mut best: Option<Rational> = None;
        for_each_subset(&levels, k, |subset| {
            let set = TargetSet::new(subset.iter().cloned());
            let worst = group_totals(instance, &set)
                .into_iter()
                .min()
                .unwrap_or_else(Rational::zero);
            if best.as_ref().is_none_or(|b| worst > *b) {
                best = Some(worst);
            }
        });
        Ok(best.unwrap_or_else(Rational::zero))
    }

    /// Whether some subset of at most `k` potential levels makes at least
    /// `n_lb` agents improve.
    pub fn lower_bound_feasible(&self, instance: &Instance, k: usize, n_lb: usize) -> Result<bool> {
        let levels = self.candidates(instance, k)?;
        let mut feasible = false;
        for_each_subset(&levels, k, |subset| {
            if feasible {
                return;
            }
            let set = TargetSet::new(subset.iter().cloned());
            let improvers = instance
                .agents()
                .iter()
                .filter(|a| crate::model::eligible_target(a, &set).is_some())
                .count();
            feasible = improvers >= n_lb;
        });
        Ok(feasible)
    }
}

pub fn brute_force_optimum(instance: &Instance, k: usize) -> Result<DpSolution> {
    Oracle::default().optimum(instance, k)
}

pub fn brute_force_pareto(instance: &Instance, k: usize) -> Result<ParetoFrontier> {
    Oracle::default().pareto(instance, k)
}

pub fn brute_force_max_min(instance: &Instance, k: usize) -> Result<Rational> {
    Oracle::default().max_min(instance, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Agent, CapacityModel};
    use crate::rational::rat;

    fn int(v: i64) -> Rational {
        Rational::from(v)
    }

    #[test]
    fn counts_subsets() {
        assert_eq!(subset_count(4, 0), 1);
        assert_eq!(subset_count(4, 2), 1 + 4 + 6);
        assert_eq!(subset_count(4, 10), 16);
        assert_eq!(subset_count(0, 3), 1);
        let mut seen = 0;
        let levels: Vec<Rational> = (0..6).map(int).collect();
        for_each_subset(&levels, 3, |s| {
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            seen += 1;
        });
        assert_eq!(seen as u128, subset_count(6, 3));
    }

    #[test]
    fn optimum_examples() {
        let inst = Instance::common(&[int(0), int(1)], int(1)).unwrap();
        assert_eq!(brute_force_optimum(&inst, 2).unwrap().value, int(2));
        assert_eq!(brute_force_optimum(&inst, 0).unwrap().value, int(0));
        let inst = Instance::common(&[int(0), int(1), rat(3, 2), rat(3, 2)], int(1)).unwrap();
        assert_eq!(brute_force_optimum(&inst, 3).unwrap().value, rat(7, 2));
    }

    #[test]
    fn pareto_and_max_min_examples() {
        let inst = Instance::new(
            vec![Agent::new(int(0), int(2), 0), Agent::new(int(1), int(2), 1)],
            2,
            CapacityModel::Common,
        )
        .unwrap();
        let tuples: Vec<Vec<Rational>> = brute_force_pareto(&inst, 1)
            .unwrap()
            .tuples()
            .into_iter()
            .map(|t| t.per_group)
            .collect();
        assert_eq!(tuples, vec![vec![int(0), int(2)], vec![int(2), int(1)]]);
        assert_eq!(brute_force_max_min(&inst, 1).unwrap(), int(1));

        let zero = brute_force_pareto(&inst, 0).unwrap();
        assert_eq!(zero.tuples(), vec![WelfareTuple::new(vec![int(0), int(0)])]);

        let single = Instance::common(&[int(3)], rat(5, 2)).unwrap();
        assert_eq!(brute_force_max_min(&single, 1).unwrap(), rat(5, 2));
        assert_eq!(brute_force_pareto(&single, 2).unwrap().len(), 1);

        let empty = Instance::common(&[], int(1)).unwrap();
        assert_eq!(brute_force_max_min(&empty, 2).unwrap(), int(0));
    }

    #[test]
    fn refuses_oversized_search() {
        let positions: Vec<Rational> = (0..40).map(int).collect();
        let inst = Instance::common(&positions, rat(1, 2)).unwrap();
        let err = Oracle::with_cap(1000).optimum(&inst, 5).unwrap_err();
        assert_eq!(err.code(), "SearchSpaceTooLarge");
    }
}
