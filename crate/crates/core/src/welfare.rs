//! Maximum total improvement with at most `k` targets.
//!
//! `T(a, κ)` is the best welfare obtainable from agents positioned at or
//! right of potential level `a` using at most `κ` targets. The leftmost
//! target `b > a` collects the precomputed contribution of agents in
//! `[a, b)` and the rest of the problem is `T(b, κ - 1)`. Agents sitting
//! exactly on `b` are left to the subproblem since they cannot move to `b`.
//!
//! A variant tracks a lower bound `η` on the number of improving agents,
//! and a sweep reads the whole budget curve off a single table.

#![allow(clippy::needless_range_loop)]

use num_bigint::BigInt;
use serde::Serialize;

use crate::grid::{fits_i128, ContributionTable, Grid, Weight};
use crate::model::{strip_unused, Instance, TargetSet};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DpSolution {
    pub value: Rational,
    pub targets: TargetSet,
}

impl DpSolution {
    fn empty() -> Self {
        DpSolution {
            value: Rational::zero(),
            targets: TargetSet::empty(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BudgetEntry {
    pub k: usize,
    pub value: Rational,
    pub targets: TargetSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BudgetCurve {
    pub entries: Vec<BudgetEntry>,
    pub min_k_for_max: usize,
}

/// Filled value and argmax tables of the unconstrained program.
struct WelfareTable<W> {
    /// `value[κ][a]`
    value: Vec<Vec<W>>,
    /// `choice[κ][a]`: leftmost target chosen at that state.
    choice: Vec<Vec<Option<usize>>>,
}

fn fill<W: Weight>(table: &ContributionTable<W>, m: usize, k: usize) -> WelfareTable<W> {
    let mut value = vec![vec![W::zero(); m]; k + 1];
    let mut choice = vec![vec![None; m]; k + 1];
    for kappa in 1..=k {
        let (prev_rows, rest) = value.split_at_mut(kappa);
        let prev = &prev_rows[kappa - 1];
        let row = &mut rest[0];
        for a in 0..m.saturating_sub(1) {
            let mut best: Option<(W, usize)> = None;
            for b in a + 1..m {
                let candidate = table.total(a, b).clone() + prev[b].clone();
                // strict comparison keeps the smallest maximizer
                if best.as_ref().is_none_or(|(v, _)| candidate > *v) {
                    best = Some((candidate, b));
                }
            }
            if let Some((v, b)) = best {
                row[a] = v;
                choice[kappa][a] = Some(b);
            }
        }
    }
    WelfareTable { value, choice }
}

fn chain(choice: &[Vec<Option<usize>>], mut a: usize, mut kappa: usize, out: &mut Vec<usize>) {
    while kappa > 0 {
        match choice[kappa][a] {
            Some(b) => {
                out.push(b);
                a = b;
                kappa -= 1;
            }
            None => break,
        }
    }
}

fn to_targets<W>(instance: &Instance, grid: &Grid<W>, slots: &[usize]) -> TargetSet {
    let raw = TargetSet::new(slots.iter().map(|&s| grid.levels[s].clone()));
    strip_unused(instance, &raw)
}

fn solve_curve<W: Weight>(instance: &Instance, k: usize) -> Vec<DpSolution> {
    let grid: Grid<W> = Grid::new(instance);
    let m = grid.len();
    if m == 0 {
        return vec![DpSolution::empty(); k + 1];
    }
    let table = ContributionTable::new(&grid, false);
    let filled = fill(&table, m, k);
    (0..=k)
        .map(|kappa| {
            let mut slots = Vec::with_capacity(kappa);
            chain(&filled.choice, 0, kappa, &mut slots);
            DpSolution {
                value: grid.to_rational(&filled.value[kappa][0]),
                targets: to_targets(instance, &grid, &slots),
            }
        })
        .collect()
}

fn solve_single<W: Weight>(instance: &Instance, k: usize) -> DpSolution {
    let grid: Grid<W> = Grid::new(instance);
    let m = grid.len();
    if m == 0 || k == 0 {
        return DpSolution::empty();
    }
    let table = ContributionTable::new(&grid, false);
    let filled = fill(&table, m, k);
    let mut slots = Vec::with_capacity(k);
    chain(&filled.choice, 0, k, &mut slots);
    DpSolution {
        value: grid.to_rational(&filled.value[k][0]),
        targets: to_targets(instance, &grid, &slots),
    }
}

/// Best total improvement using at most `k` targets, with a minimal witness.
///
/// Ties between leftmost targets go to the smallest level. Targets that
/// serve no agent are dropped from the witness.
pub fn max_total_improvement(instance: &Instance, k: usize) -> DpSolution {
    if fits_i128(instance) {
        solve_single::<i128>(instance, k)
    } else {
        solve_single::<BigInt>(instance, k)
    }
}

fn solve_lower_bound<W: Weight>(instance: &Instance, k: usize, n_lb: usize) -> Option<DpSolution> {
    let grid: Grid<W> = Grid::new(instance);
    let m = grid.len();
    if n_lb == 0 {
        return Some(solve_single::<W>(instance, k));
    }
    if m == 0 || k == 0 {
        return None;
    }
    let table = ContributionTable::new(&grid, false);
    let base = fill(&table, m, k);

    // lb[κ][a][η - 1] for η in 1..=n_lb; None is -∞
    let mut lb: Vec<Vec<Vec<Option<W>>>> = vec![vec![vec![None; n_lb]; m]; k + 1];
    let mut lb_choice: Vec<Vec<Vec<Option<usize>>>> = vec![vec![vec![None; n_lb]; m]; k + 1];

    for kappa in 1..=k {
        for a in 0..m - 1 {
            for eta in 1..=n_lb {
                let mut best: Option<(W, usize)> = None;
                for b in a + 1..m {
                    let reached = table.count(a, b);
                    let rest = if reached >= eta {
                        Some(base.value[kappa - 1][b].clone())
                    } else {
                        lb[kappa - 1][b][eta - reached - 1].clone()
                    };
                    let Some(rest) = rest else { continue };
                    let candidate = rest + table.total(a, b).clone();
                    if best.as_ref().is_none_or(|(v, _)| candidate > *v) {
                        best = Some((candidate, b));
                    }
                }
                if let Some((v, b)) = best {
                    lb[kappa][a][eta - 1] = Some(v);
                    lb_choice[kappa][a][eta - 1] = Some(b);
                }
            }
        }
    }

    let root = lb[k][0][n_lb - 1].clone()?;
    let mut slots = Vec::with_capacity(k);
    let (mut a, mut kappa, mut eta) = (0usize, k, n_lb);
    while kappa > 0 {
        let b = lb_choice[kappa][a][eta - 1].expect("finite states have a choice");
        slots.push(b);
        let reached = table.count(a, b);
        kappa -= 1;
        if reached >= eta {
            chain(&base.choice, b, kappa, &mut slots);
            break;
        }
        eta -= reached;
        a = b;
    }
    let targets = to_targets(instance, &grid, &slots);
    Some(DpSolution {
        value: grid.to_rational(&root),
        targets,
    })
}

/// Best total improvement subject to at least `n_lb` agents improving.
///
/// Returns `None` when no set of at most `k` targets makes `n_lb` agents
/// improve.
pub fn max_total_with_min_improvers(
    instance: &Instance,
    k: usize,
    n_lb: usize,
) -> Option<DpSolution> {
    if fits_i128(instance) {
        solve_lower_bound::<i128>(instance, k, n_lb)
    } else {
        solve_lower_bound::<BigInt>(instance, k, n_lb)
    }
}

/// Optimal welfare for every budget `0..=k_max`, and the least budget that
/// reaches the overall maximum.
pub fn optimal_target_count_sweep(instance: &Instance, k_max: usize) -> BudgetCurve {
    let solutions = if fits_i128(instance) {
        solve_curve::<i128>(instance, k_max)
    } else {
        solve_curve::<BigInt>(instance, k_max)
    };
    let best = solutions
        .iter()
        .map(|s| &s.value)
        .max()
        .cloned()
        .unwrap_or_else(Rational::zero);
    let min_k_for_max = solutions
        .iter()
        .position(|s| s.value == best)
        .unwrap_or(0);
    let entries = solutions
        .into_iter()
        .enumerate()
        .map(|(k, s)| BudgetEntry {
            k,
            value: s.value,
            targets: s.targets,
        })
        .collect();
    BudgetCurve {
        entries,
        min_k_for_max,
    }
}
