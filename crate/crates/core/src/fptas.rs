//! Approximation scheme for the max-min objective when every group has its
//! own capacity.
//!
//! For `k >= g` the frontier recursion runs on rounded tuples: group `ℓ`'s
//! welfare is kept as a multiple of the grid `μ_ℓ = ε·Δ_ℓ / (16·k·g³)`,
//! rounded down after each leftmost-target step. Because stored values are
//! already multiples of `μ_ℓ`, rounding `(I' + gain)` equals adding the
//! rounded gain, so the program works with integer unit counts. Each step
//! loses less than one unit, so a stored tuple is within `k·μ_ℓ` of the
//! witness's true welfare.
//!
//! For `k < g` every subset of at most `k` potential levels is scored
//! exactly.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{ContributionTable, Grid};
use crate::model::{group_totals, strip_unused, Instance, TargetSet};
use crate::pareto::prune_dominated;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FptasParams {
    pub epsilon: Rational,
    /// Per-group rounding grid; zero for groups whose welfare is identically zero.
    pub grid: Vec<Rational>,
}

impl FptasParams {
    pub fn new(epsilon: &Rational, group_capacities: &[Rational], k: usize) -> Self {
        let g = group_capacities.len();
        let denom = Rational::from(16 * k * g * g * g);
        let grid = group_capacities
            .iter()
            .map(|d| epsilon * d / &denom)
            .collect();
        FptasParams {
            epsilon: epsilon.clone(),
            grid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FptasBranch {
    Exact,
    Rounded,
}

/// One stored entry of the rounded root table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundedPoint {
    pub rounded: Vec<Rational>,
    pub targets: TargetSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FptasOutcome {
    /// True (re-evaluated) welfare of the worst-off group under `targets`.
    pub value: Rational,
    pub targets: TargetSet,
    pub branch: FptasBranch,
    /// Largest number of tuples stored by any subproblem (rounded branch).
    pub max_table_size: usize,
}

/// Capacity of each group; errors when a group mixes capacities.
pub fn group_capacities(instance: &Instance) -> Result<Vec<Rational>> {
    let mut caps: Vec<Option<Rational>> = vec![None; instance.num_groups()];
    for a in instance.agents() {
        match &caps[a.group] {
            None => caps[a.group] = Some(a.capacity.clone()),
            Some(c) if *c != a.capacity => {
                return Err(Error::GroupCapacityNonUniform { group: a.group })
            }
            Some(_) => {}
        }
    }
    Ok(caps
        .into_iter()
        .map(|c| c.unwrap_or_else(Rational::zero))
        .collect())
}

fn check_epsilon(epsilon: &Rational) -> Result<()> {
    if epsilon.is_positive() && *epsilon < Rational::one() {
        Ok(())
    } else {
        Err(Error::EpsilonOutOfRange(epsilon.to_string()))
    }
}

/// Max-min welfare within a factor `1 - epsilon` of optimal (exact when `k < g`).
pub fn fptas_max_min(instance: &Instance, k: usize, epsilon: &Rational) -> Result<FptasOutcome> {
    check_epsilon(epsilon)?;
    let caps = group_capacities(instance)?;
    if k < instance.num_groups() {
        return Ok(exact_small_budget(instance, k));
    }
    let params = FptasParams::new(epsilon, &caps, k);
    let (root, max_table_size) = rounded_table(instance, k, &params)?;
    let mut best: Option<(Rational, &RoundedPoint)> = None;
    for point in &root {
        let worst = point
            .rounded
            .iter()
            .min()
            .cloned()
            .unwrap_or_else(Rational::zero);
        if best.as_ref().is_none_or(|(v, _)| worst > *v) {
            best = Some((worst, point));
        }
    }
    let (_, chosen) = best.expect("root table is never empty");
    let targets = chosen.targets.clone();
    let value = worst_group(instance, &targets);
    Ok(FptasOutcome {
        value,
        targets,
        branch: FptasBranch::Rounded,
        max_table_size,
    })
}

/// The rounded root table for `k` targets, with witnesses, and the largest
/// table size seen along the way.
pub fn fptas_root_table(
    instance: &Instance,
    k: usize,
    epsilon: &Rational,
) -> Result<(FptasParams, Vec<RoundedPoint>, usize)> {
    check_epsilon(epsilon)?;
    let caps = group_capacities(instance)?;
    let params = FptasParams::new(epsilon, &caps, k.max(1));
    let (root, size) = rounded_table(instance, k, &params)?;
    Ok((params, root, size))
}

fn worst_group(instance: &Instance, targets: &TargetSet) -> Rational {
    group_totals(instance, targets)
        .into_iter()
        .min()
        .unwrap_or_else(Rational::zero)
}

#[derive(Clone)]
struct UnitPoint {
    units: Vec<u64>,
    slots: Vec<usize>,
}

fn rounded_table(
    instance: &Instance,
    k: usize,
    params: &FptasParams,
) -> Result<(Vec<RoundedPoint>, usize)> {
    let g = instance.num_groups();
    let grid: Grid<BigInt> = Grid::new(instance);
    let m = grid.len();
    let zero = UnitPoint {
        units: vec![0; g],
        slots: Vec::new(),
    };
    let to_points = |points: Vec<UnitPoint>| -> Vec<RoundedPoint> {
        points
            .into_iter()
            .map(|p| {
                let raw = TargetSet::new(p.slots.iter().map(|&s| grid.levels[s].clone()));
                RoundedPoint {
                    rounded: p
                        .units
                        .iter()
                        .zip(&params.grid)
                        .map(|(&u, mu)| Rational::from(BigInt::from(u)) * mu)
                        .collect(),
                    targets: strip_unused(instance, &raw),
                }
            })
            .collect()
    };
    if m == 0 || k == 0 {
        return Ok((to_points(vec![zero]), 1));
    }

    let table = ContributionTable::new(&grid, true);
    // units[a * m + b][ℓ] = ⌊gain_ℓ(a, b) / μ_ℓ⌋
    let mut units = vec![vec![0u64; g]; m * m];
    for a in 0..m {
        for b in a + 1..m {
            for (l, gain) in table.groups(a, b).iter().enumerate() {
                let mu = &params.grid[l];
                if mu.is_zero() {
                    continue;
                }
                let q = grid.to_rational(gain) / mu;
                units[a * m + b][l] = q.floor().to_u64().ok_or_else(|| {
                    Error::ParameterOutOfRange("rounding grid too fine for this instance".into())
                })?;
            }
        }
    }

    let mut max_size = 1;
    let mut layer: Vec<Vec<UnitPoint>> = vec![vec![zero.clone()]; m];
    for _ in 1..=k {
        let mut next = Vec::with_capacity(m);
        for a in 0..m {
            if a == m - 1 {
                next.push(vec![zero.clone()]);
                continue;
            }
            let mut candidates = Vec::new();
            for b in a + 1..m {
                let gain = &units[a * m + b];
                for child in &layer[b] {
                    let u = child.units.iter().zip(gain).map(|(x, y)| x + y).collect();
                    let mut slots = Vec::with_capacity(child.slots.len() + 1);
                    slots.push(b);
                    slots.extend_from_slice(&child.slots);
                    candidates.push(UnitPoint { units: u, slots });
                }
            }
            let kept = prune_dominated(candidates, |p| &p.units);
            max_size = max_size.max(kept.len());
            next.push(kept);
        }
        layer = next;
    }
    let root = std::mem::take(&mut layer[0]);
    Ok((to_points(root), max_size))
}

fn exact_small_budget(instance: &Instance, k: usize) -> FptasOutcome {
    let g = instance.num_groups();
    let grid: Grid<BigInt> = Grid::new(instance);
    let m = grid.len();
    let table = (m > 0).then(|| ContributionTable::new(&grid, true));

    let mut best: Option<(Rational, Vec<usize>)> = None;
    let mut chosen: Vec<usize> = Vec::with_capacity(k);

    // depth-first over increasing slot sequences; `acc` is the running tuple
    #[allow(clippy::too_many_arguments)]
    fn visit(
        grid: &Grid<BigInt>,
        table: &ContributionTable<BigInt>,
        from: usize,
        prev: usize,
        left: usize,
        acc: &mut Vec<BigInt>,
        chosen: &mut Vec<usize>,
        best: &mut Option<(Rational, Vec<usize>)>,
    ) {
        let worst = acc.iter().min().cloned().unwrap_or_default();
        let worst = grid.to_rational(&worst);
        if best.as_ref().is_none_or(|(v, _)| worst > *v) {
            *best = Some((worst, chosen.clone()));
        }
        if left == 0 {
            return;
        }
        for b in from..grid.len() {
            let saved = acc.clone();
            if b > prev {
                for (x, y) in acc.iter_mut().zip(table.groups(prev, b)) {
                    *x += y;
                }
            }
            chosen.push(b);
            visit(grid, table, b + 1, b.max(prev), left - 1, acc, chosen, best);
            chosen.pop();
            *acc = saved;
        }
    }

    let mut acc = vec![BigInt::default(); g];
    match &table {
        Some(t) => visit(&grid, t, 0, 0, k, &mut acc, &mut chosen, &mut best),
        None => best = Some((Rational::zero(), Vec::new())),
    }
    let (_, slots) = best.expect("the empty set is always scored");
    let raw = TargetSet::new(slots.iter().map(|&s| grid.levels[s].clone()));
    let targets = strip_unused(instance, &raw);
    FptasOutcome {
        value: worst_group(instance, &targets),
        targets,
        branch: FptasBranch::Exact,
        max_table_size: 0,
    }
}
